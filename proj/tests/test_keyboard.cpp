#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/keyboard.hpp"

using namespace rod;

namespace {

struct Bases {
  TabularMDP mdp;
  std::vector<OptionDef> options;
  std::vector<Eigenpurpose> purposes;
  QCube cube;
};

Bases make_bases(const std::string& text, int k) {
  auto mdp = oracle::grid(text);
  const Matrix p = induced_transition_matrix(mdp, Policy::uniform(mdp.num_states(), 4));
  const auto basis = eigendecompose(sr_closed_form(p, 0.9).psi);
  auto purposes = select_eigenpurposes(basis, k, false);
  std::vector<OptionDef> options;
  for (const auto& pu : purposes) options.push_back(eigenoption_closed_form(mdp, pu, 0.9));
  auto cube = evaluate_base_options(options, purposes, mdp, 0.9);
  return {std::move(mdp), std::move(options), std::move(purposes), std::move(cube)};
}

// q of an option by repeated backups: value zero where it terminates.
Matrix sweep_option_q(const TabularMDP& mdp, const OptionDef& o, const Matrix& r, double gamma) {
  const int n = mdp.num_states();
  Vector v = Vector::Zero(n);
  Matrix q(n, mdp.num_actions());
  for (int it = 0; it < 20000; ++it) {
    for (int a = 0; a < mdp.num_actions(); ++a) q.col(a) = r.col(a) + gamma * mdp.kernel(a) * v;
    Vector next(n);
    for (int s = 0; s < n; ++s) next(s) = o.terminates_at(s) ? 0.0 : q(s, o.policy[static_cast<std::size_t>(s)]);
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (delta < 1e-14) break;
  }
  return q;
}

}  // namespace

TEST_CASE("option evaluation matches backups and carries a zero terminate column") {
  const auto b = make_bases(oracle::open_grid(3, 3), 2);
  const Matrix r = expected_reward(b.mdp, eigenpurpose_reward(b.purposes[1]));
  const Matrix q = evaluate_option(b.mdp, b.options[0], r, 0.9);
  REQUIRE(q.cols() == 5);
  CHECK(q.col(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q.leftCols(4) - sweep_option_q(b.mdp, b.options[0], r, 0.9)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("GPE is linear in the weights") {
  const auto b = make_bases(oracle::open_grid(3, 4), 3);
  const std::vector<double> w{0.5, -1.0, 2.0};
  const auto qs = gpe(b.cube, w);
  REQUIRE(qs.size() == 3);
  for (int i = 0; i < 3; ++i) {
    Matrix expect = Matrix::Zero(qs[0].rows(), qs[0].cols());
    for (int j = 0; j < 3; ++j) expect += w[static_cast<std::size_t>(j)] * b.cube.at(i, j);
    CHECK((qs[static_cast<std::size_t>(i)] - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(gpe(b.cube, {1.0}), ShapeError);
}

TEST_CASE("one-hot weights recover the base options") {
  const auto b = make_bases(oracle::open_grid(3, 4), 4);
  for (int i = 0; i < 4; ++i) {
    std::vector<double> w(4, 0.0);
    w[static_cast<std::size_t>(i)] = 1.0;
    const auto synth = gpi_synthesize(b.cube, w);
    CHECK(synth.key == b.options[static_cast<std::size_t>(i)].terminal_states());
    CHECK_FALSE(synth.degenerate);
  }
  CHECK(gpi_synthesize(b.cube, {0, 0, 0, 0}).degenerate);
}

TEST_CASE("GPI is no worse than any base option on the combined reward") {
  const auto b = make_bases(oracle::open_grid(3, 4), 3);
  for (const std::vector<double>& w : {std::vector<double>{1, 1, 0}, {1, -1, 1}, {0.3, 0.0, -2.0}}) {
    const auto synth = gpi_synthesize(b.cube, w);
    const auto qs = gpe(b.cube, w);
    Matrix r = Matrix::Zero(b.mdp.num_states(), 4);
    for (int j = 0; j < 3; ++j)
      r += w[static_cast<std::size_t>(j)] * expected_reward(b.mdp, eigenpurpose_reward(b.purposes[static_cast<std::size_t>(j)]));
    const Matrix q = sweep_option_q(b.mdp, synth.option, r, 0.9);
    for (const auto& qi : qs) CHECK((q - qi.leftCols(4)).minCoeff() > -1e-9);
  }
}

TEST_CASE("keyboard enumeration deduplicates by terminal set") {
  const auto b = make_bases(oracle::open_grid(3, 4), 3);
  const auto e = enumerate_keyboard(b.cube, {0.0, 1.0});
  CHECK(e.all_weights.size() == 7);
  CHECK(e.all_keys.size() == 7);
  std::set<std::vector<int>> distinct;
  for (std::size_t i = 0; i < e.all_keys.size(); ++i)
    if (static_cast<int>(e.all_keys[i].size()) != b.mdp.num_states()) distinct.insert(e.all_keys[i]);
  CHECK(e.unique.size() == distinct.size());
  std::set<std::vector<int>> unique_keys;
  for (const auto& u : e.unique) {
    CHECK_FALSE(u.degenerate);
    unique_keys.insert(u.key);
  }
  CHECK(unique_keys == distinct);
  REQUIRE(e.unique_by_prefix.size() == 3);
  CHECK(e.unique_by_prefix[0] == 1);
  CHECK(e.unique_by_prefix[1] <= e.unique_by_prefix[2]);
  CHECK(e.unique_by_prefix[2] == static_cast<int>(e.unique.size()));

  // Enumerating on several threads gives the same result.
  const auto par = enumerate_keyboard(b.cube, {0.0, 1.0}, 3);
  CHECK(par.all_keys == e.all_keys);
  CHECK(par.degenerate == e.degenerate);
}

TEST_CASE("keyboard enumeration refuses too many bases") {
  QCube cube;
  cube.n_base = kMaxKeyboardBases + 1;
  CHECK_THROWS_AS(enumerate_keyboard(cube, {0.0, 1.0}), BudgetError);
  const auto b = make_bases(oracle::open_grid(2, 2), 1);
  CHECK_THROWS_AS(enumerate_keyboard(b.cube, {}), PreconditionError);
}
