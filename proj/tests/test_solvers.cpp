#include "doctest.h"
#include "oracles.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/solvers.hpp"

using namespace rod;

namespace {

Matrix random_reward(int n, int na, unsigned seed) {
  std::srand(seed);
  return Matrix::Random(n, na);
}

}  // namespace

TEST_CASE("argmax keeps the lowest index on ties") {
  Vector v(4);
  v << 1.0, 3.0, 3.0, 2.0;
  CHECK(argmax_lowest(v) == 1);
  v << 2.0, 2.0, 2.0, 2.0;
  CHECK(argmax_lowest(v) == 0);
}

TEST_CASE("policy evaluation matches iterative sweeps") {
  const auto mdp = oracle::grid(oracle::open_grid(3, 3));
  const Matrix p = induced_transition_matrix(mdp, Policy::uniform(9, 4));
  Vector r = Vector::LinSpaced(9, -1.0, 1.0);
  const Vector v = policy_evaluation(p, r, 0.9);
  CHECK((v - oracle::sweep_evaluation(p, r, 0.9)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("undiscounted evaluation needs a reachable absorbing set") {
  // Corridor of 3 with a right-moving policy: steps to reach the right end.
  const auto mdp = oracle::grid(oracle::corridor(3));
  const Matrix p = mdp.kernel(kRight);
  const Vector r = Vector::Ones(3);
  const Vector v = policy_evaluation(p, r, 1.0, 1e-10, {false, false, true});
  CHECK(v(0) == doctest::Approx(2.0));
  CHECK(v(1) == doctest::Approx(1.0));
  CHECK(v(2) == doctest::Approx(0.0));
  CHECK_THROWS_AS(policy_evaluation(p, r, 1.0), NoConvergence);
  CHECK_THROWS_AS(policy_evaluation(mdp.kernel(kLeft), r, 1.0, 1e-10, {false, false, true}), NoConvergence);
}

TEST_CASE("policy iteration agrees with value iteration on small grids") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto mdp = oracle::grid(oracle::open_grid(3, 4));
    const Matrix r = random_reward(12, 4, seed);
    for (bool terminate : {false, true}) {
      const auto pi = policy_iteration(mdp, r, 0.9, terminate);
      const Matrix q = oracle::value_iteration_q(mdp, r, 0.9, terminate);
      CHECK((pi.q.values.leftCols(4) - q).cwiseAbs().maxCoeff() < 1e-9);
      for (int s = 0; s < 12; ++s) {
        const int best = argmax_lowest(q.row(s).transpose());
        const bool stop = terminate && q.row(s).maxCoeff() <= kTieTolerance;
        CHECK(pi.greedy[static_cast<std::size_t>(s)] == (stop ? 4 : best));
      }
      // Fixed point of the optimality equation.
      Vector v = pi.q.values.leftCols(4).rowwise().maxCoeff();
      if (terminate) v = v.cwiseMax(0.0);
      for (int a = 0; a < 4; ++a)
        CHECK((r.col(a) + 0.9 * mdp.kernel(a) * v - pi.q.values.col(a)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("with all-zero reward the terminate action wins everywhere") {
  const auto mdp = oracle::grid(oracle::open_grid(2, 3));
  const auto pi = policy_iteration(mdp, Matrix::Zero(6, 4), 0.9, true);
  for (int g : pi.greedy) CHECK(g == 4);
  CHECK(pi.q.has_terminate);
}

TEST_CASE("expected reward averages over successors") {
  const auto mdp = oracle::grid(oracle::corridor(3));
  const Matrix r = expected_reward(mdp, [](int s, int s_next) { return s_next - s; });
  CHECK(r(0, kRight) == 1.0);
  CHECK(r(0, kLeft) == 0.0);
  CHECK(r(2, kLeft) == -1.0);
}

TEST_CASE("replay Q-learning converges on a repeated deterministic chain") {
  // 0 -> 1 -> 2 with reward on entering 2.
  TransitionDataset d;
  d.append({0, 0, 0.0, 1, true});
  d.append({1, 0, 0.0, 2, true});
  const auto q = replay_q_learning(d.records(), 3, 1, [](int, int s) { return s == 2 ? 1.0 : 0.0; }, 0.5, 0.9, 200);
  CHECK(q.values(1, 0) == doctest::Approx(1.0));
  CHECK(q.values(0, 0) == doctest::Approx(0.9));
  CHECK(q.has_terminate);
}
