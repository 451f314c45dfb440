#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/successor.hpp"

using namespace rod;

namespace {

Matrix random_walk(const TabularMDP& mdp) { return induced_transition_matrix(mdp, Policy::uniform(mdp.num_states(), 4)); }

TransitionDataset ring_data(int n) {
  TransitionDataset d;
  for (int s = 0; s < n; ++s) d.append({s, 0, 0.0, (s + 1) % n, true});
  return d;
}

}  // namespace

TEST_CASE("closed-form SR matches the Neumann series") {
  const auto mdp = oracle::grid(oracle::open_grid(3, 3));
  const Matrix p = random_walk(mdp);
  const auto sr = sr_closed_form(p, 0.9);
  CHECK(sr.source == SRSource::ClosedForm);
  CHECK((sr.psi - oracle::neumann_sr(p, 0.9, 600)).cwiseAbs().maxCoeff() < 1e-9);
  // Rows of the SR of a stochastic matrix sum to 1 / (1 - gamma).
  CHECK((sr.psi.rowwise().sum().array() - 10.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("one TD step from zero writes eta times the indicator") {
  TransitionDataset d;
  d.append({0, 0, 0.0, 1, true});
  const auto sr = sr_td_learn(d.records(), 3, 0.5, 0.9, 1);
  CHECK(sr.psi(0, 0) == doctest::Approx(0.5));
  CHECK(sr.psi.cwiseAbs().sum() == doctest::Approx(0.5));
}

TEST_CASE("TD SR on a deterministic ring converges to the closed form") {
  const int n = 4;
  const auto d = ring_data(n);
  Matrix p = Matrix::Zero(n, n);
  for (int s = 0; s < n; ++s) p(s, (s + 1) % n) = 1.0;
  const auto td = sr_td_learn(d.records(), n, 0.2, 0.8, 3000);
  CHECK(td.source == SRSource::TD);
  CHECK((td.psi - oracle::neumann_sr(p, 0.8, 400)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(sr_td_learn(d.records(), n, 0.0, 0.8, 1), PreconditionError);
  CHECK_THROWS_AS(sr_td_learn(d.records(), 2, 0.1, 0.8, 1), ShapeError);
}

TEST_CASE("eigendecomposition fixes a canonical basis inside repeated eigenvalues") {
  const auto basis = eigendecompose(Matrix::Identity(3, 3));
  CHECK((basis.vectors - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  // Same operator, written in a rotated frame, gives the same basis.
  Matrix m = Matrix::Zero(4, 4);
  m.diagonal() << 3.0, 1.0, 1.0, 0.5;
  Eigen::HouseholderQR<Matrix> qr(Matrix::Random(4, 4));
  const Matrix q = qr.householderQ();
  const Matrix rotated = q * m * q.transpose();
  const auto a = eigendecompose(rotated);
  const auto b = eigendecompose(Matrix(rotated.transpose()));
  CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(a.values(0) == doctest::Approx(3.0));
  CHECK(a.values(3) == doctest::Approx(0.5));
  for (int i = 0; i < 4; ++i) {
    const Vector v = a.vector(i);
    CHECK((rotated * v - a.values(i) * v).norm() < 1e-9);
    CHECK(v.norm() == doctest::Approx(1.0));
    int first = 0;
    while (std::abs(v(first)) < 1e-10) ++first;
    CHECK(v(first) > 0.0);
  }
  const auto asc = eigendecompose(rotated, true, EigenOrder::Ascending);
  CHECK(asc.values(0) == doctest::Approx(0.5));
}

TEST_CASE("two-node normalized Laplacian") {
  Matrix w(2, 2);
  w << 0, 1, 1, 0;
  const auto lap = normalized_laplacian(w);
  Matrix expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK((lap.laplacian - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(lap.basis.values(0) == doctest::Approx(0.0));
  CHECK(lap.basis.values(1) == doctest::Approx(2.0));
  Matrix isolated = Matrix::Zero(3, 3);
  isolated(0, 1) = isolated(1, 0) = 1.0;
  CHECK_THROWS_AS(normalized_laplacian(isolated), DegreeError);
}

TEST_CASE("adjacency ignores self-loops from walls") {
  const auto mdp = oracle::grid(oracle::corridor(3));
  const Matrix w = adjacency_matrix(mdp);
  CHECK(w.diagonal().sum() == 0.0);
  CHECK(w.sum() == 4.0);
  CHECK(w(0, 1) == 1.0);
  CHECK(w(0, 2) == 0.0);
}

TEST_CASE("principal angle between simple subspaces") {
  Matrix a = Matrix::Zero(3, 1);
  a(0, 0) = 1.0;
  Matrix b = Matrix::Zero(3, 1);
  b(0, 0) = b(1, 0) = std::sqrt(0.5);
  CHECK(principal_angle(a, b) == doctest::Approx(std::numbers::pi / 4));
  CHECK(principal_angle(a, a) == doctest::Approx(0.0));
  Matrix c = Matrix::Zero(3, 1);
  c(2, 0) = 1.0;
  CHECK(principal_angle(a, c) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("random-walk SR and normalized Laplacian share eigenvectors") {
  for (const auto& text : {oracle::open_grid(3, 3), oracle::open_grid(2, 5), oracle::corridor(6)}) {
    const auto report = verify_pvf_sr_equivalence(oracle::grid(text), 0.9);
    CHECK(report.max_residual < 1e-9);
    CHECK(report.max_angle < 1e-6);
    CHECK(report.clusters > 0);
  }
}

TEST_CASE("transition differences recover the combinatorial Laplacian") {
  const auto mdp = oracle::grid(oracle::open_grid(3, 3));
  const auto report = verify_transition_diff_laplacian(full_transition_sweep(mdp), mdp);
  CHECK(report.gram_matches);
  CHECK(report.max_angle < 1e-6);
  CHECK(report.max_value_residual < 1e-9);
  const auto partial = full_transition_sweep(mdp).prefix(5);
  CHECK_THROWS_AS(verify_transition_diff_laplacian(partial, mdp), PreconditionError);
}

TEST_CASE("successor features with one-hot features equal the SR") {
  const auto mdp = oracle::grid(oracle::open_grid(2, 3));
  const Matrix p = random_walk(mdp);
  const auto sf = successor_features(Matrix::Identity(6, 6), p, 0.7);
  CHECK((sf.psi_phi - sr_closed_form(p, 0.7).psi).cwiseAbs().maxCoeff() < 1e-12);
  const Matrix phi = Matrix::Random(6, 2);
  CHECK((successor_features(phi, p, 0.7).psi_phi - oracle::neumann_sr(p, 0.7, 300) * phi).cwiseAbs().maxCoeff() <
        1e-9);
}
