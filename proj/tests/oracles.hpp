#pragma once

// Reference implementations used only by the tests. They are deliberately
// naive: fixed-point sweeps and truncated series instead of factorizations.

#include <cmath>
#include <string>
#include <vector>

#include "rodkit/grid.hpp"
#include "rodkit/mdp.hpp"

namespace oracle {

using rod::Matrix;
using rod::Vector;

inline Matrix neumann_sr(const Matrix& p, double gamma, int terms) {
  const auto n = p.rows();
  Matrix sum = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int t = 1; t <= terms; ++t) {
    power = gamma * (power * p);
    sum += power;
  }
  return sum;
}

// Bellman optimality sweeps; with terminate the value is floored at zero.
inline Matrix value_iteration_q(const rod::TabularMDP& mdp, const Matrix& reward_sa, double gamma, bool terminate,
                                int sweeps = 20000) {
  const int n = mdp.num_states();
  const int na = mdp.num_actions();
  Vector v = Vector::Zero(n);
  Matrix q(n, na);
  for (int it = 0; it < sweeps; ++it) {
    for (int a = 0; a < na; ++a) q.col(a) = reward_sa.col(a) + gamma * (mdp.kernel(a) * v);
    Vector next = q.rowwise().maxCoeff();
    if (terminate) next = next.cwiseMax(0.0);
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (delta < 1e-14) break;
  }
  for (int a = 0; a < na; ++a) q.col(a) = reward_sa.col(a) + gamma * (mdp.kernel(a) * v);
  return q;
}

// Iterative policy evaluation for a fixed deterministic policy.
inline Vector sweep_evaluation(const Matrix& p, const Vector& r, double gamma, int sweeps = 100000) {
  Vector v = Vector::Zero(r.size());
  for (int it = 0; it < sweeps; ++it) {
    Vector next = r + gamma * p * v;
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (delta < 1e-14) break;
  }
  return v;
}

inline rod::TabularMDP grid(const std::string& text, double gamma = 0.9) {
  return rod::build_mdp(rod::parse_grid(text), gamma);
}

// A 1xN corridor.
inline std::string corridor(int n) {
  const std::string wall(static_cast<std::size_t>(n + 2), '#');
  return wall + "\n#" + std::string(static_cast<std::size_t>(n), '.') + "#\n" + wall + "\n";
}

inline std::string open_grid(int rows, int cols) {
  const std::string wall(static_cast<std::size_t>(cols + 2), '#');
  std::string out = wall + "\n";
  for (int r = 0; r < rows; ++r) out += "#" + std::string(static_cast<std::size_t>(cols), '.') + "#\n";
  return out + wall + "\n";
}

}  // namespace oracle
