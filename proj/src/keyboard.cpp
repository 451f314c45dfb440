#include "rodkit/keyboard.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "rodkit/errors.hpp"
#include "rodkit/parallel.hpp"

namespace rod {

namespace {

// LU of (I - gamma P_option) with terminal rows pinned to zero value.
Eigen::PartialPivLU<Matrix> option_system(const TabularMDP& mdp, const OptionDef& option, double gamma) {
  const int n = mdp.num_states();
  Matrix system = Matrix::Identity(n, n);
  for (int s = 0; s < n; ++s) {
    if (option.terminates_at(s)) continue;
    system.row(s) -= gamma * mdp.kernel(option.policy[static_cast<std::size_t>(s)]).row(s);
  }
  return system.partialPivLu();
}

Matrix q_from_values(const TabularMDP& mdp, const Matrix& reward_sa, const Vector& v, double gamma) {
  Matrix q = Matrix::Zero(mdp.num_states(), mdp.num_actions() + 1);
  for (int a = 0; a < mdp.num_actions(); ++a) q.col(a) = reward_sa.col(a) + gamma * (mdp.kernel(a) * v);
  return q;
}

Vector option_reward(const OptionDef& option, const Matrix& reward_sa) {
  Vector r = Vector::Zero(reward_sa.rows());
  for (Eigen::Index s = 0; s < r.size(); ++s)
    if (!option.terminates_at(static_cast<int>(s))) r(s) = reward_sa(s, option.policy[static_cast<std::size_t>(s)]);
  return r;
}

}  // namespace

Matrix evaluate_option(const TabularMDP& mdp, const OptionDef& option, const Matrix& reward_sa, double gamma) {
  if (option.num_states() != mdp.num_states()) throw ShapeError("option defined over a different state space");
  if (reward_sa.rows() != mdp.num_states() || reward_sa.cols() != mdp.num_actions())
    throw ShapeError("reward table must be |S| x |A|");
  const Vector v = option_system(mdp, option, gamma).solve(option_reward(option, reward_sa));
  return q_from_values(mdp, reward_sa, v, gamma);
}

QCube evaluate_base_options(const std::vector<OptionDef>& options, const std::vector<Eigenpurpose>& rewards,
                            const TabularMDP& mdp, double gamma) {
  if (options.size() != rewards.size()) throw ShapeError("need one reward per base option");
  const int d = static_cast<int>(options.size());
  std::vector<Matrix> reward_sa;
  reward_sa.reserve(options.size());
  for (const auto& r : rewards) {
    if (r.vector.size() != mdp.num_states()) throw ShapeError("eigenpurpose length differs from |S|");
    reward_sa.push_back(expected_reward(mdp, eigenpurpose_reward(r)));
  }
  QCube cube;
  cube.n_base = d;
  cube.values.resize(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i) {
    const auto& option = options[static_cast<std::size_t>(i)];
    if (option.num_states() != mdp.num_states()) throw ShapeError("option defined over a different state space");
    const auto lu = option_system(mdp, option, gamma);
    Matrix rhs(mdp.num_states(), d);
    for (int j = 0; j < d; ++j) rhs.col(j) = option_reward(option, reward_sa[static_cast<std::size_t>(j)]);
    const Matrix v = lu.solve(rhs);
    for (int j = 0; j < d; ++j)
      cube.values[static_cast<std::size_t>(i * d + j)] = q_from_values(mdp, reward_sa[static_cast<std::size_t>(j)], v.col(j), gamma);
  }
  return cube;
}

std::vector<Matrix> gpe(const QCube& cube, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != cube.n_base) throw ShapeError("weight vector length differs from base count");
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(cube.n_base));
  for (int i = 0; i < cube.n_base; ++i) {
    Matrix q = Matrix::Zero(cube.num_states(), cube.num_primitive() + 1);
    for (int j = 0; j < cube.n_base; ++j)
      if (w[static_cast<std::size_t>(j)] != 0.0) q += w[static_cast<std::size_t>(j)] * cube.at(i, j);
    out.push_back(std::move(q));
  }
  return out;
}

SynthOption gpi_synthesize(const QCube& cube, const std::vector<double>& w) {
  const auto qs = gpe(cube, w);
  const int n = cube.num_states();
  const int na = cube.num_primitive();
  Matrix best = Matrix::Constant(n, na, -std::numeric_limits<double>::infinity());
  for (const auto& q : qs) best = best.cwiseMax(q.leftCols(na));

  SynthOption out;
  out.weights = w;
  auto& o = out.option;
  o.initiation.assign(static_cast<std::size_t>(n), false);
  o.policy.assign(static_cast<std::size_t>(n), 0);
  o.termination.assign(static_cast<std::size_t>(n), 1.0);
  for (int s = 0; s < n; ++s) {
    const int a = argmax_lowest(best.row(s).transpose());
    if (best(s, a) <= kTieTolerance) {
      out.key.push_back(s);
      continue;
    }
    o.initiation[static_cast<std::size_t>(s)] = true;
    o.policy[static_cast<std::size_t>(s)] = a;
    o.termination[static_cast<std::size_t>(s)] = 0.0;
  }
  out.degenerate = static_cast<int>(out.key.size()) == n;
  std::string label = "keyboard:w=";
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (j) label += ';';
    label += w[j] == std::floor(w[j]) ? std::to_string(static_cast<long>(w[j])) : std::to_string(w[j]);
  }
  o.label = label;
  return out;
}

KeyboardEnumeration enumerate_keyboard(const QCube& cube, const std::vector<double>& alphabet, int jobs) {
  const int d = cube.n_base;
  if (d > kMaxKeyboardBases)
    throw BudgetError("keyboard enumeration supports at most " + std::to_string(kMaxKeyboardBases) + " base options");
  if (alphabet.empty()) throw PreconditionError("weight alphabet is empty");

  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= alphabet.size();
  // Mixed-radix counting with the first base as the most significant digit
  // gives lexicographic order over alphabet positions.
  auto weights_of = [&](std::size_t code) {
    std::vector<double> w(static_cast<std::size_t>(d));
    for (int i = d - 1; i >= 0; --i) {
      w[static_cast<std::size_t>(i)] = alphabet[code % alphabet.size()];
      code /= alphabet.size();
    }
    return w;
  };

  std::vector<SynthOption> synth(total);
  std::vector<bool> is_zero(total, false);
  parallel_for(total, jobs, [&](std::size_t code) {
    auto w = weights_of(code);
    bool zero = true;
    for (double x : w) zero &= x == 0.0;
    if (zero) {
      is_zero[code] = true;
      return;
    }
    synth[code] = gpi_synthesize(cube, w);
  });

  KeyboardEnumeration out;
  std::map<std::vector<int>, std::size_t> first_seen;
  std::vector<int> level(total, 0);
  for (std::size_t code = 0; code < total; ++code) {
    if (is_zero[code]) continue;
    auto& s = synth[code];
    out.all_weights.push_back(s.weights);
    out.all_keys.push_back(s.key);
    if (s.degenerate) {
      ++out.degenerate;
      continue;
    }
    int last = 0;
    for (int i = 0; i < d; ++i)
      if (s.weights[static_cast<std::size_t>(i)] != 0.0) last = i + 1;
    level[code] = last;
    if (!first_seen.count(s.key)) {
      first_seen.emplace(s.key, out.unique.size());
      out.unique.push_back(s);
    }
  }
  for (int m = 1; m <= d; ++m) {
    std::set<std::vector<int>> keys;
    for (std::size_t code = 0; code < total; ++code)
      if (!is_zero[code] && !synth[code].degenerate && level[code] <= m && level[code] > 0) keys.insert(synth[code].key);
    out.unique_by_prefix.push_back(static_cast<int>(keys.size()));
  }
  return out;
}

}  // namespace rod
