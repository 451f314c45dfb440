#include "rodkit/solvers.hpp"

#include <cmath>
#include <deque>

#include "rodkit/errors.hpp"

namespace rod {

int argmax_lowest(const Eigen::Ref<const Vector>& values) {
  int best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values(i) > values(best) + kTieTolerance) best = static_cast<int>(i);
  return best;
}

namespace {

// States that can reach the target set through positive-probability edges.
std::vector<bool> can_reach(const Matrix& transition, const std::vector<bool>& target) {
  const auto n = transition.rows();
  std::vector<bool> reach(target);
  std::deque<Eigen::Index> frontier;
  for (Eigen::Index s = 0; s < n; ++s)
    if (reach[static_cast<std::size_t>(s)]) frontier.push_back(s);
  while (!frontier.empty()) {
    const auto t = frontier.front();
    frontier.pop_front();
    for (Eigen::Index s = 0; s < n; ++s) {
      if (!reach[static_cast<std::size_t>(s)] && transition(s, t) > 0.0) {
        reach[static_cast<std::size_t>(s)] = true;
        frontier.push_back(s);
      }
    }
  }
  return reach;
}

}  // namespace

Vector policy_evaluation(const Matrix& transition, const Vector& reward, double gamma, double tol,
                         const std::vector<bool>& absorbing) {
  const auto n = transition.rows();
  if (transition.cols() != n || reward.size() != n) throw ShapeError("policy_evaluation: shape mismatch");
  if (!absorbing.empty() && static_cast<Eigen::Index>(absorbing.size()) != n)
    throw ShapeError("policy_evaluation: absorbing mask has wrong length");
  if (gamma < 0.0 || gamma > 1.0) throw PreconditionError("gamma must lie in [0,1]");

  std::vector<bool> fixed = absorbing.empty() ? std::vector<bool>(static_cast<std::size_t>(n), false) : absorbing;
  if (gamma == 1.0) {
    bool any = false;
    for (bool b : fixed) any |= b;
    if (!any) throw NoConvergence("gamma = 1 requires an absorbing state");
    const auto reach = can_reach(transition, fixed);
    for (Eigen::Index s = 0; s < n; ++s)
      if (!reach[static_cast<std::size_t>(s)])
        throw NoConvergence("absorbing set unreachable from state " + std::to_string(s));
  }

  Matrix system = Matrix::Identity(n, n) - gamma * transition;
  Vector rhs = reward;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (!fixed[static_cast<std::size_t>(s)]) continue;
    system.row(s).setZero();
    system(s, s) = 1.0;
    rhs(s) = 0.0;
  }
  Vector v = system.partialPivLu().solve(rhs);
  if (!v.allFinite()) throw NumericError("policy_evaluation produced non-finite values");
  (void)tol;
  return v;
}

ActionValues policy_evaluation(const TabularMDP& mdp, const Policy& policy, const Matrix& reward_sa,
                               double gamma) {
  if (reward_sa.rows() != mdp.num_states() || reward_sa.cols() != mdp.num_actions())
    throw ShapeError("reward table must be |S| x |A|");
  const Matrix p = induced_transition_matrix(mdp, policy);
  const Vector r = policy.probs().cwiseProduct(reward_sa).rowwise().sum();
  ActionValues out;
  out.v = policy_evaluation(p, r, gamma);
  out.q = reward_sa;
  for (int a = 0; a < mdp.num_actions(); ++a) out.q.col(a) += gamma * (mdp.kernel(a) * out.v);
  return out;
}

PolicyIterationResult policy_iteration(const TabularMDP& mdp, const Matrix& reward_sa, double gamma,
                                       bool terminate_action) {
  const int n = mdp.num_states();
  const int na = mdp.num_actions();
  if (reward_sa.rows() != n || reward_sa.cols() != na) throw ShapeError("reward table must be |S| x |A|");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw PreconditionError("policy_iteration needs gamma in [0,1)");

  const int terminate = na;
  std::vector<int> policy(static_cast<std::size_t>(n), terminate_action ? terminate : 0);
  Vector v = Vector::Zero(n);
  Matrix q(n, na);

  auto backup = [&](const Vector& values) {
    for (int a = 0; a < na; ++a) q.col(a) = reward_sa.col(a) + gamma * (mdp.kernel(a) * values);
  };

  constexpr int kMaxIterations = 10000;
  constexpr double kValueTol = 1e-10;
  int it = 0;
  for (; it < kMaxIterations; ++it) {
    Matrix system = Matrix::Identity(n, n);
    Vector rhs = Vector::Zero(n);
    for (int s = 0; s < n; ++s) {
      const int a = policy[static_cast<std::size_t>(s)];
      if (a == terminate) continue;
      system.row(s) -= gamma * mdp.kernel(a).row(s);
      rhs(s) = reward_sa(s, a);
    }
    const Vector v_new = system.partialPivLu().solve(rhs);
    const double change = (v_new - v).lpNorm<Eigen::Infinity>();
    v = v_new;
    backup(v);

    bool stable = true;
    for (int s = 0; s < n; ++s) {
      const int current = policy[static_cast<std::size_t>(s)];
      const double current_value = current == terminate ? 0.0 : q(s, current);
      const int best_primitive = argmax_lowest(q.row(s).transpose());
      int candidate = best_primitive;
      double candidate_value = q(s, best_primitive);
      if (terminate_action && candidate_value <= kTieTolerance) {
        candidate = terminate;
        candidate_value = 0.0;
      }
      // Switch only on strict improvement to rule out cycling between ties.
      if (candidate != current && candidate_value > current_value + kTieTolerance) {
        policy[static_cast<std::size_t>(s)] = candidate;
        stable = false;
      }
    }
    if (stable && change < kValueTol) break;
  }
  if (it == kMaxIterations) throw NoConvergence("policy_iteration did not converge");

  PolicyIterationResult out;
  out.iterations = it + 1;
  out.q.has_terminate = terminate_action;
  out.q.values = Matrix::Zero(n, na + (terminate_action ? 1 : 0));
  out.q.values.leftCols(na) = q;
  out.greedy.resize(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    const int a = argmax_lowest(q.row(s).transpose());
    out.greedy[static_cast<std::size_t>(s)] = (terminate_action && q(s, a) <= kTieTolerance) ? terminate : a;
  }
  return out;
}

Matrix expected_reward(const TabularMDP& mdp, const TransitionReward& reward) {
  Matrix r = Matrix::Zero(mdp.num_states(), mdp.num_actions());
  for (int s = 0; s < mdp.num_states(); ++s)
    for (int a = 0; a < mdp.num_actions(); ++a)
      for (const auto& succ : mdp.successors(s, a)) r(s, a) += succ.prob * reward(s, succ.state);
  return r;
}

QTable replay_q_learning(std::span<const TransitionRecord> data, int n_states, int n_actions,
                         const TransitionReward& reward, double alpha, double gamma, int passes) {
  QTable q{Matrix::Zero(n_states, n_actions + 1), true};
  // Rewards are fixed per record; compute them once.
  std::vector<double> r(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].primitive) r[i] = reward(data[i].s, data[i].s_next);
  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& t = data[i];
      if (!t.primitive) continue;
      const double next = std::max(0.0, q.values.row(t.s_next).head(n_actions).maxCoeff());
      double& entry = q.values(t.s, t.a);
      entry += alpha * (r[i] + gamma * next - entry);
    }
  }
  return q;
}

}  // namespace rod
