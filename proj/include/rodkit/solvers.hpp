#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rodkit/mdp.hpp"

namespace rod {

/// Values within this distance of each other (or of zero, for the terminate
/// action) are treated as ties.
inline constexpr double kTieTolerance = 1e-12;

/// Index of the largest entry; the lowest index wins ties within kTieTolerance.
int argmax_lowest(const Eigen::Ref<const Vector>& values);

/// v = r + gamma * P v. For gamma < 1 the system is solved in closed form.
/// gamma == 1 requires a non-empty absorbing set reachable from every state;
/// absorbing states have value zero. Throws NoConvergence otherwise.
Vector policy_evaluation(const Matrix& transition, const Vector& reward, double gamma,
                         double tol = 1e-10, const std::vector<bool>& absorbing = {});

struct ActionValues {
  Vector v;
  Matrix q;
};

/// Evaluation with (s,a) rewards; q(s,a) = r(s,a) + gamma * sum_s' p(s'|s,a) v(s').
ActionValues policy_evaluation(const TabularMDP& mdp, const Policy& policy, const Matrix& reward_sa,
                               double gamma);

struct PolicyIterationResult {
  QTable q;
  /// Greedy action per state; num_actions encodes the terminate action.
  std::vector<int> greedy;
  int iterations = 0;
};

/// Optimal action values for reward_sa. With terminate_action set, the MDP is
/// augmented with a zero-valued terminate action that wins ties.
PolicyIterationResult policy_iteration(const TabularMDP& mdp, const Matrix& reward_sa, double gamma,
                                       bool terminate_action);

using TransitionReward = std::function<double(int s, int s_next)>;

/// r(s,a) = sum_s' p(s'|s,a) r(s,s').
Matrix expected_reward(const TabularMDP& mdp, const TransitionReward& reward);

/// Off-line Q-learning over a stored dataset, `passes` sweeps in dataset order.
/// Only primitive records are replayed. Bootstraps against the zero-valued
/// terminate action, so the result carries a terminate column.
QTable replay_q_learning(std::span<const TransitionRecord> data, int n_states, int n_actions,
                         const TransitionReward& reward, double alpha, double gamma, int passes);

}  // namespace rod
