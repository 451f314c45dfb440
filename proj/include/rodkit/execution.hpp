#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rodkit/mdp.hpp"
#include "rodkit/rng.hpp"
#include "rodkit/solvers.hpp"

namespace rod {

/// How the high-level agent picks between primitives and options.
struct OptionSampler {
  enum class Kind {
    Uniform,            // uniform over primitives and options available at s
    OptionProbability,  // an available option with probability p_option, else a primitive
  };
  Kind kind = Kind::Uniform;
  double p_option = 0.0;

  static OptionSampler uniform() { return {}; }
  static OptionSampler with_option_probability(double p) { return {Kind::OptionProbability, p}; }
};

struct RunConfig {
  long steps = 0;             // primitive-step budget
  int start_state = 0;
  bool teleport_log = false;  // one record per option execution instead of its primitive steps
};

struct RunResult {
  TransitionDataset data;
  std::vector<long> visits;  // per state, counted on arrival
  long steps_taken = 0;
  int final_state = 0;
  bool stopped = false;  // on_step asked to stop early
};

/// Called after every primitive step; returning false ends the run.
using StepCallback = std::function<bool(int s, int a, int s_next)>;

/// Most steps a single option execution may take before it is cut off.
int max_option_steps(const TabularMDP& mdp);

/// Call-and-return execution. An option that is still running when the budget
/// runs out is truncated there.
RunResult run_with_options(const TabularMDP& mdp, std::span<const OptionDef> options,
                           const OptionSampler& sampler, const RunConfig& config, Rng& rng,
                           const StepCallback& on_step = {});

/// Back-to-back runs of episode_len steps, each restarting at start_state,
/// until `steps` primitive steps in total. Data and visits are concatenated.
RunResult run_episodes(const TabularMDP& mdp, std::span<const OptionDef> options, const OptionSampler& sampler,
                       long steps, long episode_len, int start_state, bool teleport_log, Rng& rng);

/// Distribution over the states where an option started at s stops. Entry s is
/// empty when s is outside the initiation set.
std::vector<std::vector<Successor>> option_landing(const TabularMDP& mdp, const OptionDef& option);

struct QLearningParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.05;
  int episodes = 50;
  int max_steps = 1000;
  /// Greedy ties broken uniformly at random from the run's generator rather
  /// than by lowest index.
  bool random_ties = false;
};

struct QLearningResult {
  QTable q;
  std::vector<double> returns;  // discounted return per episode, discounted by params.gamma
};

/// Online epsilon-greedy Q-learning over primitive actions. Exploratory moves
/// pick uniformly among primitives and available options; while an option runs
/// each primitive transition updates q off-policy. Entering an absorbing state
/// ends the episode.
QLearningResult q_learning(const TabularMDP& mdp, int start_state, const TransitionReward& reward,
                           const std::vector<bool>& absorbing, const QLearningParams& params,
                           std::span<const OptionDef> options, Rng& rng, const QTable* initial = nullptr);

}  // namespace rod
