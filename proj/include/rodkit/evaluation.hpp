#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rodkit/discovery.hpp"
#include "rodkit/grid.hpp"

namespace rod {

struct DiffusionReport {
  std::string method;
  int num_options = 0;
  double avg = 0.0;     // over ordered pairs s != g with finite expectation
  double median = 0.0;
  int num_pairs = 0;  // ordered pairs s != g, reachable or not
  int num_unreachable = 0;
  Matrix per_pair;  // (s, g); +inf when g is not reached almost surely; empty unless requested
};

/// Expected number of decisions for a uniform walk over primitives and
/// available options to reach g from s, each option counting as one decision.
DiffusionReport diffusion_time(const TabularMDP& mdp, const std::vector<OptionDef>& options,
                               std::string method = {}, bool keep_pairs = false, int jobs = 1);

struct CoverageReport {
  int seeds = 0;
  std::vector<long> steps;  // per seed
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  long min = 0;
  long max = 0;
  Vector visitation;  // per-state share of time, averaged over seeds
};

struct CoverConfig {
  long episode_len = 100;
  int start_state = 0;
  int seeds = 1;
  std::uint64_t rng_seed = 0;
  long cap = 10'000'000;
  int jobs = 1;
};

/// Steps until every state has been visited, counted across episodes, with a
/// fixed option set. Each episode restarts at start_state.
CoverageReport monte_carlo_cover(const TabularMDP& mdp, const std::vector<OptionDef>& options,
                                 const OptionSampler& sampler, const CoverConfig& config);

/// Same, with covering eigenoptions rediscovered between episodes.
CoverageReport monte_carlo_cover_ceo(const TabularMDP& mdp, CeoParams params, const CoverConfig& config);

/// Summary statistics for per-seed step counts.
CoverageReport summarize_coverage(std::vector<long> steps, Vector visitation);

/// Per-state values laid out on the grid (height x width); walls are 0.
Matrix heatmap_grid(const TabularMDP& mdp, const Vector& per_state);

/// Number of options terminating in each state.
std::vector<int> terminal_frequency(const std::vector<OptionDef>& options, int n_states);

/// Mean steps an option runs before terminating, over its initiation set.
double average_option_length(const TabularMDP& mdp, const OptionDef& option);

struct Task {
  int start = 0;
  int goal = 0;
};

/// n distinct (start, goal) pairs with start != goal.
std::vector<Task> sample_tasks(const TabularMDP& mdp, int n, Rng& rng);

struct ReturnCurve {
  Task task;
  std::vector<double> mean;  // per episode, over seeds
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  std::vector<double> auc_per_seed;
  double auc = 0.0;  // sum over episodes of the mean return
  bool unreachable = false;
};

struct RewardExperimentConfig {
  QLearningParams q;
  int seeds = 50;
  std::uint64_t rng_seed = 0;
  int jobs = 1;
};

/// Q-learning with reward +1 on reaching the goal, options used for
/// exploration only. Task t, seed k uses the stream (rng_seed, t, k), so
/// different option sets see common random numbers.
std::vector<ReturnCurve> reward_experiment(const TabularMDP& mdp, const std::vector<Task>& tasks,
                                           const std::vector<OptionDef>& options,
                                           const RewardExperimentConfig& config);

inline constexpr double kZ99 = 2.5758293035489004;

}  // namespace rod
