#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rodkit/execution.hpp"
#include "rodkit/successor.hpp"

namespace rod {

enum class PurposeKind { Eigenoption, Covering };

struct Eigenpurpose {
  Vector vector;
  int direction = 1;  // +1 or -1
  PurposeKind kind = PurposeKind::Eigenoption;
  int rank = -1;  // position of the vector in its basis, when known

  Vector oriented() const { return direction * vector; }
};

/// Eigenoption kind: r(s,s') = d * (e(s') - e(s)).
/// Covering kind: r(s,s') = 1 iff s' is the argmax of d * e.
TransitionReward eigenpurpose_reward(const Eigenpurpose& purpose);

/// Lowest-index argmax / argmin.
int argmax_state(const Vector& v);
int argmin_state(const Vector& v);

/// s is terminal (and outside the initiation set) iff every primitive value is
/// at most zero; elsewhere the policy is the greedy primitive.
OptionDef option_from_q(const QTable& q, std::string label = {});

enum class OptionSolver { ClosedForm, ReplayQLearning };

struct EigenoptionParams {
  int k = 0;
  double gamma_o = 0.9;
  OptionSolver solver = OptionSolver::ClosedForm;
  double alpha_o = 0.1;  // replay solver only
  int q_passes = 100;    // replay solver only
  bool point_initiation = false;  // initiation = {argmin of d * e} only
  int jobs = 1;
};

/// First k eigenpurposes of a basis in basis order, + before - within a
/// vector (or + only), skipping vectors that are constant.
std::vector<Eigenpurpose> select_eigenpurposes(const EigenBasis& basis, int k, bool both_directions = true);

/// Options in descending eigenvalue order, + before - within an eigenvector.
/// Eigenvectors whose eigenpurpose is identically zero are skipped.
std::vector<OptionDef> discover_eigenoptions(const TabularMDP& mdp, const EigenBasis& basis,
                                             const EigenoptionParams& params,
                                             const TransitionDataset* data = nullptr);

/// Option whose policy maximizes the eigenpurpose, via policy iteration with a
/// terminate action.
OptionDef eigenoption_closed_form(const TabularMDP& mdp, const Eigenpurpose& purpose, double gamma_o,
                                  std::string label = {});

struct CoveringParams {
  int n_iter = 0;
  BasisSource basis = BasisSource::Laplacian;
  double gamma_sr = 0.9;
  double gamma_o = 0.9;
  bool broad_initiation = false;  // initiation = every non-terminal state
};

/// Point option from argmin(d*e) to argmax(d*e).
OptionDef covering_option(const TabularMDP& mdp, const Vector& e, int direction, double gamma_o,
                          std::string label = {});

/// Iterative covering options, two per iteration.
std::vector<OptionDef> discover_covering_options(const TabularMDP& mdp, const CoveringParams& params);

/// Transition matrix of the uniform high-level policy over primitives and
/// available options, each option acting as a jump to where it lands.
Matrix options_induced_matrix(const TabularMDP& mdp, const std::vector<OptionDef>& options);

/// Adjacency of the MDP plus a symmetric edge between each option's
/// initiation and terminal states.
Matrix options_adjacency(const TabularMDP& mdp, const std::vector<OptionDef>& options);

/// Eigenvector used for the next covering iteration.
Vector covering_eigenvector(const TabularMDP& mdp, const std::vector<OptionDef>& options, BasisSource basis,
                            double gamma_sr);

struct OnlineCoveringParams {
  int n_iter = 0;
  long steps_per_iter = 1000;
  long episode_len = 0;  // restart at start_state every episode_len steps; 0: never
  int start_state = 0;
  double eta = 0.1;
  double gamma_sr = 0.9;
  int sr_passes = 1;
  double alpha_o = 0.1;
  double gamma_o = 0.9;
  int q_passes = 100;
};

/// Covering options from a TD estimate of the SR. The data set is rebuilt every
/// iteration with option executions logged as single jumps.
std::vector<OptionDef> discover_covering_options_online(const TabularMDP& mdp, const OnlineCoveringParams& params,
                                                        Rng& rng);

struct CeoParams {
  double eta = 0.1;
  double alpha_o = 0.1;
  double gamma_sr = 0.99;
  double gamma_o = 0.99;
  double p_option = 0.05;
  long n_steps = 100;
  int n_iter = 1;
  int sr_passes = 100;
  int q_passes = 1000;
  bool reset_each_iteration = true;  // restart every episode from start_state
  std::optional<int> start_state;   // default: top-right corner
};

struct RODState {
  TransitionDataset dataset;
  std::vector<OptionDef> options;
  int iteration = 0;
  SRMatrix sr;
};

struct CeoIterationLog {
  int iteration = 0;
  std::size_t dataset_size = 0;
  double top_eigenvalue = 0.0;
  int initiation_size = 0;
  int terminal_size = 0;
};

struct CeoResult {
  RODState state;
  std::vector<CeoIterationLog> log;
  std::vector<long> visits;
  long steps = 0;
  bool stopped = false;
};

/// Top eigenvector oriented so that its entries sum to a negative value.
Vector ceo_eigenvector(const SRMatrix& sr);

/// Covering eigenoptions: one option per iteration from the top eigenvector of
/// the SR learned on all data so far. on_step may end the run early, in which
/// case the interrupted iteration discovers nothing.
CeoResult run_ceo(const TabularMDP& mdp, const CeoParams& params, std::uint64_t seed,
                  const StepCallback& on_step = {});

}  // namespace rod
