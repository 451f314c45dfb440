#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rodkit/grid.hpp"

namespace rod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum Action : int { kUp = 0, kDown = 1, kRight = 2, kLeft = 3 };
inline constexpr int kGridActions = 4;

struct Successor {
  int state;
  double prob;
};

/// Finite MDP with a dense kernel stored as one |S|x|S| matrix per action.
class TabularMDP {
 public:
  TabularMDP(std::vector<Matrix> kernel, Matrix reward, double gamma,
             std::vector<Coord> coords = {}, int grid_width = 0, int grid_height = 0);

  int num_states() const { return n_states_; }
  int num_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }

  const Matrix& kernel(int action) const { return kernel_[static_cast<std::size_t>(action)]; }
  double prob(int s, int a, int s_next) const { return kernel(a)(s, s_next); }
  std::span<const Successor> successors(int s, int a) const {
    return successors_[static_cast<std::size_t>(s * n_actions_ + a)];
  }
  /// Expected reward r(s,a), |S| x |A|.
  const Matrix& reward() const { return reward_; }

  bool deterministic() const { return deterministic_; }
  /// Deterministic successor; only valid when deterministic().
  int next_state(int s, int a) const { return successors(s, a).front().state; }

  const std::vector<Coord>& coords() const { return coords_; }
  bool has_coords() const { return !coords_.empty(); }
  int grid_width() const { return grid_width_; }
  int grid_height() const { return grid_height_; }
  std::optional<int> state_at(Coord c) const;

  TabularMDP with_reward(Matrix reward) const;

 private:
  int n_states_;
  int n_actions_;
  std::vector<Matrix> kernel_;
  std::vector<std::vector<Successor>> successors_;
  Matrix reward_;
  double gamma_;
  bool deterministic_;
  std::vector<Coord> coords_;
  int grid_width_;
  int grid_height_;
};

/// Stochastic policy pi(a|s), |S| x |A|.
class Policy {
 public:
  explicit Policy(Matrix probs);
  static Policy uniform(int n_states, int n_actions);
  static Policy deterministic(std::span<const int> actions, int n_actions);

  const Matrix& probs() const { return probs_; }
  int num_states() const { return static_cast<int>(probs_.rows()); }
  int num_actions() const { return static_cast<int>(probs_.cols()); }

 private:
  Matrix probs_;
};

/// Option as (initiation set, deterministic policy, termination probability).
struct OptionDef {
  std::vector<bool> initiation;
  std::vector<int> policy;
  std::vector<double> termination;
  std::string label;

  int num_states() const { return static_cast<int>(policy.size()); }
  bool terminates_at(int s) const { return termination[static_cast<std::size_t>(s)] >= 1.0; }
  bool available_at(int s) const { return initiation[static_cast<std::size_t>(s)]; }
  std::vector<int> terminal_states() const;
  std::vector<int> initiation_states() const;

  static OptionDef everywhere_terminal(int n_states, std::string label = {});
};

/// Action values q(s,a). When has_terminate is set the last column is the
/// terminate action, whose value is identically zero.
struct QTable {
  Matrix values;
  bool has_terminate = false;

  int num_states() const { return static_cast<int>(values.rows()); }
  int num_primitive() const { return static_cast<int>(values.cols()) - (has_terminate ? 1 : 0); }
  /// Greedy primitive action; lowest index wins ties.
  int greedy_primitive(int s) const;
  double max_primitive(int s) const;
};

struct TransitionRecord {
  int s;
  int a;  // primitive action, or num_actions + option index for teleport records
  double r;
  int s_next;
  bool primitive;
};

/// Append-only list of transitions.
class TransitionDataset {
 public:
  void append(const TransitionRecord& rec) { records_.push_back(rec); }
  void append(const TransitionDataset& other);
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const TransitionRecord& operator[](std::size_t i) const { return records_[i]; }
  std::span<const TransitionRecord> records() const { return records_; }
  TransitionDataset prefix(std::size_t n) const;
  /// Throws ShapeError when any state or action index is out of bounds.
  void validate(int n_states, int n_actions, int n_options = 0) const;

 private:
  std::vector<TransitionRecord> records_;
};

/// One state per accessible cell, four deterministic moves, walls self-loop,
/// all-zero rewards.
TabularMDP build_mdp(const GridSpec& grid, double gamma = 0.9);

/// P_pi(s,s') = sum_a pi(a|s) p(s'|s,a).
Matrix induced_transition_matrix(const TabularMDP& mdp, const Policy& policy);

/// State of a corner cell, e.g. the top-right corner is the accessible cell with
/// the smallest row, then the largest column.
int top_right_state(const TabularMDP& mdp);
int bottom_left_state(const TabularMDP& mdp);

/// Checks that each row of a stochastic matrix sums to one within tol.
bool is_stochastic(const Matrix& m, double tol = 1e-12);

}  // namespace rod
