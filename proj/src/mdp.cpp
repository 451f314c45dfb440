#include "rodkit/mdp.hpp"

#include <cmath>

#include "rodkit/errors.hpp"
#include "rodkit/solvers.hpp"

namespace rod {

bool is_stochastic(const Matrix& m, double tol) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (std::abs(m.row(r).sum() - 1.0) > tol) return false;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) < 0.0 || m(r, c) > 1.0) return false;
  }
  return true;
}

TabularMDP::TabularMDP(std::vector<Matrix> kernel, Matrix reward, double gamma,
                       std::vector<Coord> coords, int grid_width, int grid_height)
    : n_states_(kernel.empty() ? 0 : static_cast<int>(kernel.front().rows())),
      n_actions_(static_cast<int>(kernel.size())),
      kernel_(std::move(kernel)),
      reward_(std::move(reward)),
      gamma_(gamma),
      deterministic_(true),
      coords_(std::move(coords)),
      grid_width_(grid_width),
      grid_height_(grid_height) {
  if (n_states_ == 0 || n_actions_ == 0) throw ShapeError("MDP needs at least one state and action");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw PreconditionError("gamma must lie in [0,1)");
  if (reward_.rows() != n_states_ || reward_.cols() != n_actions_)
    throw ShapeError("reward table must be |S| x |A|");
  if (!coords_.empty() && static_cast<int>(coords_.size()) != n_states_)
    throw ShapeError("state_coords must have one entry per state");
  successors_.resize(static_cast<std::size_t>(n_states_ * n_actions_));
  for (int a = 0; a < n_actions_; ++a) {
    const Matrix& p = kernel_[static_cast<std::size_t>(a)];
    if (p.rows() != n_states_ || p.cols() != n_states_) throw ShapeError("kernel must be |S| x |S| per action");
    if (!is_stochastic(p)) throw PreconditionError("kernel rows must be probability distributions");
    for (int s = 0; s < n_states_; ++s) {
      auto& succ = successors_[static_cast<std::size_t>(s * n_actions_ + a)];
      for (int t = 0; t < n_states_; ++t)
        if (p(s, t) > 0.0) succ.push_back({t, p(s, t)});
      deterministic_ &= succ.size() == 1;
    }
  }
}

std::optional<int> TabularMDP::state_at(Coord c) const {
  for (std::size_t i = 0; i < coords_.size(); ++i)
    if (coords_[i] == c) return static_cast<int>(i);
  return std::nullopt;
}

TabularMDP TabularMDP::with_reward(Matrix reward) const {
  return TabularMDP(kernel_, std::move(reward), gamma_, coords_, grid_width_, grid_height_);
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (!is_stochastic(probs_)) throw PreconditionError("policy rows must be probability distributions");
}

Policy Policy::uniform(int n_states, int n_actions) {
  return Policy(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Policy Policy::deterministic(std::span<const int> actions, int n_actions) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions);
  for (std::size_t s = 0; s < actions.size(); ++s) {
    if (actions[s] < 0 || actions[s] >= n_actions) throw ShapeError("action index out of range");
    p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
  }
  return Policy(std::move(p));
}

std::vector<int> OptionDef::terminal_states() const {
  std::vector<int> out;
  for (int s = 0; s < num_states(); ++s)
    if (terminates_at(s)) out.push_back(s);
  return out;
}

std::vector<int> OptionDef::initiation_states() const {
  std::vector<int> out;
  for (int s = 0; s < num_states(); ++s)
    if (available_at(s)) out.push_back(s);
  return out;
}

OptionDef OptionDef::everywhere_terminal(int n_states, std::string label) {
  const auto n = static_cast<std::size_t>(n_states);
  return OptionDef{std::vector<bool>(n, false), std::vector<int>(n, 0), std::vector<double>(n, 1.0),
                   std::move(label)};
}

int QTable::greedy_primitive(int s) const {
  return argmax_lowest(values.row(s).head(num_primitive()).transpose());
}

double QTable::max_primitive(int s) const { return values.row(s).head(num_primitive()).maxCoeff(); }

void TransitionDataset::append(const TransitionDataset& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

TransitionDataset TransitionDataset::prefix(std::size_t n) const {
  TransitionDataset out;
  out.records_.assign(records_.begin(), records_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return out;
}

void TransitionDataset::validate(int n_states, int n_actions, int n_options) const {
  for (const auto& r : records_) {
    if (r.s < 0 || r.s >= n_states || r.s_next < 0 || r.s_next >= n_states)
      throw ShapeError("transition state index out of range");
    if (r.a < 0 || r.a >= n_actions + n_options) throw ShapeError("transition action index out of range");
  }
}

TabularMDP build_mdp(const GridSpec& grid, double gamma) {
  const auto cells = grid.accessible_cells();
  const int n = static_cast<int>(cells.size());
  std::vector<int> index(static_cast<std::size_t>(grid.width() * grid.height()), -1);
  for (int i = 0; i < n; ++i) index[static_cast<std::size_t>(cells[i].row * grid.width() + cells[i].col)] = i;

  constexpr int dr[kGridActions] = {-1, 1, 0, 0};
  constexpr int dc[kGridActions] = {0, 0, 1, -1};
  std::vector<Matrix> kernel(kGridActions, Matrix::Zero(n, n));
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kGridActions; ++a) {
      const int r = cells[s].row + dr[a];
      const int c = cells[s].col + dc[a];
      int target = s;
      if (r >= 0 && c >= 0 && r < grid.height() && c < grid.width() && grid.accessible(r, c))
        target = index[static_cast<std::size_t>(r * grid.width() + c)];
      kernel[a](s, target) = 1.0;
    }
  }
  return TabularMDP(std::move(kernel), Matrix::Zero(n, kGridActions), gamma, cells, grid.width(),
                    grid.height());
}

Matrix induced_transition_matrix(const TabularMDP& mdp, const Policy& policy) {
  if (policy.num_states() != mdp.num_states() || policy.num_actions() != mdp.num_actions())
    throw ShapeError("policy shape does not match MDP");
  Matrix p = Matrix::Zero(mdp.num_states(), mdp.num_states());
  for (int a = 0; a < mdp.num_actions(); ++a) p += policy.probs().col(a).asDiagonal() * mdp.kernel(a);
  return p;
}

int top_right_state(const TabularMDP& mdp) {
  if (!mdp.has_coords()) throw PreconditionError("MDP has no grid coordinates");
  int best = 0;
  for (int s = 1; s < mdp.num_states(); ++s) {
    const Coord c = mdp.coords()[s], b = mdp.coords()[best];
    if (c.row < b.row || (c.row == b.row && c.col > b.col)) best = s;
  }
  return best;
}

int bottom_left_state(const TabularMDP& mdp) {
  if (!mdp.has_coords()) throw PreconditionError("MDP has no grid coordinates");
  int best = 0;
  for (int s = 1; s < mdp.num_states(); ++s) {
    const Coord c = mdp.coords()[s], b = mdp.coords()[best];
    if (c.row > b.row || (c.row == b.row && c.col < b.col)) best = s;
  }
  return best;
}

}  // namespace rod
