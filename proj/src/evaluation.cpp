#include "rodkit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "rodkit/errors.hpp"
#include "rodkit/parallel.hpp"

namespace rod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// Marks every state with an edge into an already marked state, stopping at g.
void close_backward(const Matrix& p, int g, std::vector<bool>& mark) {
  const auto n = p.rows();
  std::deque<Eigen::Index> frontier;
  for (Eigen::Index s = 0; s < n; ++s)
    if (mark[static_cast<std::size_t>(s)]) frontier.push_back(s);
  while (!frontier.empty()) {
    const auto t = frontier.front();
    frontier.pop_front();
    for (Eigen::Index s = 0; s < n; ++s)
      if (s != g && !mark[static_cast<std::size_t>(s)] && p(s, t) > 0.0) {
        mark[static_cast<std::size_t>(s)] = true;
        frontier.push_back(s);
      }
  }
}

// States from which g is reached with probability one: those that cannot
// reach any state that cannot reach g.
std::vector<bool> almost_sure_reach(const Matrix& p, int g) {
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<bool> reaches(n, false);
  reaches[static_cast<std::size_t>(g)] = true;
  close_backward(p, -1, reaches);
  std::vector<bool> doomed(n);
  for (std::size_t s = 0; s < n; ++s) doomed[s] = !reaches[s];
  close_backward(p, g, doomed);
  std::vector<bool> out(n);
  for (std::size_t s = 0; s < n; ++s) out[s] = !doomed[s];
  return out;
}

}  // namespace

DiffusionReport diffusion_time(const TabularMDP& mdp, const std::vector<OptionDef>& options, std::string method,
                               bool keep_pairs, int jobs) {
  const int n = mdp.num_states();
  const Matrix p = options_induced_matrix(mdp, options);
  Matrix pairs = Matrix::Zero(n, n);

  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t gi) {
    const int g = static_cast<int>(gi);
    const auto ok = almost_sure_reach(p, g);
    std::vector<int> idx;
    for (int s = 0; s < n; ++s)
      if (s != g && ok[static_cast<std::size_t>(s)]) idx.push_back(s);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix system(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        system(i, j) = (i == j ? 1.0 : 0.0) - p(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    const Vector v = m ? Vector(system.partialPivLu().solve(Vector::Ones(m))) : Vector();
    for (int s = 0; s < n; ++s) pairs(s, g) = (s == g) ? 0.0 : kInf;
    for (Eigen::Index i = 0; i < m; ++i) pairs(idx[static_cast<std::size_t>(i)], g) = v(i);
  });

  DiffusionReport report;
  report.method = std::move(method);
  report.num_options = static_cast<int>(options.size());
  std::vector<double> finite;
  for (int g = 0; g < n; ++g)
    for (int s = 0; s < n; ++s) {
      if (s == g) continue;
      ++report.num_pairs;
      if (std::isfinite(pairs(s, g))) {
        finite.push_back(pairs(s, g));
      } else {
        ++report.num_unreachable;
      }
    }
  if (!finite.empty()) {
    double sum = 0.0;
    for (double x : finite) sum += x;
    report.avg = sum / static_cast<double>(finite.size());
    report.median = median_of(finite);
  }
  if (report.num_unreachable) warn(std::to_string(report.num_unreachable) + " state pairs are never connected");
  if (keep_pairs) report.per_pair = std::move(pairs);
  return report;
}

CoverageReport summarize_coverage(std::vector<long> steps, Vector visitation) {
  CoverageReport r;
  r.seeds = static_cast<int>(steps.size());
  r.visitation = std::move(visitation);
  if (steps.empty()) return r;
  double sum = 0.0;
  for (long s : steps) sum += static_cast<double>(s);
  r.mean = sum / static_cast<double>(steps.size());
  double ss = 0.0;
  for (long s : steps) ss += (static_cast<double>(s) - r.mean) * (static_cast<double>(s) - r.mean);
  r.sd = steps.size() > 1 ? std::sqrt(ss / static_cast<double>(steps.size() - 1)) : 0.0;
  std::vector<double> as_double(steps.begin(), steps.end());
  r.median = median_of(as_double);
  r.min = *std::min_element(steps.begin(), steps.end());
  r.max = *std::max_element(steps.begin(), steps.end());
  r.steps = std::move(steps);
  return r;
}

namespace {

// Tracks first visits; the start state counts as visited at step 0.
struct CoverTracker {
  std::vector<bool> seen;
  int remaining;
  long steps = 0;

  CoverTracker(int n, int start) : seen(static_cast<std::size_t>(n), false), remaining(n) { mark(start); }
  void mark(int s) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = true;
      --remaining;
    }
  }
  bool step(int s_next) {
    ++steps;
    mark(s_next);
    return remaining > 0;
  }
};

CoverageReport aggregate(const TabularMDP& mdp, std::vector<long> steps, const std::vector<std::vector<long>>& visits) {
  const int n = mdp.num_states();
  Vector visitation = Vector::Zero(n);
  for (const auto& v : visits) {
    const double total = static_cast<double>(std::accumulate(v.begin(), v.end(), 0L));
    for (int s = 0; s < n; ++s) visitation(s) += static_cast<double>(v[static_cast<std::size_t>(s)]) / total;
  }
  if (!visits.empty()) visitation /= static_cast<double>(visits.size());
  return summarize_coverage(std::move(steps), std::move(visitation));
}

}  // namespace

CoverageReport monte_carlo_cover(const TabularMDP& mdp, const std::vector<OptionDef>& options,
                                 const OptionSampler& sampler, const CoverConfig& config) {
  if (config.episode_len <= 0) throw PreconditionError("episode_len must be positive");
  if (config.seeds < 1) throw PreconditionError("need at least one seed");
  const int n = mdp.num_states();
  std::vector<long> steps(static_cast<std::size_t>(config.seeds));
  std::vector<std::vector<long>> visits(static_cast<std::size_t>(config.seeds));
  const Rng root(config.rng_seed);
  parallel_for(static_cast<std::size_t>(config.seeds), config.jobs, [&](std::size_t k) {
    Rng rng = root.split(k);
    CoverTracker tracker(n, config.start_state);
    std::vector<long> v(static_cast<std::size_t>(n), 0);
    v[static_cast<std::size_t>(config.start_state)] = 1;
    while (tracker.remaining > 0) {
      if (tracker.steps >= config.cap) throw CapExceeded("coverage not reached within " + std::to_string(config.cap) + " steps");
      const RunConfig cfg{config.episode_len, config.start_state, false};
      const auto run = run_with_options(mdp, options, sampler, cfg, rng,
                                        [&](int, int, int s_next) { return tracker.step(s_next); });
      for (int s = 0; s < n; ++s) v[static_cast<std::size_t>(s)] += run.visits[static_cast<std::size_t>(s)];
    }
    steps[k] = tracker.steps;
    visits[k] = std::move(v);
  });
  return aggregate(mdp, std::move(steps), visits);
}

CoverageReport monte_carlo_cover_ceo(const TabularMDP& mdp, CeoParams params, const CoverConfig& config) {
  if (config.episode_len <= 0) throw PreconditionError("episode_len must be positive");
  if (config.seeds < 1) throw PreconditionError("need at least one seed");
  const int n = mdp.num_states();
  params.n_steps = config.episode_len;
  params.start_state = config.start_state;
  params.n_iter = static_cast<int>(config.cap / config.episode_len) + 1;
  std::vector<long> steps(static_cast<std::size_t>(config.seeds));
  std::vector<std::vector<long>> visits(static_cast<std::size_t>(config.seeds));
  const Rng root(config.rng_seed);
  parallel_for(static_cast<std::size_t>(config.seeds), config.jobs, [&](std::size_t k) {
    CoverTracker tracker(n, config.start_state);
    const auto result = run_ceo(mdp, params, root.split(k).seed(),
                                [&](int, int, int s_next) { return tracker.step(s_next); });
    if (tracker.remaining > 0) throw CapExceeded("coverage not reached within " + std::to_string(config.cap) + " steps");
    std::vector<long> v = result.visits;
    v[static_cast<std::size_t>(config.start_state)] += 1;
    steps[k] = tracker.steps;
    visits[k] = std::move(v);
  });
  return aggregate(mdp, std::move(steps), visits);
}

Matrix heatmap_grid(const TabularMDP& mdp, const Vector& per_state) {
  if (!mdp.has_coords()) throw PreconditionError("heatmaps need state coordinates");
  if (per_state.size() != mdp.num_states()) throw ShapeError("heatmap values must have one entry per state");
  Matrix grid = Matrix::Zero(mdp.grid_height(), mdp.grid_width());
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto c = mdp.coords()[static_cast<std::size_t>(s)];
    grid(c.row, c.col) = per_state(s);
  }
  return grid;
}

std::vector<int> terminal_frequency(const std::vector<OptionDef>& options, int n_states) {
  std::vector<int> counts(static_cast<std::size_t>(n_states), 0);
  for (const auto& o : options) {
    if (o.num_states() != n_states) throw ShapeError("option defined over a different state space");
    for (int s : o.terminal_states()) ++counts[static_cast<std::size_t>(s)];
  }
  return counts;
}

double average_option_length(const TabularMDP& mdp, const OptionDef& option) {
  const int n = mdp.num_states();
  const auto init = option.initiation_states();
  if (init.empty()) return 0.0;
  // Expected steps: L(s) = 1 + sum_s' p(s'|s,pi(s)) L(s') with L = 0 after termination.
  Matrix system = Matrix::Identity(n, n);
  for (int s = 0; s < n; ++s) {
    const Eigen::RowVectorXd row = mdp.kernel(option.policy[static_cast<std::size_t>(s)]).row(s);
    for (int t = 0; t < n; ++t)
      if (!option.terminates_at(t)) system(s, t) -= row(t);
  }
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw CapExceeded("option '" + option.label + "' can run forever");
  const Vector len = lu.solve(Vector::Ones(n));
  double sum = 0.0;
  for (int s : init) sum += len(s);
  return sum / static_cast<double>(init.size());
}

std::vector<Task> sample_tasks(const TabularMDP& mdp, int n, Rng& rng) {
  const int states = mdp.num_states();
  if (states < 2) throw PreconditionError("tasks need at least two states");
  if (n > states * (states - 1)) throw PreconditionError("more tasks requested than distinct pairs");
  std::vector<Task> out;
  while (static_cast<int>(out.size()) < n) {
    Task t{rng.uniform_int(states), rng.uniform_int(states)};
    if (t.start == t.goal) continue;
    bool dup = false;
    for (const auto& o : out) dup |= o.start == t.start && o.goal == t.goal;
    if (!dup) out.push_back(t);
  }
  return out;
}

std::vector<ReturnCurve> reward_experiment(const TabularMDP& mdp, const std::vector<Task>& tasks,
                                           const std::vector<OptionDef>& options,
                                           const RewardExperimentConfig& config) {
  const int n = mdp.num_states();
  const int episodes = config.q.episodes;
  const Rng root(config.rng_seed);
  std::vector<ReturnCurve> curves(tasks.size());
  std::vector<std::vector<double>> returns(tasks.size() * static_cast<std::size_t>(config.seeds));
  std::vector<bool> reachable(tasks.size());

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t];
    if (task.start < 0 || task.start >= n || task.goal < 0 || task.goal >= n) throw ShapeError("task state out of range");
    Matrix w = adjacency_matrix(mdp);
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::deque<int> frontier{task.start};
    seen[static_cast<std::size_t>(task.start)] = true;
    while (!frontier.empty()) {
      const int s = frontier.front();
      frontier.pop_front();
      for (int x = 0; x < n; ++x)
        if (w(s, x) > 0.0 && !seen[static_cast<std::size_t>(x)]) {
          seen[static_cast<std::size_t>(x)] = true;
          frontier.push_back(x);
        }
    }
    reachable[t] = seen[static_cast<std::size_t>(task.goal)];
  }

  parallel_for(returns.size(), config.jobs, [&](std::size_t job) {
    const std::size_t t = job / static_cast<std::size_t>(config.seeds);
    const std::size_t k = job % static_cast<std::size_t>(config.seeds);
    if (!reachable[t]) {
      returns[job].assign(static_cast<std::size_t>(episodes), 0.0);
      return;
    }
    const auto& task = tasks[t];
    Rng rng = root.split(t).split(k);
    std::vector<bool> absorbing(static_cast<std::size_t>(n), false);
    absorbing[static_cast<std::size_t>(task.goal)] = true;
    const int goal = task.goal;
    const auto result = q_learning(mdp, task.start, [goal](int, int s_next) { return s_next == goal ? 1.0 : 0.0; },
                                   absorbing, config.q, options, rng);
    returns[job] = result.returns;
  });

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto& c = curves[t];
    c.task = tasks[t];
    c.unreachable = !reachable[t];
    if (c.unreachable) warn("goal unreachable from start; return curve is all zeros");
    c.mean.assign(static_cast<std::size_t>(episodes), 0.0);
    c.ci_low.assign(static_cast<std::size_t>(episodes), 0.0);
    c.ci_high.assign(static_cast<std::size_t>(episodes), 0.0);
    for (int k = 0; k < config.seeds; ++k) {
      const auto& r = returns[t * static_cast<std::size_t>(config.seeds) + static_cast<std::size_t>(k)];
      c.auc_per_seed.push_back(std::accumulate(r.begin(), r.end(), 0.0));
    }
    for (int e = 0; e < episodes; ++e) {
      double sum = 0.0, ss = 0.0;
      for (int k = 0; k < config.seeds; ++k)
        sum += returns[t * static_cast<std::size_t>(config.seeds) + static_cast<std::size_t>(k)][static_cast<std::size_t>(e)];
      const double mean = sum / config.seeds;
      for (int k = 0; k < config.seeds; ++k) {
        const double d = returns[t * static_cast<std::size_t>(config.seeds) + static_cast<std::size_t>(k)][static_cast<std::size_t>(e)] - mean;
        ss += d * d;
      }
      const double sd = config.seeds > 1 ? std::sqrt(ss / (config.seeds - 1)) : 0.0;
      const double half = kZ99 * sd / std::sqrt(static_cast<double>(config.seeds));
      c.mean[static_cast<std::size_t>(e)] = mean;
      c.ci_low[static_cast<std::size_t>(e)] = mean - half;
      c.ci_high[static_cast<std::size_t>(e)] = mean + half;
      c.auc += mean;
    }
  }
  return curves;
}

}  // namespace rod
