#include "rodkit/discovery.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "rodkit/errors.hpp"
#include "rodkit/parallel.hpp"

namespace rod {

TransitionReward eigenpurpose_reward(const Eigenpurpose& purpose) {
  const Vector e = purpose.oriented();
  if (purpose.kind == PurposeKind::Covering) {
    const int target = argmax_state(e);
    return [target](int, int s_next) { return s_next == target ? 1.0 : 0.0; };
  }
  return [e](int s, int s_next) { return e(s_next) - e(s); };
}

int argmax_state(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return static_cast<int>(best);
}

int argmin_state(const Vector& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) < v(best)) best = i;
  return static_cast<int>(best);
}

OptionDef option_from_q(const QTable& q, std::string label) {
  const int n = q.num_states();
  OptionDef o;
  o.label = std::move(label);
  o.initiation.assign(static_cast<std::size_t>(n), false);
  o.policy.assign(static_cast<std::size_t>(n), 0);
  o.termination.assign(static_cast<std::size_t>(n), 1.0);
  for (int s = 0; s < n; ++s) {
    const int a = q.greedy_primitive(s);
    if (q.values(s, a) <= kTieTolerance) continue;
    o.initiation[static_cast<std::size_t>(s)] = true;
    o.policy[static_cast<std::size_t>(s)] = a;
    o.termination[static_cast<std::size_t>(s)] = 0.0;
  }
  return o;
}

namespace {

std::string eigen_label(const char* method, int rank, int direction) {
  return std::string(method) + ":rank=" + std::to_string(rank) + ":dir=" + (direction > 0 ? "+" : "-");
}

bool is_flat(const Vector& v) { return v.maxCoeff() - v.minCoeff() <= 1e-10 * std::max(1.0, v.cwiseAbs().maxCoeff()); }

void restrict_initiation(OptionDef& o, int state) {
  std::fill(o.initiation.begin(), o.initiation.end(), false);
  o.initiation[static_cast<std::size_t>(state)] = true;
}

std::vector<bool> reachable_from(const Matrix& w, int source) {
  std::vector<bool> seen(static_cast<std::size_t>(w.rows()), false);
  std::deque<int> frontier{source};
  seen[static_cast<std::size_t>(source)] = true;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    for (Eigen::Index t = 0; t < w.cols(); ++t)
      if (w(s, t) > 0.0 && !seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = true;
        frontier.push_back(static_cast<int>(t));
      }
  }
  return seen;
}

}  // namespace

OptionDef eigenoption_closed_form(const TabularMDP& mdp, const Eigenpurpose& purpose, double gamma_o,
                                  std::string label) {
  if (purpose.vector.size() != mdp.num_states()) throw ShapeError("eigenvector length differs from |S|");
  const Matrix reward = expected_reward(mdp, eigenpurpose_reward(purpose));
  const auto result = policy_iteration(mdp, reward, gamma_o, true);
  return option_from_q(result.q, std::move(label));
}

std::vector<Eigenpurpose> select_eigenpurposes(const EigenBasis& basis, int k, bool both_directions) {
  std::vector<Eigenpurpose> out;
  for (int i = 0; i < basis.size() && static_cast<int>(out.size()) < k; ++i) {
    const Vector e = basis.vector(i);
    if (is_flat(e)) continue;
    for (int d : {1, -1}) {
      if (static_cast<int>(out.size()) == k || (d < 0 && !both_directions)) break;
      out.push_back({e, d, PurposeKind::Eigenoption, i});
    }
  }
  return out;
}

std::vector<OptionDef> discover_eigenoptions(const TabularMDP& mdp, const EigenBasis& basis,
                                             const EigenoptionParams& params, const TransitionDataset* data) {
  const int n = mdp.num_states();
  if (params.k < 0 || params.k > 2 * n)
    throw PreconditionError("k = " + std::to_string(params.k) + " exceeds 2*|S| = " + std::to_string(2 * n));
  if (basis.vectors.rows() != n) throw ShapeError("basis dimension differs from |S|");
  if (params.solver == OptionSolver::ReplayQLearning && (!data || data->empty()))
    throw PreconditionError("replay solver needs a transition dataset");

  const auto purposes = select_eigenpurposes(basis, params.k);
  if (static_cast<int>(purposes.size()) < params.k)
    warn("only " + std::to_string(purposes.size()) + " eigenoptions available, " + std::to_string(params.k) +
         " requested");

  std::vector<OptionDef> out(purposes.size());
  parallel_for(purposes.size(), params.jobs, [&](std::size_t j) {
    const auto& purpose = purposes[j];
    const std::string label = eigen_label("eigen", purpose.rank, purpose.direction);
    OptionDef o;
    if (params.solver == OptionSolver::ClosedForm) {
      o = eigenoption_closed_form(mdp, purpose, params.gamma_o, label);
    } else {
      const QTable q = replay_q_learning(data->records(), n, mdp.num_actions(), eigenpurpose_reward(purpose),
                                         params.alpha_o, params.gamma_o, params.q_passes);
      o = option_from_q(q, label);
    }
    if (params.point_initiation) restrict_initiation(o, argmin_state(purpose.oriented()));
    out[j] = std::move(o);
  });
  return out;
}

OptionDef covering_option(const TabularMDP& mdp, const Vector& e, int direction, double gamma_o, std::string label) {
  const int n = mdp.num_states();
  if (e.size() != n) throw ShapeError("eigenvector length differs from |S|");
  const Eigenpurpose purpose{e, direction, PurposeKind::Covering};
  const Vector oriented = purpose.oriented();
  const int target = argmax_state(oriented);
  const int source = argmin_state(oriented);
  const Matrix reward = expected_reward(mdp, eigenpurpose_reward(purpose));
  const auto result = policy_iteration(mdp, reward, gamma_o, false);

  OptionDef o;
  o.label = std::move(label);
  o.policy = result.greedy;
  o.termination.assign(static_cast<std::size_t>(n), 0.0);
  o.termination[static_cast<std::size_t>(target)] = 1.0;
  o.initiation.assign(static_cast<std::size_t>(n), false);
  o.initiation[static_cast<std::size_t>(source)] = true;
  return o;
}

Matrix options_adjacency(const TabularMDP& mdp, const std::vector<OptionDef>& options) {
  Matrix w = adjacency_matrix(mdp);
  for (const auto& o : options) {
    for (int i : o.initiation_states())
      for (int t : o.terminal_states())
        if (i != t) w(i, t) = w(t, i) = 1.0;
  }
  return w;
}

Matrix options_induced_matrix(const TabularMDP& mdp, const std::vector<OptionDef>& options) {
  const int n = mdp.num_states();
  Matrix t = Matrix::Zero(n, n);
  for (int a = 0; a < mdp.num_actions(); ++a) t += mdp.kernel(a);
  Vector choices = Vector::Constant(n, mdp.num_actions());
  for (const auto& o : options) {
    const auto landing = option_landing(mdp, o);
    for (int s = 0; s < n; ++s) {
      if (!o.available_at(s)) continue;
      choices(s) += 1.0;
      for (const auto& l : landing[static_cast<std::size_t>(s)]) t(s, l.state) += l.prob;
    }
  }
  return choices.cwiseInverse().asDiagonal() * t;
}

Vector covering_eigenvector(const TabularMDP& mdp, const std::vector<OptionDef>& options, BasisSource basis,
                            double gamma_sr) {
  if (mdp.num_states() < 2) throw PreconditionError("covering options need at least two states");
  const Matrix w = options_adjacency(mdp, options);
  for (bool seen : reachable_from(w, 0))
    if (!seen) throw ConnectivityError("environment graph is not connected");
  if (basis == BasisSource::Laplacian) return normalized_laplacian(w).basis.vector(1);
  const SRMatrix sr = sr_closed_form(options_induced_matrix(mdp, options), gamma_sr);
  return eigendecompose(sr.psi, true, EigenOrder::Descending, BasisSource::SR).vector(1);
}

std::vector<OptionDef> discover_covering_options(const TabularMDP& mdp, const CoveringParams& params) {
  if (params.n_iter < 0) throw PreconditionError("n_iter must be non-negative");
  std::vector<OptionDef> options;
  const char* method = params.basis == BasisSource::Laplacian ? "covering-lap" : "covering-sr";
  for (int it = 0; it < params.n_iter; ++it) {
    const Vector e = covering_eigenvector(mdp, options, params.basis, params.gamma_sr);
    for (int d : {1, -1})
      options.push_back(covering_option(mdp, e, d, params.gamma_o,
                                        std::string(method) + ":iter=" + std::to_string(it) + ":dir=" + (d > 0 ? "+" : "-")));
  }
  if (params.broad_initiation) {
    for (auto& o : options)
      for (int s = 0; s < o.num_states(); ++s) o.initiation[static_cast<std::size_t>(s)] = !o.terminates_at(s);
  }
  return options;
}

std::vector<OptionDef> discover_covering_options_online(const TabularMDP& mdp, const OnlineCoveringParams& params,
                                                        Rng& rng) {
  const int n = mdp.num_states();
  std::vector<OptionDef> options;
  for (int it = 0; it < params.n_iter; ++it) {
    const long episode = params.episode_len > 0 ? params.episode_len : params.steps_per_iter;
    const RunResult run = run_episodes(mdp, options, OptionSampler::uniform(), params.steps_per_iter, episode,
                                       params.start_state, true, rng);
    const SRMatrix sr = sr_td_learn(run.data.records(), n, params.eta, params.gamma_sr, params.sr_passes);
    const Vector e = eigendecompose(sr.psi, true, EigenOrder::Descending).vector(1);

    // Extremes are taken over states the data actually covers.
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (const auto& t : run.data.records()) seen[static_cast<std::size_t>(t.s)] = seen[static_cast<std::size_t>(t.s_next)] = true;
    const double inf = std::numeric_limits<double>::infinity();
    for (int d : {1, -1}) {
      Vector hi = d * e, lo = d * e;
      for (int s = 0; s < n; ++s)
        if (!seen[static_cast<std::size_t>(s)]) hi(s) = -inf, lo(s) = inf;
      const int target = argmax_state(hi);
      const int source = argmin_state(lo);
      const QTable q = replay_q_learning(
          run.data.records(), n, mdp.num_actions(), [target](int, int s_next) { return s_next == target ? 1.0 : 0.0; },
          params.alpha_o, params.gamma_o, params.q_passes);
      OptionDef o;
      o.label = "covering-online:iter=" + std::to_string(it) + ":dir=" + (d > 0 ? "+" : "-");
      o.policy.resize(static_cast<std::size_t>(n));
      for (int s = 0; s < n; ++s) o.policy[static_cast<std::size_t>(s)] = q.greedy_primitive(s);
      o.termination.assign(static_cast<std::size_t>(n), 0.0);
      o.termination[static_cast<std::size_t>(target)] = 1.0;
      o.initiation.assign(static_cast<std::size_t>(n), false);
      if (source != target) o.initiation[static_cast<std::size_t>(source)] = true;
      options.push_back(std::move(o));
    }
  }
  return options;
}

namespace {

// eigendecompose leaves the first nonzero entry positive, so flipping on an
// exact zero sum makes it negative.
Vector orient_negative(Vector e) {
  if (e.sum() >= 0.0) e = -e;
  return e;
}

}  // namespace

Vector ceo_eigenvector(const SRMatrix& sr) {
  return orient_negative(eigendecompose(sr.psi, true, EigenOrder::Descending).vector(0));
}

CeoResult run_ceo(const TabularMDP& mdp, const CeoParams& params, std::uint64_t seed, const StepCallback& on_step) {
  if (params.p_option < 0.0 || params.p_option >= (1.0 - params.p_option) / mdp.num_actions())
    throw PreconditionError("p_option must be below the probability of any single primitive action");
  const int n = mdp.num_states();
  const int start = params.start_state ? *params.start_state : top_right_state(mdp);
  Rng rng(seed);

  CeoResult out;
  out.visits.assign(static_cast<std::size_t>(n), 0);
  int s = start;
  for (int it = 0; it < params.n_iter; ++it) {
    RunConfig cfg{params.n_steps, params.reset_each_iteration ? start : s, false};
    const RunResult run = run_with_options(mdp, out.state.options, OptionSampler::with_option_probability(params.p_option),
                                           cfg, rng, on_step);
    out.state.dataset.append(run.data);
    for (int i = 0; i < n; ++i) out.visits[static_cast<std::size_t>(i)] += run.visits[static_cast<std::size_t>(i)];
    out.steps += run.steps_taken;
    s = run.final_state;
    if (run.stopped) {
      out.stopped = true;
      break;
    }

    out.state.sr = sr_td_learn(out.state.dataset.records(), n, params.eta, params.gamma_sr, params.sr_passes);
    const EigenBasis basis = eigendecompose(out.state.sr.psi, true, EigenOrder::Descending);
    const Vector e = orient_negative(basis.vector(0));
    const Eigenpurpose purpose{e, 1, PurposeKind::Eigenoption};
    const QTable q = replay_q_learning(out.state.dataset.records(), n, mdp.num_actions(), eigenpurpose_reward(purpose),
                                       params.alpha_o, params.gamma_o, params.q_passes);
    OptionDef option = option_from_q(q, "ceo:iter=" + std::to_string(it));

    CeoIterationLog entry;
    entry.iteration = it;
    entry.dataset_size = out.state.dataset.size();
    entry.top_eigenvalue = basis.values(0);
    entry.initiation_size = static_cast<int>(option.initiation_states().size());
    entry.terminal_size = static_cast<int>(option.terminal_states().size());
    out.log.push_back(entry);
    out.state.options.push_back(std::move(option));
    out.state.iteration = it + 1;
  }
  return out;
}

}  // namespace rod
