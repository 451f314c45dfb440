#include "rodkit/execution.hpp"

#include <algorithm>
#include <string>

#include "rodkit/errors.hpp"

namespace rod {

namespace {

int sample_next(const TabularMDP& mdp, int s, int a, Rng& rng) {
  const auto succ = mdp.successors(s, a);
  if (succ.size() == 1) return succ.front().state;
  double u = rng.uniform();
  for (const auto& x : succ) {
    if (u < x.prob) return x.state;
    u -= x.prob;
  }
  return succ.back().state;
}

std::vector<int> available_options(std::span<const OptionDef> options, int s) {
  std::vector<int> out;
  for (std::size_t i = 0; i < options.size(); ++i)
    if (options[i].available_at(s)) out.push_back(static_cast<int>(i));
  return out;
}

// Returns a primitive action (< nA) or nA + option index.
int choose(const OptionSampler& sampler, int n_actions, const std::vector<int>& avail, Rng& rng) {
  if (sampler.kind == OptionSampler::Kind::OptionProbability) {
    if (!avail.empty() && rng.bernoulli(sampler.p_option))
      return n_actions + avail[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(avail.size())))];
    return rng.uniform_int(n_actions);
  }
  const int c = rng.uniform_int(n_actions + static_cast<int>(avail.size()));
  return c < n_actions ? c : n_actions + avail[static_cast<std::size_t>(c - n_actions)];
}

void warn_cap(const OptionDef& option, int cap) {
  warn("option '" + option.label + "' ran for " + std::to_string(cap) + " steps without terminating; cut off");
}

int greedy_random_tie(const Matrix& q, int s, Rng& rng) {
  const auto na = q.cols();
  const double best = q.row(s).maxCoeff();
  int ties[16];
  int count = 0;
  for (Eigen::Index a = 0; a < na && count < 16; ++a)
    if (q(s, a) >= best - kTieTolerance) ties[count++] = static_cast<int>(a);
  return count == 1 ? ties[0] : ties[rng.uniform_int(count)];
}

}  // namespace

int max_option_steps(const TabularMDP& mdp) { return 4 * mdp.num_states(); }

RunResult run_with_options(const TabularMDP& mdp, std::span<const OptionDef> options,
                           const OptionSampler& sampler, const RunConfig& config, Rng& rng,
                           const StepCallback& on_step) {
  const int na = mdp.num_actions();
  const int cap = max_option_steps(mdp);
  for (const auto& o : options)
    if (o.num_states() != mdp.num_states()) throw ShapeError("option defined over a different state space");
  if (config.start_state < 0 || config.start_state >= mdp.num_states()) throw ShapeError("start state out of range");

  RunResult out;
  out.visits.assign(static_cast<std::size_t>(mdp.num_states()), 0);
  int s = config.start_state;

  auto step = [&](int a) {
    const int next = sample_next(mdp, s, a, rng);
    ++out.steps_taken;
    ++out.visits[static_cast<std::size_t>(next)];
    const int from = s;
    s = next;
    if (on_step && !on_step(from, a, next)) out.stopped = true;
    return from;
  };

  while (out.steps_taken < config.steps && !out.stopped) {
    const int c = choose(sampler, na, available_options(options, s), rng);
    if (c < na) {
      const int from = step(c);
      out.data.append({from, c, 0.0, s, true});
      continue;
    }
    const auto& option = options[static_cast<std::size_t>(c - na)];
    const int origin = s;
    int run = 0;
    while (out.steps_taken < config.steps && !out.stopped) {
      const int a = option.policy[static_cast<std::size_t>(s)];
      const int from = step(a);
      if (!config.teleport_log) out.data.append({from, a, 0.0, s, true});
      if (option.terminates_at(s)) break;
      if (++run >= cap) {
        warn_cap(option, cap);
        break;
      }
    }
    if (config.teleport_log) out.data.append({origin, c, 0.0, s, false});
  }
  out.final_state = s;
  return out;
}

RunResult run_episodes(const TabularMDP& mdp, std::span<const OptionDef> options, const OptionSampler& sampler,
                       long steps, long episode_len, int start_state, bool teleport_log, Rng& rng) {
  if (episode_len <= 0) throw PreconditionError("episode_len must be positive");
  RunResult out;
  out.visits.assign(static_cast<std::size_t>(mdp.num_states()), 0);
  out.final_state = start_state;
  while (out.steps_taken < steps) {
    const RunConfig cfg{std::min(episode_len, steps - out.steps_taken), start_state, teleport_log};
    RunResult run = run_with_options(mdp, options, sampler, cfg, rng);
    out.data.append(run.data);
    for (std::size_t s = 0; s < out.visits.size(); ++s) out.visits[s] += run.visits[s];
    out.steps_taken += run.steps_taken;
    out.final_state = run.final_state;
  }
  return out;
}

std::vector<std::vector<Successor>> option_landing(const TabularMDP& mdp, const OptionDef& option) {
  const int n = mdp.num_states();
  if (option.num_states() != n) throw ShapeError("option defined over a different state space");
  std::vector<std::vector<Successor>> out(static_cast<std::size_t>(n));

  if (mdp.deterministic()) {
    const int cap = max_option_steps(mdp);
    for (int s0 = 0; s0 < n; ++s0) {
      if (!option.available_at(s0)) continue;
      int s = s0;
      for (int run = 0;; ) {
        s = mdp.next_state(s, option.policy[static_cast<std::size_t>(s)]);
        if (option.terminates_at(s)) break;
        if (++run >= cap) {
          warn_cap(option, cap);
          break;
        }
      }
      out[static_cast<std::size_t>(s0)].push_back({s, 1.0});
    }
    return out;
  }

  // Stochastic dynamics: absorption probabilities of the chain that follows
  // the option policy and stops on entering a terminal state.
  Matrix p(n, n);
  for (int s = 0; s < n; ++s) p.row(s) = mdp.kernel(option.policy[static_cast<std::size_t>(s)]).row(s);
  Matrix cont = p;
  for (int t = 0; t < n; ++t)
    if (option.terminates_at(t)) cont.col(t).setZero();
  Matrix stop = p - cont;
  const Matrix system = Matrix::Identity(n, n) - cont;
  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw CapExceeded("option '" + option.label + "' can run forever");
  const Matrix landing = lu.solve(stop);
  for (int s = 0; s < n; ++s) {
    if (!option.available_at(s)) continue;
    for (int t = 0; t < n; ++t)
      if (landing(s, t) > 1e-15) out[static_cast<std::size_t>(s)].push_back({t, landing(s, t)});
  }
  return out;
}

QLearningResult q_learning(const TabularMDP& mdp, int start_state, const TransitionReward& reward,
                           const std::vector<bool>& absorbing, const QLearningParams& params,
                           std::span<const OptionDef> options, Rng& rng, const QTable* initial) {
  if (!(params.alpha >= 0.0)) throw PreconditionError("alpha must be non-negative");
  if (params.epsilon < 0.0 || params.epsilon > 1.0) throw PreconditionError("epsilon must lie in [0,1]");
  const int n = mdp.num_states();
  const int na = mdp.num_actions();
  const int cap = max_option_steps(mdp);
  if (static_cast<int>(absorbing.size()) != n) throw ShapeError("absorbing mask has wrong length");

  QLearningResult out;
  out.q = initial ? *initial : QTable{Matrix::Zero(n, na), false};
  if (out.q.num_states() != n || out.q.num_primitive() != na) throw ShapeError("initial q table has wrong shape");
  Matrix& q = out.q.values;
  auto is_absorbing = [&](int s) { return static_cast<bool>(absorbing[static_cast<std::size_t>(s)]); };

  for (int ep = 0; ep < params.episodes; ++ep) {
    int s = start_state;
    int steps = 0;
    double ret = 0.0;
    double discount = 1.0;
    bool done = is_absorbing(s);

    auto step = [&](int a) {
      const int next = sample_next(mdp, s, a, rng);
      const double r = reward(s, next);
      const double target = is_absorbing(next) ? r : r + params.gamma * out.q.max_primitive(next);
      q(s, a) += params.alpha * (target - q(s, a));
      ret += discount * r;
      discount *= params.gamma;
      ++steps;
      s = next;
      done = is_absorbing(next);
    };

    while (!done && steps < params.max_steps) {
      if (params.epsilon > 0.0 && rng.uniform() < params.epsilon) {
        const auto avail = available_options(options, s);
        const int c = choose(OptionSampler::uniform(), na, avail, rng);
        if (c < na) {
          step(c);
          continue;
        }
        const auto& option = options[static_cast<std::size_t>(c - na)];
        for (int run = 0; !done && steps < params.max_steps;) {
          step(option.policy[static_cast<std::size_t>(s)]);
          if (option.terminates_at(s)) break;
          if (++run >= cap) {
            warn_cap(option, cap);
            break;
          }
        }
      } else {
        step(params.random_ties ? greedy_random_tie(q, s, rng) : out.q.greedy_primitive(s));
      }
    }
    out.returns.push_back(ret);
  }
  return out;
}

}  // namespace rod
