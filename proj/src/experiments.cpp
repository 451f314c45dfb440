#include "rodkit/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "json.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/keyboard.hpp"
#include "rodkit/parallel.hpp"

#ifndef RODKIT_VERSION
#define RODKIT_VERSION "0.0.0"
#endif

namespace rod {

std::string toolkit_version() { return RODKIT_VERSION; }

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RunRecorder::RunRecorder(std::filesystem::path dir, std::string command, const ExperimentConfig& config)
    : artifacts_(std::move(dir)), command_(std::move(command)), config_(config_entries(config)), start_(now_seconds()) {}

void RunRecorder::write(const std::string& name, const std::string& content) { artifacts_.write(name, content); }

void RunRecorder::seed_stream(const std::string& name, const std::string& schedule) {
  seeds_.emplace_back(name, schedule);
}

void RunRecorder::note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

std::vector<std::string> RunRecorder::finish() {
  nlohmann::ordered_json m;
  m["command"] = command_;
  m["version"] = toolkit_version();
  auto& cfg = m["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_) cfg[k] = v;
  auto& seeds = m["seed_schedule"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds_) seeds[k] = v;
  auto& notes = m["notes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : notes_) notes[k] = v;
  m["files"] = artifacts_.names();
  m["wall_time_s"] = now_seconds() - start_;
  artifacts_.write("manifest.json", m.dump(2) + "\n");
  artifacts_.commit();
  return artifacts_.names();
}

namespace {

TabularMDP load_env(const std::string& env, double gamma) { return build_mdp(load_grid(resolve_asset(env)), gamma); }
TabularMDP load_env(const ExperimentConfig& c) { return load_env(c.env, c.gamma); }

EigenBasis random_walk_basis(const TabularMDP& mdp, double gamma) {
  const Matrix p = induced_transition_matrix(mdp, Policy::uniform(mdp.num_states(), mdp.num_actions()));
  return eigendecompose(sr_closed_form(p, gamma).psi);
}

EigenBasis config_basis(const TabularMDP& mdp, const ExperimentConfig& c) {
  if (c.basis == BasisSource::Laplacian) return normalized_laplacian(adjacency_matrix(mdp)).basis;
  return random_walk_basis(mdp, c.gamma);
}

std::string stream_text(std::uint64_t root, const std::string& pattern) {
  return "Rng(" + std::to_string(root) + ")" + pattern;
}

std::string streams_range(int seeds) { return seeds > 0 ? "k = 0.." + std::to_string(seeds - 1) : "none"; }

CeoParams ceo_params(const TabularMDP& mdp, const ExperimentConfig& c) {
  CeoParams p;
  p.eta = c.eta;
  p.alpha_o = c.alpha_o;
  p.gamma_sr = c.gamma_sr;
  p.gamma_o = c.gamma_o;
  p.p_option = c.p_option;
  p.n_steps = c.episode_len;
  p.n_iter = c.n_iter;
  p.sr_passes = c.sr_passes;
  p.q_passes = c.q_passes;
  p.start_state = resolve_start(mdp, c.start);
  return p;
}

CoverConfig cover_config(const TabularMDP& mdp, const ExperimentConfig& c) {
  CoverConfig cc;
  cc.episode_len = c.episode_len;
  cc.start_state = resolve_start(mdp, c.start);
  cc.seeds = c.seeds;
  cc.rng_seed = c.rng_seed;
  cc.cap = c.cap;
  cc.jobs = effective_jobs(c);
  return cc;
}

struct Discovered {
  std::vector<OptionDef> options;
  std::optional<EigenBasis> basis;
  std::vector<CeoIterationLog> ceo_log;
};

// Options for the configured method. Online methods and CEO draw from
// Rng(rng_seed).split(0).
Discovered discover(const TabularMDP& mdp, const ExperimentConfig& c, RunRecorder* rec) {
  Discovered out;
  const int jobs = effective_jobs(c);
  Rng rng = Rng(c.rng_seed).split(0);
  switch (c.method) {
    case Method::Baseline:
    case Method::Keyboard:
      break;
    case Method::Eigenoptions: {
      EigenoptionParams ep;
      ep.k = c.k;
      ep.gamma_o = c.gamma_o;
      ep.point_initiation = c.point_initiation;
      ep.jobs = jobs;
      if (c.closed_form) {
        out.basis = config_basis(mdp, c);
        out.options = discover_eigenoptions(mdp, *out.basis, ep);
      } else {
        const RunResult walk = run_episodes(mdp, {}, OptionSampler::uniform(), c.steps, c.discovery_episode_len,
                                            resolve_start(mdp, c.discovery_start), false, rng);
        const SRMatrix sr = sr_td_learn(walk.data.records(), mdp.num_states(), c.eta, c.gamma_sr, c.sr_passes);
        out.basis = eigendecompose(sr.psi);
        ep.solver = OptionSolver::ReplayQLearning;
        ep.alpha_o = c.alpha_o;
        ep.q_passes = c.q_passes;
        out.options = discover_eigenoptions(mdp, *out.basis, ep, &walk.data);
        if (rec) rec->seed_stream("discovery", stream_text(c.rng_seed, ".split(0)"));
      }
      break;
    }
    case Method::Covering: {
      if (c.closed_form) {
        CoveringParams cp;
        cp.n_iter = c.n_iter;
        cp.basis = c.basis;
        cp.gamma_sr = c.gamma_sr;
        cp.gamma_o = c.gamma_o;
        cp.broad_initiation = c.broad_initiation;
        out.options = discover_covering_options(mdp, cp);
      } else {
        OnlineCoveringParams op;
        op.n_iter = c.n_iter;
        op.steps_per_iter = c.steps;
        op.episode_len = c.discovery_episode_len;
        op.start_state = resolve_start(mdp, c.discovery_start);
        op.eta = c.eta;
        op.gamma_sr = c.gamma_sr;
        op.sr_passes = c.sr_passes;
        op.alpha_o = c.alpha_o;
        op.gamma_o = c.gamma_o;
        op.q_passes = c.q_passes;
        out.options = discover_covering_options_online(mdp, op, rng);
        if (rec) rec->seed_stream("discovery", stream_text(c.rng_seed, ".split(0)"));
      }
      break;
    }
    case Method::Ceo: {
      CeoParams p = ceo_params(mdp, c);
      p.start_state = resolve_start(mdp, c.start);
      auto result = run_ceo(mdp, p, rng.seed());
      out.options = std::move(result.state.options);
      out.ceo_log = std::move(result.log);
      if (rec) rec->seed_stream("discovery", stream_text(c.rng_seed, ".split(0)"));
      break;
    }
  }
  return out;
}

std::string ceo_log_csv(const std::vector<CeoIterationLog>& log) {
  CsvWriter w({"iteration", "dataset_size", "top_eigenvalue", "initiation_size", "terminal_size"});
  for (const auto& l : log)
    w.row({std::to_string(l.iteration), std::to_string(l.dataset_size), format_number(l.top_eigenvalue),
           std::to_string(l.initiation_size), std::to_string(l.terminal_size)});
  return w.str();
}

std::vector<long> seed_ids(int n) {
  std::vector<long> ids(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
  return ids;
}

std::string coverage_summary_csv(const std::vector<std::pair<std::string, CoverageReport>>& reports) {
  CsvWriter w({"method", "seeds", "mean", "sd", "median", "min", "max", "max_visitation"});
  for (const auto& [name, r] : reports)
    w.row({name, std::to_string(r.seeds), format_number(r.mean), format_number(r.sd), format_number(r.median),
           std::to_string(r.min), std::to_string(r.max), format_number(r.visitation.maxCoeff())});
  return w.str();
}

std::vector<OptionDef> prefix(const std::vector<OptionDef>& options, std::size_t n) {
  return {options.begin(), options.begin() + static_cast<std::ptrdiff_t>(std::min(n, options.size()))};
}

// Diffusion rows for every prefix 1..max_count of an option list.
void diffusion_curve(std::vector<DiffusionReport>& out, const TabularMDP& mdp, const std::vector<OptionDef>& options,
                     const std::string& method, const std::vector<int>& counts, int jobs) {
  for (int n : counts) {
    if (n > static_cast<int>(options.size())) break;
    auto r = diffusion_time(mdp, prefix(options, static_cast<std::size_t>(n)), method, false, jobs);
    r.num_options = n;
    out.push_back(std::move(r));
  }
}

std::vector<int> count_range(int from, int to) {
  std::vector<int> out;
  for (int n = from; n <= to; ++n) out.push_back(n);
  return out;
}

std::string tasks_csv(const std::vector<Task>& tasks) {
  CsvWriter w({"task", "start", "goal"});
  for (std::size_t t = 0; t < tasks.size(); ++t)
    w.row({std::to_string(t), std::to_string(tasks[t].start), std::to_string(tasks[t].goal)});
  return w.str();
}

struct RewardRun {
  std::string method;
  int num_options = 0;
  std::vector<ReturnCurve> curves;
};

std::string returns_csv(const std::vector<RewardRun>& runs) {
  CsvWriter w({"method", "num_options", "task", "episode", "mean", "ci_low", "ci_high"});
  for (const auto& run : runs)
    for (std::size_t t = 0; t < run.curves.size(); ++t) {
      const auto& c = run.curves[t];
      for (std::size_t e = 0; e < c.mean.size(); ++e)
        w.row({run.method, std::to_string(run.num_options), std::to_string(t), std::to_string(e),
               format_number(c.mean[e]), format_number(c.ci_low[e]), format_number(c.ci_high[e])});
    }
  return w.str();
}

std::string auc_csv(const std::vector<RewardRun>& runs) {
  CsvWriter w({"method", "num_options", "task", "start", "goal", "auc", "unreachable"});
  for (const auto& run : runs)
    for (std::size_t t = 0; t < run.curves.size(); ++t) {
      const auto& c = run.curves[t];
      w.row({run.method, std::to_string(run.num_options), std::to_string(t), std::to_string(c.task.start),
             std::to_string(c.task.goal), format_number(c.auc), c.unreachable ? "true" : "false"});
    }
  return w.str();
}

RewardExperimentConfig reward_config(const ExperimentConfig& c) {
  RewardExperimentConfig rc;
  rc.q.alpha = c.alpha;
  rc.q.gamma = c.q_gamma;
  rc.q.epsilon = c.epsilon;
  rc.q.episodes = c.episodes;
  rc.q.max_steps = c.max_steps;
  rc.seeds = c.seeds;
  rc.rng_seed = c.rng_seed;
  rc.jobs = effective_jobs(c);
  return rc;
}

Vector to_vector(const std::vector<int>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::string terminal_heatmap(const TabularMDP& mdp, const std::vector<OptionDef>& options) {
  return heatmap_text(heatmap_grid(mdp, to_vector(terminal_frequency(options, mdp.num_states()))));
}

struct KeyboardSetup {
  std::vector<OptionDef> bases;
  std::vector<Eigenpurpose> purposes;
  QCube cube;
};

KeyboardSetup keyboard_setup(const TabularMDP& mdp, const EigenBasis& basis, int k, double gamma_o, bool both, int jobs) {
  KeyboardSetup ks;
  ks.purposes = select_eigenpurposes(basis, k, both);
  ks.bases.resize(ks.purposes.size());
  parallel_for(ks.purposes.size(), jobs, [&](std::size_t i) {
    const auto& p = ks.purposes[i];
    ks.bases[i] = eigenoption_closed_form(mdp, p, gamma_o,
                                          "eigen:rank=" + std::to_string(p.rank) + ":dir=" + (p.direction > 0 ? "+" : "-"));
  });
  ks.cube = evaluate_base_options(ks.bases, ks.purposes, mdp, gamma_o);
  return ks;
}

std::string weights_text(const std::vector<double>& w) {
  std::string s;
  for (double x : w) s += (s.empty() ? "" : " ") + format_number(x);
  return s;
}

std::string keys_text(const std::vector<int>& key) {
  std::string s;
  for (int x : key) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

std::string keyboard_manifest_csv(const KeyboardEnumeration& en) {
  CsvWriter w({"weights", "terminal_states"});
  for (std::size_t i = 0; i < en.all_weights.size(); ++i) w.row({weights_text(en.all_weights[i]), keys_text(en.all_keys[i])});
  return w.str();
}

std::vector<OptionDef> unique_options(const KeyboardEnumeration& en) {
  std::vector<OptionDef> out;
  for (const auto& u : en.unique) out.push_back(u.option);
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_discover(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const auto d = discover(mdp, c, &rec);
  rec.write("options.csv", option_set_csv(d.options));
  if (d.basis) rec.write("basis.csv", basis_csv(*d.basis));
  if (!d.ceo_log.empty()) rec.write("ceo_log.csv", ceo_log_csv(d.ceo_log));
}

void cmd_evaluate(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const auto d = discover(mdp, c, &rec);
  const int jobs = effective_jobs(c);
  const std::string name = method_name(c.method);
  rec.write("options.csv", option_set_csv(d.options));
  auto has = [&](EvalKind e) { return std::find(c.eval.begin(), c.eval.end(), e) != c.eval.end(); };

  if (has(EvalKind::Diffusion)) {
    std::vector<DiffusionReport> reports{diffusion_time(mdp, {}, "baseline", false, jobs)};
    diffusion_curve(reports, mdp, d.options, name, count_range(1, static_cast<int>(d.options.size())), jobs);
    rec.write("diffusion.csv", diffusion_csv(reports));
  }

  std::optional<CoverageReport> cover;
  if (has(EvalKind::Cover) || has(EvalKind::Heatmaps)) {
    const CoverConfig cc = cover_config(mdp, c);
    if (c.method == Method::Ceo) {
      cover = monte_carlo_cover_ceo(mdp, ceo_params(mdp, c), cc);
    } else {
      cover = monte_carlo_cover(mdp, d.options, OptionSampler::uniform(), cc);
    }
    rec.seed_stream("cover", stream_text(c.rng_seed, ".split(k), " + streams_range(c.seeds)));
    if (has(EvalKind::Cover)) {
      rec.write("coverage.csv", coverage_csv(*cover, seed_ids(c.seeds)));
      rec.write("coverage_summary.csv", coverage_summary_csv({{name, *cover}}));
    }
  }

  if (has(EvalKind::Reward)) {
    Rng task_rng(c.rng_seed);
    const auto tasks = sample_tasks(mdp, c.tasks, task_rng);
    const auto rc = reward_config(c);
    std::vector<RewardRun> runs{{"baseline", 0, reward_experiment(mdp, tasks, {}, rc)}};
    if (!d.options.empty())
      runs.push_back({name, static_cast<int>(d.options.size()), reward_experiment(mdp, tasks, d.options, rc)});
    rec.write("tasks.csv", tasks_csv(tasks));
    rec.write("returns.csv", returns_csv(runs));
    rec.write("auc.csv", auc_csv(runs));
    rec.seed_stream("tasks", stream_text(c.rng_seed, ""));
    rec.seed_stream("reward", stream_text(c.rng_seed, ".split(task).split(k), " + streams_range(c.seeds)));
  }

  if (has(EvalKind::Heatmaps)) {
    rec.write("visitation.txt", heatmap_text(heatmap_grid(mdp, cover->visitation)));
    rec.write("terminal_frequency.txt", terminal_heatmap(mdp, d.options));
  }
}

void cmd_keyboard(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const auto ks = keyboard_setup(mdp, config_basis(mdp, c), c.k, c.gamma_o, true, jobs);
  const auto en = enumerate_keyboard(ks.cube, c.weight_alphabet, jobs);
  CsvWriter counts({"num_base", "unique"});
  for (std::size_t m = 0; m < en.unique_by_prefix.size(); ++m)
    counts.row({std::to_string(m + 1), std::to_string(en.unique_by_prefix[m])});
  rec.write("keyboard_counts.csv", counts.str());
  rec.write("keyboard_manifest.csv", keyboard_manifest_csv(en));
  rec.write("base_options.csv", option_set_csv(ks.bases));
  rec.write("options.csv", option_set_csv(unique_options(en)));
  rec.note("degenerate_composites", std::to_string(en.degenerate));
}

void cmd_ceo(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const auto report = monte_carlo_cover_ceo(mdp, ceo_params(mdp, c), cover_config(mdp, c));
  rec.seed_stream("cover", stream_text(c.rng_seed, ".split(k), " + streams_range(c.seeds)));
  rec.write("coverage.csv", coverage_csv(report, seed_ids(c.seeds)));
  rec.write("coverage_summary.csv", coverage_summary_csv({{"ceo", report}}));
  rec.write("visitation.txt", heatmap_text(heatmap_grid(mdp, report.visitation)));
}

// ---------------------------------------------------------------------------
// Recipes

void fig7(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const EigenBasis basis = random_walk_basis(mdp, c.gamma);
  EigenoptionParams ep;
  ep.k = c.k;
  ep.gamma_o = c.gamma_o;
  ep.jobs = jobs;
  const auto eigen = discover_eigenoptions(mdp, basis, ep);
  CoveringParams cp;
  cp.n_iter = (c.k + 1) / 2;
  cp.basis = BasisSource::Laplacian;
  cp.gamma_o = c.gamma_o;
  const auto covering = discover_covering_options(mdp, cp);

  std::vector<DiffusionReport> reports{diffusion_time(mdp, {}, "baseline", false, jobs)};
  diffusion_curve(reports, mdp, eigen, "eigenoptions", count_range(1, c.k), jobs);
  diffusion_curve(reports, mdp, covering, "covering", count_range(1, c.k), jobs);
  rec.write("diffusion.csv", diffusion_csv(reports));

  CsvWriter lengths({"option", "label", "eigenvalue", "avg_length"});
  const auto purposes = select_eigenpurposes(basis, c.k);
  for (std::size_t i = 0; i < eigen.size(); ++i)
    lengths.row({std::to_string(i), eigen[i].label, format_number(basis.values(purposes[i].rank)),
                 format_number(average_option_length(mdp, eigen[i]))});
  rec.write("eigenoption_lengths.csv", lengths.str());
  rec.write("eigenoptions.csv", option_set_csv(eigen));
  rec.write("covering_options.csv", option_set_csv(covering));
}

void fig8(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const EigenBasis basis = random_walk_basis(mdp, c.gamma);
  EigenoptionParams ep;
  ep.k = c.k;
  ep.gamma_o = c.gamma_o;
  const auto eigen = discover_eigenoptions(mdp, basis, ep);
  CoveringParams cp;
  cp.n_iter = (c.k + 1) / 2;
  cp.basis = BasisSource::Laplacian;
  cp.gamma_o = c.gamma_o;
  const auto covering = prefix(discover_covering_options(mdp, cp), static_cast<std::size_t>(c.k));

  Rng task_rng(c.rng_seed);
  const auto tasks = sample_tasks(mdp, c.tasks, task_rng);
  const auto rc = reward_config(c);
  std::vector<RewardRun> runs;
  runs.push_back({"baseline", 0, reward_experiment(mdp, tasks, {}, rc)});
  runs.push_back({"eigenoptions", static_cast<int>(eigen.size()), reward_experiment(mdp, tasks, eigen, rc)});
  runs.push_back({"covering", static_cast<int>(covering.size()), reward_experiment(mdp, tasks, covering, rc)});
  rec.write("tasks.csv", tasks_csv(tasks));
  rec.write("returns.csv", returns_csv(runs));
  rec.write("auc.csv", auc_csv(runs));
  rec.seed_stream("tasks", stream_text(c.rng_seed, ""));
  rec.seed_stream("q_learning", stream_text(c.rng_seed, ".split(task).split(k), " + streams_range(c.seeds)));
}

void fig9(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const EigenBasis basis = random_walk_basis(mdp, c.gamma);
  EigenoptionParams ep;
  ep.k = c.k;
  ep.gamma_o = c.gamma_o;
  ep.jobs = jobs;
  const auto eigen = discover_eigenoptions(mdp, basis, ep);
  ep.point_initiation = true;
  const auto eigen_point = discover_eigenoptions(mdp, basis, ep);
  CoveringParams cp;
  cp.n_iter = (c.k + 1) / 2;
  cp.basis = BasisSource::Laplacian;
  cp.gamma_o = c.gamma_o;
  const auto covering = discover_covering_options(mdp, cp);
  cp.broad_initiation = true;
  const auto covering_broad = discover_covering_options(mdp, cp);

  const auto counts = count_range(1, c.k);
  std::vector<DiffusionReport> reports{diffusion_time(mdp, {}, "baseline", false, jobs)};
  diffusion_curve(reports, mdp, covering, "covering", counts, jobs);
  diffusion_curve(reports, mdp, covering_broad, "covering-broad-initiation", counts, jobs);
  diffusion_curve(reports, mdp, eigen_point, "point-eigenoptions", counts, jobs);
  diffusion_curve(reports, mdp, eigen, "eigenoptions", counts, jobs);
  rec.write("diffusion.csv", diffusion_csv(reports));
}

// Online discovery is repeated for every run and SR budget; the diffusion
// numbers are averaged over runs.
void fig10(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const std::vector<int> episode_counts{1, 5, 10};
  const std::vector<int> counts{2, 4, 8, 16, 32};
  const int max_count = std::min(c.k, counts.back());
  const int start = resolve_start(mdp, c.discovery_start);

  struct Cell {
    std::string method;
    std::string episodes;
    int num_options = 0;
    double avg = 0.0, median = 0.0, unreachable = 0.0;
    int runs = 0;
  };
  std::vector<Cell> cells;

  // Closed-form references.
  {
    EigenoptionParams ep;
    ep.k = max_count;
    ep.gamma_o = c.gamma_o;
    ep.jobs = jobs;
    const auto eigen = discover_eigenoptions(mdp, random_walk_basis(mdp, c.gamma_sr), ep);
    CoveringParams cp;
    cp.n_iter = (max_count + 1) / 2;
    cp.basis = BasisSource::SR;
    cp.gamma_sr = c.gamma_sr;
    cp.gamma_o = c.gamma_o;
    const auto covering = discover_covering_options(mdp, cp);
    for (const auto& [method, options] : {std::pair{"eigenoptions", &eigen}, std::pair{"covering", &covering}})
      for (int n : counts) {
        if (n > max_count) break;
        const auto r = diffusion_time(mdp, prefix(*options, static_cast<std::size_t>(n)), {}, false, jobs);
        cells.push_back({method, "closed-form", n, r.avg, r.median, static_cast<double>(r.num_unreachable), 1});
      }
  }

  const std::size_t n_counts = static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [&](int n) { return n <= max_count; }));
  const std::size_t n_runs = static_cast<std::size_t>(c.seeds);
  // results[(e * runs + k) * 2 + method][count]
  std::vector<std::vector<DiffusionReport>> results(episode_counts.size() * n_runs * 2);
  const Rng root(c.rng_seed);
  parallel_for(episode_counts.size() * n_runs, jobs, [&](std::size_t job) {
    const std::size_t e = job / n_runs;
    const std::size_t k = job % n_runs;
    const long steps = static_cast<long>(episode_counts[e]) * c.discovery_episode_len;

    Rng rng = root.split(e).split(k);
    const RunResult walk =
        run_episodes(mdp, {}, OptionSampler::uniform(), steps, c.discovery_episode_len, start, false, rng);
    const SRMatrix sr = sr_td_learn(walk.data.records(), mdp.num_states(), c.eta, c.gamma_sr, c.sr_passes);
    EigenoptionParams ep;
    ep.k = max_count;
    ep.gamma_o = c.gamma_o;
    ep.solver = OptionSolver::ReplayQLearning;
    ep.alpha_o = c.alpha_o;
    ep.q_passes = c.q_passes;
    const auto eigen = discover_eigenoptions(mdp, eigendecompose(sr.psi), ep, &walk.data);

    OnlineCoveringParams op;
    op.n_iter = (max_count + 1) / 2;
    op.steps_per_iter = steps;
    op.episode_len = c.discovery_episode_len;
    op.start_state = start;
    op.eta = c.eta;
    op.gamma_sr = c.gamma_sr;
    op.sr_passes = c.sr_passes;
    op.alpha_o = c.alpha_o;
    op.gamma_o = c.gamma_o;
    op.q_passes = c.q_passes;
    Rng cov_rng = root.split(e).split(k).split(1);
    const auto covering = discover_covering_options_online(mdp, op, cov_rng);

    for (int m = 0; m < 2; ++m) {
      const auto& options = m == 0 ? eigen : covering;
      auto& out = results[job * 2 + static_cast<std::size_t>(m)];
      for (std::size_t i = 0; i < n_counts; ++i)
        out.push_back(diffusion_time(mdp, prefix(options, static_cast<std::size_t>(counts[i])), {}, false, 1));
    }
  });

  for (std::size_t e = 0; e < episode_counts.size(); ++e)
    for (int m = 0; m < 2; ++m)
      for (std::size_t i = 0; i < n_counts; ++i) {
        Cell cell{m == 0 ? "eigenoptions-online" : "covering-online", std::to_string(episode_counts[e]), counts[i]};
        for (std::size_t k = 0; k < n_runs; ++k) {
          const auto& r = results[(e * n_runs + k) * 2 + static_cast<std::size_t>(m)][i];
          cell.avg += r.avg;
          cell.median += r.median;
          cell.unreachable += r.num_unreachable;
          ++cell.runs;
        }
        if (cell.runs > 0) {
          cell.avg /= cell.runs;
          cell.median /= cell.runs;
          cell.unreachable /= cell.runs;
        }
        cells.push_back(cell);
      }

  CsvWriter w({"method", "episodes", "num_options", "avg", "median", "num_unreachable", "runs"});
  for (const auto& cell : cells)
    w.row({cell.method, cell.episodes, std::to_string(cell.num_options), format_number(cell.avg),
           format_number(cell.median), format_number(cell.unreachable), std::to_string(cell.runs)});
  rec.write("diffusion.csv", w.str());
  rec.note("episode_counts", "1,5,10");
  rec.seed_stream("eigenoptions_online", stream_text(c.rng_seed, ".split(e).split(k), " + streams_range(c.seeds)));
  rec.seed_stream("covering_online", stream_text(c.rng_seed, ".split(e).split(k).split(1), " + streams_range(c.seeds)));
}

void fig11(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const CoverConfig cc = cover_config(mdp, c);
  const auto random = monte_carlo_cover(mdp, {}, OptionSampler::uniform(), cc);
  const auto ceo = monte_carlo_cover_ceo(mdp, ceo_params(mdp, c), cc);
  rec.write("visitation_random.txt", heatmap_text(heatmap_grid(mdp, random.visitation)));
  rec.write("visitation_ceo.txt", heatmap_text(heatmap_grid(mdp, ceo.visitation)));
  rec.write("coverage_summary.csv", coverage_summary_csv({{"random", random}, {"ceo", ceo}}));
  rec.seed_stream("cover", stream_text(c.rng_seed, ".split(k), " + streams_range(c.seeds)));
}

void fig13(const ExperimentConfig& c, RunRecorder& rec) {
  const int jobs = effective_jobs(c);
  CsvWriter w({"env", "alphabet", "num_base", "unique"});
  for (const std::string env : {"openroom", "fourroom"}) {
    const TabularMDP mdp = load_env(env, c.gamma);
    const auto ks = keyboard_setup(mdp, random_walk_basis(mdp, c.gamma), c.k, c.gamma_o, true, jobs);
    const auto en = enumerate_keyboard(ks.cube, c.weight_alphabet, jobs);
    std::string alphabet;
    for (double a : c.weight_alphabet) alphabet += (alphabet.empty() ? "" : " ") + format_number(a);
    for (std::size_t m = 0; m < en.unique_by_prefix.size(); ++m)
      w.row({env, alphabet, std::to_string(m + 1), std::to_string(en.unique_by_prefix[m])});
  }
  rec.write("keyboard_counts.csv", w.str());
}

void terminal_figure(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const auto ks = keyboard_setup(mdp, random_walk_basis(mdp, c.gamma), c.k, c.gamma_o, true, jobs);
  const auto en = enumerate_keyboard(ks.cube, c.weight_alphabet, jobs);
  const auto combined = unique_options(en);
  const auto base = terminal_frequency(ks.bases, mdp.num_states());
  const auto keyboard = terminal_frequency(combined, mdp.num_states());
  CsvWriter w({"state", "row", "col", "base", "keyboard"});
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto cell = mdp.coords()[static_cast<std::size_t>(s)];
    w.row({std::to_string(s), std::to_string(cell.row), std::to_string(cell.col),
           std::to_string(base[static_cast<std::size_t>(s)]), std::to_string(keyboard[static_cast<std::size_t>(s)])});
  }
  rec.write("terminal_frequency.csv", w.str());
  rec.write("terminal_base.txt", terminal_heatmap(mdp, ks.bases));
  rec.write("terminal_keyboard.txt", terminal_heatmap(mdp, combined));
  auto distinct = [](const std::vector<int>& f) { return std::count_if(f.begin(), f.end(), [](int x) { return x > 0; }); };
  rec.note("distinct_terminal_base", std::to_string(distinct(base)));
  rec.note("distinct_terminal_keyboard", std::to_string(distinct(keyboard)));
}

// Diffusion against the number of base eigenoptions, with and without the
// options the keyboard synthesizes from them.
void ok_diffusion(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  const EigenBasis basis = random_walk_basis(mdp, c.gamma);
  const auto both = keyboard_setup(mdp, basis, c.k, c.gamma_o, true, jobs);
  const auto plus = keyboard_setup(mdp, basis, c.k, c.gamma_o, false, jobs);
  const int n_base = static_cast<int>(both.bases.size());

  auto sub_cube = [](const QCube& cube, int m) {
    QCube out;
    out.n_base = m;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out.values.push_back(cube.at(i, j));
    return out;
  };

  std::vector<DiffusionReport> reports{diffusion_time(mdp, {}, "baseline", false, jobs)};
  CsvWriter sizes({"method", "num_base", "options_used"});
  for (int m = 1; m <= n_base; ++m) {
    auto r = diffusion_time(mdp, prefix(both.bases, static_cast<std::size_t>(m)), "eigenoptions", false, jobs);
    r.num_options = m;
    reports.push_back(r);
    sizes.row({"eigenoptions", std::to_string(m), std::to_string(m)});

    const auto en01 = enumerate_keyboard(sub_cube(both.cube, m), {0.0, 1.0}, jobs);
    const auto ok01 = unique_options(en01);
    r = diffusion_time(mdp, ok01, "ok-eigenoptions[0,1]", false, jobs);
    r.num_options = m;
    reports.push_back(r);
    sizes.row({"ok-eigenoptions[0,1]", std::to_string(m), std::to_string(ok01.size())});

    if (m <= static_cast<int>(plus.bases.size())) {
      const auto en3 = enumerate_keyboard(sub_cube(plus.cube, m), {-1.0, 0.0, 1.0}, jobs);
      const auto ok3 = unique_options(en3);
      r = diffusion_time(mdp, ok3, "ok-eigenoptions[-1,0,1]", false, jobs);
      r.num_options = m;
      reports.push_back(r);
      sizes.row({"ok-eigenoptions[-1,0,1]", std::to_string(m), std::to_string(ok3.size())});
    }
  }
  rec.write("diffusion.csv", diffusion_csv(reports));
  rec.write("option_counts.csv", sizes.str());
}

void ceo_recipe(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const CoverConfig cc = cover_config(mdp, c);
  const auto ceo = monte_carlo_cover_ceo(mdp, ceo_params(mdp, c), cc);
  const auto random = monte_carlo_cover(mdp, {}, OptionSampler::uniform(), cc);
  rec.write("coverage.csv", coverage_csv(ceo, seed_ids(c.seeds)));
  rec.write("coverage_random.csv", coverage_csv(random, seed_ids(c.seeds)));
  rec.write("coverage_summary.csv", coverage_summary_csv({{"ceo", ceo}, {"random", random}}));
  rec.seed_stream("cover", stream_text(c.rng_seed, ".split(k), " + streams_range(c.seeds)));
}

void appendix_f(const ExperimentConfig& c, RunRecorder& rec) {
  const TabularMDP mdp = load_env(c);
  const int jobs = effective_jobs(c);
  CoveringParams cp;
  cp.n_iter = (c.k + 1) / 2;
  cp.gamma_sr = c.gamma_sr;
  cp.gamma_o = c.gamma_o;
  cp.basis = BasisSource::Laplacian;
  const auto lap = discover_covering_options(mdp, cp);
  cp.basis = BasisSource::SR;
  const auto sr = discover_covering_options(mdp, cp);
  std::vector<DiffusionReport> reports{diffusion_time(mdp, {}, "baseline", false, jobs)};
  diffusion_curve(reports, mdp, lap, "covering-laplacian", count_range(1, c.k), jobs);
  diffusion_curve(reports, mdp, sr, "covering-sr", count_range(1, c.k), jobs);
  rec.write("diffusion.csv", diffusion_csv(reports));
}

using Recipe = void (*)(const ExperimentConfig&, RunRecorder&);

const std::vector<std::pair<std::string, Recipe>>& recipes() {
  static const std::vector<std::pair<std::string, Recipe>> table{
      {"fig7", fig7},   {"fig8", fig8},   {"fig9", fig9},
      {"fig10", fig10}, {"fig11", fig11}, {"fig13", fig13},
      {"fig14", terminal_figure}, {"fig15", terminal_figure},
      {"fig16", ok_diffusion}, {"fig17", ok_diffusion},
      {"ceo", ceo_recipe}, {"appendixF", appendix_f},
  };
  return table;
}

}  // namespace

RunSummary run_command(Command command, const ExperimentConfig& config) {
  require_valid(config);
  static const char* names[] = {"discover", "evaluate", "keyboard", "ceo"};
  RunRecorder rec(config.out_dir, names[static_cast<int>(command)], config);
  switch (command) {
    case Command::Discover: cmd_discover(config, rec); break;
    case Command::Evaluate: cmd_evaluate(config, rec); break;
    case Command::Keyboard: cmd_keyboard(config, rec); break;
    case Command::Ceo: cmd_ceo(config, rec); break;
  }
  auto files = rec.finish();
  return {rec.dir(), std::move(files)};
}

const std::vector<std::string>& reproduce_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, fn] : recipes()) out.push_back(id);
    return out;
  }();
  return ids;
}

namespace {

std::string valid_ids_text() {
  std::string s;
  for (const auto& id : reproduce_ids()) s += (s.empty() ? "" : ", ") + id;
  return s;
}

}  // namespace

ExperimentConfig recipe_config(const std::string& id) {
  const auto& ids = reproduce_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw ConfigError("unknown experiment '" + id + "'; valid ids: " + valid_ids_text());
  return load_config(resolve_asset("configs/" + id + ".ini").string());
}

RunSummary reproduce(const std::string& id, const ReproduceOptions& options) {
  ExperimentConfig config = recipe_config(id);
  if (options.seeds) apply_setting(config, "run.seeds", std::to_string(*options.seeds), "--seeds");
  if (options.rng_seed) apply_setting(config, "run.rng_seed", std::to_string(*options.rng_seed), "--rng-seed");
  if (options.jobs > 0) apply_setting(config, "run.jobs", std::to_string(options.jobs), "--jobs");
  config.out_dir = options.out_dir ? options.out_dir->string() : (std::filesystem::path("out") / id).string();
  require_valid(config);

  const auto& table = recipes();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& r) { return r.first == id; });
  RunRecorder rec(config.out_dir, "reproduce " + id, config);
  it->second(config, rec);
  auto files = rec.finish();
  return {rec.dir(), std::move(files)};
}

}  // namespace rod
