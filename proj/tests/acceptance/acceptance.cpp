// Acceptance run: one PASS/FAIL line per criterion, then a summary.
// Exits 0 once every criterion has been evaluated; --strict also fails on FAIL lines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rodkit/config.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/experiments.hpp"

using namespace rod;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<std::string> header;
  Table rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream fs(s);
    while (std::getline(fs, field, ',')) out.push_back(field);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line);
    if (header.empty()) {
      header = fields;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) row[header[i]] = fields[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

fs::path scratch_root() { return fs::temp_directory_path() / "rodkit_acceptance"; }

fs::path run_recipe(const std::string& id, const std::string& tag = "", std::optional<int> seeds = {}) {
  ReproduceOptions opts;
  opts.out_dir = scratch_root() / (id + tag);
  opts.seeds = seeds;
  fs::remove_all(*opts.out_dir);
  return reproduce(id, opts).dir;
}

std::string fixed(double x, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << x;
  return s.str();
}

std::string sci(double x) {
  std::ostringstream s;
  s.setf(std::ios::scientific);
  s.precision(2);
  s << x;
  return s.str();
}

TabularMDP env(const std::string& name) { return build_mdp(load_grid(resolve_asset(name))); }

Matrix random_walk(const TabularMDP& mdp) {
  return induced_transition_matrix(mdp, Policy::uniform(mdp.num_states(), mdp.num_actions()));
}

// --- criteria -------------------------------------------------------------

Outcome pvf_sr_equivalence() {
  const auto r = verify_pvf_sr_equivalence(env("fourroom"), 0.9);
  return {r.max_residual < 1e-6 && r.max_angle < 1e-6,
          "max eigenvalue residual " + sci(r.max_residual) + ", max angle " + sci(r.max_angle) + " rad over " +
              std::to_string(r.clusters) + " clusters"};
}

Outcome transition_laplacian() {
  const auto mdp = env("fourroom");
  const auto r = verify_transition_diff_laplacian(full_transition_sweep(mdp), mdp);
  return {r.gram_matches && r.max_angle < 1e-8,
          std::string("T^T T == 2(D - W): ") + (r.gram_matches ? "yes" : "no") + ", max angle " + sci(r.max_angle) +
              " rad, value residual " + sci(r.max_value_residual)};
}

Outcome nonempty_terminal_sets() {
  std::string detail;
  bool pass = true;
  for (const std::string name : {"fourroom", "openroom"}) {
    const auto mdp = env(name);
    const auto basis = eigendecompose(sr_closed_form(random_walk(mdp), 0.9).psi);
    EigenoptionParams params;
    params.k = static_cast<int>(select_eigenpurposes(basis, 2 * mdp.num_states()).size());
    const auto options = discover_eigenoptions(mdp, basis, params);
    const auto empty = std::count_if(options.begin(), options.end(),
                                     [](const OptionDef& o) { return o.terminal_states().empty(); });
    pass = pass && empty == 0;
    detail += (detail.empty() ? "" : "; ") + name + ": " + std::to_string(options.size()) + " eigenoptions, " +
              std::to_string(empty) + " without a terminal state";
  }
  return {pass, detail};
}

Outcome sr_consistency() {
  const auto mdp = env("fourroom");
  const double gamma = 0.9;
  const Matrix p = random_walk(mdp);
  const Matrix closed = sr_closed_form(p, gamma).psi;

  const int terms = 200;
  Matrix sum = Matrix::Identity(p.rows(), p.cols());
  Matrix power = sum;
  for (int t = 1; t <= terms; ++t) {
    power = gamma * (power * p);
    sum += power;
  }
  const double neumann_err = (closed - sum).cwiseAbs().maxCoeff();
  const double neumann_bound = std::pow(gamma, terms + 1) / (1.0 - gamma);

  Rng rng(0);
  RunConfig cfg{50'000, top_right_state(mdp), false};
  const auto walk = run_with_options(mdp, {}, OptionSampler::uniform(), cfg, rng);
  const auto td = sr_td_learn(walk.data.records(), mdp.num_states(), 0.1, gamma, 100);
  const double td_err = (td.psi - closed).cwiseAbs().maxCoeff();
  const double td_bound = 0.05 / (1.0 - gamma);
  return {neumann_err <= neumann_bound && td_err <= td_bound,
          "Neumann T=200 error " + sci(neumann_err) + " (bound " + sci(neumann_bound) + "); TD l_inf " +
              fixed(td_err) + " (bound " + fixed(td_bound) + ")"};
}

Outcome diffusion_orderings() {
  const auto rows = read_csv(run_recipe("fig7") / "diffusion.csv");
  std::map<std::string, std::map<int, std::pair<double, double>>> curve;  // method -> count -> (avg, median)
  for (const auto& r : rows)
    curve[r.at("method")][std::stoi(r.at("num_options"))] = {std::stod(r.at("avg")), std::stod(r.at("median"))};
  const auto base = curve.at("baseline").at(0);
  const auto& eigen = curve.at("eigenoptions");
  const auto& cover = curve.at("covering");

  const bool a = cover.at(1).second < base.second;

  // Smallest k* such that eigenoptions beat covering options at every larger count computed.
  const int max_count = std::min(eigen.rbegin()->first, cover.rbegin()->first);
  int k_star = max_count;
  for (int k = max_count; k >= 1; --k) {
    if (eigen.at(k).first < cover.at(k).first) k_star = k - 1;
    else break;
  }
  const bool b = k_star <= 40 && k_star < max_count;

  bool c = true;
  for (int k = 1; k < 4; ++k) c = c && eigen.at(k).first > base.first;

  std::string detail = "(a) " + std::string(a ? "pass" : "FAIL") + ": covering median with 1 option " +
                       fixed(cover.at(1).second, 1) + " vs baseline " + fixed(base.second, 1) + "; ";
  detail += "(b) " + std::string(b ? "pass" : "FAIL") + ": ";
  if (k_star < max_count)
    detail += "eigenoptions below covering options for every count above " + std::to_string(k_star);
  else
    detail += "no crossing up to " + std::to_string(max_count) + " options (at " + std::to_string(max_count) +
              ": eigenoptions " + fixed(eigen.at(max_count).first, 1) + ", covering " +
              fixed(cover.at(max_count).first, 1) + ")";
  detail += "; (c) " + std::string(c ? "pass" : "FAIL") + ": eigenoption avg with 1-3 options " +
            fixed(eigen.at(1).first, 0) + ", " + fixed(eigen.at(2).first, 0) + ", " + fixed(eigen.at(3).first, 0) +
            " vs baseline " + fixed(base.first, 1);
  return {a && b && c, detail};
}

Outcome ceo_cover_time() {
  const auto rows = read_csv(run_recipe("ceo", "", 100) / "coverage_summary.csv");
  double ceo = 0.0, random = 0.0;
  int seeds = 0;
  for (const auto& r : rows) {
    if (r.at("method") == "ceo") {
      ceo = std::stod(r.at("mean"));
      seeds = std::stoi(r.at("seeds"));
    }
    if (r.at("method") == "random") random = std::stod(r.at("mean"));
  }
  const double ratio = random / ceo;
  const bool pass = seeds == 100 && ceo >= 1800 && ceo <= 3000 && random >= 20000 && random <= 35000 && ratio >= 5;
  return {pass, "CEO mean " + fixed(ceo, 1) + " steps, random walk " + fixed(random, 1) + ", ratio " + fixed(ratio, 2) +
                    " over " + std::to_string(seeds) + " seeds"};
}

Outcome keyboard_counts() {
  int three = -1;
  for (const auto& r : read_csv(run_recipe("fig13") / "keyboard_counts.csv"))
    if (r.at("env") == "openroom" && r.at("num_base") == "3") three = std::stoi(r.at("unique"));
  const auto manifest = nlohmann::json::parse(read_text_file(run_recipe("fig14") / "manifest.json"));
  const int base = std::stoi(manifest["notes"]["distinct_terminal_base"].get<std::string>());
  const int closure = std::stoi(manifest["notes"]["distinct_terminal_keyboard"].get<std::string>());
  return {three == 5 && base == 16 && std::abs(closure - 96) <= 10,
          "3 bases give " + std::to_string(three) + " unique options; 10 bases terminate in " + std::to_string(base) +
              " states, their closure in " + std::to_string(closure)};
}

Outcome gpi_dominance() {
  const auto mdp = env("openroom");
  const double gamma_o = 0.9;
  const auto basis = eigendecompose(sr_closed_form(random_walk(mdp), 0.9).psi);
  const auto purposes = select_eigenpurposes(basis, 6);
  std::vector<OptionDef> bases;
  std::vector<Matrix> rewards;
  for (const auto& p : purposes) {
    bases.push_back(eigenoption_closed_form(mdp, p, gamma_o));
    rewards.push_back(expected_reward(mdp, eigenpurpose_reward(p)));
  }
  const auto cube = evaluate_base_options(bases, purposes, mdp, gamma_o);

  Rng rng(0);
  double worst = std::numeric_limits<double>::infinity();
  int tested = 0;
  while (tested < 50) {
    std::vector<double> w(6);
    for (auto& x : w) x = static_cast<double>(rng.uniform_int(3) - 1);
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) continue;
    ++tested;
    Matrix r = Matrix::Zero(mdp.num_states(), mdp.num_actions());
    for (std::size_t j = 0; j < w.size(); ++j) r += w[j] * rewards[j];
    const auto synth = gpi_synthesize(cube, w);
    const Matrix q = evaluate_option(mdp, synth.option, r, gamma_o);
    for (const auto& qi : gpe(cube, w)) worst = std::min(worst, (q - qi).minCoeff());
  }
  return {worst >= -1e-8, std::to_string(tested) + " weight vectors, min margin " + sci(worst)};
}

Outcome reward_directionality() {
  const auto rows = read_csv(run_recipe("fig8") / "auc.csv");
  std::map<std::string, std::map<int, double>> auc;
  for (const auto& r : rows) auc[r.at("method")][std::stoi(r.at("task"))] = std::stod(r.at("auc"));
  const auto& base = auc.at("baseline");
  int eigen_wins = 0;
  double base_sum = 0.0, cover_sum = 0.0;
  for (const auto& [task, b] : base) {
    if (auc.at("eigenoptions").at(task) >= b) ++eigen_wins;
    base_sum += b;
    cover_sum += auc.at("covering").at(task);
  }
  const auto n = static_cast<int>(base.size());
  const double base_mean = base_sum / n;
  const double cover_mean = cover_sum / n;
  const double rel = base_mean > 0.0 ? (cover_mean - base_mean) / base_mean : std::numeric_limits<double>::infinity();
  const bool pass = n == 10 && eigen_wins >= 9 && std::abs(rel) <= 0.10;
  return {pass, "eigenoptions >= baseline on " + std::to_string(eigen_wins) + "/" + std::to_string(n) +
                    " tasks; covering mean AUC " + fixed(cover_mean) + " vs baseline " + fixed(base_mean) + " (" +
                    fixed(100.0 * rel, 1) + "%)"};
}

Outcome sr_laplacian_covering_parity() {
  const auto rows = read_csv(run_recipe("appendixF") / "diffusion.csv");
  std::map<std::string, std::map<int, double>> avg;
  for (const auto& r : rows) avg[r.at("method")][std::stoi(r.at("num_options"))] = std::stod(r.at("avg"));
  double worst = 0.0;
  int at = 0;
  for (const auto& [k, lap] : avg.at("covering-laplacian")) {
    const double gap = std::abs(avg.at("covering-sr").at(k) - lap) / lap;
    if (gap > worst) {
      worst = gap;
      at = k;
    }
  }
  return {worst < 0.15 && avg.at("covering-laplacian").size() == 20,
          "largest relative gap " + fixed(100.0 * worst, 1) + "% at " + std::to_string(at) + " options"};
}

Outcome determinism() {
  std::string detail;
  bool pass = true;
  const std::vector<std::pair<std::string, std::optional<int>>> targets{{"fig8", {}}, {"fig11", 3}, {"appendixF", {}}};
  for (const auto& [id, seeds] : targets) {
    const auto a = run_recipe(id, "_first", seeds);
    const auto b = run_recipe(id, "_second", seeds);
    int files = 0, same = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto ext = entry.path().extension();
      if (ext != ".csv" && ext != ".txt") continue;
      ++files;
      if (fs::exists(b / entry.path().filename()) &&
          read_text_file(entry.path()) == read_text_file(b / entry.path().filename()))
        ++same;
    }
    pass = pass && files > 0 && same == files;
    detail += (detail.empty() ? "" : "; ") + id + ": " + std::to_string(same) + "/" + std::to_string(files) +
              " files identical";
  }
  return {pass, detail};
}

struct Criterion {
  std::string name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--strict") == 0) strict = true;
  set_warnings_enabled(false);

  const std::vector<Criterion> criteria{
      {"pvf-sr-equivalence", 5, pvf_sr_equivalence},
      {"transition-difference-laplacian", 5, transition_laplacian},
      {"eigenoption-terminal-sets", 30, nonempty_terminal_sets},
      {"sr-consistency", 0, sr_consistency},
      {"diffusion-orderings", 600, diffusion_orderings},
      {"ceo-cover-time", 900, ceo_cover_time},
      {"keyboard-combinatorics", 300, keyboard_counts},
      {"gpi-dominance", 120, gpi_dominance},
      {"reward-directionality", 1200, reward_directionality},
      {"covering-basis-parity", 0, sr_laplacian_covering_parity},
      {"determinism", 0, determinism},
  };

  int passed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      out.pass = false;
      out.detail += "; over the " + fixed(c.limit_s, 0) + " s limit";
    }
    passed += out.pass ? 1 : 0;
    std::cout << (out.pass ? "PASS " : "FAIL ") << c.name << ": " << out.detail << " [" << fixed(secs, 1) << " s]"
              << std::endl;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed" << std::endl;
  fs::remove_all(scratch_root());
  return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
