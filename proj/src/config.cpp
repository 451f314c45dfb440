#include "rodkit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <optional>

#include "rodkit/csv_io.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/grid.hpp"
#include "rodkit/keyboard.hpp"
#include "rodkit/parallel.hpp"

namespace rod {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct BadValue {
  std::string what;
};

double to_double(const std::string& s) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadValue{"expected a number, got '" + s + "'"};
  return x;
}

template <class Int>
Int to_int(const std::string& s) {
  Int x = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadValue{"expected an integer, got '" + s + "'"};
  return x;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw BadValue{"expected true or false, got '" + s + "'"};
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

Method to_method(const std::string& s) {
  if (s == "baseline") return Method::Baseline;
  if (s == "eigenoptions") return Method::Eigenoptions;
  if (s == "covering") return Method::Covering;
  if (s == "ceo") return Method::Ceo;
  if (s == "keyboard") return Method::Keyboard;
  throw BadValue{"unknown method '" + s + "' (baseline, eigenoptions, covering, ceo, keyboard)"};
}

EvalKind to_eval(const std::string& s) {
  if (s == "diffusion") return EvalKind::Diffusion;
  if (s == "cover") return EvalKind::Cover;
  if (s == "reward") return EvalKind::Reward;
  if (s == "heatmaps") return EvalKind::Heatmaps;
  throw BadValue{"unknown evaluation '" + s + "' (diffusion, cover, reward, heatmaps)"};
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define RK_DOUBLE(name, member)                                                       \
  Field{name, [](ExperimentConfig& c, const std::string& v) { c.member = to_double(v); }, \
        [](const ExperimentConfig& c) { return format_number(c.member); }}
#define RK_INT(name, member, type)                                                         \
  Field{name, [](ExperimentConfig& c, const std::string& v) { c.member = to_int<type>(v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }}
#define RK_BOOL(name, member)                                                       \
  Field{name, [](ExperimentConfig& c, const std::string& v) { c.member = to_bool(v); }, \
        [](const ExperimentConfig& c) { return from_bool(c.member); }}
#define RK_STRING(name, member)                                             \
  Field{name, [](ExperimentConfig& c, const std::string& v) { c.member = v; }, \
        [](const ExperimentConfig& c) { return c.member; }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      RK_STRING("env.name", env),
      RK_DOUBLE("env.gamma", gamma),
      Field{"method.name", [](ExperimentConfig& c, const std::string& v) { c.method = to_method(v); },
            [](const ExperimentConfig& c) { return method_name(c.method); }},
      RK_INT("method.k", k, int),
      RK_INT("method.n_iter", n_iter, int),
      Field{"method.solver",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "closed-form") c.closed_form = true;
              else if (v == "online") c.closed_form = false;
              else throw BadValue{"solver must be closed-form or online, got '" + v + "'"};
            },
            [](const ExperimentConfig& c) { return std::string(c.closed_form ? "closed-form" : "online"); }},
      Field{"method.basis",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "sr") c.basis = BasisSource::SR;
              else if (v == "laplacian") c.basis = BasisSource::Laplacian;
              else throw BadValue{"basis must be sr or laplacian, got '" + v + "'"};
            },
            [](const ExperimentConfig& c) { return std::string(c.basis == BasisSource::SR ? "sr" : "laplacian"); }},
      RK_DOUBLE("method.gamma_sr", gamma_sr),
      RK_DOUBLE("method.gamma_o", gamma_o),
      RK_DOUBLE("method.eta", eta),
      RK_DOUBLE("method.alpha_o", alpha_o),
      RK_DOUBLE("method.p_option", p_option),
      RK_INT("method.steps", steps, long),
      RK_INT("method.episode_len", discovery_episode_len, long),
      RK_STRING("method.start", discovery_start),
      RK_INT("method.sr_passes", sr_passes, int),
      RK_INT("method.q_passes", q_passes, int),
      RK_BOOL("method.point_initiation", point_initiation),
      RK_BOOL("method.broad_initiation", broad_initiation),
      Field{"method.weight_alphabet",
            [](ExperimentConfig& c, const std::string& v) {
              c.weight_alphabet.clear();
              for (const auto& x : split_list(v)) c.weight_alphabet.push_back(to_double(x));
            },
            [](const ExperimentConfig& c) {
              std::string s;
              for (double w : c.weight_alphabet) s += (s.empty() ? "" : ",") + format_number(w);
              return s;
            }},
      Field{"eval.kinds",
            [](ExperimentConfig& c, const std::string& v) {
              c.eval.clear();
              for (const auto& x : split_list(v)) c.eval.push_back(to_eval(x));
            },
            [](const ExperimentConfig& c) {
              std::string s;
              for (auto e : c.eval) s += (s.empty() ? "" : ",") + eval_name(e);
              return s;
            }},
      RK_INT("eval.episode_len", episode_len, long),
      RK_STRING("eval.start", start),
      RK_INT("eval.tasks", tasks, int),
      RK_INT("eval.episodes", episodes, int),
      RK_INT("eval.max_steps", max_steps, int),
      RK_DOUBLE("eval.alpha", alpha),
      RK_DOUBLE("eval.gamma", q_gamma),
      RK_DOUBLE("eval.epsilon", epsilon),
      RK_INT("eval.cap", cap, long),
      RK_INT("run.seeds", seeds, int),
      RK_INT("run.rng_seed", rng_seed, std::uint64_t),
      RK_STRING("run.out_dir", out_dir),
      RK_INT("run.jobs", jobs, int),
  };
  return table;
}

#undef RK_DOUBLE
#undef RK_INT
#undef RK_BOOL
#undef RK_STRING

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Baseline: return "baseline";
    case Method::Eigenoptions: return "eigenoptions";
    case Method::Covering: return "covering";
    case Method::Ceo: return "ceo";
    case Method::Keyboard: return "keyboard";
  }
  return "?";
}

std::string eval_name(EvalKind e) {
  switch (e) {
    case EvalKind::Diffusion: return "diffusion";
    case EvalKind::Cover: return "cover";
    case EvalKind::Reward: return "reward";
    case EvalKind::Heatmaps: return "heatmaps";
  }
  return "?";
}

namespace {

// Empty on success, otherwise the reason the setting was rejected.
std::string set_field(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const auto& table = fields();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
  if (it == table.end()) return "unknown key '" + key + "'";
  try {
    it->set(config, value);
  } catch (const BadValue& e) {
    return key + ": " + e.what;
  }
  return {};
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& where) {
  if (auto err = set_field(config, key, value); !err.empty()) throw ParseError(where + ": " + err);
  config.origin[key] = where;
}

ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& defaults) {
  ExperimentConfig config = defaults;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section != "env" && section != "method" && section != "eval" && section != "run")
        throw ParseError("unknown section [" + section + "] (env, method, eval, run)", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    if (section.empty()) throw ParseError("key outside of any section", line_no);
    const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.empty()) throw ParseError("empty value for " + key, line_no);
    if (auto err = set_field(config, key, value); !err.empty()) throw ParseError(err, line_no);
    config.origin[key] = "line " + std::to_string(line_no);
  }
  return config;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), defaults);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

bool needs_seeds(const ExperimentConfig& c) {
  if (c.method == Method::Ceo) return true;
  if (!c.closed_form && (c.method == Method::Eigenoptions || c.method == Method::Covering)) return true;
  return std::any_of(c.eval.begin(), c.eval.end(),
                     [](EvalKind e) { return e == EvalKind::Cover || e == EvalKind::Reward; });
}

int resolve_start(const TabularMDP& mdp, const std::string& start) {
  if (start == "top-right") return top_right_state(mdp);
  if (start == "bottom-left") return bottom_left_state(mdp);
  int s = -1;
  const auto [p, ec] = std::from_chars(start.data(), start.data() + start.size(), s);
  if (ec != std::errc() || p != start.data() + start.size() || s < 0 || s >= mdp.num_states())
    throw ConfigError("start must be top-right, bottom-left or a state index below " +
                      std::to_string(mdp.num_states()) + ", got '" + start + "'");
  return s;
}

int effective_jobs(const ExperimentConfig& c) { return c.jobs > 0 ? c.jobs : default_jobs(); }

std::vector<Diagnostic> validate_config(const ExperimentConfig& c) {
  std::vector<Diagnostic> out;
  auto where = [&](const std::string& key) {
    const auto it = c.origin.find(key);
    return it == c.origin.end() ? key + " (default)" : it->second + " (" + key + ")";
  };
  auto check = [&](bool ok, const std::string& key, const std::string& message) {
    if (!ok) out.push_back({where(key), message});
  };
  auto unit_open = [](double x) { return x >= 0.0 && x < 1.0; };

  std::optional<TabularMDP> mdp;
  try {
    mdp = build_mdp(load_grid(resolve_asset(c.env)));
  } catch (const Error& e) {
    out.push_back({where("env.name"), e.what()});
  }

  check(unit_open(c.gamma), "env.gamma", "gamma must lie in [0, 1)");
  check(unit_open(c.gamma_sr), "method.gamma_sr", "gamma_sr must lie in [0, 1)");
  check(unit_open(c.gamma_o), "method.gamma_o", "gamma_o must lie in [0, 1)");
  check(unit_open(c.q_gamma), "eval.gamma", "gamma must lie in [0, 1)");
  check(c.eta > 0.0 && c.eta <= 1.0, "method.eta", "eta must lie in (0, 1]");
  check(c.alpha_o > 0.0 && c.alpha_o <= 1.0, "method.alpha_o", "alpha_o must lie in (0, 1]");
  check(c.alpha > 0.0 && c.alpha <= 1.0, "eval.alpha", "alpha must lie in (0, 1]");
  check(c.epsilon >= 0.0 && c.epsilon <= 1.0, "eval.epsilon", "epsilon must lie in [0, 1]");
  check(c.k >= 0, "method.k", "k must be non-negative");
  check(c.n_iter >= 0, "method.n_iter", "n_iter must be non-negative");
  check(c.steps > 0, "method.steps", "steps must be positive");
  check(c.discovery_episode_len > 0, "method.episode_len", "episode_len must be positive");
  check(c.sr_passes > 0, "method.sr_passes", "sr_passes must be positive");
  check(c.q_passes > 0, "method.q_passes", "q_passes must be positive");
  check(c.episode_len > 0, "eval.episode_len", "episode_len must be positive");
  check(c.tasks > 0, "eval.tasks", "tasks must be positive");
  check(c.episodes > 0, "eval.episodes", "episodes must be positive");
  check(c.max_steps > 0, "eval.max_steps", "max_steps must be positive");
  check(c.cap > 0, "eval.cap", "cap must be positive");
  check(c.jobs >= 0, "run.jobs", "jobs must be non-negative");
  check(!c.out_dir.empty(), "run.out_dir", "out_dir must not be empty");
  check(!needs_seeds(c) || c.seeds >= 1, "run.seeds", "stochastic runs need at least one seed");
  check(c.seeds >= 0, "run.seeds", "seeds must be non-negative");
  check(!c.weight_alphabet.empty(), "method.weight_alphabet", "weight alphabet must not be empty");
  check(!c.point_initiation || c.method == Method::Eigenoptions, "method.point_initiation",
        "point_initiation applies to eigenoptions only");
  check(!c.broad_initiation || c.method == Method::Covering, "method.broad_initiation",
        "broad_initiation applies to covering options only");
  check(c.method != Method::Keyboard || c.closed_form, "method.solver", "the keyboard needs closed-form base options");

  if (mdp) {
    const int n = mdp->num_states();
    const int na = mdp->num_actions();
    if (c.method == Method::Eigenoptions || c.method == Method::Keyboard)
      check(c.k <= 2 * n, "method.k",
            "k = " + std::to_string(c.k) + " exceeds 2|S| = " + std::to_string(2 * n) + " eigenoptions");
    if (c.method == Method::Keyboard)
      check(c.k <= kMaxKeyboardBases, "method.k",
            "the keyboard enumerates at most " + std::to_string(kMaxKeyboardBases) + " base options");
    if (c.method == Method::Ceo)
      check(c.p_option >= 0.0 && c.p_option < (1.0 - c.p_option) / na, "method.p_option",
            "p_option must be below (1 - p_option) / |A| = 1/" + std::to_string(na + 1));
    for (const auto& [key, value] : {std::pair{"eval.start", c.start}, std::pair{"method.start", c.discovery_start}}) {
      try {
        resolve_start(*mdp, value);
      } catch (const ConfigError& e) {
        out.push_back({where(key), e.what()});
      }
    }
    if (std::find(c.eval.begin(), c.eval.end(), EvalKind::Reward) != c.eval.end())
      check(c.tasks <= n * (n - 1), "eval.tasks", "more tasks than distinct (start, goal) pairs");
  }
  return out;
}

void require_valid(const ExperimentConfig& config) {
  const auto diags = validate_config(config);
  if (diags.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& d : diags) msg += "\n  " + d.where + ": " + d.message;
  throw ConfigError(msg);
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

}  // namespace rod
