#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rodkit/successor.hpp"

namespace rod {

enum class Method { Baseline, Eigenoptions, Covering, Ceo, Keyboard };
enum class EvalKind { Diffusion, Cover, Reward, Heatmaps };

/// Experiment description. Every field has a "section.key" spelling in the
/// config file and a matching --key flag on the command line.
struct ExperimentConfig {
  // [env]
  std::string env = "fourroom";
  double gamma = 0.9;  // discount of the random-walk SR used for the basis

  // [method]
  Method method = Method::Eigenoptions;
  int k = 8;       // eigenoptions, or base options for the keyboard
  int n_iter = 1;  // covering iterations, or CEO iterations
  bool closed_form = true;
  BasisSource basis = BasisSource::SR;
  double gamma_sr = 0.9;
  double gamma_o = 0.9;
  double eta = 0.1;
  double alpha_o = 0.1;
  double p_option = 0.05;
  long steps = 1000;  // samples per online iteration
  long discovery_episode_len = 1000;
  std::string discovery_start = "bottom-left";
  int sr_passes = 1;
  int q_passes = 100;
  bool point_initiation = false;
  bool broad_initiation = false;
  std::vector<double> weight_alphabet{0.0, 1.0};

  // [eval]
  std::vector<EvalKind> eval;
  long episode_len = 100;
  std::string start = "top-right";  // top-right, bottom-left or a state index
  int tasks = 10;
  int episodes = 50;
  int max_steps = 1000;
  double alpha = 0.1;
  double q_gamma = 0.9;
  double epsilon = 0.05;
  long cap = 10'000'000;

  // [run]
  int seeds = 1;  // streams 0..seeds-1 of rng_seed
  std::uint64_t rng_seed = 0;
  std::string out_dir = "out";
  int jobs = 0;  // 0: one per core

  /// Where each key was last set, e.g. "line 12" or "--k".
  std::map<std::string, std::string> origin;
};

/// Sets "section.key" from text. Throws ParseError naming `where` on an
/// unknown key or a malformed value.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   const std::string& where);

/// Flat key = value text with [section] headers; '#' and ';' start comments.
/// Errors carry the offending line number.
ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& defaults = {});
ExperimentConfig load_config(const std::string& path, const ExperimentConfig& defaults = {});

struct Diagnostic {
  std::string where;
  std::string message;
};

/// Cross-field checks that need no computation beyond loading the map.
std::vector<Diagnostic> validate_config(const ExperimentConfig& config);

/// Throws ConfigError listing every diagnostic.
void require_valid(const ExperimentConfig& config);

bool needs_seeds(const ExperimentConfig& config);
int resolve_start(const TabularMDP& mdp, const std::string& start);
int effective_jobs(const ExperimentConfig& config);

std::string method_name(Method m);
std::string eval_name(EvalKind e);
/// Canonical "section.key = value" lines, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

}  // namespace rod
