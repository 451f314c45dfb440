#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "rodkit/config.hpp"
#include "rodkit/errors.hpp"
#include "rodkit/experiments.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Flag spelling for a config key: the bare key when it is unambiguous,
// otherwise section-key.
std::map<std::string, std::string> flag_names() {
  std::map<std::string, int> uses;
  const auto entries = rod::config_entries({});
  for (const auto& [key, value] : entries) ++uses[key.substr(key.find('.') + 1)];
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : entries) {
    const auto dot = key.find('.');
    std::string name = key.substr(dot + 1);
    if (key == "env.name") name = "env";
    else if (key == "method.name") name = "method";
    else if (uses[name] > 1) name = key.substr(0, dot) + "-" + name;
    for (auto& ch : name)
      if (ch == '_') ch = '-';
    out[key] = "--" + name;
  }
  return out;
}

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;  // key -> raw text
  bool closed_form = false;
  bool online = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Config file; flags override its values");
  for (const auto& [key, flag] : flag_names()) {
    const std::string names = key == "run.out_dir" ? flag + ",--out" : flag;
    cmd->add_option_function<std::string>(
        names, [&flags, key = key](const std::string& v) { flags.values[key] = v; }, "Sets " + key);
  }
  cmd->add_flag("--closed-form", flags.closed_form, "Same as --solver closed-form");
  cmd->add_flag("--online", flags.online, "Same as --solver online");
}

rod::ExperimentConfig build_config(const ConfigFlags& flags, rod::ExperimentConfig base = {}) {
  rod::ExperimentConfig config = flags.config_path.empty() ? base : rod::load_config(flags.config_path, base);
  const auto names = flag_names();
  for (const auto& [key, value] : flags.values) rod::apply_setting(config, key, value, names.at(key));
  if (flags.closed_form && flags.online) throw rod::ConfigError("--closed-form and --online are exclusive");
  if (flags.closed_form) rod::apply_setting(config, "method.solver", "closed-form", "--closed-form");
  if (flags.online) rod::apply_setting(config, "method.solver", "online", "--online");
  return config;
}

void print_summary(const rod::RunSummary& s) {
  std::cout << "wrote " << s.files.size() << " files to " << s.dir.string() << "\n";
  for (const auto& f : s.files) std::cout << "  " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option discovery with the successor representation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rod::toolkit_version());

  struct Sub {
    const char* name;
    const char* help;
    rod::Command command;
  };
  const Sub subs[] = {
      {"discover", "Discover options and write them as CSV", rod::Command::Discover},
      {"evaluate", "Discover options and evaluate them", rod::Command::Evaluate},
      {"keyboard", "Enumerate option-keyboard combinations of eigenoptions", rod::Command::Keyboard},
      {"ceo", "Cover time of covering eigenoptions", rod::Command::Ceo},
  };
  std::map<std::string, ConfigFlags> sub_flags;
  std::map<std::string, CLI::App*> sub_apps;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_config_flags(cmd, sub_flags[s.name]);
    sub_apps[s.name] = cmd;
  }

  std::string reproduce_id;
  std::optional<int> reproduce_seeds;
  std::optional<std::uint64_t> reproduce_rng;
  std::string reproduce_out;
  int reproduce_jobs = 0;
  auto* rep = app.add_subcommand("reproduce", "Run a pre-registered experiment");
  rep->add_option("id", reproduce_id, "Experiment id")->required();
  rep->add_option("--seeds", reproduce_seeds, "Number of seeds");
  rep->add_option("--rng-seed", reproduce_rng, "Root seed");
  rep->add_option("--out", reproduce_out, "Output directory (default out/<id>)");
  rep->add_option("--jobs", reproduce_jobs, "Worker threads (default: one per core)");
  rep->footer("ids: " + [] {
    std::string s;
    for (const auto& id : rod::reproduce_ids()) s += (s.empty() ? "" : ", ") + id;
    return s;
  }());

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a config file without running it");
  val->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    for (const auto& s : subs) {
      if (!sub_apps[s.name]->parsed()) continue;
      const auto config = build_config(sub_flags[s.name]);
      print_summary(rod::run_command(s.command, config));
      return 0;
    }
    if (rep->parsed()) {
      rod::ReproduceOptions opts;
      opts.seeds = reproduce_seeds;
      opts.rng_seed = reproduce_rng;
      opts.jobs = reproduce_jobs;
      if (!reproduce_out.empty()) opts.out_dir = reproduce_out;
      print_summary(rod::reproduce(reproduce_id, opts));
      return 0;
    }
    if (val->parsed()) {
      const auto config = rod::load_config(validate_path);
      const auto diags = rod::validate_config(config);
      for (const auto& d : diags) std::cout << validate_path << ": " << d.where << ": " << d.message << "\n";
      if (diags.empty()) std::cout << validate_path << ": ok\n";
      return diags.empty() ? 0 : kExitConfig;
    }
  } catch (const rod::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rod::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
