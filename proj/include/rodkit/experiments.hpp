#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rodkit/config.hpp"
#include "rodkit/csv_io.hpp"

namespace rod {

std::string toolkit_version();

/// Collects a run's files and finishes with manifest.json. If the run throws
/// before finish(), only <name>.partial files remain.
class RunRecorder {
 public:
  RunRecorder(std::filesystem::path dir, std::string command, const ExperimentConfig& config);

  void write(const std::string& name, const std::string& content);
  /// Adds an entry to the seed schedule, e.g. ("coverage", "Rng(7).split(k), k = 0..99").
  void seed_stream(const std::string& name, const std::string& schedule);
  void note(const std::string& key, const std::string& value);
  /// Writes manifest.json and renames every file into place.
  std::vector<std::string> finish();

  const std::filesystem::path& dir() const { return artifacts_.dir(); }

 private:
  ArtifactSet artifacts_;
  std::string command_;
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::pair<std::string, std::string>> seeds_;
  std::vector<std::pair<std::string, std::string>> notes_;
  double start_;
};

enum class Command { Discover, Evaluate, Keyboard, Ceo };

struct RunSummary {
  std::filesystem::path dir;
  std::vector<std::string> files;
};

/// Validates the config, then runs one subcommand into config.out_dir.
RunSummary run_command(Command command, const ExperimentConfig& config);

const std::vector<std::string>& reproduce_ids();

struct ReproduceOptions {
  std::optional<std::filesystem::path> out_dir;  // default out/<id>
  std::optional<int> seeds;
  std::optional<std::uint64_t> rng_seed;
  int jobs = 0;
};

/// Bundled config for a recipe id, from assets/configs/<id>.ini.
ExperimentConfig recipe_config(const std::string& id);

/// Runs the pre-registered experiment `id`. Throws ConfigError on an unknown
/// id, naming the valid ones.
RunSummary reproduce(const std::string& id, const ReproduceOptions& options);

}  // namespace rod
