#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rodkit/evaluation.hpp"
#include "rodkit/keyboard.hpp"

namespace rod {

/// Shortest round-trip-safe text for a double; "inf" / "-inf" / "nan" otherwise.
std::string format_number(double x);

/// Minimal CSV builder; fields are written verbatim, rows end with LF.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& row(const std::vector<std::string>& fields);
  const std::string& str() const { return text_; }

 private:
  std::string text_;
  std::size_t width_;
};

/// Columns: state,initiation,action,termination.
std::string option_csv(const OptionDef& option);
/// Columns: option,label,state,initiation,action,termination.
std::string option_set_csv(const std::vector<OptionDef>& options);
std::vector<OptionDef> parse_option_set_csv(const std::string& text);

/// Header row of column indices, then one row per matrix row.
std::string matrix_csv(const Matrix& m);
/// Eigenvalue column followed by the eigenvector entries, one row per pair.
std::string basis_csv(const EigenBasis& basis);

/// Space-separated rows of a grid of values.
std::string heatmap_text(const Matrix& grid);

std::string diffusion_csv(const std::vector<DiffusionReport>& reports);
std::string coverage_csv(const CoverageReport& report, const std::vector<long>& seeds);

/// Files are first written as <name>.partial and renamed on commit(), so an
/// interrupted run leaves only .partial files behind.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir);
  void write(const std::string& name, const std::string& content);
  void commit();
  const std::vector<std::string>& names() const { return names_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rod
