#include "rodkit/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rodkit/errors.hpp"

namespace rod {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : width_(header.size()) { row(header); }

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw ShapeError("CSV row has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(width_));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += fields[i];
  }
  text_ += '\n';
  return *this;
}

std::string option_csv(const OptionDef& option) {
  CsvWriter w({"state", "initiation", "action", "termination"});
  for (int s = 0; s < option.num_states(); ++s)
    w.row({std::to_string(s), option.available_at(s) ? "1" : "0", std::to_string(option.policy[static_cast<std::size_t>(s)]),
           format_number(option.termination[static_cast<std::size_t>(s)])});
  return w.str();
}

namespace {

std::string sanitize(const std::string& label) {
  std::string out = label;
  for (char& c : out)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string option_set_csv(const std::vector<OptionDef>& options) {
  CsvWriter w({"option", "label", "state", "initiation", "action", "termination"});
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto& o = options[i];
    for (int s = 0; s < o.num_states(); ++s)
      w.row({std::to_string(i), sanitize(o.label), std::to_string(s), o.available_at(s) ? "1" : "0",
             std::to_string(o.policy[static_cast<std::size_t>(s)]), format_number(o.termination[static_cast<std::size_t>(s)])});
  }
  return w.str();
}

std::vector<OptionDef> parse_option_set_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<OptionDef> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "option,label,state,initiation,action,termination") throw ParseError("unexpected option CSV header", lineno);
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 6) throw ParseError("expected 6 fields", lineno);
    try {
      const auto idx = std::stoul(f[0]);
      const int s = std::stoi(f[2]);
      if (idx > out.size()) throw ParseError("options must be listed in order", lineno);
      if (idx == out.size()) {
        out.emplace_back();
        out.back().label = f[1];
      }
      auto& o = out[idx];
      if (s != o.num_states()) throw ParseError("states must be listed in order from 0", lineno);
      o.initiation.push_back(f[3] == "1");
      o.policy.push_back(std::stoi(f[4]));
      o.termination.push_back(std::stod(f[5]));
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", lineno);
    }
  }
  for (const auto& o : out)
    if (o.num_states() != out.front().num_states()) throw ParseError("options have different state counts");
  return out;
}

std::string matrix_csv(const Matrix& m) {
  std::vector<std::string> header;
  for (Eigen::Index c = 0; c < m.cols(); ++c) header.push_back(std::to_string(c));
  CsvWriter w(header);
  std::vector<std::string> fields(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) fields[static_cast<std::size_t>(c)] = format_number(m(r, c));
    w.row(fields);
  }
  return w.str();
}

std::string basis_csv(const EigenBasis& basis) {
  std::vector<std::string> header{"eigenvalue"};
  for (Eigen::Index s = 0; s < basis.vectors.rows(); ++s) header.push_back(std::to_string(s));
  CsvWriter w(header);
  for (int i = 0; i < basis.size(); ++i) {
    std::vector<std::string> fields{format_number(basis.values(i))};
    for (Eigen::Index s = 0; s < basis.vectors.rows(); ++s) fields.push_back(format_number(basis.vectors(s, i)));
    w.row(fields);
  }
  return w.str();
}

std::string heatmap_text(const Matrix& grid) {
  std::string out;
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      if (c) out += ' ';
      out += format_number(grid(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string diffusion_csv(const std::vector<DiffusionReport>& reports) {
  CsvWriter w({"method", "num_options", "avg", "median", "num_unreachable"});
  for (const auto& r : reports)
    w.row({r.method, std::to_string(r.num_options), format_number(r.avg), format_number(r.median),
           std::to_string(r.num_unreachable)});
  return w.str();
}

std::string coverage_csv(const CoverageReport& report, const std::vector<long>& seeds) {
  CsvWriter w({"seed", "steps_to_cover"});
  for (std::size_t i = 0; i < report.steps.size(); ++i)
    w.row({std::to_string(i < seeds.size() ? seeds[i] : static_cast<long>(i)), std::to_string(report.steps[i])});
  return w.str();
}

ArtifactSet::ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

void ArtifactSet::write(const std::string& name, const std::string& content) {
  write_text_file(dir_ / (name + ".partial"), content);
  names_.push_back(name);
}

void ArtifactSet::commit() {
  for (const auto& name : names_) std::filesystem::rename(dir_ / (name + ".partial"), dir_ / name);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rod
