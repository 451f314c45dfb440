#include "rodkit/grid.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rodkit/errors.hpp"

namespace rod {

GridSpec::GridSpec(std::string name, int width, int height, std::vector<Cell> cells)
    : name_(std::move(name)), width_(width), height_(height), cells_(std::move(cells)) {
  if (width_ <= 0 || height_ <= 0 || cells_.size() != static_cast<std::size_t>(width_ * height_))
    throw ParseError("grid dimensions do not match cell count");
  int starts = 0, goals = 0;
  bool any_open = false;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const Cell cell = at(r, c);
      const bool border = r == 0 || c == 0 || r == height_ - 1 || c == width_ - 1;
      if (border && cell != Cell::Wall)
        throw ParseError("unwalled border at row " + std::to_string(r) + ", col " + std::to_string(c),
                         static_cast<std::size_t>(r + 1));
      starts += cell == Cell::Start;
      goals += cell == Cell::Goal;
      any_open |= cell == Cell::Floor || cell == Cell::Start;
    }
  }
  if (!any_open) throw ParseError("grid has no floor or start cell");
  if (starts > 1) throw ParseError("grid has more than one start cell");
  if (goals > 1) throw ParseError("grid has more than one goal cell");
}

std::vector<Coord> GridSpec::accessible_cells() const {
  std::vector<Coord> out;
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if (accessible(r, c)) out.push_back({r, c});
  return out;
}

std::size_t GridSpec::accessible_count() const {
  std::size_t n = 0;
  for (Cell c : cells_) n += c != Cell::Wall;
  return n;
}

namespace {
std::optional<Coord> find_cell(const GridSpec& g, Cell kind) {
  for (int r = 0; r < g.height(); ++r)
    for (int c = 0; c < g.width(); ++c)
      if (g.at(r, c) == kind) return Coord{r, c};
  return std::nullopt;
}
}  // namespace

std::optional<Coord> GridSpec::start() const { return find_cell(*this, Cell::Start); }
std::optional<Coord> GridSpec::goal() const { return find_cell(*this, Cell::Goal); }

GridSpec parse_grid(std::string_view text, std::string name) {
  std::vector<std::string_view> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    rows.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw ParseError("empty grid");

  const std::size_t width = rows.front().size();
  std::vector<Cell> cells;
  cells.reserve(width * rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width)
      throw ParseError("ragged row: expected " + std::to_string(width) + " cells, got " +
                           std::to_string(rows[i].size()),
                       i + 1);
    for (char ch : rows[i]) {
      switch (ch) {
        case '#': cells.push_back(Cell::Wall); break;
        case '.': cells.push_back(Cell::Floor); break;
        case 'S': cells.push_back(Cell::Start); break;
        case 'G': cells.push_back(Cell::Goal); break;
        default:
          throw ParseError(std::string("unknown glyph '") + ch + "'", i + 1);
      }
    }
  }
  return GridSpec(std::move(name), static_cast<int>(width), static_cast<int>(rows.size()),
                  std::move(cells));
}

GridSpec load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str(), path.stem().string());
}

std::vector<std::filesystem::path> asset_search_paths() {
  std::vector<std::filesystem::path> out;
  if (const char* env = std::getenv("RODKIT_ASSETS")) out.emplace_back(env);
  out.emplace_back(RODKIT_ASSET_DIR);
  return out;
}

std::filesystem::path resolve_asset(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name_or_path)) return name_or_path;
  for (const auto& dir : asset_search_paths()) {
    for (const auto& candidate : {dir / name_or_path, dir / (name_or_path + ".txt")})
      if (fs::is_regular_file(candidate)) return candidate;
  }
  std::string msg = "asset '" + name_or_path + "' not found; searched:";
  for (const auto& dir : asset_search_paths()) msg += " " + dir.string();
  throw ConfigError(msg);
}

}  // namespace rod
