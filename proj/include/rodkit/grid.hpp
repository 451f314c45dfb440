#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rod {

enum class Cell : char { Wall = '#', Floor = '.', Start = 'S', Goal = 'G' };

struct Coord {
  int row = 0;
  int col = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

/// Rectangular gridworld map. Border cells are always walls.
class GridSpec {
 public:
  GridSpec(std::string name, int width, int height, std::vector<Cell> cells);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  Cell at(int row, int col) const { return cells_[static_cast<std::size_t>(row * width_ + col)]; }
  bool accessible(int row, int col) const { return at(row, col) != Cell::Wall; }

  /// Accessible cells in row-major order; state index i lives at accessible_cells()[i].
  std::vector<Coord> accessible_cells() const;
  std::size_t accessible_count() const;

  std::optional<Coord> start() const;
  std::optional<Coord> goal() const;

 private:
  std::string name_;
  int width_;
  int height_;
  std::vector<Cell> cells_;
};

/// Parses an ASCII map over {#, ., S, G}. Throws ParseError on ragged rows,
/// unknown glyphs, or a border that is not fully walled.
GridSpec parse_grid(std::string_view text, std::string name = "grid");

GridSpec load_grid(const std::filesystem::path& path);

/// Resolves a bundled asset name ("fourroom", "openroom") or a file path.
/// Search order: literal path, $RODKIT_ASSETS, the compiled-in asset directory.
std::filesystem::path resolve_asset(const std::string& name_or_path);
std::vector<std::filesystem::path> asset_search_paths();

}  // namespace rod
