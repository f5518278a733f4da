#pragma once

// Two-dimensional slices of a tiling as letters or SVG rectangles.

#include <string>

#include "tilesmith/construction.hpp"

namespace tilesmith {

struct RenderOptions {
  std::size_t ax = 0, ay = 1;
  Point at;            // values of the other axes (missing entries are 0)
  Coord width = 0;     // 0: one period (cyclic: modulus), at most 64
  Coord height = 0;
  std::string format = "ascii";  // ascii | svg
};

/// Cells in the hole print as '.'. Copies are lettered A..Z in order of
/// first appearance, row by row from the top (largest y) down.
std::string render(const Node& node, const RenderOptions& opt);

}  // namespace tilesmith
