#include "tilesmith/render.hpp"

#include <map>
#include <sstream>

namespace tilesmith {

namespace {

Coord default_extent(const Node& node, std::size_t axis) {
  const auto& s = node.space();
  if (!s.is_free(axis)) return s.modulus(axis);
  Coord p = node.period()[axis];
  if (p <= 0) return 16;
  return std::min<Coord>(p < 8 ? 2 * p : p, 64);
}

}  // namespace

std::string render(const Node& node, const RenderOptions& opt) {
  const auto& s = node.space();
  const std::size_t n = s.axis_count();
  const bool one_d = n == 1;
  if (opt.ax >= n || (!one_d && (opt.ay >= n || opt.ay == opt.ax))) {
    throw Error(Errc::parameter, "slice must name two distinct axes of the space");
  }
  if (opt.format != "ascii" && opt.format != "svg") throw Error(Errc::parameter, "format must be ascii or svg");
  Coord w = opt.width > 0 ? opt.width : default_extent(node, opt.ax);
  Coord h = one_d ? 1 : (opt.height > 0 ? opt.height : default_extent(node, opt.ay));

  Point p(n, 0);
  for (std::size_t a = 0, j = 0; a < n; ++a) {
    if (a == opt.ax || (!one_d && a == opt.ay)) continue;
    if (j < opt.at.size()) p[a] = opt.at[j];
    ++j;
  }

  std::map<Placement, std::size_t> ids;
  std::vector<std::vector<long>> grid(static_cast<std::size_t>(h), std::vector<long>(static_cast<std::size_t>(w), -1));
  for (Coord row = 0; row < h; ++row) {
    Coord y = h - 1 - row;
    for (Coord x = 0; x < w; ++x) {
      p[opt.ax] = x;
      if (!one_d) p[opt.ay] = y;
      Point q = s.reduce(p);
      if (!s.contains(q)) continue;
      auto pl = node.find(q);
      if (!pl) continue;
      auto [it, fresh] = ids.emplace(*pl, ids.size());
      grid[static_cast<std::size_t>(row)][static_cast<std::size_t>(x)] = static_cast<long>(it->second);
    }
  }

  std::ostringstream os;
  if (opt.format == "ascii") {
    for (const auto& r : grid) {
      for (long c : r) os << (c < 0 ? '.' : static_cast<char>('A' + c % 26));
      os << '\n';
    }
    return os.str();
  }
  const int cell = 16;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * cell << "\" height=\"" << h * cell
     << "\">\n";
  for (std::size_t row = 0; row < grid.size(); ++row) {
    for (std::size_t x = 0; x < grid[row].size(); ++x) {
      long c = grid[row][x];
      std::string fill = "#ffffff";
      if (c >= 0) fill = "hsl(" + std::to_string((c * 137) % 360) + ",65%,60%)";
      os << "<rect x=\"" << x * cell << "\" y=\"" << row * cell << "\" width=\"" << cell << "\" height=\""
         << cell << "\" fill=\"" << fill << "\" stroke=\"#333\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace tilesmith
