#pragma once

// Test-side oracles. Nothing here calls the library's cover/verify code:
// covers are recomputed from the raw block tiles with plain modular
// arithmetic and coverage is counted point by point.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tilesmith/construction.hpp"

namespace oracle {

using tilesmith::Coord;
using tilesmith::Node;
using tilesmith::Placement;
using tilesmith::Point;
using tilesmith::SpaceSignature;
using tilesmith::Tile;

inline Coord md(Coord v, Coord m) { return ((v % m) + m) % m; }

/// Box sizes: cyclic moduli, free axes from `period` (per axis).
inline std::vector<Coord> box_of(const SpaceSignature& s, const std::vector<Coord>& period) {
  std::vector<Coord> box(s.axis_count());
  for (std::size_t a = 0; a < box.size(); ++a) box[a] = s.is_free(a) ? period.at(a) : s.modulus(a);
  return box;
}

inline Point wrap(Point p, const std::vector<Coord>& box) {
  for (std::size_t a = 0; a < p.size(); ++a) p[a] = md(p[a], box[a]);
  return p;
}

/// The copy's points, every axis reduced into the box.
inline std::vector<Point> cover_in_box(const SpaceSignature& s, const Placement& pl, const std::vector<Coord>& box) {
  const auto& blk = s.block(pl.block);
  std::vector<Point> out;
  for (const auto& t : blk.tile->points()) {
    Point q = pl.offset;
    for (std::size_t i = 0; i < blk.dim; ++i) q[blk.first_axis + i] += t[i];
    out.push_back(wrap(std::move(q), box));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline void for_box(const std::vector<Coord>& box, const std::function<void(const Point&)>& fn) {
  Point p(box.size(), 0);
  for (Coord b : box)
    if (b <= 0) return;
  for (;;) {
    fn(p);
    std::size_t a = box.size();
    while (a > 0 && ++p[a - 1] >= box[a - 1]) p[--a] = 0;
    if (a == 0) return;
  }
}

struct Partition {
  bool ok = true;
  std::uint64_t points = 0;
  std::uint64_t copies = 0;
  std::uint64_t covered_cells = 0;  // sum of copy sizes
  std::string why;
};

/// Every box point inside the space is covered exactly once by the copies
/// that `find` reports, except hole points, which stay uncovered. Free axes
/// wrap by the node's period (or `period` if given).
inline Partition check_partition(const Node& node, const std::set<Point>& hole = {},
                                 std::vector<Coord> period = {}) {
  const auto& s = node.space();
  if (period.empty()) period = node.period();
  auto box = box_of(s, period);
  Partition r;
  std::set<Placement> copies;
  std::map<Point, int> count;
  for_box(box, [&](const Point& p) {
    if (!s.contains(p)) return;
    ++r.points;
    count[p];
    auto pl = node.find(p);
    if (!pl) {
      if (!hole.count(p) && r.ok) r = {false, r.points, 0, 0, "uncovered " + tilesmith::point_to_string(p)};
      return;
    }
    Placement c = *pl;
    c.offset = wrap(c.offset, box);
    auto cv = cover_in_box(s, c, box);
    if (!std::binary_search(cv.begin(), cv.end(), p) && r.ok)
      r = {false, r.points, 0, 0, "find returned a copy missing " + tilesmith::point_to_string(p)};
    copies.insert(c);
  });
  if (!r.ok) return r;
  for (const auto& c : copies) {
    auto cv = cover_in_box(s, c, box);
    if (std::adjacent_find(cv.begin(), cv.end()) != cv.end()) return {false, r.points, 0, 0, "copy wraps onto itself"};
    r.covered_cells += cv.size();
    for (const auto& q : cv) {
      auto it = count.find(q);
      if (it == count.end()) return {false, r.points, 0, 0, "copy leaves the space"};
      if (++it->second > 1) return {false, r.points, 0, 0, "overlap at " + tilesmith::point_to_string(q)};
    }
  }
  for (const auto& [p, n] : count) {
    if (hole.count(p) && n != 0) return {false, r.points, 0, 0, "hole point covered"};
    if (!hole.count(p) && n != 1) return {false, r.points, 0, 0, "point not covered"};
  }
  r.copies = copies.size();
  return r;
}

/// Any subset of the translates of `tile` on Z_m partitioning Z_m?
/// Reflections too when `reflect`. m <= 20.
inline bool brute_torus_1d(const std::vector<Coord>& tile, Coord m, bool reflect) {
  std::set<std::vector<Coord>> shapes;
  std::vector<std::vector<Coord>> orients{tile};
  if (reflect) {
    std::vector<Coord> r;
    for (Coord v : tile) r.push_back(-v);
    orients.push_back(r);
  }
  for (const auto& o : orients)
    for (Coord v = 0; v < m; ++v) {
      std::vector<Coord> cells;
      for (Coord t : o) cells.push_back(md(t + v, m));
      std::sort(cells.begin(), cells.end());
      if (std::adjacent_find(cells.begin(), cells.end()) == cells.end()) shapes.insert(cells);
    }
  std::vector<std::uint32_t> masks;
  for (const auto& c : shapes) {
    std::uint32_t mk = 0;
    for (Coord x : c) mk |= 1u << x;
    masks.push_back(mk);
  }
  const std::uint32_t full = (1u << m) - 1;
  // plain recursion on the lowest empty cell
  std::function<bool(std::uint32_t)> go = [&](std::uint32_t acc) {
    if (acc == full) return true;
    std::uint32_t low = ~acc & (acc + 1);
    for (auto mk : masks)
      if ((mk & low) && !(mk & acc) && go(acc | mk)) return true;
    return false;
  };
  return go(0);
}

struct BlockSpec {
  std::vector<Coord> moduli;
  Tile tile;
};

inline tilesmith::SpacePtr space_of(const std::vector<BlockSpec>& blocks) {
  tilesmith::SpaceSignature::Builder b;
  for (const auto& x : blocks) b.block(x.moduli, std::make_shared<const Tile>(x.tile));
  return std::move(b).build();
}

/// Hand-rolled random tile: `n` distinct points in [0, span)^dim, 0 included.
inline Tile random_tile(std::mt19937_64& g, std::size_t dim, std::size_t n, Coord span) {
  std::set<Point> pts{Point(dim, 0)};
  std::uniform_int_distribution<Coord> u(0, span - 1);
  std::size_t room = 1;
  for (std::size_t a = 0; a < dim; ++a) room *= static_cast<std::size_t>(span);
  n = std::min(n, room);
  while (pts.size() < n) {
    Point p(dim);
    for (auto& c : p) c = u(g);
    pts.insert(p);
  }
  return Tile(dim, {pts.begin(), pts.end()});
}

/// Random 1-D tile spanning exactly [0, k).
inline Tile random_interval_tile(std::mt19937_64& g, Coord k) {
  std::vector<Point> pts{{0}};
  for (Coord v = 1; v + 1 < k; ++v)
    if (g() & 1) pts.push_back({v});
  if (k > 1) pts.push_back({k - 1});
  return Tile(1, pts);
}

}  // namespace oracle
