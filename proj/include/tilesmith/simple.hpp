#pragma once

// Tilings by a punctured interval T = {0..k-1} \ {i-1}: holes in Z_k^d, corner
// removal, the periodic deconvolution f and the final assembly over Z^d.

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tilesmith/construction.hpp"

namespace tilesmith {

/// value(n) = values[n mod P], entries in [0, modulus).
struct PeriodicFn {
  Coord period = 1;
  Coord modulus = 1;
  std::vector<Coord> values;

  Coord operator()(Coord n) const { return values[static_cast<std::size_t>(mod_floor(n, period))]; }
  json to_json() const;
};

struct SpecialColumnPlan {
  Coord period = 1;
  std::size_t family = 0;                   // corners 0..family-1 are available
  std::vector<std::vector<std::size_t>> S;  // S[n] for n in [0, period), sorted
  json to_json() const;
};

/// A construction together with the hole it leaves.
struct HoleTiling {
  std::vector<Point> hole;
  NodePtr node;
};

/// Builders for one fixed (k, i). Spaces Z_k^d are cached so nodes built
/// from the same context share them. Thread-safe.
class SimpleContext {
 public:
  SimpleContext(Coord k, Coord i);

  Coord k() const noexcept { return k_; }
  Coord i() const noexcept { return i_; }
  const TilePtr& tile() const noexcept { return tile_; }
  /// Z_k^d, one block per axis, every block carrying T mod k.
  SpacePtr space(std::size_t d);
  /// The corner with k-1 at position j (0-based) in Z_k^d.
  Point corner(std::size_t j, std::size_t d) const;

  /// Tiling of Z_k^d \ {x}.
  NodePtr cover_but_one(std::size_t d, const Point& x);
  /// From a tiling of Z_k^d \ X, a tiling of Z_k^{d+1} \ ((X \ {x}) x {0} u {c_{d+1}}).
  HoleTiling move_point(const HoleTiling& h, const Point& x);
  HoleTiling exchange_all(HoleTiling h, const std::vector<Point>& xs);
  /// X = {0} plus the first (m-1)/(k-1) copies of cover_but_one(r, 0).
  HoleTiling hole_of_size(std::size_t r, std::size_t m);
  /// Tiling of Z_k^d minus the corners listed in S (0-based, distinct).
  NodePtr removed_corners(std::size_t d, std::vector<std::size_t> S);

 private:
  void cbo_copies(std::size_t d, std::size_t want, std::vector<Placement>& out);

  Coord k_;
  Coord i_;
  TilePtr tile_;
  std::recursive_mutex mu_;
  std::vector<SpacePtr> spaces_;
  std::map<Point, NodePtr> cbo_;  // key: x with its dimension implied by size
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, NodePtr> corners_;
};

/// T = {0..k-1} \ {i-1}, the i-th point of [k] removed in 1-based terms.
Tile punctured_interval(Coord k, Coord i);
/// Recognizes a punctured interval; returns (k, i) or nullopt.
std::optional<std::pair<Coord, Coord>> as_punctured_interval(const Tile& t);

/// Periodic solution of sum_{y in T} f(x - y) = 1 mod (k-1).
PeriodicFn solve_f(Coord k, Coord i);
/// 2k(k-2)
std::size_t special_family_size(Coord k);
SpecialColumnPlan plan_special_column(Coord k, const PeriodicFn& f, std::size_t family);
/// Smallest d >= l+1 with k^(d-1-l) >= d-1, l = special_family_size(k).
std::size_t simple_dimension(Coord k);

struct SimpleResult {
  NodePtr root;  // tiling of Z^d
  Coord k = 0;
  Coord i = 0;
  std::size_t d = 0;
  PeriodicFn f;
  SpecialColumnPlan plan;
  json trace() const;
};

SimpleResult synthesize_simple(Coord k, Coord i);

/// Saturating k^e.
std::uint64_t ipow_sat(std::uint64_t k, std::uint64_t e);

}  // namespace tilesmith
