#pragma once

// Core vocabulary: tiles, mixed free/cyclic product spaces, placements and
// projections between spaces.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tilesmith {

using Coord = std::int64_t;
using Point = std::vector<Coord>;
using json = nlohmann::json;

enum class Errc {
  parse,
  parameter,
  shape_mismatch,
  not_injective,
  limit_exceeded,
  point_outside,
  point_in_hole,
  parity,
  bound,
  family_too_small,
  containment,
  domain_too_large,
  malformed,
  base_case,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Euclidean remainder: result always in [0, m).
inline Coord mod_floor(Coord v, Coord m) {
  Coord r = v % m;
  return r < 0 ? r + m : r;
}

struct PointHash {
  std::size_t operator()(std::span<const Coord> p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ p.size();
    for (Coord c : p) {
      h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
  std::size_t operator()(const Point& p) const noexcept {
    return (*this)(std::span<const Coord>(p));
  }
};

/// A finite non-empty point set of fixed dimension. Points are kept sorted
/// lexicographically and distinct. Used both for integer tiles and for
/// tiles living in cyclic blocks (in which case coordinates are residues).
class Tile {
 public:
  Tile() = default;
  Tile(std::size_t dim, std::vector<Point> points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point>& points() const noexcept { return points_; }

  Point bbox_min() const;
  Point bbox_max() const;
  /// max - min along one axis.
  Coord extent(std::size_t axis) const;
  /// Smallest k with the normalized tile inside [0, k)^dim.
  Coord box_size() const;

  bool is_normalized() const;
  Tile normalized() const;
  Tile translated(std::span<const Coord> v) const;
  bool contains(std::span<const Coord> p) const;

  friend bool operator==(const Tile&, const Tile&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Point> points_;
};

using TilePtr = std::shared_ptr<const Tile>;

/// Parses `X`/`.` strings (1-D) or a JSON list of integer vectors.
/// Result is min-0 normalized.
Tile parse_tile(std::string_view text);
std::string render_tile_1d(const Tile& tile);
/// `X.X` style when one-dimensional, JSON otherwise.
std::string tile_to_text(const Tile& tile);

json tile_to_json(const Tile& tile);
Tile tile_from_json(const json& j);

/// Subset of a cyclic block group Z_{m_1} x ... x Z_{m_b}, stored as a
/// bitmap over the row-major linear index.
class BlockSet {
 public:
  BlockSet() = default;
  BlockSet(std::vector<Coord> moduli, const std::vector<Point>& elems);
  static BlockSet full(std::vector<Coord> moduli);
  static BlockSet from_tile(std::vector<Coord> moduli, const Tile& tile);

  const std::vector<Coord>& moduli() const noexcept { return moduli_; }
  std::size_t dim() const noexcept { return moduli_.size(); }
  std::size_t group_size() const noexcept { return bits_.size(); }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  bool is_full() const noexcept { return count_ == bits_.size(); }

  std::size_t index_of(std::span<const Coord> p) const;
  Point point_at(std::size_t index) const;

  bool contains(std::span<const Coord> p) const;
  bool contains_index(std::size_t i) const { return bits_[i] != 0; }
  /// Elements in lexicographic order.
  std::vector<Point> elements() const;

  BlockSet translated(std::span<const Coord> v) const;
  BlockSet set_union(const BlockSet& o) const;
  BlockSet set_minus(const BlockSet& o) const;
  BlockSet set_intersection(const BlockSet& o) const;
  Tile as_tile() const;

  friend bool operator==(const BlockSet& a, const BlockSet& b) {
    return a.moduli_ == b.moduli_ && a.bits_ == b.bits_;
  }

 private:
  std::vector<Coord> moduli_;
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

using BlockSetPtr = std::shared_ptr<const BlockSet>;

/// A contiguous group of axes carrying one tile. `domain`, when set, restricts
/// the block to a subset of its (cyclic) group.
struct Block {
  std::size_t first_axis = 0;
  std::size_t dim = 0;
  TilePtr tile;
  BlockSetPtr domain;
};

/// Ordered axes (modulus 0 = free axis Z, otherwise Z_m) partitioned into
/// blocks, each with its own tile.
class SpaceSignature {
 public:
  class Builder {
   public:
    /// Appends a block of `moduli.size()` axes.
    Builder& block(std::vector<Coord> moduli, TilePtr tile, BlockSetPtr domain = nullptr);
    std::shared_ptr<const SpaceSignature> build() &&;

   private:
    std::vector<Coord> moduli_;
    std::vector<Block> blocks_;
  };

  std::size_t axis_count() const noexcept { return moduli_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<Coord>& moduli() const noexcept { return moduli_; }
  Coord modulus(std::size_t axis) const { return moduli_[axis]; }
  bool is_free(std::size_t axis) const { return moduli_[axis] == 0; }
  const Block& block(std::size_t j) const { return blocks_[j]; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::vector<Coord> block_moduli(std::size_t j) const;
  std::size_t block_of_axis(std::size_t axis) const;

  /// Coordinate count, cyclic ranges and block domains.
  bool contains(std::span<const Coord> p) const;
  Point reduce(std::span<const Coord> p) const;
  std::vector<std::size_t> free_axes() const;

  /// Signature with block j removed (axes renumbered).
  std::shared_ptr<const SpaceSignature> without_block(std::size_t j) const;
  /// Same axes, block tiles replaced.
  std::shared_ptr<const SpaceSignature> with_tile(std::size_t j, TilePtr tile) const;

  bool same_as(const SpaceSignature& o) const;

 private:
  std::vector<Coord> moduli_;
  std::vector<Block> blocks_;
};

using SpacePtr = std::shared_ptr<const SpaceSignature>;

json space_to_json(const SpaceSignature& s);
SpacePtr space_from_json(const json& j);

/// One axis-embedded copy of a block's tile. `offset` is a full point of the
/// space: on the block's axes it is the translation, elsewhere the fixed
/// coordinates of the copy.
struct Placement {
  std::size_t block = 0;
  Point offset;

  friend auto operator<=>(const Placement&, const Placement&) = default;
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// The points of the translated copy, cyclic axes reduced, sorted.
std::vector<Point> cover(const Placement& pl, const SpaceSignature& sig);
bool cover_contains(const Placement& pl, const SpaceSignature& sig, std::span<const Coord> p);
/// True iff the copy has |tile| distinct points (no wrap self-overlap).
bool placement_is_proper(const Placement& pl, const SpaceSignature& sig);

json placement_to_json(const Placement& pl);
Placement placement_from_json(const json& j);

/// Per-axis map: modulus 0 keeps the axis, k > 0 reduces it mod k.
struct Projection {
  std::vector<Coord> moduli;

  static Projection identity(std::size_t dim) { return {std::vector<Coord>(dim, 0)}; }
  static Projection uniform(std::size_t dim, Coord k) { return {std::vector<Coord>(dim, k)}; }
  Point apply(std::span<const Coord> p) const;
  bool is_identity() const;
};

struct ProjectedTile {
  Tile image;
  bool injective = false;
};

ProjectedTile project_tile(const Tile& t, const Projection& p);

std::string point_to_string(std::span<const Coord> p);

}  // namespace tilesmith
