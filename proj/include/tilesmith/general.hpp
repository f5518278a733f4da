#pragma once

// Tilings for an arbitrary finite tile in Z^b: densification inside
// G = Z_k^b, corner products, the blueprint partition, deconvolution, the
// special-dimension covering and the induction over ever denser tiles.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tilesmith/construction.hpp"
#include "tilesmith/simple.hpp"

namespace tilesmith {

/// T' = T + x, up = T' \ T, down = T \ T', dense = T u T'.
struct Densification {
  std::vector<Coord> moduli;
  BlockSet tile, shifted, up, down, dense;
  Point shift;
  json to_json() const;
};

/// x is the lexicographically smallest nonzero element with T + x != T.
/// Throws base_case when T is the whole group.
Densification make_densification(const BlockSet& tile);

/// One instance of the denser-set construction for a tile T in G with a
/// fixed d0. Spaces and nodes are memoized; thread-safe.
class DenserContext : public std::enable_shared_from_this<DenserContext> {
 public:
  DenserContext(const BlockSet& tile, std::size_t d0);

  const Densification& dens() const noexcept { return dens_; }
  std::size_t d0() const noexcept { return d0_; }
  /// Smallest d >= (1 + |G|/|T|) d0.
  std::size_t d() const noexcept { return d_; }
  const TilePtr& tile() const noexcept { return tile_; }
  const std::vector<Point>& group() const noexcept { return group_; }
  /// y_j for 1-based j: the group in lex order, repeated.
  const Point& y(std::size_t j) const { return group_[(j - 1) % group_.size()]; }

  /// A^D: D blocks over G restricted to A, tile T.
  SpacePtr a_space(std::size_t D);
  /// G x A^D.
  SpacePtr ga_space(std::size_t D);

  /// Per-block factors of C_{i,D} (i = 0: all down).
  std::vector<BlockSetPtr> cset(std::size_t i, std::size_t D) const;
  /// 1-based index i with the point (A^D coordinates) in C_{i,D}; 0 for
  /// C_{0,D}; nullopt if in none.
  std::optional<std::size_t> cset_index(std::span<const Coord> a, std::size_t D) const;

  /// Tiling of A^D \ C_{i,D}.
  NodePtr removed_cset(std::size_t D, std::size_t i);
  /// From a tiling of A^D \ X with C_{i,D} in X, a tiling of
  /// A^{D+1} \ dagger(X \ C_{i,D}). `check` verifies the containment.
  NodePtr use_cset(NodePtr X, std::size_t i, std::size_t D, bool check = false);
  /// Tiling of A^{r+m} minus dagger^m(A^r \ (C_{i_1,r} u ... u C_{i_m,r})).
  NodePtr m_csets(std::size_t r, std::vector<std::size_t> indices);

  /// Copies of the blueprint partition of G x A^r that avoid Y_0 and
  /// Y_1..Y_J, times C_{0,m} in m trailing coordinates. Lives on
  /// ga_space(r + m).
  NodePtr blueprint(std::size_t r, std::size_t m, std::size_t J);
  /// Tiling of G x (A^d \ (C_{d-m+1,d} u ... u C_{d,d})).
  NodePtr tiler_m(std::size_t m);
  /// Tiling of G x (A^d \ union of C_{i,d}, i in S), S 1-based.
  NodePtr tiler(std::vector<std::size_t> S);

 private:
  Densification dens_;
  std::size_t d0_;
  std::size_t d_;
  TilePtr tile_;
  Point shift_;
  std::vector<Point> group_;
  BlockSetPtr up_, down_, dense_, full_;

  std::recursive_mutex mu_;
  std::map<std::size_t, SpacePtr> a_spaces_, ga_spaces_;
  std::map<std::pair<std::size_t, std::size_t>, NodePtr> removed_;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, NodePtr> mcsets_;
  std::map<std::size_t, NodePtr> tilers_;
};

/// The blueprint piece as a node (see DenserContext::blueprint).
class BlueprintNode final : public Node {
 public:
  BlueprintNode(std::shared_ptr<DenserContext> ctx, std::size_t r, std::size_t m, std::size_t J);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  json params(DagWriter& w) const override;

 private:
  std::shared_ptr<DenserContext> ctx_;
  std::size_t r_, m_, J_;
  std::size_t b_;
};

// ------------------------------------------------------------ deconvolution

/// Periodic g with sum_{y in T} g(x - y) = f mod t for constant f, T a
/// one-dimensional tile (found by cycle detection).
PeriodicFn solve_g_periodic(const Tile& tile, Coord t, Coord f = 1);

/// Lazy g: Z^b -> [0, t) with sum_{y in T} g(x - y) = rhs(x) mod t, built row
/// by row along the last coordinate (zero band, forward rows, backward
/// rows). Evaluation is memoized and guarded by one mutex shared by the
/// whole recursion.
class Deconvolver {
 public:
  using Fn = std::function<Coord(std::span<const Coord>)>;

  Deconvolver(std::size_t dim, std::vector<Point> tile, Coord t, Fn rhs,
              std::shared_ptr<std::recursive_mutex> mu = nullptr);

  Coord operator()(std::span<const Coord> x) const;
  std::size_t dim() const noexcept { return dim_; }

 private:
  const Deconvolver& row(Coord n) const;

  std::size_t dim_;
  Coord t_;
  Fn rhs_;
  std::shared_ptr<std::recursive_mutex> mu_;
  std::map<Coord, std::vector<Point>> slices_;  // last coordinate -> T_n
  Coord n0_ = 0, n1_ = 0;
  mutable std::optional<Coord> value_;  // dim 0
  mutable std::map<Coord, std::unique_ptr<Deconvolver>> rows_;
};

// ------------------------------------------------------------ cover holes

/// Z^b x G x B^{d1} tiled by the integer tile on the first block and the
/// level tile A elsewhere (B the densification of A).
class CoverHolesNode final : public Node {
 public:
  CoverHolesNode(const Tile& int_tile, const BlockSet& level);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  json params(DagWriter& w) const override;

  const DenserContext& denser() const noexcept { return *ctx_; }
  std::size_t d0() const noexcept { return ctx_->d0(); }
  std::size_t d1() const noexcept { return ctx_->d(); }
  Coord t() const noexcept { return t_; }
  /// Family members (1-based C indices) attached to the copy at z.
  std::vector<std::uint32_t> family_at(std::span<const Coord> z) const;
  /// Union over tau in T of family_at(x - tau), sorted.
  std::vector<std::uint32_t> slice_family(std::span<const Coord> x) const;
  /// Plan period on the free axes (b = 1), 0 otherwise.
  Coord plan_period() const noexcept { return plan_period_; }
  Coord g(std::span<const Coord> z) const;

 private:
  CoverHolesNode(const Tile& int_tile, const BlockSet& level, std::shared_ptr<DenserContext> ctx);
  void extend_spiral(Coord radius) const;

  Tile int_tile_;
  BlockSet level_;
  std::size_t b_;
  Coord t_;
  std::shared_ptr<DenserContext> ctx_;
  std::vector<Point> diffs_;  // (T - T) \ {0}

  // b = 1: periodic plan
  PeriodicFn g1_;
  Coord plan_period_ = 0;
  std::vector<std::vector<std::uint32_t>> periodic_plan_;

  // b >= 2: spiral greedy, filled on demand
  std::unique_ptr<Deconvolver> gb_;
  mutable std::recursive_mutex mu_;
  mutable Coord radius_ = -1;
  mutable std::unordered_map<Point, std::vector<std::uint32_t>, PointHash> spiral_plan_;
};

// ------------------------------------------------------------ pipeline

struct GeneralLevel {
  std::vector<Point> A, B;
  std::size_t d0 = 0, d1 = 0, u = 0, v = 0, p = 0, q = 0;
  json to_json() const;
};

struct GeneralResult {
  NodePtr root;  // tiling of Z^{b(p+q)}
  Tile tile;
  Coord k = 0;
  std::size_t b = 0, p = 0, q = 0, d = 0;
  std::vector<GeneralLevel> levels;
  json trace() const;
};

GeneralResult synthesize_general(const Tile& tile);

/// Loader hook for certificate reading.
NodePtr load_general_node(NodeKind kind, SpacePtr space, const json& params);

}  // namespace tilesmith
