#pragma once

// Lazy construction DAGs. A node describes a partial tiling of its space: every
// point is either covered by exactly one placement (returned by find) or lies
// in the node's hole. Nodes are immutable once built and may be shared.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tilesmith/space.hpp"

namespace tilesmith {

enum class NodeKind {
  explicit_list,
  slice,
  embed,
  disjoint_union,
  compose,
  lift,
  product,
  mask,
  blueprint,
  coverholes,
};

const char* node_kind_name(NodeKind kind);
NodeKind node_kind_from_name(const std::string& name);

class Node;
using NodePtr = std::shared_ptr<const Node>;

/// Id assignment used while serializing a DAG (see certificate.hpp).
class DagWriter {
 public:
  virtual ~DagWriter() = default;
  virtual std::size_t node(const NodePtr& n) = 0;
  virtual std::size_t space(const SpacePtr& s) = 0;
  virtual std::size_t set(const BlockSetPtr& s) = 0;
};

class DagReader {
 public:
  virtual ~DagReader() = default;
  virtual NodePtr node(std::size_t id) = 0;
  virtual SpacePtr space(std::size_t id) = 0;
  virtual BlockSetPtr set(std::size_t id) = 0;
};

constexpr std::uint64_t kDefaultLimit = 10'000'000;

/// Materialization limit from TILESMITH_LIMIT, falling back to 10^7.
std::uint64_t limit_from_env();

class Node : public std::enable_shared_from_this<Node> {
 public:
  Node(NodeKind kind, SpacePtr space);
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  NodeKind kind() const noexcept { return kind_; }
  const SpacePtr& space_ptr() const noexcept { return space_; }
  const SpaceSignature& space() const noexcept { return *space_; }

  /// Per axis: the modulus on cyclic axes; on free axes the period of the
  /// tiling, 0 when aperiodic.
  const std::vector<Coord>& period() const noexcept { return period_; }
  bool periodic() const;

  /// `p` must be a point of space(). Returns the covering placement or
  /// nullopt when p lies in the hole.
  virtual std::optional<Placement> find(std::span<const Coord> p) const = 0;
  virtual std::vector<NodePtr> children() const { return {}; }
  virtual json params(DagWriter& w) const = 0;
  /// Self-reported structural problems (e.g. overlapping explicit copies).
  virtual std::vector<std::string> integrity_issues() const { return {}; }

  /// Appends the placements meeting one fundamental domain whose free-axis
  /// sizes are `target` (each a multiple of period()). Offsets are reduced
  /// into the domain. The default enumerates points and calls find.
  virtual void emit(const std::vector<Coord>& target, std::uint64_t limit,
                    std::vector<Placement>& out) const;

 protected:
  void emit_by_locate(const std::vector<Coord>& target, std::uint64_t limit,
                      std::vector<Placement>& out) const;

  std::vector<Coord> period_;

 private:
  NodeKind kind_;
  SpacePtr space_;
};

/// Throws point_outside / point_in_hole.
Placement locate(const Node& node, std::span<const Coord> p);

/// All placements of one fundamental domain, sorted by (block, offset).
/// Throws limit_exceeded if the domain has more than `limit` points.
std::vector<Placement> materialize(const Node& node, std::uint64_t limit = kDefaultLimit);
std::vector<Placement> materialize(const Node& node, const std::vector<Coord>& target,
                                   std::uint64_t limit);

/// Number of points in the box of per-axis sizes (saturating), ignoring
/// block domains.
std::uint64_t box_volume(const std::vector<Coord>& sizes);
/// Per-axis box sizes: cyclic moduli and the given free-axis periods.
std::vector<Coord> domain_box(const SpaceSignature& s, const std::vector<Coord>& period);
/// Visits every point of the box that lies in the space's block domains.
void for_each_point(const SpaceSignature& s, const std::vector<Coord>& box,
                    const std::function<void(std::span<const Coord>)>& fn);

/// Reduce a placement's offset: cyclic axes mod modulus, free axes mod
/// `period` where it is positive.
Placement reduce_placement(const SpaceSignature& s, Placement pl, const std::vector<Coord>& period);
/// Same copy of the same block: equal offsets, or equal covers.
bool same_copy(const SpaceSignature& s, const Placement& a, const Placement& b);

std::vector<NodePtr> collect_dag(const NodePtr& root);
std::size_t dag_depth(const NodePtr& root);

// ------------------------------------------------------------------ nodes

class ExplicitNode final : public Node {
 public:
  /// `period` holds one entry per axis (free axes: 0 = not periodic);
  /// empty means aperiodic.
  ExplicitNode(SpacePtr space, std::vector<Placement> placements, std::vector<Coord> period = {});

  std::optional<Placement> find(std::span<const Coord> p) const override;
  json params(DagWriter& w) const override;
  std::vector<std::string> integrity_issues() const override { return issues_; }
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

  const std::vector<Placement>& placements() const noexcept { return placements_; }

 private:
  Point wrap(std::span<const Coord> p) const;

  std::vector<Placement> placements_;
  struct Hit {
    std::uint32_t index;
    Point unwrapped;
  };
  std::unordered_map<Point, Hit, PointHash> index_;
  std::vector<std::string> issues_;
};

/// Partitions by the value of one block. `children` is indexed by the
/// row-major index of the block value, reduced by the block moduli (cyclic
/// axes) or by `key_period` (free axes). A null child is a hole slice.
class SliceNode final : public Node {
 public:
  SliceNode(SpacePtr space, std::size_t block, std::vector<Coord> key_period,
            std::vector<NodePtr> children);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override;
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

  std::size_t block() const noexcept { return block_; }
  const std::vector<NodePtr>& slices() const noexcept { return children_; }
  const std::vector<Coord>& key_moduli() const noexcept { return key_moduli_; }

 private:
  std::size_t key_index(std::span<const Coord> p) const;
  Point child_point(std::span<const Coord> p) const;
  Placement to_parent(const Placement& c, std::span<const Coord> block_coords) const;

  std::size_t block_;
  std::size_t first_axis_;
  std::size_t dim_;
  std::vector<Coord> key_moduli_;
  std::vector<NodePtr> children_;
};

/// Re-embeds a child tiling by a block permutation (`perm[c]` = parent block
/// of child block c) followed by a translation.
class EmbedNode final : public Node {
 public:
  EmbedNode(SpacePtr space, NodePtr child, std::vector<std::size_t> perm, Point offset);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override { return {child_}; }
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

  const std::vector<std::size_t>& perm() const noexcept { return perm_; }

 private:
  Placement to_parent(const Placement& c) const;

  NodePtr child_;
  std::vector<std::size_t> perm_;
  Point offset_;
  std::vector<std::size_t> axis_map_;  // child axis -> parent axis
};

/// Children share the space and tile disjoint regions; the first child that
/// covers a point answers.
class UnionNode final : public Node {
 public:
  UnionNode(SpacePtr space, std::vector<NodePtr> children);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override { return children_; }
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

 private:
  std::vector<NodePtr> children_;
};

/// Copies of one block's tile at a fixed offset on that block, one copy for
/// every choice of the other blocks' coordinates from per-block sets.
class ProductNode final : public Node {
 public:
  /// `sets[c]` for c != block; null means the whole block group.
  ProductNode(SpacePtr space, std::size_t block, Point offset, std::vector<BlockSetPtr> sets);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

 private:
  std::size_t block_;
  Point offset_;  // block coordinates only
  std::vector<BlockSetPtr> sets_;
};

/// A child tiling with some of its copies removed (they join the hole).
class MaskNode final : public Node {
 public:
  MaskNode(NodePtr child, std::vector<Placement> excluded);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override { return {child_}; }
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

  const std::set<Placement>& excluded() const noexcept { return excluded_; }

 private:
  NodePtr child_;
  std::set<Placement> excluded_;
};

/// Result block origin in a composition: an outer block (copy < 0) or inner
/// block `block` of inner copy `copy`.
struct LayoutEntry {
  int copy = -1;
  std::size_t block = 0;
  friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

/// Composition of an outer tiling with d designated blocks (group H, domain
/// B, tile A) and an inner tiling whose substituted blocks carry tile B over
/// H. Each designated block is replaced by one copy of the inner space.
class ComposeNode final : public Node {
 public:
  ComposeNode(SpacePtr space, NodePtr outer, NodePtr inner, std::vector<std::size_t> designated,
              std::vector<bool> subst, std::vector<LayoutEntry> layout);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override { return {outer_, inner_}; }
  json params(DagWriter& w) const override;

  const std::vector<LayoutEntry>& layout() const noexcept { return layout_; }
  const std::vector<std::size_t>& designated() const noexcept { return designated_; }

 private:
  NodePtr outer_;
  NodePtr inner_;
  std::vector<std::size_t> designated_;
  std::vector<bool> subst_;
  std::vector<LayoutEntry> layout_;

  std::vector<std::size_t> outer_to_result_;               // per outer block (designated: npos)
  std::vector<std::vector<std::size_t>> copy_to_result_;   // [copy][inner block]
  std::vector<std::vector<std::size_t>> copy_axes_;        // [copy][inner axis] -> result axis
  std::vector<std::size_t> outer_axes_;                    // outer axis -> result axis (npos if designated)
  std::vector<int> designated_index_;                      // per outer block, -1 if not designated
};

/// Pulls a tiling back along reduction of some cyclic blocks to free axes.
class LiftNode final : public Node {
 public:
  LiftNode(SpacePtr space, NodePtr child, std::vector<bool> lifted);

  std::optional<Placement> find(std::span<const Coord> p) const override;
  std::vector<NodePtr> children() const override { return {child_}; }
  json params(DagWriter& w) const override;
  void emit(const std::vector<Coord>& target, std::uint64_t limit,
            std::vector<Placement>& out) const override;

  const std::vector<bool>& lifted() const noexcept { return lifted_; }

 private:
  NodePtr child_;
  std::vector<bool> lifted_;
  std::vector<Coord> moduli_;  // per parent axis, reduction modulus (0 = none)
  std::vector<std::unordered_map<Point, Point, PointHash>> residue_to_point_;
};

// --------------------------------------------------------------- builders

NodePtr make_explicit(SpacePtr space, std::vector<Placement> placements,
                      std::vector<Coord> period = {});
/// A node covering nothing: its hole is the whole space.
NodePtr make_empty(SpacePtr space);
/// Same child for every value of the block (cyclic blocks only).
NodePtr make_slice_uniform(SpacePtr space, std::size_t block, NodePtr child);
NodePtr make_slice(SpacePtr space, std::size_t block, std::vector<Coord> key_period,
                   std::vector<NodePtr> children);
NodePtr make_union(std::vector<NodePtr> children);
/// Parent space derived from the child by permuting blocks and translating
/// block domains.
NodePtr make_embed(NodePtr child, std::vector<std::size_t> perm, Point offset = {});
NodePtr make_product(SpacePtr space, std::size_t block, Point offset, std::vector<BlockSetPtr> sets);
/// Child minus the listed copies and their translates by the period.
NodePtr make_mask(NodePtr child, std::vector<Placement> excluded);

/// Composition. `designated` lists outer blocks (all over the same group H,
/// domain B); inner blocks over H whose tile equals B are substituted. An
/// empty `layout` means: outer non-designated blocks, then copy 0's blocks,
/// copy 1's, and so on. With no designated blocks the outer node is
/// returned as is. Throws shape_mismatch.
NodePtr compose(NodePtr outer, NodePtr inner, std::vector<std::size_t> designated,
                std::vector<LayoutEntry> layout = {});

/// Lift along `proj`, given per parent axis (0 keeps the axis). Every block
/// touched by the projection must be a full cyclic block whose axes are all
/// reduced, with `tiles[j]` its lifted tile; project_tile(tiles[j]) must be
/// injective with image equal to the block's tile. Identity returns `child`.
NodePtr lift(NodePtr child, const Projection& proj, const std::vector<TilePtr>& tiles);

}  // namespace tilesmith
