#include "tilesmith/construction.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <unordered_set>

namespace tilesmith {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

// lcm of periods; 0 (aperiodic) is absorbing and overflow degrades to 0.
Coord lcm_period(Coord a, Coord b) {
  if (a == 0 || b == 0) return 0;
  Coord g = std::gcd(a, b);
  Coord q = a / g;
  if (q > (Coord{1} << 62) / b) return 0;
  return q * b;
}

void check_point_size(const SpaceSignature& s, const Placement& pl, const char* who) {
  if (pl.block >= s.block_count() || pl.offset.size() != s.axis_count()) {
    throw Error(Errc::shape_mismatch, std::string(who) + ": placement does not fit the space");
  }
}

json set_ids(DagWriter& w, const std::vector<BlockSetPtr>& sets) {
  json arr = json::array();
  for (const auto& s : sets) arr.push_back(s ? json(w.set(s)) : json(nullptr));
  return arr;
}

json placements_json(const std::vector<Placement>& pls) {
  json arr = json::array();
  for (const auto& p : pls) arr.push_back(placement_to_json(p));
  return arr;
}

}  // namespace

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::explicit_list: return "explicit";
    case NodeKind::slice: return "slice";
    case NodeKind::embed: return "embed";
    case NodeKind::disjoint_union: return "union";
    case NodeKind::compose: return "compose";
    case NodeKind::lift: return "lift";
    case NodeKind::product: return "product";
    case NodeKind::mask: return "mask";
    case NodeKind::blueprint: return "blueprint";
    case NodeKind::coverholes: return "coverholes";
  }
  return "?";
}

NodeKind node_kind_from_name(const std::string& name) {
  for (auto k : {NodeKind::explicit_list, NodeKind::slice, NodeKind::embed,
                 NodeKind::disjoint_union, NodeKind::compose, NodeKind::lift, NodeKind::product,
                 NodeKind::mask, NodeKind::blueprint, NodeKind::coverholes}) {
    if (name == node_kind_name(k)) return k;
  }
  throw Error(Errc::malformed, "unknown node kind '" + name + "'");
}

std::uint64_t limit_from_env() {
  const char* env = std::getenv("TILESMITH_LIMIT");
  if (!env || !*env) return kDefaultLimit;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0' || v == 0) return kDefaultLimit;
  return v;
}

// ------------------------------------------------------------------ Node

Node::Node(NodeKind kind, SpacePtr space) : kind_(kind), space_(std::move(space)) {
  period_ = space_->moduli();
}

bool Node::periodic() const {
  for (std::size_t a = 0; a < period_.size(); ++a)
    if (space_->is_free(a) && period_[a] <= 0) return false;
  return true;
}

void Node::emit(const std::vector<Coord>& target, std::uint64_t limit,
                std::vector<Placement>& out) const {
  emit_by_locate(target, limit, out);
}

void Node::emit_by_locate(const std::vector<Coord>& target, std::uint64_t limit,
                          std::vector<Placement>& out) const {
  auto box = domain_box(*space_, target);
  if (box_volume(box) > limit) {
    throw Error(Errc::limit_exceeded, std::string(node_kind_name(kind_)) +
                                          " node: fundamental domain exceeds the limit");
  }
  std::set<Placement> seen;
  for_each_point(*space_, box, [&](std::span<const Coord> p) {
    if (auto pl = find(p)) seen.insert(reduce_placement(*space_, std::move(*pl), target));
  });
  out.insert(out.end(), seen.begin(), seen.end());
}

Placement locate(const Node& node, std::span<const Coord> p) {
  if (!node.space().contains(p)) {
    throw Error(Errc::point_outside, "point " + point_to_string(p) + " is outside the region");
  }
  auto pl = node.find(p);
  if (!pl) throw Error(Errc::point_in_hole, "point " + point_to_string(p) + " lies in the hole");
  return *pl;
}

std::uint64_t box_volume(const std::vector<Coord>& sizes) {
  std::uint64_t v = 1;
  for (Coord s : sizes) {
    if (s <= 0) return UINT64_MAX;
    auto u = static_cast<std::uint64_t>(s);
    if (v > UINT64_MAX / u) return UINT64_MAX;
    v *= u;
  }
  return v;
}

std::vector<Coord> domain_box(const SpaceSignature& s, const std::vector<Coord>& period) {
  std::vector<Coord> box(s.axis_count());
  for (std::size_t a = 0; a < box.size(); ++a) {
    box[a] = s.is_free(a) ? (a < period.size() ? period[a] : 0) : s.modulus(a);
  }
  return box;
}

void for_each_point(const SpaceSignature& s, const std::vector<Coord>& box,
                    const std::function<void(std::span<const Coord>)>& fn) {
  for (Coord c : box)
    if (c <= 0) return;
  Point p(box.size(), 0);
  while (true) {
    if (s.contains(p)) fn(p);
    std::size_t a = box.size();
    while (a > 0) {
      --a;
      if (++p[a] < box[a]) break;
      p[a] = 0;
      if (a == 0) return;
    }
    if (box.empty()) return;
  }
}

std::vector<Placement> materialize(const Node& node, std::uint64_t limit) {
  return materialize(node, node.period(), limit);
}

std::vector<Placement> materialize(const Node& node, const std::vector<Coord>& target,
                                   std::uint64_t limit) {
  const auto& s = node.space();
  for (std::size_t a = 0; a < s.axis_count(); ++a) {
    if (!s.is_free(a)) continue;
    Coord per = node.period()[a];
    if (per <= 0) {
      throw Error(Errc::limit_exceeded,
                  "tiling has no known period on axis " + std::to_string(a) + "; use sampling");
    }
    if (a >= target.size() || target[a] <= 0 || target[a] % per != 0) {
      throw Error(Errc::parameter, "target period must be a multiple of the node period");
    }
  }
  if (box_volume(domain_box(s, target)) > limit) {
    throw Error(Errc::limit_exceeded, "fundamental domain has more than " +
                                          std::to_string(limit) + " points");
  }
  std::vector<Placement> out;
  node.emit(target, limit, out);
  std::sort(out.begin(), out.end());
  return out;
}

Placement reduce_placement(const SpaceSignature& s, Placement pl, const std::vector<Coord>& period) {
  for (std::size_t a = 0; a < pl.offset.size(); ++a) {
    Coord m = s.is_free(a) ? (a < period.size() ? period[a] : 0) : s.modulus(a);
    if (m > 0) pl.offset[a] = mod_floor(pl.offset[a], m);
  }
  return pl;
}

bool same_copy(const SpaceSignature& s, const Placement& a, const Placement& b) {
  if (a.block != b.block) return false;
  if (a.offset == b.offset) return true;
  return cover(a, s) == cover(b, s);
}

std::vector<NodePtr> collect_dag(const NodePtr& root) {
  // iterative post-order so deep chains do not exhaust the stack
  std::vector<NodePtr> order;
  std::unordered_set<const Node*> seen;
  std::vector<std::pair<NodePtr, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (!n) continue;
    if (expanded) {
      order.push_back(n);
      continue;
    }
    if (!seen.insert(n.get()).second) continue;
    stack.push_back({n, true});
    auto ch = n->children();
    for (auto it = ch.rbegin(); it != ch.rend(); ++it)
      if (*it && !seen.count(it->get())) stack.push_back({*it, false});
  }
  return order;
}

std::size_t dag_depth(const NodePtr& root) {
  std::unordered_map<const Node*, std::size_t> depth;
  for (const auto& n : collect_dag(root)) {
    std::size_t d = 0;
    for (const auto& c : n->children())
      if (c) d = std::max(d, depth[c.get()]);
    depth[n.get()] = d + 1;
  }
  return root ? depth[root.get()] : 0;
}

// ---------------------------------------------------------- ExplicitNode

ExplicitNode::ExplicitNode(SpacePtr space, std::vector<Placement> placements,
                           std::vector<Coord> period)
    : Node(NodeKind::explicit_list, std::move(space)) {
  const auto& s = this->space();
  if (!period.empty()) {
    if (period.size() != s.axis_count()) throw Error(Errc::shape_mismatch, "explicit: period size");
    for (std::size_t a = 0; a < period.size(); ++a) {
      if (s.is_free(a)) {
        if (period[a] < 0) throw Error(Errc::parameter, "explicit: negative period");
        period_[a] = period[a];
      }
    }
  } else {
    for (std::size_t a = 0; a < period_.size(); ++a)
      if (s.is_free(a)) period_[a] = 0;
  }
  placements_.reserve(placements.size());
  for (auto& pl : placements) {
    check_point_size(s, pl, "explicit");
    placements_.push_back(reduce_placement(s, std::move(pl), period_));
  }
  std::size_t overlaps = 0;
  for (std::size_t i = 0; i < placements_.size(); ++i) {
    const auto& pl = placements_[i];
    const auto& b = s.block(pl.block);
    for (const auto& t : b.tile->points()) {
      Point q = pl.offset;
      for (std::size_t a = 0; a < b.dim; ++a) {
        std::size_t ax = b.first_axis + a;
        q[ax] += t[a];
        if (!s.is_free(ax)) q[ax] = mod_floor(q[ax], s.modulus(ax));
      }
      Point w = wrap(q);
      auto [it, fresh] = index_.try_emplace(std::move(w), Hit{static_cast<std::uint32_t>(i), q});
      if (!fresh && ++overlaps <= 8) {
        issues_.push_back("explicit copies overlap at " + point_to_string(it->first));
      }
    }
  }
  if (overlaps > 8) issues_.push_back(std::to_string(overlaps) + " overlapping cells in total");
}

Point ExplicitNode::wrap(std::span<const Coord> p) const {
  Point w(p.begin(), p.end());
  for (std::size_t a = 0; a < w.size(); ++a)
    if (period_[a] > 0) w[a] = mod_floor(w[a], period_[a]);
  return w;
}

std::optional<Placement> ExplicitNode::find(std::span<const Coord> p) const {
  auto it = index_.find(wrap(p));
  if (it == index_.end()) return std::nullopt;
  Placement pl = placements_[it->second.index];
  const auto& s = space();
  for (std::size_t a = 0; a < p.size(); ++a)
    if (s.is_free(a)) pl.offset[a] += p[a] - it->second.unwrapped[a];
  return pl;
}

json ExplicitNode::params(DagWriter&) const {
  json per = json::array();
  for (std::size_t a = 0; a < period_.size(); ++a) per.push_back(space().is_free(a) ? period_[a] : 0);
  return json{{"placements", placements_json(placements_)}, {"period", per}};
}

void ExplicitNode::emit(const std::vector<Coord>& target, std::uint64_t,
                        std::vector<Placement>& out) const {
  const auto& s = space();
  std::vector<std::size_t> free = s.free_axes();
  std::vector<Coord> reps(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) reps[i] = target[free[i]] / period_[free[i]];
  for (const auto& pl : placements_) {
    std::vector<Coord> k(free.size(), 0);
    while (true) {
      Placement c = pl;
      for (std::size_t i = 0; i < free.size(); ++i) c.offset[free[i]] += k[i] * period_[free[i]];
      out.push_back(std::move(c));
      std::size_t i = free.size();
      bool done = true;
      while (i > 0) {
        --i;
        if (++k[i] < reps[i]) {
          done = false;
          break;
        }
        k[i] = 0;
      }
      if (done) break;
    }
  }
}

// ------------------------------------------------------------- SliceNode

SliceNode::SliceNode(SpacePtr space, std::size_t block, std::vector<Coord> key_period,
                     std::vector<NodePtr> children)
    : Node(NodeKind::slice, std::move(space)), block_(block), children_(std::move(children)) {
  const auto& s = this->space();
  if (block_ >= s.block_count()) throw Error(Errc::parameter, "slice: block out of range");
  first_axis_ = s.block(block_).first_axis;
  dim_ = s.block(block_).dim;
  key_moduli_.resize(dim_);
  for (std::size_t a = 0; a < dim_; ++a) {
    Coord m = s.modulus(first_axis_ + a);
    if (m == 0) {
      if (a >= key_period.size() || key_period[a] <= 0) {
        throw Error(Errc::parameter, "slice over a free block needs a positive period");
      }
      m = key_period[a];
    }
    key_moduli_[a] = m;
  }
  if (children_.size() != box_volume(key_moduli_)) {
    throw Error(Errc::shape_mismatch, "slice: child count must equal the number of key values");
  }
  auto child_space = s.without_block(block_);
  std::vector<Coord> other(s.axis_count() - dim_);
  for (std::size_t a = 0; a < other.size(); ++a) other[a] = child_space->is_free(a) ? 1 : child_space->modulus(a);
  for (const auto& c : children_) {
    if (!c) continue;
    if (!c->space().same_as(*child_space)) {
      throw Error(Errc::shape_mismatch, "slice: child space differs from the parent minus the block");
    }
    for (std::size_t a = 0; a < other.size(); ++a)
      if (child_space->is_free(a)) other[a] = lcm_period(other[a], c->period()[a]);
  }
  for (std::size_t a = 0; a < s.axis_count(); ++a) {
    if (a >= first_axis_ && a < first_axis_ + dim_) {
      period_[a] = key_moduli_[a - first_axis_];
    } else {
      period_[a] = other[a < first_axis_ ? a : a - dim_];
    }
  }
}

std::size_t SliceNode::key_index(std::span<const Coord> p) const {
  std::size_t i = 0;
  for (std::size_t a = 0; a < dim_; ++a) {
    i = i * static_cast<std::size_t>(key_moduli_[a]) +
        static_cast<std::size_t>(mod_floor(p[first_axis_ + a], key_moduli_[a]));
  }
  return i;
}

Point SliceNode::child_point(std::span<const Coord> p) const {
  Point q;
  q.reserve(p.size() - dim_);
  q.insert(q.end(), p.begin(), p.begin() + static_cast<std::ptrdiff_t>(first_axis_));
  q.insert(q.end(), p.begin() + static_cast<std::ptrdiff_t>(first_axis_ + dim_), p.end());
  return q;
}

Placement SliceNode::to_parent(const Placement& c, std::span<const Coord> block_coords) const {
  Placement pl;
  pl.block = c.block >= block_ ? c.block + 1 : c.block;
  pl.offset.reserve(c.offset.size() + dim_);
  pl.offset.insert(pl.offset.end(), c.offset.begin(),
                   c.offset.begin() + static_cast<std::ptrdiff_t>(first_axis_));
  pl.offset.insert(pl.offset.end(), block_coords.begin(), block_coords.end());
  pl.offset.insert(pl.offset.end(), c.offset.begin() + static_cast<std::ptrdiff_t>(first_axis_),
                   c.offset.end());
  return pl;
}

std::optional<Placement> SliceNode::find(std::span<const Coord> p) const {
  const auto& child = children_[key_index(p)];
  if (!child) return std::nullopt;
  auto c = child->find(child_point(p));
  if (!c) return std::nullopt;
  return to_parent(*c, p.subspan(first_axis_, dim_));
}

std::vector<NodePtr> SliceNode::children() const {
  std::vector<NodePtr> out;
  std::unordered_set<const Node*> seen;
  for (const auto& c : children_)
    if (c && seen.insert(c.get()).second) out.push_back(c);
  return out;
}

json SliceNode::params(DagWriter& w) const {
  json ch = json::array();
  for (const auto& c : children_) ch.push_back(c ? json(w.node(c)) : json(nullptr));
  return json{{"block", block_}, {"key", key_moduli_}, {"children", ch}};
}

void SliceNode::emit(const std::vector<Coord>& target, std::uint64_t limit,
                     std::vector<Placement>& out) const {
  const auto& s = space();
  const auto& blk = s.block(block_);
  std::vector<Coord> child_target;
  child_target.reserve(target.size() - dim_);
  for (std::size_t a = 0; a < target.size(); ++a)
    if (a < first_axis_ || a >= first_axis_ + dim_) child_target.push_back(target[a]);
  std::vector<Coord> range(dim_);
  for (std::size_t a = 0; a < dim_; ++a) {
    std::size_t ax = first_axis_ + a;
    range[a] = s.is_free(ax) ? target[ax] : s.modulus(ax);
  }
  std::unordered_map<const Node*, std::vector<Placement>> cache;
  Point v(dim_, 0);
  while (true) {
    if (!blk.domain || blk.domain->contains(v)) {
      const auto& child = children_[key_index([&] {
        Point full(s.axis_count(), 0);
        std::copy(v.begin(), v.end(), full.begin() + static_cast<std::ptrdiff_t>(first_axis_));
        return full;
      }())];
      if (child) {
        auto it = cache.find(child.get());
        if (it == cache.end()) {
          std::vector<Placement> tmp;
          child->emit(child_target, limit, tmp);
          it = cache.emplace(child.get(), std::move(tmp)).first;
        }
        for (const auto& c : it->second) out.push_back(to_parent(c, v));
      }
    }
    std::size_t a = dim_;
    bool done = true;
    while (a > 0) {
      --a;
      if (++v[a] < range[a]) {
        done = false;
        break;
      }
      v[a] = 0;
    }
    if (done) break;
  }
}

// ------------------------------------------------------------- EmbedNode

EmbedNode::EmbedNode(SpacePtr space, NodePtr child, std::vector<std::size_t> perm, Point offset)
    : Node(NodeKind::embed, std::move(space)),
      child_(std::move(child)),
      perm_(std::move(perm)),
      offset_(std::move(offset)) {
  const auto& s = this->space();
  const auto& cs = child_->space();
  if (offset_.empty()) offset_.assign(s.axis_count(), 0);
  axis_map_.resize(cs.axis_count());
  for (std::size_t c = 0; c < cs.block_count(); ++c) {
    const auto& cb = cs.block(c);
    const auto& pb = s.block(perm_[c]);
    for (std::size_t a = 0; a < cb.dim; ++a) axis_map_[cb.first_axis + a] = pb.first_axis + a;
  }
  for (std::size_t a = 0; a < axis_map_.size(); ++a) period_[axis_map_[a]] = child_->period()[a];
}

Placement EmbedNode::to_parent(const Placement& c) const {
  const auto& s = space();
  Placement pl;
  pl.block = perm_[c.block];
  pl.offset.assign(s.axis_count(), 0);
  for (std::size_t a = 0; a < axis_map_.size(); ++a) {
    std::size_t pa = axis_map_[a];
    Coord v = c.offset[a] + offset_[pa];
    pl.offset[pa] = s.is_free(pa) ? v : mod_floor(v, s.modulus(pa));
  }
  return pl;
}

std::optional<Placement> EmbedNode::find(std::span<const Coord> p) const {
  const auto& cs = child_->space();
  Point q(axis_map_.size());
  for (std::size_t a = 0; a < q.size(); ++a) {
    std::size_t pa = axis_map_[a];
    Coord v = p[pa] - offset_[pa];
    q[a] = cs.is_free(a) ? v : mod_floor(v, cs.modulus(a));
  }
  auto c = child_->find(q);
  if (!c) return std::nullopt;
  return to_parent(*c);
}

json EmbedNode::params(DagWriter& w) const {
  return json{{"child", w.node(child_)}, {"perm", perm_}, {"offset", offset_}};
}

void EmbedNode::emit(const std::vector<Coord>& target, std::uint64_t limit,
                     std::vector<Placement>& out) const {
  std::vector<Coord> ct(axis_map_.size());
  for (std::size_t a = 0; a < ct.size(); ++a) ct[a] = target[axis_map_[a]];
  std::vector<Placement> tmp;
  child_->emit(ct, limit, tmp);
  for (const auto& c : tmp) out.push_back(reduce_placement(space(), to_parent(c), target));
}

// ------------------------------------------------------------- UnionNode

UnionNode::UnionNode(SpacePtr space, std::vector<NodePtr> children)
    : Node(NodeKind::disjoint_union, std::move(space)), children_(std::move(children)) {
  const auto& s = this->space();
  for (std::size_t a = 0; a < period_.size(); ++a)
    if (s.is_free(a)) period_[a] = 1;
  for (const auto& c : children_) {
    if (!c) throw Error(Errc::parameter, "union: null child");
    if (!c->space().same_as(s)) throw Error(Errc::shape_mismatch, "union: children spaces differ");
    for (std::size_t a = 0; a < period_.size(); ++a)
      if (s.is_free(a)) period_[a] = lcm_period(period_[a], c->period()[a]);
  }
}

std::optional<Placement> UnionNode::find(std::span<const Coord> p) const {
  for (const auto& c : children_)
    if (auto r = c->find(p)) return r;
  return std::nullopt;
}

json UnionNode::params(DagWriter& w) const {
  json ch = json::array();
  for (const auto& c : children_) ch.push_back(w.node(c));
  return json{{"children", ch}};
}

void UnionNode::emit(const std::vector<Coord>& target, std::uint64_t limit,
                     std::vector<Placement>& out) const {
  for (const auto& c : children_) c->emit(target, limit, out);
}

// ----------------------------------------------------------- ProductNode

ProductNode::ProductNode(SpacePtr space, std::size_t block, Point offset,
                         std::vector<BlockSetPtr> sets)
    : Node(NodeKind::product, std::move(space)),
      block_(block),
      offset_(std::move(offset)),
      sets_(std::move(sets)) {
  const auto& s = this->space();
  if (block_ >= s.block_count()) throw Error(Errc::parameter, "product: block out of range");
  if (offset_.size() != s.block(block_).dim) throw Error(Errc::shape_mismatch, "product: offset size");
  sets_.resize(s.block_count());
  for (std::size_t c = 0; c < s.block_count(); ++c) {
    if (c == block_) {
      sets_[c] = nullptr;
      continue;
    }
    if (sets_[c] && sets_[c]->moduli() != s.block_moduli(c)) {
      throw Error(Errc::shape_mismatch, "product: set moduli differ from the block");
    }
  }
  const auto& b = s.block(block_);
  for (std::size_t a = 0; a < b.dim; ++a) {
    std::size_t ax = b.first_axis + a;
    if (!s.is_free(ax)) offset_[a] = mod_floor(offset_[a], s.modulus(ax));
  }
  for (std::size_t a = 0; a < period_.size(); ++a) {
    if (!s.is_free(a)) continue;
    bool own = a >= b.first_axis && a < b.first_axis + b.dim;
    period_[a] = own ? 0 : 1;
  }
}

std::optional<Placement> ProductNode::find(std::span<const Coord> p) const {
  const auto& s = space();
  for (std::size_t c = 0; c < sets_.size(); ++c) {
    if (!sets_[c]) continue;
    const auto& b = s.block(c);
    if (!sets_[c]->contains(p.subspan(b.first_axis, b.dim))) return std::nullopt;
  }
  const auto& b = s.block(block_);
  Point diff(b.dim);
  for (std::size_t a = 0; a < b.dim; ++a) {
    std::size_t ax = b.first_axis + a;
    Coord v = p[ax] - offset_[a];
    diff[a] = s.is_free(ax) ? v : mod_floor(v, s.modulus(ax));
  }
  if (!b.tile->contains(diff)) return std::nullopt;
  Placement pl{block_, Point(p.begin(), p.end())};
  std::copy(offset_.begin(), offset_.end(), pl.offset.begin() + static_cast<std::ptrdiff_t>(b.first_axis));
  return pl;
}

json ProductNode::params(DagWriter& w) const {
  return json{{"block", block_}, {"offset", offset_}, {"sets", set_ids(w, sets_)}};
}

void ProductNode::emit(const std::vector<Coord>& target, std::uint64_t,
                       std::vector<Placement>& out) const {
  const auto& s = space();
  // per block list of admissible values
  std::vector<std::vector<Point>> choices(s.block_count());
  for (std::size_t c = 0; c < s.block_count(); ++c) {
    const auto& b = s.block(c);
    if (c == block_) {
      choices[c] = {offset_};
      continue;
    }
    if (sets_[c]) {
      choices[c] = sets_[c]->elements();
      if (b.domain) {
        std::erase_if(choices[c], [&](const Point& v) { return !b.domain->contains(v); });
      }
      continue;
    }
    std::vector<Coord> box(b.dim);
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      box[a] = s.is_free(ax) ? target[ax] : s.modulus(ax);
    }
    Point v(b.dim, 0);
    while (true) {
      if (!b.domain || b.domain->contains(v)) choices[c].push_back(v);
      std::size_t a = b.dim;
      bool done = true;
      while (a > 0) {
        --a;
        if (++v[a] < box[a]) {
          done = false;
          break;
        }
        v[a] = 0;
      }
      if (done) break;
    }
  }
  std::vector<std::size_t> idx(s.block_count(), 0);
  for (const auto& ch : choices)
    if (ch.empty()) return;
  while (true) {
    Placement pl{block_, Point(s.axis_count())};
    for (std::size_t c = 0; c < s.block_count(); ++c) {
      const auto& v = choices[c][idx[c]];
      std::copy(v.begin(), v.end(), pl.offset.begin() + static_cast<std::ptrdiff_t>(s.block(c).first_axis));
    }
    out.push_back(reduce_placement(s, std::move(pl), target));
    std::size_t c = s.block_count();
    bool done = true;
    while (c > 0) {
      --c;
      if (++idx[c] < choices[c].size()) {
        done = false;
        break;
      }
      idx[c] = 0;
    }
    if (done) break;
  }
}

// -------------------------------------------------------------- MaskNode

MaskNode::MaskNode(NodePtr child, std::vector<Placement> excluded)
    : Node(NodeKind::mask, child->space_ptr()),
      child_(std::move(child)) {
  period_ = child_->period();
  // masked per period class, so the reported period stays true
  for (auto& pl : excluded) excluded_.insert(reduce_placement(space(), std::move(pl), period_));
}

std::optional<Placement> MaskNode::find(std::span<const Coord> p) const {
  auto r = child_->find(p);
  if (r && excluded_.count(reduce_placement(space(), *r, period_))) return std::nullopt;
  return r;
}

json MaskNode::params(DagWriter& w) const {
  return json{{"child", w.node(child_)},
              {"excluded", placements_json({excluded_.begin(), excluded_.end()})}};
}

void MaskNode::emit(const std::vector<Coord>& target, std::uint64_t limit,
                    std::vector<Placement>& out) const {
  std::vector<Placement> tmp;
  child_->emit(target, limit, tmp);
  for (auto& pl : tmp)
    if (!excluded_.count(reduce_placement(space(), pl, period_))) out.push_back(std::move(pl));
}

// ----------------------------------------------------------- ComposeNode

ComposeNode::ComposeNode(SpacePtr space, NodePtr outer, NodePtr inner,
                         std::vector<std::size_t> designated, std::vector<bool> subst,
                         std::vector<LayoutEntry> layout)
    : Node(NodeKind::compose, std::move(space)),
      outer_(std::move(outer)),
      inner_(std::move(inner)),
      designated_(std::move(designated)),
      subst_(std::move(subst)),
      layout_(std::move(layout)) {
  const auto& s = this->space();
  const auto& os = outer_->space();
  const auto& is = inner_->space();
  const std::size_t d = designated_.size();
  designated_index_.assign(os.block_count(), -1);
  for (std::size_t j = 0; j < d; ++j) designated_index_[designated_[j]] = static_cast<int>(j);
  outer_to_result_.assign(os.block_count(), npos);
  copy_to_result_.assign(d, std::vector<std::size_t>(is.block_count(), npos));
  for (std::size_t r = 0; r < layout_.size(); ++r) {
    const auto& e = layout_[r];
    if (e.copy < 0) {
      outer_to_result_[e.block] = r;
    } else {
      copy_to_result_[static_cast<std::size_t>(e.copy)][e.block] = r;
    }
  }
  outer_axes_.assign(os.axis_count(), npos);
  for (std::size_t ob = 0; ob < os.block_count(); ++ob) {
    if (outer_to_result_[ob] == npos) continue;
    const auto& from = os.block(ob);
    const auto& to = s.block(outer_to_result_[ob]);
    for (std::size_t a = 0; a < from.dim; ++a) {
      outer_axes_[from.first_axis + a] = to.first_axis + a;
      period_[to.first_axis + a] = outer_->period()[from.first_axis + a];
    }
  }
  copy_axes_.assign(d, std::vector<std::size_t>(is.axis_count(), npos));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t c = 0; c < is.block_count(); ++c) {
      const auto& from = is.block(c);
      const auto& to = s.block(copy_to_result_[j][c]);
      for (std::size_t a = 0; a < from.dim; ++a) {
        copy_axes_[j][from.first_axis + a] = to.first_axis + a;
        period_[to.first_axis + a] = inner_->period()[from.first_axis + a];
      }
    }
  }
}

std::optional<Placement> ComposeNode::find(std::span<const Coord> p) const {
  const auto& s = space();
  const auto& os = outer_->space();
  const auto& is = inner_->space();
  const std::size_t d = designated_.size();
  std::vector<std::size_t> sub_block(d);
  std::vector<Point> shift(d);
  std::vector<Point> z(d);
  Point iota(is.axis_count());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t a = 0; a < iota.size(); ++a) iota[a] = p[copy_axes_[j][a]];
    auto q = inner_->find(iota);
    if (!q) return std::nullopt;
    if (!subst_[q->block]) {
      Placement out{copy_to_result_[j][q->block], Point(p.begin(), p.end())};
      for (std::size_t a = 0; a < iota.size(); ++a) out.offset[copy_axes_[j][a]] = q->offset[a];
      return out;
    }
    const auto& b = is.block(q->block);
    sub_block[j] = q->block;
    shift[j].resize(b.dim);
    z[j].resize(b.dim);
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      shift[j][a] = q->offset[ax];
      z[j][a] = mod_floor(iota[ax] - q->offset[ax], is.modulus(ax));
    }
  }
  Point o(os.axis_count());
  for (std::size_t ob = 0; ob < os.block_count(); ++ob) {
    const auto& b = os.block(ob);
    int j = designated_index_[ob];
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      o[ax] = j < 0 ? p[outer_axes_[ax]] : z[static_cast<std::size_t>(j)][a];
    }
  }
  auto P = outer_->find(o);
  if (!P) return std::nullopt;
  int j = designated_index_[P->block];
  if (j < 0) {
    Placement out{outer_to_result_[P->block], Point(p.begin(), p.end())};
    for (std::size_t ax = 0; ax < o.size(); ++ax)
      if (outer_axes_[ax] != npos) out.offset[outer_axes_[ax]] = P->offset[ax];
    return out;
  }
  auto ju = static_cast<std::size_t>(j);
  std::size_t rb = copy_to_result_[ju][sub_block[ju]];
  Placement out{rb, Point(p.begin(), p.end())};
  const auto& ob = os.block(P->block);
  const auto& target = s.block(rb);
  for (std::size_t a = 0; a < ob.dim; ++a) {
    std::size_t ax = target.first_axis + a;
    out.offset[ax] = mod_floor(P->offset[ob.first_axis + a] + shift[ju][a], s.modulus(ax));
  }
  return out;
}

json ComposeNode::params(DagWriter& w) const {
  json lay = json::array();
  for (const auto& e : layout_) lay.push_back(json::array({e.copy, e.block}));
  json sub = json::array();
  for (bool b : subst_) sub.push_back(b);
  return json{{"outer", w.node(outer_)},
              {"inner", w.node(inner_)},
              {"designated", designated_},
              {"subst", sub},
              {"layout", lay}};
}

// -------------------------------------------------------------- LiftNode

LiftNode::LiftNode(SpacePtr space, NodePtr child, std::vector<bool> lifted)
    : Node(NodeKind::lift, std::move(space)), child_(std::move(child)), lifted_(std::move(lifted)) {
  const auto& s = this->space();
  const auto& cs = child_->space();
  moduli_.assign(s.axis_count(), 0);
  residue_to_point_.resize(s.block_count());
  period_ = child_->period();
  for (std::size_t j = 0; j < s.block_count(); ++j) {
    if (!lifted_[j]) continue;
    const auto& b = s.block(j);
    std::vector<Coord> mods(b.dim);
    for (std::size_t a = 0; a < b.dim; ++a) {
      mods[a] = cs.modulus(b.first_axis + a);
      moduli_[b.first_axis + a] = mods[a];
      period_[b.first_axis + a] = mods[a];
    }
    for (const auto& t : b.tile->points()) {
      Point r(b.dim);
      for (std::size_t a = 0; a < b.dim; ++a) r[a] = mod_floor(t[a], mods[a]);
      residue_to_point_[j].emplace(std::move(r), t);
    }
  }
}

std::optional<Placement> LiftNode::find(std::span<const Coord> p) const {
  const auto& s = space();
  Point q(p.begin(), p.end());
  for (std::size_t a = 0; a < q.size(); ++a)
    if (moduli_[a] > 0) q[a] = mod_floor(q[a], moduli_[a]);
  auto r = child_->find(q);
  if (!r) return std::nullopt;
  Placement out{r->block, {}};
  if (lifted_[r->block]) {
    out.offset.assign(p.begin(), p.end());
    const auto& b = s.block(r->block);
    Point key(b.dim);
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      key[a] = mod_floor(p[ax] - r->offset[ax], moduli_[ax]);
    }
    auto it = residue_to_point_[r->block].find(key);
    if (it == residue_to_point_[r->block].end()) return std::nullopt;  // inconsistent child
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      out.offset[ax] = p[ax] - it->second[a];
    }
    return out;
  }
  out.offset = std::move(r->offset);
  for (std::size_t a = 0; a < p.size(); ++a)
    if (moduli_[a] > 0) out.offset[a] = p[a];
  return out;
}

json LiftNode::params(DagWriter& w) const {
  json lf = json::array();
  for (bool b : lifted_) lf.push_back(b);
  return json{{"child", w.node(child_)}, {"lifted", lf}};
}

void LiftNode::emit(const std::vector<Coord>& target, std::uint64_t limit,
                    std::vector<Placement>& out) const {
  std::vector<Coord> ct = target;
  for (std::size_t a = 0; a < ct.size(); ++a)
    if (moduli_[a] > 0) ct[a] = 0;
  std::vector<Placement> tmp;
  child_->emit(ct, limit, tmp);
  std::vector<std::size_t> axes;
  std::vector<Coord> reps;
  for (std::size_t a = 0; a < moduli_.size(); ++a) {
    if (moduli_[a] > 0) {
      axes.push_back(a);
      reps.push_back(target[a] / moduli_[a]);
    }
  }
  for (const auto& pl : tmp) {
    // a residue offset is already a valid integer representative
    std::vector<Coord> k(axes.size(), 0);
    while (true) {
      Placement c = pl;
      for (std::size_t i = 0; i < axes.size(); ++i) c.offset[axes[i]] += k[i] * moduli_[axes[i]];
      out.push_back(std::move(c));
      std::size_t i = axes.size();
      bool done = true;
      while (i > 0) {
        --i;
        if (++k[i] < reps[i]) {
          done = false;
          break;
        }
        k[i] = 0;
      }
      if (done) break;
    }
  }
}

// -------------------------------------------------------------- builders

NodePtr make_explicit(SpacePtr space, std::vector<Placement> placements, std::vector<Coord> period) {
  return std::make_shared<ExplicitNode>(std::move(space), std::move(placements), std::move(period));
}

NodePtr make_empty(SpacePtr space) {
  return std::make_shared<ExplicitNode>(std::move(space), std::vector<Placement>{});
}

NodePtr make_slice(SpacePtr space, std::size_t block, std::vector<Coord> key_period,
                   std::vector<NodePtr> children) {
  return std::make_shared<SliceNode>(std::move(space), block, std::move(key_period),
                                     std::move(children));
}

NodePtr make_slice_uniform(SpacePtr space, std::size_t block, NodePtr child) {
  if (block >= space->block_count()) throw Error(Errc::parameter, "slice: block out of range");
  auto mods = space->block_moduli(block);
  for (Coord m : mods)
    if (m == 0) throw Error(Errc::parameter, "uniform slice needs a cyclic block");
  std::vector<NodePtr> ch(box_volume(mods), child);
  return make_slice(std::move(space), block, {}, std::move(ch));
}

NodePtr make_union(std::vector<NodePtr> children) {
  if (children.empty()) throw Error(Errc::parameter, "union: no children");
  if (children.size() == 1) return children.front();
  auto space = children.front()->space_ptr();
  return std::make_shared<UnionNode>(std::move(space), std::move(children));
}

NodePtr make_embed(NodePtr child, std::vector<std::size_t> perm, Point offset) {
  const auto& cs = child->space();
  const std::size_t nb = cs.block_count();
  if (perm.size() != nb) throw Error(Errc::shape_mismatch, "embed: permutation size");
  std::vector<std::size_t> inv(nb, npos);
  for (std::size_t c = 0; c < nb; ++c) {
    if (perm[c] >= nb || inv[perm[c]] != npos) {
      throw Error(Errc::parameter, "embed: block map is not a bijection");
    }
    inv[perm[c]] = c;
  }
  SpaceSignature::Builder b;
  std::vector<std::size_t> first(nb);
  std::size_t axis = 0;
  for (std::size_t pb = 0; pb < nb; ++pb) {
    first[pb] = axis;
    axis += cs.block(inv[pb]).dim;
  }
  if (!offset.empty() && offset.size() != cs.axis_count()) {
    throw Error(Errc::shape_mismatch, "embed: offset size");
  }
  for (std::size_t pb = 0; pb < nb; ++pb) {
    const auto& src = cs.block(inv[pb]);
    BlockSetPtr dom = src.domain;
    if (dom && !offset.empty()) {
      Point shift(offset.begin() + static_cast<std::ptrdiff_t>(first[pb]),
                  offset.begin() + static_cast<std::ptrdiff_t>(first[pb] + src.dim));
      if (std::any_of(shift.begin(), shift.end(), [](Coord c) { return c != 0; })) {
        dom = std::make_shared<const BlockSet>(dom->translated(shift));
      }
    }
    b.block(cs.block_moduli(inv[pb]), src.tile, dom);
  }
  auto space = std::move(b).build();
  bool identity = offset.empty() || std::all_of(offset.begin(), offset.end(), [](Coord c) { return c == 0; });
  for (std::size_t c = 0; c < nb && identity; ++c) identity = perm[c] == c;
  if (identity) return child;
  return std::make_shared<EmbedNode>(std::move(space), std::move(child), std::move(perm),
                                     std::move(offset));
}

NodePtr make_product(SpacePtr space, std::size_t block, Point offset, std::vector<BlockSetPtr> sets) {
  return std::make_shared<ProductNode>(std::move(space), block, std::move(offset), std::move(sets));
}

NodePtr make_mask(NodePtr child, std::vector<Placement> excluded) {
  if (excluded.empty()) return child;
  return std::make_shared<MaskNode>(std::move(child), std::move(excluded));
}

NodePtr compose(NodePtr outer, NodePtr inner, std::vector<std::size_t> designated,
                std::vector<LayoutEntry> layout) {
  const std::size_t d = designated.size();
  if (d == 0) return outer;
  const auto& os = outer->space();
  const auto& is = inner->space();
  std::vector<bool> is_designated(os.block_count(), false);
  for (auto h : designated) {
    if (h >= os.block_count() || is_designated[h]) {
      throw Error(Errc::parameter, "compose: designated blocks must be distinct outer blocks");
    }
    is_designated[h] = true;
  }
  const auto h_moduli = os.block_moduli(designated[0]);
  for (Coord m : h_moduli)
    if (m == 0) throw Error(Errc::shape_mismatch, "compose: designated blocks must be cyclic");
  BlockSet dom = os.block(designated[0]).domain ? *os.block(designated[0]).domain
                                                : BlockSet::full(h_moduli);
  for (auto h : designated) {
    BlockSet other = os.block(h).domain ? *os.block(h).domain : BlockSet::full(os.block_moduli(h));
    if (os.block_moduli(h) != h_moduli || !(other == dom)) {
      throw Error(Errc::shape_mismatch, "compose: designated blocks differ in group or domain");
    }
  }
  std::vector<bool> subst(is.block_count(), false);
  bool any = false;
  for (std::size_t c = 0; c < is.block_count(); ++c) {
    if (is.block_moduli(c) != h_moduli) continue;
    if (BlockSet::from_tile(h_moduli, *is.block(c).tile) == dom) {
      subst[c] = true;
      any = true;
    }
  }
  if (!any) {
    throw Error(Errc::shape_mismatch,
                "compose: inner tiling has no block whose tile equals the designated domain");
  }
  if (layout.empty()) {
    for (std::size_t ob = 0; ob < os.block_count(); ++ob)
      if (!is_designated[ob]) layout.push_back({-1, ob});
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t c = 0; c < is.block_count(); ++c) layout.push_back({static_cast<int>(j), c});
  }
  // layout must hit every source exactly once
  std::set<std::pair<int, std::size_t>> seen;
  for (const auto& e : layout) {
    bool ok = e.copy < 0 ? (e.block < os.block_count() && !is_designated[e.block])
                         : (static_cast<std::size_t>(e.copy) < d && e.block < is.block_count());
    if (!ok || !seen.insert({e.copy, e.block}).second) {
      throw Error(Errc::parameter, "compose: layout table is not a bijection");
    }
  }
  if (seen.size() != os.block_count() - d + d * is.block_count()) {
    throw Error(Errc::parameter, "compose: layout table is incomplete");
  }
  SpaceSignature::Builder b;
  for (const auto& e : layout) {
    if (e.copy < 0) {
      const auto& src = os.block(e.block);
      b.block(os.block_moduli(e.block), src.tile, src.domain);
    } else {
      const auto& src = is.block(e.block);
      TilePtr tile = subst[e.block] ? os.block(designated[static_cast<std::size_t>(e.copy)]).tile
                                    : src.tile;
      b.block(is.block_moduli(e.block), tile, src.domain);
    }
  }
  return std::make_shared<ComposeNode>(std::move(b).build(), std::move(outer), std::move(inner),
                                       std::move(designated), std::move(subst), std::move(layout));
}

NodePtr lift(NodePtr child, const Projection& proj, const std::vector<TilePtr>& tiles) {
  const auto& cs = child->space();
  if (proj.moduli.size() != cs.axis_count()) throw Error(Errc::shape_mismatch, "lift: projection size");
  if (proj.is_identity()) return child;
  std::vector<bool> lifted(cs.block_count(), false);
  SpaceSignature::Builder b;
  for (std::size_t j = 0; j < cs.block_count(); ++j) {
    const auto& blk = cs.block(j);
    std::size_t reduced = 0;
    for (std::size_t a = 0; a < blk.dim; ++a) {
      Coord m = proj.moduli[blk.first_axis + a];
      if (m == 0) continue;
      if (cs.modulus(blk.first_axis + a) != m) {
        throw Error(Errc::shape_mismatch, "lift: projection modulus differs from the axis modulus");
      }
      ++reduced;
    }
    if (reduced == 0) {
      b.block(cs.block_moduli(j), blk.tile, blk.domain);
      continue;
    }
    if (reduced != blk.dim) throw Error(Errc::shape_mismatch, "lift: block only partly reduced");
    if (blk.domain && !blk.domain->is_full()) {
      throw Error(Errc::shape_mismatch, "lift: lifted blocks must cover their whole group");
    }
    if (j >= tiles.size() || !tiles[j] || tiles[j]->dim() != blk.dim) {
      throw Error(Errc::shape_mismatch, "lift: missing lifted tile for block " + std::to_string(j));
    }
    auto pt = project_tile(*tiles[j], Projection{cs.block_moduli(j)});
    if (!pt.injective) {
      throw Error(Errc::not_injective, "lift: projection is not injective on the tile of block " +
                                           std::to_string(j));
    }
    auto mods = cs.block_moduli(j);
    if (!(BlockSet::from_tile(mods, pt.image) == BlockSet::from_tile(mods, *blk.tile))) {
      throw Error(Errc::shape_mismatch, "lift: projected tile differs from the block tile");
    }
    lifted[j] = true;
    b.block(std::vector<Coord>(blk.dim, 0), tiles[j]);
  }
  return std::make_shared<LiftNode>(std::move(b).build(), std::move(child), std::move(lifted));
}

}  // namespace tilesmith
