#include "tilesmith/general.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace tilesmith {

namespace {

Point sub(std::span<const Coord> a, std::span<const Coord> b, const std::vector<Coord>& moduli) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    r[i] = a[i] - b[i];
    if (i < moduli.size() && moduli[i] > 0) r[i] = mod_floor(r[i], moduli[i]);
  }
  return r;
}

json elements_json(const BlockSet& s) { return json(s.elements()); }

BlockSet blockset_from_json(const json& moduli, const json& elems) {
  return BlockSet(moduli.get<std::vector<Coord>>(), elems.get<std::vector<Point>>());
}

Coord lcm_sat(Coord a, Coord b) {
  Coord g = std::gcd(a, b);
  Coord q = a / g;
  if (q != 0 && b > INT64_MAX / q) throw Error(Errc::limit_exceeded, "plan period overflows");
  return q * b;
}

}  // namespace

// ----------------------------------------------------------- densification

json Densification::to_json() const {
  return json{{"moduli", moduli},       {"shift", shift},
              {"tile", elements_json(tile)}, {"shifted", elements_json(shifted)},
              {"up", elements_json(up)},     {"down", elements_json(down)},
              {"dense", elements_json(dense)}};
}

Densification make_densification(const BlockSet& tile) {
  if (tile.empty()) throw Error(Errc::parameter, "densification of an empty set");
  if (tile.is_full()) throw Error(Errc::base_case, "the tile already fills the group");
  Densification d;
  d.moduli = tile.moduli();
  d.tile = tile;
  for (std::size_t idx = 1; idx < tile.group_size(); ++idx) {
    Point x = tile.point_at(idx);
    BlockSet t2 = tile.translated(x);
    if (t2 == tile) continue;
    d.shift = std::move(x);
    d.shifted = std::move(t2);
    break;
  }
  d.up = d.shifted.set_minus(d.tile);
  d.down = d.tile.set_minus(d.shifted);
  d.dense = d.tile.set_union(d.shifted);
  return d;
}

// ----------------------------------------------------------- DenserContext

DenserContext::DenserContext(const BlockSet& tile, std::size_t d0)
    : dens_(make_densification(tile)), d0_(d0) {
  if (d0 == 0) throw Error(Errc::parameter, "d0 must be positive");
  const std::size_t t = tile.size(), g = tile.group_size();
  d_ = (d0 * (t + g) + t - 1) / t;
  tile_ = std::make_shared<const Tile>(tile.as_tile());
  shift_ = dens_.shift;
  group_ = BlockSet::full(dens_.moduli).elements();
  up_ = std::make_shared<const BlockSet>(dens_.up);
  down_ = std::make_shared<const BlockSet>(dens_.down);
  dense_ = std::make_shared<const BlockSet>(dens_.dense);
}

SpacePtr DenserContext::a_space(std::size_t D) {
  std::lock_guard lock(mu_);
  auto& s = a_spaces_[D];
  if (!s) {
    SpaceSignature::Builder b;
    for (std::size_t j = 0; j < D; ++j) b.block(dens_.moduli, tile_, dense_);
    s = std::move(b).build();
  }
  return s;
}

SpacePtr DenserContext::ga_space(std::size_t D) {
  std::lock_guard lock(mu_);
  auto& s = ga_spaces_[D];
  if (!s) {
    SpaceSignature::Builder b;
    b.block(dens_.moduli, tile_);
    for (std::size_t j = 0; j < D; ++j) b.block(dens_.moduli, tile_, dense_);
    s = std::move(b).build();
  }
  return s;
}

std::vector<BlockSetPtr> DenserContext::cset(std::size_t i, std::size_t D) const {
  if (i > D) throw Error(Errc::parameter, "cset index out of range");
  std::vector<BlockSetPtr> r(D, down_);
  if (i > 0) r[i - 1] = up_;
  return r;
}

std::optional<std::size_t> DenserContext::cset_index(std::span<const Coord> a, std::size_t D) const {
  const std::size_t b = dens_.moduli.size();
  std::size_t idx = 0;
  for (std::size_t q = 0; q < D; ++q) {
    auto c = a.subspan(q * b, b);
    if (down_->contains(c)) continue;
    if (idx != 0 || !up_->contains(c)) return std::nullopt;
    idx = q + 1;
  }
  return idx;
}

NodePtr DenserContext::removed_cset(std::size_t D, std::size_t i) {
  if (D == 0 || i > D) throw Error(Errc::parameter, "removed_cset: need 1 <= D and i <= D");
  std::lock_guard lock(mu_);
  if (auto it = removed_.find({D, i}); it != removed_.end()) return it->second;
  NodePtr node;
  if (D == 1) {
    Point off = i == 1 ? Point(shift_.size(), 0) : shift_;
    node = make_explicit(a_space(1), {Placement{0, off}});
  } else {
    const std::size_t s = i != D ? D : D - 1;   // 1-based block carrying the T' copies
    const std::size_t ip = i != D ? i : D - 1;  // index among the remaining blocks
    std::vector<BlockSetPtr> sets(D);
    for (std::size_t c = 0; c < D; ++c) {
      if (c == s - 1) continue;
      std::size_t q = c < s - 1 ? c + 1 : c;
      sets[c] = q == ip ? up_ : down_;
    }
    auto prod = make_product(a_space(D), s - 1, shift_, std::move(sets));
    auto rest = make_slice_uniform(a_space(D), s - 1, removed_cset(D - 1, ip));
    node = make_union({prod, rest});
  }
  removed_[{D, i}] = node;
  return node;
}

NodePtr DenserContext::use_cset(NodePtr X, std::size_t i, std::size_t D, bool check) {
  if (D == 0 || i > D) throw Error(Errc::parameter, "use_cset: need 1 <= D and i <= D");
  if (!X->space().same_as(*a_space(D))) throw Error(Errc::shape_mismatch, "use_cset: X lives elsewhere");
  if (check) {
    auto sets = cset(i, D);
    std::uint64_t n = 1;
    for (const auto& s : sets) n = std::min<std::uint64_t>(n * s->size(), UINT64_MAX / 64);
    if (n > 1'000'000) throw Error(Errc::limit_exceeded, "use_cset: containment check too large");
    std::vector<std::vector<Point>> el;
    for (const auto& s : sets) el.push_back(s->elements());
    std::vector<std::size_t> pos(D, 0);
    Point p;
    for (;;) {
      p.clear();
      for (std::size_t q = 0; q < D; ++q) p.insert(p.end(), el[q][pos[q]].begin(), el[q][pos[q]].end());
      if (X->find(p)) throw Error(Errc::containment, "use_cset: C_i is not inside the hole of X");
      std::size_t q = D;
      while (q > 0 && ++pos[q - 1] == el[q - 1].size()) pos[--q] = 0;
      if (q == 0) break;
    }
  }
  std::lock_guard lock(mu_);
  auto space = a_space(D + 1);
  std::vector<BlockSetPtr> sets = cset(i, D);
  sets.push_back(nullptr);
  auto prod = make_product(space, D, Point(shift_.size(), 0), std::move(sets));
  BlockSet both = dens_.tile.set_intersection(dens_.shifted);
  std::vector<NodePtr> ch(group_.size());
  NodePtr mid, top;
  for (std::size_t v = 0; v < group_.size(); ++v) {
    if (dens_.down.contains_index(v)) {
      ch[v] = X;
    } else if (both.contains_index(v)) {
      if (!mid) mid = removed_cset(D, i);
      ch[v] = mid;
    } else if (dens_.up.contains_index(v)) {
      if (!top) top = removed_cset(D, 0);
      ch[v] = top;
    }
  }
  return make_union({prod, make_slice(space, D, {}, std::move(ch))});
}

NodePtr DenserContext::m_csets(std::size_t r, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw Error(Errc::parameter, "m_csets: repeated index");
  if (r == 0 || (!indices.empty() && indices.back() > r))
    throw Error(Errc::parameter, "m_csets: index out of range");
  std::lock_guard lock(mu_);
  auto key = std::make_pair(r, indices);
  if (auto it = mcsets_.find(key); it != mcsets_.end()) return it->second;
  NodePtr node = make_empty(a_space(r));
  for (std::size_t l = 0; l < indices.size(); ++l) node = use_cset(node, indices[l], r + l);
  mcsets_[key] = node;
  return node;
}

NodePtr DenserContext::blueprint(std::size_t r, std::size_t m, std::size_t J) {
  if (J > r) throw Error(Errc::parameter, "blueprint: r is smaller than t|G|");
  return std::make_shared<BlueprintNode>(shared_from_this(), r, m, J);
}

NodePtr DenserContext::tiler_m(std::size_t m) {
  const std::size_t t = dens_.tile.size();
  if (m == 0 || (m - 1) % t != 0) throw Error(Errc::parity, "tiler: need m = 1 mod |T|");
  if (m > d0_) throw Error(Errc::bound, "tiler: m exceeds d0");
  std::lock_guard lock(mu_);
  if (auto it = tilers_.find(m); it != tilers_.end()) return it->second;
  const std::size_t r = d_ - m;
  const std::size_t J = (m - 1) / t * group_.size();
  auto bp = blueprint(r, m, J);
  std::vector<NodePtr> fibers(group_.size());
  for (std::size_t gi = 0; gi < group_.size(); ++gi) {
    std::vector<std::size_t> idx{0};
    for (std::size_t i = 1; i <= J; ++i)
      if (dens_.tile.contains(sub(group_[gi], y(i), dens_.moduli))) idx.push_back(i);
    fibers[gi] = m_csets(r, idx);
  }
  auto node = make_union({bp, make_slice(ga_space(d_), 0, {}, std::move(fibers))});
  tilers_[m] = node;
  return node;
}

NodePtr DenserContext::tiler(std::vector<std::size_t> S) {
  std::sort(S.begin(), S.end());
  if (std::adjacent_find(S.begin(), S.end()) != S.end()) throw Error(Errc::parameter, "tiler: repeated index");
  for (auto i : S)
    if (i == 0 || i > d_) throw Error(Errc::parameter, "tiler: index out of range");
  auto base = tiler_m(S.size());
  std::vector<std::size_t> order;
  for (std::size_t q = 0; q < d_; ++q)
    if (!std::binary_search(S.begin(), S.end(), q + 1)) order.push_back(q);
  for (auto i : S) order.push_back(i - 1);
  std::vector<std::size_t> perm(d_ + 1);
  perm[0] = 0;
  for (std::size_t np = 0; np < d_; ++np) perm[np + 1] = order[np] + 1;
  return make_embed(base, perm);
}

// ----------------------------------------------------------- BlueprintNode

BlueprintNode::BlueprintNode(std::shared_ptr<DenserContext> ctx, std::size_t r, std::size_t m,
                             std::size_t J)
    : Node(NodeKind::blueprint, ctx->ga_space(r + m)),
      ctx_(std::move(ctx)),
      r_(r),
      m_(m),
      J_(J),
      b_(ctx_->dens().moduli.size()) {}

std::optional<Placement> BlueprintNode::find(std::span<const Coord> p) const {
  const auto& dn = ctx_->dens();
  auto blk = [&](std::size_t q) { return p.subspan(q * b_, b_); };
  for (std::size_t q = r_ + 1; q <= r_ + m_; ++q)
    if (!dn.down.contains(blk(q))) return std::nullopt;
  std::size_t j = 0;
  for (std::size_t q = r_; q >= 1; --q) {
    if (!dn.down.contains(blk(q))) {
      j = q;
      break;
    }
  }
  if (j == 0) return std::nullopt;
  const Point& yj = ctx_->y(j);
  Placement pl{0, Point(p.begin(), p.end())};
  if (dn.tile.contains(sub(blk(0), yj, dn.moduli))) {
    if (j <= J_ && dn.up.contains(blk(j))) {
      bool lower = true;
      for (std::size_t q = 1; q < j && lower; ++q) lower = dn.down.contains(blk(q));
      if (lower) return std::nullopt;
    }
    std::copy(yj.begin(), yj.end(), pl.offset.begin());
  } else {
    pl.block = j;
    std::copy(dn.shift.begin(), dn.shift.end(), pl.offset.begin() + static_cast<std::ptrdiff_t>(j * b_));
  }
  return pl;
}

json BlueprintNode::params(DagWriter&) const {
  return json{{"moduli", ctx_->dens().moduli},
              {"tile", elements_json(ctx_->dens().tile)},
              {"d0", ctx_->d0()},
              {"r", r_},
              {"m", m_},
              {"J", J_}};
}

// ----------------------------------------------------------- deconvolution

PeriodicFn solve_g_periodic(const Tile& tile, Coord t, Coord f) {
  if (tile.dim() != 1) throw Error(Errc::shape_mismatch, "periodic deconvolution is one-dimensional");
  if (t < 1) throw Error(Errc::parameter, "modulus must be positive");
  Tile n = tile.normalized();
  const Coord K = n.extent(0);
  std::vector<Coord> lags;
  for (const auto& p : n.points())
    if (p[0] > 0) lags.push_back(p[0]);
  std::vector<Coord> seq(static_cast<std::size_t>(K), 0);  // zero window, then values
  const std::size_t cap = 10'000'000;
  for (;;) {
    Coord v = f;
    const std::size_t at = seq.size();
    for (Coord j : lags) v -= seq[at - static_cast<std::size_t>(j)];
    seq.push_back(mod_floor(v, t));
    const std::size_t steps = seq.size() - static_cast<std::size_t>(K);
    bool back = true;
    for (std::size_t a = seq.size() - static_cast<std::size_t>(K); a < seq.size() && back; ++a)
      back = seq[a] == 0;
    if (back) {
      PeriodicFn g;
      g.period = static_cast<Coord>(steps);
      g.modulus = t;
      g.values.assign(seq.begin() + K, seq.end());
      return g;
    }
    if (steps > cap) throw Error(Errc::limit_exceeded, "deconvolution period too long");
  }
}

Deconvolver::Deconvolver(std::size_t dim, std::vector<Point> tile, Coord t, Fn rhs,
                         std::shared_ptr<std::recursive_mutex> mu)
    : dim_(dim), t_(t), rhs_(std::move(rhs)), mu_(std::move(mu)) {
  if (!mu_) mu_ = std::make_shared<std::recursive_mutex>();
  if (tile.empty()) throw Error(Errc::parameter, "deconvolution needs a non-empty tile");
  if (t < 1) throw Error(Errc::parameter, "modulus must be positive");
  if (dim_ == 0) return;
  for (auto& p : tile) {
    if (p.size() != dim_) throw Error(Errc::shape_mismatch, "tile point has the wrong dimension");
    Coord n = p.back();
    p.pop_back();
    slices_[n].push_back(std::move(p));
  }
  n0_ = slices_.begin()->first;
  n1_ = slices_.rbegin()->first;
}

Coord Deconvolver::operator()(std::span<const Coord> x) const {
  std::lock_guard lock(*mu_);
  if (dim_ == 0) {
    if (!value_) value_ = mod_floor(rhs_(x), t_);
    return *value_;
  }
  const Coord N = x.back();
  if (N < 0 && N >= -(n1_ - n0_)) return 0;
  return row(N)(x.first(dim_ - 1));
}

const Deconvolver& Deconvolver::row(Coord N) const {
  auto it = rows_.find(N);
  if (it != rows_.end()) return *it->second;
  const bool forward = N >= 0;
  const Coord pivot = forward ? n0_ : n1_;
  Fn rhs = [this, N, pivot](std::span<const Coord> y) {
    const Coord eq = N + pivot;
    Point q(y.begin(), y.end());
    q.push_back(eq);
    Coord s = rhs_(q);
    for (const auto& [n, pts] : slices_) {
      if (n == pivot) continue;
      for (const auto& z : pts) {
        for (std::size_t a = 0; a < z.size(); ++a) q[a] = y[a] - z[a];
        q.back() = eq - n;
        s -= (*this)(q);
      }
    }
    return mod_floor(s, t_);
  };
  auto r = std::make_unique<Deconvolver>(dim_ - 1, slices_.at(pivot), t_, std::move(rhs), mu_);
  return *rows_.emplace(N, std::move(r)).first->second;
}

// ----------------------------------------------------------- CoverHolesNode

namespace {

std::size_t cover_d0(const Tile& t, const BlockSet& level) {
  std::size_t a = level.size();
  return std::max<std::size_t>(a - 1, 1) * t.size() * t.size();
}

SpacePtr coverholes_space(const Tile& int_tile, DenserContext& ctx) {
  auto ga = ctx.ga_space(ctx.d());
  SpaceSignature::Builder b;
  b.block(std::vector<Coord>(int_tile.dim(), 0), std::make_shared<const Tile>(int_tile));
  for (const auto& blk : ga->blocks()) b.block(ctx.dens().moduli, blk.tile, blk.domain);
  return std::move(b).build();
}

}  // namespace

CoverHolesNode::CoverHolesNode(const Tile& int_tile, const BlockSet& level)
    : CoverHolesNode(int_tile.normalized(), level,
                     std::make_shared<DenserContext>(level, cover_d0(int_tile, level))) {}

CoverHolesNode::CoverHolesNode(const Tile& int_tile, const BlockSet& level,
                               std::shared_ptr<DenserContext> ctx)
    : Node(NodeKind::coverholes, coverholes_space(int_tile, *ctx)),
      int_tile_(int_tile),
      level_(level),
      b_(int_tile.dim()),
      t_(static_cast<Coord>(level.size())),
      ctx_(std::move(ctx)) {
  if (level.dim() != b_) throw Error(Errc::shape_mismatch, "coverholes: level tile dimension");
  std::set<Point> diffs;
  for (const auto& a : int_tile_.points())
    for (const auto& c : int_tile_.points())
      if (a != c) diffs.insert(sub(a, c, {}));
  diffs_.assign(diffs.begin(), diffs.end());
  const std::size_t T = int_tile_.size();
  if (static_cast<std::size_t>(t_ - 1) * T * T > ctx_->d()) {
    throw Error(Errc::family_too_small, "coverholes: family smaller than (t-1)|T|^2");
  }
  const std::size_t d1 = ctx_->d();
  if (b_ == 1) {
    g1_ = solve_g_periodic(int_tile_, t_, 1);
    plan_period_ = lcm_sat(g1_.period, 2 * (int_tile_.extent(0) + 1));
    periodic_plan_.resize(static_cast<std::size_t>(plan_period_));
    for (Coord n = 0; n < plan_period_; ++n) {
      std::vector<bool> used(d1 + 1, false);
      for (const auto& dl : diffs_) {
        Coord r = mod_floor(n + dl[0], plan_period_);
        if (r >= n) continue;
        for (auto i : periodic_plan_[static_cast<std::size_t>(r)]) used[i] = true;
      }
      auto& out = periodic_plan_[static_cast<std::size_t>(n)];
      for (std::uint32_t i = 1; i <= d1 && static_cast<Coord>(out.size()) < g1_(n); ++i)
        if (!used[i]) out.push_back(i);
      if (static_cast<Coord>(out.size()) < g1_(n)) throw Error(Errc::family_too_small, "coverholes: plan ran out of sets");
    }
    for (std::size_t a = 0; a < b_; ++a) period_[a] = plan_period_;
  } else {
    gb_ = std::make_unique<Deconvolver>(b_, int_tile_.points(), t_,
                                        [](std::span<const Coord>) { return Coord{1}; });
    for (std::size_t a = 0; a < b_; ++a) period_[a] = 0;
  }
}

Coord CoverHolesNode::g(std::span<const Coord> z) const {
  return b_ == 1 ? g1_(z[0]) : (*gb_)(z);
}

void CoverHolesNode::extend_spiral(Coord radius) const {
  const std::size_t d1 = ctx_->d();
  for (Coord r = radius_ + 1; r <= radius; ++r) {
    Point z(b_, -r);
    for (;;) {
      Coord norm = 0;
      for (Coord c : z) norm = std::max(norm, c < 0 ? -c : c);
      if (norm == r) {
        std::vector<bool> used(d1 + 1, false);
        Point w(b_);
        for (const auto& dl : diffs_) {
          for (std::size_t a = 0; a < b_; ++a) w[a] = z[a] + dl[a];
          auto it = spiral_plan_.find(w);
          if (it == spiral_plan_.end()) continue;
          for (auto i : it->second) used[i] = true;
        }
        Coord want = g(z);
        std::vector<std::uint32_t> out;
        for (std::uint32_t i = 1; i <= d1 && static_cast<Coord>(out.size()) < want; ++i)
          if (!used[i]) out.push_back(i);
        if (static_cast<Coord>(out.size()) < want) throw Error(Errc::family_too_small, "coverholes: plan ran out of sets");
        spiral_plan_.emplace(z, std::move(out));
      }
      std::size_t a = b_;
      while (a > 0 && ++z[a - 1] > r) z[--a] = -r;
      if (a == 0) break;
    }
    radius_ = r;
  }
}

std::vector<std::uint32_t> CoverHolesNode::family_at(std::span<const Coord> z) const {
  if (b_ == 1) return periodic_plan_[static_cast<std::size_t>(mod_floor(z[0], plan_period_))];
  std::lock_guard lock(mu_);
  Coord norm = 0;
  for (Coord c : z) norm = std::max(norm, c < 0 ? -c : c);
  if (norm > radius_) extend_spiral(norm);
  return spiral_plan_.at(Point(z.begin(), z.end()));
}

std::vector<std::uint32_t> CoverHolesNode::slice_family(std::span<const Coord> x) const {
  std::vector<std::uint32_t> s;
  for (const auto& tau : int_tile_.points()) {
    auto f = family_at(sub(x, tau, {}));
    s.insert(s.end(), f.begin(), f.end());
  }
  std::sort(s.begin(), s.end());
  return s;
}

std::optional<Placement> CoverHolesNode::find(std::span<const Coord> p) const {
  const std::size_t d1 = ctx_->d();
  auto x = p.first(b_);
  auto g = p.subspan(b_, b_);
  auto a = p.subspan(2 * b_);
  if (auto idx = ctx_->cset_index(a, d1); idx && *idx > 0) {
    for (const auto& tau : int_tile_.points()) {
      Point z = sub(x, tau, {});
      auto f = family_at(z);
      if (std::find(f.begin(), f.end(), *idx) != f.end()) {
        Placement pl{0, Point(p.begin(), p.end())};
        std::copy(z.begin(), z.end(), pl.offset.begin());
        return pl;
      }
    }
  }
  auto S = slice_family(x);
  if (std::adjacent_find(S.begin(), S.end()) != S.end())
    throw Error(Errc::parameter, "coverholes: family sets of one slice are not disjoint");
  std::vector<std::size_t> order;
  order.reserve(d1);
  for (std::size_t q = 0; q < d1; ++q)
    if (!std::binary_search(S.begin(), S.end(), static_cast<std::uint32_t>(q + 1))) order.push_back(q);
  for (auto i : S) order.push_back(i - 1);
  Point q(g.begin(), g.end());
  q.reserve(b_ * (d1 + 1));
  for (std::size_t np = 0; np < d1; ++np) {
    auto c = a.subspan(order[np] * b_, b_);
    q.insert(q.end(), c.begin(), c.end());
  }
  auto r = ctx_->tiler_m(S.size())->find(q);
  if (!r) return std::nullopt;
  Placement pl{r->block == 0 ? 1 : 2 + order[r->block - 1], Point(p.size())};
  std::copy(x.begin(), x.end(), pl.offset.begin());
  std::copy(r->offset.begin(), r->offset.begin() + static_cast<std::ptrdiff_t>(b_),
            pl.offset.begin() + static_cast<std::ptrdiff_t>(b_));
  for (std::size_t np = 0; np < d1; ++np) {
    auto src = r->offset.begin() + static_cast<std::ptrdiff_t>(b_ * (np + 1));
    std::copy(src, src + static_cast<std::ptrdiff_t>(b_),
              pl.offset.begin() + static_cast<std::ptrdiff_t>(b_ * (2 + order[np])));
  }
  return pl;
}

json CoverHolesNode::params(DagWriter&) const {
  return json{{"tile", tile_to_json(int_tile_)},
              {"moduli", level_.moduli()},
              {"level", elements_json(level_)},
              {"d0", ctx_->d0()},
              {"d1", ctx_->d()},
              {"plan_period", plan_period_}};
}

// ----------------------------------------------------------- pipeline

json GeneralLevel::to_json() const {
  return json{{"A", A}, {"B", B}, {"d0", d0}, {"d1", d1}, {"u", u}, {"v", v}, {"p", p}, {"q", q}};
}

json GeneralResult::trace() const {
  json lv = json::array();
  for (const auto& l : levels) lv.push_back(l.to_json());
  // ceil(exp(100 (b log k)^2)) for comparison, as a base-10 exponent
  double lk = k > 1 ? std::log(static_cast<double>(k)) : 0.0;
  double e = 100.0 * (static_cast<double>(b) * lk) * (static_cast<double>(b) * lk) / std::log(10.0);
  return json{{"method", "general"}, {"tile", tile_to_json(tile)}, {"k", k}, {"b", b}, {"p", p},
              {"q", q}, {"d", d}, {"levels", lv}, {"bound_log10", e}};
}

GeneralResult synthesize_general(const Tile& input) {
  GeneralResult res;
  res.tile = input.normalized();
  const Tile& T = res.tile;
  res.b = T.dim();
  const std::size_t b = res.b;
  auto tz = std::make_shared<const Tile>(T);
  if (T.size() == 1) {
    SpaceSignature::Builder sb;
    sb.block(std::vector<Coord>(b, 0), tz);
    auto space = std::move(sb).build();
    res.root = make_explicit(space, {Placement{0, Point(b, 0)}}, std::vector<Coord>(b, 1));
    res.k = 1;
    res.p = 1;
    res.d = b;
    return res;
  }
  res.k = T.box_size();
  const std::vector<Coord> moduli(b, res.k);

  struct Claim {
    NodePtr node;
    std::size_t u, v;
  };
  std::map<std::vector<Point>, Claim> memo;
  std::function<Claim(const BlockSet&)> claim = [&](const BlockSet& A) -> Claim {
    auto key = A.elements();
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Claim c;
    if (A.is_full()) {
      SpaceSignature::Builder sb;
      sb.block(moduli, std::make_shared<const Tile>(A.as_tile()));
      auto space = std::move(sb).build();
      c = {make_explicit(space, {Placement{0, Point(b, 0)}}), 0, 1};
    } else {
      auto outer = std::make_shared<CoverHolesNode>(T, A);
      const BlockSet& B = outer->denser().dens().dense;
      Claim in = claim(B);
      const std::size_t d1 = outer->d1();
      std::vector<std::size_t> designated(d1);
      std::iota(designated.begin(), designated.end(), std::size_t{2});
      std::vector<LayoutEntry> layout;
      layout.push_back({-1, 0});
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t q = 0; q < in.u; ++q) layout.push_back({static_cast<int>(j), q});
      layout.push_back({-1, 1});
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t q = in.u; q < in.u + in.v; ++q) layout.push_back({static_cast<int>(j), q});
      c = {compose(outer, in.node, designated, layout), d1 * in.u + 1, d1 * in.v + 1};
      GeneralLevel lv;
      lv.A = key;
      lv.B = B.elements();
      lv.d0 = outer->d0();
      lv.d1 = d1;
      lv.u = in.u;
      lv.v = in.v;
      lv.p = c.u;
      lv.q = c.v;
      res.levels.push_back(std::move(lv));
    }
    memo.emplace(std::move(key), c);
    return c;
  };

  Claim top = claim(BlockSet::from_tile(moduli, T));
  std::reverse(res.levels.begin(), res.levels.end());
  res.p = top.u;
  res.q = top.v;
  res.d = b * (res.p + res.q);
  Projection proj;
  proj.moduli.assign(b * res.p, 0);
  proj.moduli.resize(res.d, res.k);
  std::vector<TilePtr> tiles(res.p + res.q, tz);
  res.root = lift(top.node, proj, tiles);
  return res;
}

NodePtr load_general_node(NodeKind kind, SpacePtr space, const json& params) {
  NodePtr node;
  try {
    if (kind == NodeKind::blueprint) {
      auto ctx = std::make_shared<DenserContext>(blockset_from_json(params.at("moduli"), params.at("tile")),
                                                 params.at("d0").get<std::size_t>());
      node = ctx->blueprint(params.at("r").get<std::size_t>(), params.at("m").get<std::size_t>(),
                            params.at("J").get<std::size_t>());
    } else if (kind == NodeKind::coverholes) {
      node = std::make_shared<CoverHolesNode>(tile_from_json(params.at("tile")),
                                              blockset_from_json(params.at("moduli"), params.at("level")));
    } else {
      throw Error(Errc::malformed, std::string("not a general node kind: ") + node_kind_name(kind));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("bad node parameters: ") + e.what());
  }
  if (space && !node->space().same_as(*space)) throw Error(Errc::malformed, "node space does not match its parameters");
  return node;
}

}  // namespace tilesmith
