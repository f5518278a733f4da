#include "tilesmith/simple.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace tilesmith {

std::uint64_t ipow_sat(std::uint64_t k, std::uint64_t e) {
  std::uint64_t r = 1;
  for (std::uint64_t j = 0; j < e; ++j) {
    if (k != 0 && r > UINT64_MAX / k) return UINT64_MAX;
    r *= k;
  }
  return r;
}

json PeriodicFn::to_json() const {
  return json{{"period", period}, {"modulus", modulus}, {"values", values}};
}

json SpecialColumnPlan::to_json() const {
  return json{{"period", period}, {"family", family}, {"S", S}};
}

Tile punctured_interval(Coord k, Coord i) {
  if (k < 3 || i < 2 || i > k - 1) {
    throw Error(Errc::parameter, "punctured interval needs k >= 3 and 2 <= i <= k-1");
  }
  std::vector<Point> pts;
  for (Coord v = 0; v < k; ++v)
    if (v != i - 1) pts.push_back({v});
  return Tile(1, std::move(pts));
}

std::optional<std::pair<Coord, Coord>> as_punctured_interval(const Tile& t) {
  if (t.dim() != 1 || !t.is_normalized()) return std::nullopt;
  Coord k = t.extent(0) + 1;
  if (k < 3 || static_cast<Coord>(t.size()) != k - 1) return std::nullopt;
  for (Coord v = 1; v < k - 1; ++v)
    if (!t.contains(Point{v})) return std::make_pair(k, v + 1);
  return std::nullopt;
}

// ----------------------------------------------------------- SimpleContext

SimpleContext::SimpleContext(Coord k, Coord i)
    : k_(k), i_(i), tile_(std::make_shared<const Tile>(punctured_interval(k, i))) {}

SpacePtr SimpleContext::space(std::size_t d) {
  std::lock_guard lock(mu_);
  while (spaces_.size() <= d) {
    SpaceSignature::Builder b;
    for (std::size_t a = 0; a < spaces_.size(); ++a) b.block({k_}, tile_);
    spaces_.push_back(std::move(b).build());
  }
  return spaces_[d];
}

Point SimpleContext::corner(std::size_t j, std::size_t d) const {
  Point c(d, 0);
  c[j] = k_ - 1;
  return c;
}

NodePtr SimpleContext::cover_but_one(std::size_t d, const Point& x) {
  if (x.size() != d) throw Error(Errc::shape_mismatch, "cover_but_one: point has the wrong dimension");
  for (Coord c : x)
    if (c < 0 || c >= k_) throw Error(Errc::point_outside, "cover_but_one: coordinate out of range");
  std::lock_guard lock(mu_);
  if (auto it = cbo_.find(x); it != cbo_.end()) return it->second;
  NodePtr node;
  if (d == 0) {
    node = make_empty(space(0));
  } else if (d == 1) {
    node = make_explicit(space(1), {Placement{0, {mod_floor(x[0] - (i_ - 1), k_)}}});
  } else {
    Point xh(x.begin(), x.end() - 1);
    Placement col{d - 1, xh};
    col.offset.push_back(mod_floor(x[d - 1] - (i_ - 1), k_));
    node = make_union({make_explicit(space(d), {col}),
                       make_slice_uniform(space(d), d - 1, cover_but_one(d - 1, xh))});
  }
  cbo_.emplace(x, node);
  return node;
}

HoleTiling SimpleContext::move_point(const HoleTiling& h, const Point& x) {
  const std::size_t d = x.size();
  if (std::find(h.hole.begin(), h.hole.end(), x) == h.hole.end()) {
    throw Error(Errc::parameter, "move_point: " + point_to_string(x) + " is not in the hole");
  }
  if (!h.node->space().same_as(*space(d))) throw Error(Errc::shape_mismatch, "move_point: space");
  Placement col{d, x};
  col.offset.push_back(k_ - i_);
  std::vector<NodePtr> layers(static_cast<std::size_t>(k_));
  NodePtr mid = cover_but_one(d, x);
  for (Coord c = 0; c < k_; ++c) layers[static_cast<std::size_t>(c)] = mid;
  layers[0] = h.node;
  layers[static_cast<std::size_t>(k_ - 1)] = cover_but_one(d, Point(d, 0));
  HoleTiling out;
  out.node = make_union({make_explicit(space(d + 1), {col}), make_slice(space(d + 1), d, {}, layers)});
  for (const auto& p : h.hole) {
    if (p == x) continue;
    Point q = p;
    q.push_back(0);
    out.hole.push_back(std::move(q));
  }
  out.hole.push_back(corner(d, d + 1));
  return out;
}

HoleTiling SimpleContext::exchange_all(HoleTiling h, const std::vector<Point>& xs) {
  std::set<Point> distinct(xs.begin(), xs.end());
  if (distinct.size() != xs.size()) throw Error(Errc::parameter, "exchange_all: points repeat");
  for (std::size_t j = 0; j < xs.size(); ++j) {
    // earlier moves padded the remaining hole points with zeros
    Point x = xs[j];
    x.resize(x.size() + j, 0);
    h = move_point(h, x);
  }
  return h;
}

void SimpleContext::cbo_copies(std::size_t d, std::size_t want, std::vector<Placement>& out) {
  if (out.size() >= want || d == 0) return;
  const Coord base = mod_floor(-(i_ - 1), k_);
  Placement col{d - 1, Point(d, 0)};
  col.offset[d - 1] = base;
  out.push_back(col);
  if (d == 1) return;
  std::vector<Placement> sub;
  cbo_copies(d - 1, want - out.size(), sub);
  for (Coord c = 0; c < k_ && out.size() < want; ++c) {
    for (const auto& s : sub) {
      if (out.size() >= want) break;
      Placement p = s;
      p.offset.push_back(c);
      out.push_back(std::move(p));
    }
  }
}

HoleTiling SimpleContext::hole_of_size(std::size_t r, std::size_t m) {
  if (m == 0 || (m - 1) % static_cast<std::size_t>(k_ - 1) != 0) {
    throw Error(Errc::parity, "hole size must be 1 mod (k-1)");
  }
  if (m > ipow_sat(static_cast<std::uint64_t>(k_), r)) throw Error(Errc::bound, "hole larger than the torus");
  std::size_t j = (m - 1) / static_cast<std::size_t>(k_ - 1);
  std::vector<Placement> copies;
  cbo_copies(r, j, copies);
  HoleTiling out;
  out.hole.push_back(Point(r, 0));
  auto sp = space(r);
  for (const auto& c : copies)
    for (auto& q : cover(c, *sp)) out.hole.push_back(std::move(q));
  out.node = make_mask(cover_but_one(r, Point(r, 0)), std::move(copies));
  return out;
}

NodePtr SimpleContext::removed_corners(std::size_t d, std::vector<std::size_t> S) {
  std::sort(S.begin(), S.end());
  if (std::adjacent_find(S.begin(), S.end()) != S.end()) throw Error(Errc::parameter, "corners repeat");
  if (!S.empty() && S.back() >= d) throw Error(Errc::parameter, "corner index out of range");
  const std::size_t m = S.size();
  if (m == 0 || (m - 1) % static_cast<std::size_t>(k_ - 1) != 0) {
    throw Error(Errc::parity, "number of removed corners must be 1 mod (k-1)");
  }
  if (m > d || ipow_sat(static_cast<std::uint64_t>(k_), d - m) < d) {
    throw Error(Errc::bound, "too many corners: need k^(d-|S|) >= d");
  }
  {
    std::lock_guard lock(mu_);
    if (auto it = corners_.find({d, S}); it != corners_.end()) return it->second;
  }
  const std::size_t r = d - m;
  HoleTiling h = hole_of_size(r, m);
  std::vector<Point> xs = h.hole;
  h = exchange_all(std::move(h), xs);
  std::vector<std::size_t> perm(d);
  std::vector<bool> in_s(d, false);
  for (auto s : S) in_s[s] = true;
  std::size_t next = 0;
  for (std::size_t a = 0; a < d; ++a)
    if (!in_s[a]) perm[next++] = a;
  for (auto s : S) perm[next++] = s;
  NodePtr node = make_embed(h.node, perm);
  std::lock_guard lock(mu_);
  corners_.emplace(std::make_pair(d, S), node);
  return node;
}

// -------------------------------------------------------------- pipeline

PeriodicFn solve_f(Coord k, Coord i) {
  Tile t = punctured_interval(k, i);
  const Coord mod = k - 1;
  const auto w = static_cast<std::size_t>(k - 1);  // window: f(n-k+1) .. f(n-1)
  std::vector<Coord> window(w, 0);
  const std::vector<Coord> start = window;
  PeriodicFn f;
  f.modulus = mod;
  // the update is invertible (k-1 is in T), so the orbit returns to the start
  do {
    Coord s = 0;
    for (const auto& y : t.points()) {
      if (y[0] == 0) continue;
      s += window[w - static_cast<std::size_t>(y[0])];
    }
    Coord v = mod_floor(1 - s, mod);
    f.values.push_back(v);
    window.erase(window.begin());
    window.push_back(v);
  } while (window != start);
  f.period = static_cast<Coord>(f.values.size());
  return f;
}

std::size_t special_family_size(Coord k) {
  return static_cast<std::size_t>(2 * k * (k - 2));
}

SpecialColumnPlan plan_special_column(Coord k, const PeriodicFn& f, std::size_t family) {
  const std::size_t ell = special_family_size(k);
  if (family < ell) {
    throw Error(Errc::family_too_small, "corner family has " + std::to_string(family) +
                                            " members, need " + std::to_string(ell));
  }
  SpecialColumnPlan plan;
  plan.family = family;
  plan.period = std::lcm(f.period, 2 * k);
  plan.S.assign(static_cast<std::size_t>(plan.period), {});
  for (Coord n = 0; n < plan.period; ++n) {
    std::vector<bool> blocked(family, false);
    for (Coord m = 0; m < n; ++m) {
      Coord dist = std::min(n - m, plan.period - (n - m));
      if (dist >= k) continue;
      for (auto c : plan.S[static_cast<std::size_t>(m)]) blocked[c] = true;
    }
    auto want = static_cast<std::size_t>(f(n));
    auto& s = plan.S[static_cast<std::size_t>(n)];
    for (std::size_t c = 0; c < family && s.size() < want; ++c)
      if (!blocked[c]) s.push_back(c);
    if (s.size() < want) throw Error(Errc::family_too_small, "greedy corner choice ran out");
  }
  return plan;
}

std::size_t simple_dimension(Coord k) {
  const std::size_t ell = special_family_size(k);
  for (std::size_t d = ell + 1;; ++d) {
    if (ipow_sat(static_cast<std::uint64_t>(k), d - 1 - ell) >= d - 1) return d;
  }
}

json SimpleResult::trace() const {
  return json{{"k", k},
              {"i", i},
              {"ell", special_family_size(k)},
              {"d", d},
              {"f", f.to_json()},
              {"plan", plan.to_json()}};
}

SimpleResult synthesize_simple(Coord k, Coord i) {
  SimpleContext ctx(k, i);
  SimpleResult res;
  res.k = k;
  res.i = i;
  res.f = solve_f(k, i);
  res.d = simple_dimension(k);
  res.plan = plan_special_column(k, res.f, special_family_size(k));
  const std::size_t D = res.d - 1;
  const Coord P = res.plan.period;

  SpaceSignature::Builder b;
  b.block({0}, ctx.tile());
  for (std::size_t a = 0; a < D; ++a) b.block({k}, ctx.tile());
  SpacePtr base = std::move(b).build();

  std::vector<Placement> special;
  for (Coord n = 0; n < P; ++n) {
    for (auto j : res.plan.S[static_cast<std::size_t>(n)]) {
      Point off(res.d, 0);
      off[0] = n;
      off[1 + j] = k - 1;
      special.push_back({0, std::move(off)});
    }
  }
  std::vector<Coord> period(res.d, 0);
  period[0] = P;

  std::vector<NodePtr> slices(static_cast<std::size_t>(P));
  for (Coord n = 0; n < P; ++n) {
    std::vector<std::size_t> M;
    for (const auto& y : ctx.tile()->points()) {
      const auto& s = res.plan.S[static_cast<std::size_t>(mod_floor(n - y[0], P))];
      M.insert(M.end(), s.begin(), s.end());
    }
    std::sort(M.begin(), M.end());
    if (std::adjacent_find(M.begin(), M.end()) != M.end()) {
      throw Error(Errc::containment, "special copies overlap in slice " + std::to_string(n));
    }
    slices[static_cast<std::size_t>(n)] = ctx.removed_corners(D, M);
  }
  NodePtr tiled = make_union({make_explicit(base, std::move(special), period),
                              make_slice(base, 0, {P}, std::move(slices))});
  Projection proj{std::vector<Coord>(res.d, k)};
  proj.moduli[0] = 0;
  res.root = lift(tiled, proj, std::vector<TilePtr>(res.d, ctx.tile()));
  return res;
}

}  // namespace tilesmith
