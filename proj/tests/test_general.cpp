#include "doctest.h"
#include "support.hpp"
#include "tilesmith/general.hpp"
#include "tilesmith/verify.hpp"

using namespace tilesmith;

namespace {

constexpr std::uint64_t kRegion = 100'000;

// All subsets of Z_k containing 0 (one representative per translate class is
// not needed for these checks; 0 in T is enough to drop most duplicates).
std::vector<BlockSet> subsets_1d(Coord k) {
  std::vector<BlockSet> out;
  for (std::uint32_t m = 1; m < (1u << k); m += 2) {
    std::vector<Point> pts;
    for (Coord v = 0; v < k; ++v)
      if (m >> v & 1) pts.push_back({v});
    out.emplace_back(std::vector<Coord>{k}, pts);
  }
  return out;
}

// Membership oracles built only from up/down and plain loops.
struct Csets {
  const Densification& dn;
  std::size_t b;

  // point of A^D (D blocks of b coordinates), i in 0..D (1-based position)
  bool in_c(std::span<const Coord> a, std::size_t D, std::size_t i) const {
    for (std::size_t j = 1; j <= D; ++j) {
      auto x = a.subspan((j - 1) * b, b);
      const BlockSet& want = j == i ? dn.up : dn.down;
      if (!want.contains(x)) return false;
    }
    return true;
  }

  // dagger applied to a membership predicate on A^D
  std::function<bool(std::span<const Coord>)> dagger(std::function<bool(std::span<const Coord>)> Y,
                                                       std::size_t D) const {
    return [this, Y, D](std::span<const Coord> a) {
      auto head = a.first(D * b);
      auto last = a.subspan(D * b, b);
      if (dn.down.contains(last) && Y(head)) return true;
      return dn.up.contains(last) && in_c(head, D, 0);
    };
  }
};

std::uint64_t region_size(const SpaceSignature& s) {
  std::uint64_t n = 1;
  for (Coord m : s.moduli()) n = n * static_cast<std::uint64_t>(m) > (1ull << 40) ? (1ull << 40) : n * static_cast<std::uint64_t>(m);
  return n;
}

std::set<Point> hole_of(const SpaceSignature& s, const std::function<bool(std::span<const Coord>)>& pred) {
  std::set<Point> h;
  oracle::for_box(s.moduli(), [&](const Point& p) {
    if (s.contains(p) && pred(p)) h.insert(p);
  });
  return h;
}

void check_node(const NodePtr& n, const std::function<bool(std::span<const Coord>)>& pred, const std::string& what) {
  auto r = oracle::check_partition(*n, hole_of(n->space(), pred));
  CHECK_MESSAGE(r.ok, what << ": " << r.why);
}

}  // namespace

TEST_CASE("densification invariants over Z_k, k <= 7") {
  for (Coord k = 2; k <= 7; ++k) {
    for (const auto& T : subsets_1d(k)) {
      if (T.is_full()) {
        CHECK_THROWS_AS(make_densification(T), Error);
        continue;
      }
      auto dn = make_densification(T);
      CHECK_FALSE(dn.up.empty());
      CHECK_FALSE(dn.down.empty());
      CHECK(dn.up.size() == dn.down.size());
      CHECK(dn.up.set_intersection(dn.down).empty());
      CHECK(dn.dense == T.set_union(dn.up));
      CHECK(T.set_intersection(dn.up).empty());
      CHECK(dn.dense == dn.shifted.set_union(dn.down));
      CHECK(dn.shifted.set_intersection(dn.down).empty());
      CHECK(dn.dense.size() > T.size());
      // smallest nonzero shift that moves T
      for (Coord x = 1; x < dn.shift[0]; ++x) CHECK(T.translated(Point{x}) == T);
      CHECK_FALSE(T.translated(dn.shift) == T);
    }
  }
}

TEST_CASE("corner sets are pairwise disjoint") {
  BlockSet T({5}, {{0}, {1}, {3}});
  DenserContext ctx(T, 2);
  Csets cs{ctx.dens(), 1};
  const std::size_t D = 4;
  auto sp = ctx.a_space(D);
  oracle::for_box(sp->moduli(), [&](const Point& p) {
    if (!sp->contains(p)) return;
    int hits = 0;
    for (std::size_t i = 0; i <= D; ++i) hits += cs.in_c(p, D, i);
    CHECK(hits <= 1);
    auto idx = ctx.cset_index(p, D);
    if (hits == 0) CHECK_FALSE(idx.has_value());
    else {
      REQUIRE(idx.has_value());
      CHECK(cs.in_c(p, D, *idx));
    }
  });
}

TEST_CASE("lemma suite: removed_cset, use_cset, m_csets, tiler") {
  std::vector<BlockSet> tiles;
  for (Coord k = 2; k <= 5; ++k)
    for (auto& T : subsets_1d(k))
      if (!T.is_full()) tiles.push_back(T);
  tiles.push_back(BlockSet({2, 2}, {{0, 0}, {1, 1}}));
  tiles.push_back(BlockSet({2, 2}, {{0, 0}, {0, 1}, {1, 0}}));
  std::size_t checked = 0, tilers = 0;
  for (const auto& T : tiles) {
    const std::size_t b = T.dim();
    for (std::size_t d0 : {1, 2, 3}) {
      auto ctx = std::make_shared<DenserContext>(T, d0);
      Csets cs{ctx->dens(), b};
      for (std::size_t D = 1; D <= 8; ++D) {
        auto sp = ctx->a_space(D);
        if (region_size(*sp) > kRegion) break;
        for (std::size_t i = 0; i <= D; ++i) {
          auto n = ctx->removed_cset(D, i);
          check_node(n, [&](std::span<const Coord> a) { return cs.in_c(a, D, i); }, "removed_cset");
          ++checked;
          if (i == 0 || region_size(*ctx->a_space(D + 1)) > kRegion) continue;
          auto u = ctx->use_cset(n, i, D, true);
          // X \ C_i is empty, so the hole is the dagger of nothing
          check_node(u, cs.dagger([](std::span<const Coord>) { return false; }, D), "use_cset");
          ++checked;
          if (i < D) CHECK_THROWS_AS(ctx->use_cset(n, i + 1, D, true), Error);
        }
      }
      // m_csets over small r and index sets
      for (std::size_t r = 1; r <= 3; ++r)
        for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
          std::vector<std::size_t> idx;
          for (std::size_t i = 1; i <= r; ++i)
            if (mask >> (i - 1) & 1) idx.push_back(i);
          const std::size_t m = idx.size();
          if (region_size(*ctx->a_space(r + m)) > kRegion) continue;
          auto n = ctx->m_csets(r, idx);
          std::function<bool(std::span<const Coord>)> Y = [&, r](std::span<const Coord> a) {
            for (auto i : idx)
              if (cs.in_c(a, r, i)) return false;
            return true;
          };
          for (std::size_t s = 0; s < m; ++s) Y = cs.dagger(Y, r + s);
          check_node(n, Y, "m_csets");
          ++checked;
        }
      // tilers on G x A^d
      if (region_size(*ctx->ga_space(ctx->d())) > kRegion) continue;
      const std::size_t d = ctx->d();
      for (std::size_t m = 0; m <= d; ++m) {
        NodePtr n;
        try {
          n = ctx->tiler_m(m);
        } catch (const Error& e) {
          CHECK((e.code() == Errc::parity || e.code() == Errc::bound));
          continue;
        }
        check_node(n,
                   [&](std::span<const Coord> p) {
                     auto a = p.subspan(b);
                     for (std::size_t i = d - m + 1; i <= d; ++i)
                       if (cs.in_c(a, d, i)) return true;
                     return false;
                   },
                   "tiler_m");
        ++tilers;
        // same size, other indices
        std::vector<std::size_t> S;
        for (std::size_t i = 1; i <= m; ++i) S.push_back(i);
        auto n2 = ctx->tiler(S);
        check_node(n2,
                   [&](std::span<const Coord> p) {
                     auto a = p.subspan(b);
                     for (auto i : S)
                       if (cs.in_c(a, d, i)) return true;
                     return false;
                   },
                   "tiler");
        ++tilers;
      }
    }
  }
  MESSAGE("lemma nodes checked: " << checked << ", tilers: " << tilers);
  CHECK(checked > 100);
  CHECK(tilers > 10);
}

TEST_CASE("solve_g_periodic: identity over one period") {
  std::mt19937_64 g(31);
  for (int it = 0; it < 200; ++it) {
    Coord k = 1 + static_cast<Coord>(g() % 6);
    Tile t = oracle::random_interval_tile(g, k);
    Coord mod = 1 + static_cast<Coord>(g() % 6);
    Coord f = static_cast<Coord>(g() % 6);
    auto sol = solve_g_periodic(t, mod, f);
    for (Coord x = 0; x < sol.period; ++x) {
      Coord s = 0;
      for (const auto& y : t.points()) s += sol(x - y[0]);
      CHECK(oracle::md(s, mod) == oracle::md(f, mod));
    }
  }
}

TEST_CASE("Deconvolver: identity at random points, b <= 2") {
  std::mt19937_64 g(37);
  for (int it = 0; it < 30; ++it) {
    const std::size_t b = 1 + g() % 2;
    Tile t = oracle::random_tile(g, b, 1 + g() % 5, 3);
    Coord mod = 2 + static_cast<Coord>(g() % 5);
    // right-hand side: an arbitrary fixed function
    auto rhs = [](std::span<const Coord> x) {
      Coord h = 7;
      for (Coord c : x) h = h * 31 + c * c + 3 * c;
      return h;
    };
    Deconvolver dc(b, t.points(), mod, rhs);
    for (int s = 0; s < 1000 / 30 + 1; ++s) {
      Point x(b);
      for (auto& c : x) c = static_cast<Coord>(g() % 41) - 20;
      Coord sum = 0;
      for (const auto& y : t.points()) {
        Point q(b);
        for (std::size_t a = 0; a < b; ++a) q[a] = x[a] - y[a];
        Coord v = dc(q);
        CHECK(v >= 0);
        CHECK(v < mod);
        sum += v;
      }
      CHECK(oracle::md(sum, mod) == oracle::md(rhs(x), mod));
    }
  }
}

TEST_CASE("cover holes: slice families are disjoint and 1 mod t") {
  std::vector<std::pair<Tile, BlockSet>> cases{
      {parse_tile("X.X"), BlockSet({3}, {{0}, {2}})},
      {parse_tile("XX.XX"), BlockSet({5}, {{0}, {1}, {3}, {4}})},
      {parse_tile("X..X"), BlockSet({4}, {{0}, {1}, {3}})},
      {Tile(2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}}), BlockSet({3, 3}, {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {0, 2}})},
  };
  std::mt19937_64 g(41);
  for (const auto& [T, A] : cases) {
    CoverHolesNode node(T, A);
    const std::size_t b = T.dim();
    for (int s = 0; s < 60; ++s) {
      Point x(b);
      for (auto& c : x) c = static_cast<Coord>(g() % 61) - 30;
      auto fam = node.slice_family(x);
      CHECK(std::adjacent_find(fam.begin(), fam.end()) == fam.end());
      CHECK(oracle::md(static_cast<Coord>(fam.size()), node.t()) == 1);
      for (auto i : fam) {
        CHECK(i >= 1);
        CHECK(i <= node.d1());
      }
    }
  }
}

TEST_CASE("general pipeline bookkeeping") {
  for (const char* s : {"X.X", "XX.XX", "X..X", "XXX.X", "XX.X.X"}) {
    auto r = synthesize_general(parse_tile(s));
    REQUIRE_FALSE(r.levels.empty());
    CHECK(r.levels.front().A == r.tile.points());
    for (std::size_t l = 0; l < r.levels.size(); ++l) {
      const auto& lv = r.levels[l];
      CHECK(lv.p == lv.d1 * lv.u + 1);
      CHECK(lv.q == lv.d1 * lv.v + 1);
      CHECK(lv.d0 >= (lv.A.size() - 1) * r.tile.size() * r.tile.size());
      CHECK(lv.B.size() > lv.A.size());
      if (l + 1 < r.levels.size()) {
        CHECK(r.levels[l + 1].A == lv.B);
        CHECK(r.levels[l + 1].p == lv.u);
        CHECK(r.levels[l + 1].q == lv.v);
      } else {
        CHECK(lv.B.size() == static_cast<std::size_t>(r.k));  // full group
        CHECK(lv.u == 0);
        CHECK(lv.v == 1);
      }
    }
    CHECK(r.p == r.levels.front().p);
    CHECK(r.q == r.levels.front().q);
    CHECK(r.d == r.b * (r.p + r.q));
    CHECK(r.root->space().axis_count() == r.d);
    CHECK(r.trace().at("bound_log10").get<double>() > 0);
  }
}

TEST_CASE("XX.XX general: one level, d = 1 + (d1 + 1)") {
  auto r = synthesize_general(parse_tile("XX.XX"));
  REQUIRE(r.levels.size() == 1);
  CHECK(r.levels[0].B.size() == 5);
  CHECK(r.d == 1 + (r.levels[0].d1 + 1));
  SampleOptions o;
  o.samples = 2000;
  CHECK(verify_sampled(*r.root, o).ok);
}

TEST_CASE("trivial and singleton tiles") {
  auto one = synthesize_general(parse_tile("X"));
  CHECK(one.d == 1);
  CHECK(oracle::check_partition(*one.root).ok);
  auto full = synthesize_general(parse_tile("XXX"));
  CHECK(full.d == 1);
  CHECK(oracle::check_partition(*full.root).ok);
  auto sq = synthesize_general(Tile(2, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  CHECK(sq.d == 2);
  CHECK(oracle::check_partition(*sq.root).ok);
}

TEST_CASE("two-dimensional tile, sampled") {
  auto r = synthesize_general(Tile(2, {{0, 0}, {1, 1}}));
  CHECK(r.b == 2);
  CHECK(r.d == 2 * (r.p + r.q));
  SampleOptions o;
  o.samples = 30;
  CHECK(verify_sampled(*r.root, o).ok);
}
