#include "doctest.h"
#include "support.hpp"
#include "tilesmith/simple.hpp"
#include "tilesmith/verify.hpp"

using namespace tilesmith;

namespace {

// independent: smallest d with k^(d-1-l) >= d-1, l = 2k(k-2), by plain
// integer arithmetic
std::size_t dimension_oracle(Coord k) {
  const Coord l = 2 * k * (k - 2);
  for (Coord d = 1;; ++d) {
    Coord e = d - 1 - l;
    if (e < 0) continue;
    long double pw = 1;
    for (Coord j = 0; j < e; ++j) pw *= static_cast<long double>(k);
    if (pw >= static_cast<long double>(d - 1)) return static_cast<std::size_t>(d);
  }
}

std::vector<std::pair<Coord, Coord>> params(Coord kmax) {
  std::vector<std::pair<Coord, Coord>> out;
  for (Coord k = 3; k <= kmax; ++k)
    for (Coord i = 2; i <= k - 1; ++i) out.push_back({k, i});
  return out;
}

}  // namespace

TEST_CASE("punctured intervals") {
  CHECK(render_tile_1d(punctured_interval(3, 2)) == "X.X");
  CHECK(render_tile_1d(punctured_interval(5, 3)) == "XX.XX");
  CHECK(render_tile_1d(punctured_interval(5, 2)) == "X.XXX");
  CHECK(as_punctured_interval(parse_tile("XX.XX")) == std::pair<Coord, Coord>{5, 3});
  CHECK_FALSE(as_punctured_interval(parse_tile("X..X")).has_value());
  CHECK_FALSE(as_punctured_interval(parse_tile("XXX")).has_value());
  CHECK_THROWS_AS(punctured_interval(3, 1), Error);
  CHECK_THROWS_AS(punctured_interval(3, 3), Error);
}

TEST_CASE("dimension formula against the plain oracle") {
  for (Coord k = 3; k <= 8; ++k) CHECK(simple_dimension(k) == dimension_oracle(k));
  CHECK(simple_dimension(3) == 9);
  CHECK(simple_dimension(5) == 34);
  CHECK(special_family_size(3) == 6);
  CHECK(special_family_size(5) == 30);
}

TEST_CASE("solve_f: convolution identity over one period") {
  for (auto [k, i] : params(6)) {
    auto f = solve_f(k, i);
    Tile t = punctured_interval(k, i);
    CHECK(f.modulus == k - 1);
    CHECK(static_cast<Coord>(f.values.size()) == f.period);
    for (Coord x = 0; x < f.period; ++x) {
      Coord s = 0;
      for (const auto& y : t.points()) s += f(x - y[0]);
      CHECK(oracle::md(s, k - 1) == 1);
      CHECK(f(x) >= 0);
      CHECK(f(x) < k - 1);
    }
  }
}

TEST_CASE("cover_but_one: copy count (k^d - 1)/(k - 1)") {
  for (auto [k, i] : params(5)) {
    SimpleContext ctx(k, i);
    for (std::size_t d = 1; d <= 6; ++d) {
      if (ipow_sat(static_cast<std::uint64_t>(k), d) > 20000) break;
      auto n = ctx.cover_but_one(d, Point(d, 0));
      auto mat = materialize(*n);
      CHECK(mat.size() == (ipow_sat(static_cast<std::uint64_t>(k), d) - 1) / static_cast<std::uint64_t>(k - 1));
    }
  }
}

TEST_CASE("cover_but_one leaves exactly the chosen point") {
  std::mt19937_64 g(9);
  for (auto [k, i] : params(5)) {
    SimpleContext ctx(k, i);
    for (std::size_t d = 1; d <= 4; ++d) {
      for (int rep = 0; rep < 3; ++rep) {
        Point x(d);
        for (auto& c : x) c = static_cast<Coord>(g() % static_cast<std::uint64_t>(k));
        auto n = ctx.cover_but_one(d, x);
        auto r = oracle::check_partition(*n, {x});
        CHECK_MESSAGE(r.ok, r.why);
      }
    }
  }
}

TEST_CASE("corners are distinct") {
  SimpleContext ctx(4, 2);
  std::set<Point> seen;
  for (std::size_t j = 0; j < 6; ++j) seen.insert(ctx.corner(j, 6));
  CHECK(seen.size() == 6);
  CHECK(ctx.corner(2, 4) == Point{0, 0, 3, 0});
}

TEST_CASE("move_point and hole_of_size") {
  SimpleContext ctx(3, 2);
  auto h = ctx.hole_of_size(2, 3);  // {0} plus one copy's worth of points
  CHECK(h.hole.size() == 3);
  auto r = oracle::check_partition(*h.node, {h.hole.begin(), h.hole.end()});
  CHECK_MESSAGE(r.ok, r.why);
  auto moved = ctx.move_point(h, h.hole.front());
  CHECK(moved.node->space().axis_count() == 3);
  auto r2 = oracle::check_partition(*moved.node, {moved.hole.begin(), moved.hole.end()});
  CHECK_MESSAGE(r2.ok, r2.why);
  auto all = ctx.exchange_all(h, h.hole);
  CHECK(all.hole.size() == h.hole.size());
  auto r3 = oracle::check_partition(*all.node, {all.hole.begin(), all.hole.end()});
  CHECK_MESSAGE(r3.ok, r3.why);
}

TEST_CASE("removed_corners rejects bad sizes") {
  SimpleContext ctx(4, 2);
  // |S| must be 1 mod (k - 1)
  CHECK_THROWS_AS(ctx.removed_corners(6, {0, 1}), Error);
}

TEST_CASE("special column plan invariants") {
  for (auto [k, i] : params(5)) {
    auto f = solve_f(k, i);
    auto plan = plan_special_column(k, f, special_family_size(k));
    Tile t = punctured_interval(k, i);
    CHECK(plan.period % f.period == 0);
    for (Coord n = 0; n < plan.period; ++n) {
      const auto& s = plan.S[static_cast<std::size_t>(n)];
      CHECK(static_cast<Coord>(s.size()) == f(n));
      for (Coord m = 0; m < plan.period; ++m) {
        Coord dist = std::min(oracle::md(n - m, plan.period), oracle::md(m - n, plan.period));
        if (m == n || dist >= k) continue;
        for (auto c : s) CHECK(std::count(plan.S[static_cast<std::size_t>(m)].begin(),
                                          plan.S[static_cast<std::size_t>(m)].end(), c) == 0);
      }
      std::size_t uncovered = 0;
      for (const auto& y : t.points()) uncovered += plan.S[static_cast<std::size_t>(oracle::md(n - y[0], plan.period))].size();
      CHECK(oracle::md(static_cast<Coord>(uncovered), k - 1) == 1);
    }
  }
  CHECK_THROWS_AS(plan_special_column(3, solve_f(3, 2), 5), Error);
}

TEST_CASE("X.X: exhaustive check of one fundamental domain") {
  auto r = synthesize_simple(3, 2);
  CHECK(r.d == 9);
  auto rep = verify_exhaustive(*r.root);
  CHECK(rep.ok);
  CHECK(rep.points_checked == static_cast<std::uint64_t>(r.plan.period) * 6561);
}

TEST_CASE("XX.XX: sampled") {
  auto r = synthesize_simple(5, 3);
  CHECK(r.d == 34);
  SampleOptions o;
  o.samples = 10000;
  o.seed = 3;
  CHECK(verify_sampled(*r.root, o).ok);
}

TEST_CASE("lines along the first axis carry the planned copies") {
  std::mt19937_64 g(21);
  for (auto [k, i] : std::vector<std::pair<Coord, Coord>>{{3, 2}, {4, 2}, {4, 3}}) {
    auto r = synthesize_simple(k, i);
    const Coord P = r.plan.period;
    for (int line = 0; line < 40; ++line) {
      Point base(r.d, 0);
      // half the lines through a corner residue, half random
      int corner = line % 2 == 0 ? static_cast<int>(g() % special_family_size(k)) : -1;
      for (std::size_t a = 1; a < r.d; ++a) {
        Coord lift_part = k * (static_cast<Coord>(g() % 7) - 3);
        Coord res = corner >= 0 ? (static_cast<int>(a) - 1 == corner ? k - 1 : 0)
                                : static_cast<Coord>(g() % static_cast<std::uint64_t>(k));
        base[a] = lift_part + res;
      }
      std::set<Coord> seen;
      for (Coord x = 0; x < P + k; ++x) {
        base[0] = x;
        auto pl = locate(*r.root, base);
        if (pl.block == 0) seen.insert(oracle::md(pl.offset[0], P));
      }
      std::set<Coord> want;
      bool at_corner = true;
      int which = -1;
      for (std::size_t a = 1; a < r.d; ++a) {
        Coord v = oracle::md(base[a], k);
        if (v == k - 1 && which < 0) which = static_cast<int>(a) - 1;
        else if (v != 0) at_corner = false;
      }
      if (at_corner && which >= 0 && static_cast<std::size_t>(which) < r.plan.family)
        for (Coord n = 0; n < P; ++n) {
          const auto& s = r.plan.S[static_cast<std::size_t>(n)];
          if (std::count(s.begin(), s.end(), static_cast<std::size_t>(which))) want.insert(n);
        }
      CHECK(seen == want);
    }
  }
}

TEST_CASE("d = 1: the copy leaving 0 uncovered") {
  // XX.XX = {0,1,3,4}; offset 3 covers {3,4,1,2} mod 5
  SimpleContext ctx(5, 3);
  auto mat = materialize(*ctx.cover_but_one(1, Point{0}));
  REQUIRE(mat.size() == 1);
  CHECK(mat[0].offset == Point{3});
  std::set<Point> cells;
  for (const auto& q : cover(mat[0], ctx.cover_but_one(1, Point{0})->space())) cells.insert(q);
  CHECK(cells == std::set<Point>{{1}, {2}, {3}, {4}});
}
