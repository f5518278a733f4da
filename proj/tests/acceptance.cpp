// One PASS/FAIL line per acceptance criterion. Tolerances are pinned below.
// Criterion 7 is reported but never gates the exit code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "support.hpp"
#include "tilesmith/certificate.hpp"
#include "tilesmith/general.hpp"
#include "tilesmith/oracle.hpp"
#include "tilesmith/simple.hpp"
#include "tilesmith/synth.hpp"
#include "tilesmith/verify.hpp"

using namespace tilesmith;

namespace {

constexpr double kC1Seconds = 60, kC2Seconds = 120, kC4Seconds = 5, kC5Seconds = 600;
constexpr std::uint64_t kC2Samples = 100'000, kC3Samples = 10'000;
constexpr std::uint64_t kRegion = 100'000;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

using Pred = std::function<bool(std::span<const Coord>)>;

std::vector<Point> points_where(const SpaceSignature& s, const Pred& pred) {
  std::vector<Point> out;
  oracle::for_box(s.moduli(), [&](const Point& p) {
    if (pred(p)) out.push_back(p);
  });
  return out;
}

std::uint64_t region_size(const SpaceSignature& s) {
  std::uint64_t n = 1;
  for (Coord m : s.moduli()) {
    n *= static_cast<std::uint64_t>(m);
    if (n > (1ull << 40)) return n;
  }
  return n;
}

// k^(d-1-l) >= d-1 by repeated multiplication
std::size_t dimension_oracle(Coord k) {
  const Coord l = 2 * k * (k - 2);
  for (Coord d = l + 1;; ++d) {
    long double pw = 1;
    for (Coord j = 0; j < d - 1 - l; ++j) pw *= static_cast<long double>(k);
    if (pw >= static_cast<long double>(d - 1)) return static_cast<std::size_t>(d);
  }
}

// ---- criterion 1
Outcome c1() {
  Outcome o;
  auto t0 = Clock::now();
  auto r = synthesize(parse_tile("X.X"), SynthOptions{"simple", false});
  if (r.d != 9 || r.d != dimension_oracle(3)) o.fail("d = " + std::to_string(r.d));
  auto cert = make_certificate(r.root, json::object());
  VerifyOptions vo;
  vo.mode = "exhaustive";
  auto rep = verify_certificate(cert, vo);
  const double s = since(t0);
  const std::uint64_t bound = static_cast<std::uint64_t>(cert.period.at(0)) * 6561;
  if (!rep.ok) o.fail("exhaustive verify failed");
  if (rep.points_checked > bound) o.fail("domain larger than P * 3^8");
  if (s >= kC1Seconds) o.fail("too slow");
  o.detail = (o.pass ? "" : o.detail + "; ") + "d=" + std::to_string(r.d) + " mode=" + cert.mode +
             " points=" + std::to_string(rep.points_checked) + " t=" + std::to_string(s) + "s (<" +
             std::to_string(static_cast<int>(kC1Seconds)) + ")";
  return o;
}

// ---- criterion 2
Outcome c2() {
  Outcome o;
  auto t0 = Clock::now();
  auto r = synthesize(parse_tile("XX.XX"), SynthOptions{"simple", false});
  if (r.d != 34 || r.d != dimension_oracle(5)) o.fail("d = " + std::to_string(r.d));
  SampleOptions so;
  so.samples = kC2Samples;
  so.seed = 2;
  auto rep = verify_sampled(*r.root, so);
  const double s = since(t0);
  if (!rep.ok || rep.violation_count != 0) o.fail("sampled verify found violations");
  if (s >= kC2Seconds) o.fail("too slow");
  o.detail = (o.pass ? "" : o.detail + "; ") + "d=" + std::to_string(r.d) +
             " samples=" + std::to_string(rep.samples) + " failures=" + std::to_string(rep.violation_count) +
             " t=" + std::to_string(s) + "s (<" + std::to_string(static_cast<int>(kC2Seconds)) + ")";
  return o;
}

// ---- criterion 3
Outcome c3() {
  Outcome o;
  auto r = synthesize_general(parse_tile("XX.XX"));
  if (r.levels.empty()) o.fail("no levels");
  for (std::size_t l = 0; l < r.levels.size(); ++l) {
    const auto& lv = r.levels[l];
    if (lv.p != lv.d1 * lv.u + 1 || lv.q != lv.d1 * lv.v + 1) o.fail("p, q mismatch at level " + std::to_string(l));
    if (lv.B.size() <= lv.A.size()) o.fail("B not larger than A");
    if (l == 0 && lv.A != r.tile.points()) o.fail("top A is not T");
    if (l + 1 < r.levels.size()) {
      if (r.levels[l + 1].A != lv.B || r.levels[l + 1].p != lv.u || r.levels[l + 1].q != lv.v)
        o.fail("levels do not chain");
    } else if (lv.B.size() != static_cast<std::size_t>(r.k) || lv.u != 0 || lv.v != 1) {
      o.fail("last level is not the base case");
    }
  }
  if (r.d != r.b * (r.p + r.q) || r.root->space().axis_count() != r.d) o.fail("d != b(p+q)");
  SampleOptions so;
  so.samples = kC3Samples;
  so.seed = 3;
  auto rep = verify_sampled(*r.root, so);
  if (!rep.ok) o.fail("sampled verify found violations");
  o.detail = (o.pass ? "" : o.detail + "; ") + "levels=" + std::to_string(r.levels.size()) +
             " d=" + std::to_string(r.d) + " (p=" + std::to_string(r.p) + ", q=" + std::to_string(r.q) +
             ") samples=" + std::to_string(rep.samples) + " failures=" + std::to_string(rep.violation_count);
  return o;
}

// ---- criterion 4
Outcome c4() {
  Outcome o;
  const Tile s(2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}});
  std::string times;
  auto timed = [&](const char* name, const std::function<bool()>& f) {
    auto t0 = Clock::now();
    bool ok = f();
    double t = since(t0);
    if (!ok) o.fail(std::string(name) + " wrong");
    if (t >= kC4Seconds) o.fail(std::string(name) + " too slow");
    times += std::string(" ") + name + "=" + std::to_string(t) + "s";
  };
  timed("S-torus", [&] { return decide(SearchProblem{s, true, {4, 2}, Symmetry::translate}).status == "SAT"; });
  timed("X.X-Z4", [&] { return decide(SearchProblem{parse_tile("X.X"), true, {4}}).status == "SAT"; });
  timed("XX.XX-d1", [&] { return prove_not_tiles(parse_tile("XX.XX"), 1, 40).status == "UNSAT"; });
  timed("fig1-lift", [&] {
    auto r = decide(SearchProblem{s, true, {4, 2}, Symmetry::translate});
    if (r.status != "SAT") return false;
    auto tp = std::make_shared<const Tile>(s);
    SpaceSignature::Builder b;
    b.block({4, 2}, tp);
    std::vector<Placement> pls;
    for (const auto& c : r.witness) pls.push_back({0, c.offset});
    auto n = lift(make_explicit(std::move(b).build(), pls), Projection{{4, 2}}, {tp});
    auto cert = make_certificate(n, json::object());
    VerifyOptions vo;
    vo.mode = "exhaustive";
    return cert.mode == "explicit-periodic" && verify_certificate(cert, vo).ok;
  });
  o.detail = (o.pass ? "" : o.detail + ";") + times + " (each <" + std::to_string(static_cast<int>(kC4Seconds)) + ")";
  return o;
}

// ---- criterion 5
struct Csets {
  const Densification& dn;
  std::size_t b;
  bool in_c(std::span<const Coord> a, std::size_t D, std::size_t i) const {
    for (std::size_t j = 1; j <= D; ++j)
      if (!(j == i ? dn.up : dn.down).contains(a.subspan((j - 1) * b, b))) return false;
    return true;
  }
  Pred dagger(Pred Y, std::size_t D) const {
    return [this, Y, D](std::span<const Coord> a) {
      auto last = a.subspan(D * b, b);
      return (dn.down.contains(last) && Y(a.first(D * b))) || (dn.up.contains(last) && in_c(a.first(D * b), D, 0));
    };
  }
};

struct LemmaStats {
  std::map<std::string, std::size_t> checked;
  Outcome out;
  void run(const std::string& what, const NodePtr& n, std::vector<Point> hole) {
    auto rep = verify_exhaustive(*n, hole);
    ++checked[what];
    if (!rep.ok) out.fail(what + " failed");
  }
};

void simple_lemmas(LemmaStats& st, std::mt19937_64& g) {
  for (Coord k = 3; k <= 5; ++k)
    for (Coord i = 2; i <= k - 1; ++i) {
      SimpleContext ctx(k, i);
      const auto K = static_cast<std::uint64_t>(k);
      // f: every residue of one period
      auto f = solve_f(k, i);
      Tile t = punctured_interval(k, i);
      for (Coord x = 0; x < f.period; ++x) {
        Coord s = 0;
        for (const auto& y : t.points()) s += f(x - y[0]);
        ++st.checked["solve_f"];
        if (oracle::md(s, k - 1) != 1) st.out.fail("solve_f identity");
      }
      for (std::size_t d = 1; ipow_sat(K, d) <= kRegion; ++d) {
        const std::uint64_t n = ipow_sat(K, d);
        // every hole point while the product stays small, else a seeded sample
        std::vector<Point> xs;
        if (n <= 243) {
          oracle::for_box(std::vector<Coord>(d, k), [&](const Point& p) { xs.push_back(p); });
        } else {
          xs.push_back(Point(d, 0));
          xs.push_back(Point(d, k - 1));
          for (int r = 0; r < 4; ++r) {
            Point p(d);
            for (auto& c : p) c = static_cast<Coord>(g() % K);
            xs.push_back(p);
          }
        }
        for (const auto& x : xs) st.run("cover_but_one", ctx.cover_but_one(d, x), {x});

        // removed corners: all S of size 1 mod (k-1) among the d corners while few
        std::vector<std::vector<std::size_t>> subsets;
        if (d <= 10) {
          for (std::uint32_t m = 1; m < (1u << d); ++m)
            if (static_cast<Coord>(__builtin_popcount(m)) % (k - 1) == 1 % (k - 1) &&
                ipow_sat(K, d - static_cast<std::size_t>(__builtin_popcount(m))) >= d) {
              std::vector<std::size_t> S;
              for (std::size_t j = 0; j < d; ++j)
                if (m >> j & 1) S.push_back(j);
              subsets.push_back(S);
            }
        }
        if (subsets.size() > 40) {
          std::shuffle(subsets.begin(), subsets.end(), g);
          subsets.resize(40);
        }
        for (const auto& S : subsets) {
          std::vector<Point> hole;
          for (auto j : S) {
            Point c(d, 0);
            c[j] = k - 1;
            hole.push_back(c);
          }
          st.run("removed_corners", ctx.removed_corners(d, S), hole);
        }

        // move_point and exchange_all from holes of every admissible size
        if (ipow_sat(K, d + 1) > kRegion) continue;
        for (std::size_t m = 1; m <= 2 * static_cast<std::size_t>(k); m += static_cast<std::size_t>(k - 1)) {
          HoleTiling h;
          try {
            h = ctx.hole_of_size(d, m);
          } catch (const Error&) {
            continue;
          }
          if (h.hole.size() != m) st.out.fail("hole_of_size size");
          st.run("hole_of_size", h.node, h.hole);
          for (const auto& x : h.hole) {
            auto mv = ctx.move_point(h, x);
            std::set<Point> want;
            for (const auto& y : h.hole)
              if (y != x) {
                Point z = y;
                z.push_back(0);
                want.insert(z);
              }
            Point c(d + 1, 0);
            c[d] = k - 1;
            want.insert(c);
            if (std::set<Point>(mv.hole.begin(), mv.hole.end()) != want) st.out.fail("move_point hole");
            st.run("move_point", mv.node, {want.begin(), want.end()});
          }
          if (ipow_sat(K, d + h.hole.size()) > kRegion) continue;
          auto ex = ctx.exchange_all(h, h.hole);
          std::set<Point> want;
          for (std::size_t j = 0; j < h.hole.size(); ++j) {
            Point c(d + h.hole.size(), 0);
            c[d + j] = k - 1;
            want.insert(c);
          }
          if (std::set<Point>(ex.hole.begin(), ex.hole.end()) != want) st.out.fail("exchange_all hole");
          st.run("exchange_all", ex.node, {want.begin(), want.end()});
        }
      }
    }
}

void general_lemmas(LemmaStats& st, std::mt19937_64& g) {
  for (Coord k = 3; k <= 5; ++k)
    for (Coord i = 2; i <= k - 1; ++i) {
      Tile t = punctured_interval(k, i);
      BlockSet T = BlockSet::from_tile({k}, t);
      // g: one period of the periodic solution, and 10^3 points of the lazy one
      for (Coord mod = 2; mod <= 4; ++mod) {
        auto sol = solve_g_periodic(t, mod, 1);
        for (Coord x = 0; x < sol.period; ++x) {
          Coord s = 0;
          for (const auto& y : t.points()) s += sol(x - y[0]);
          ++st.checked["solve_g"];
          if (oracle::md(s, mod) != 1) st.out.fail("solve_g identity");
        }
      }
      Deconvolver dc(1, t.points(), static_cast<Coord>(t.size()), [](std::span<const Coord>) { return Coord{1}; });
      for (int s = 0; s < 1000; ++s) {
        Coord x = static_cast<Coord>(g() % 2001) - 1000;
        Coord sum = 0;
        for (const auto& y : t.points()) sum += dc(Point{x - y[0]});
        ++st.checked["deconvolver"];
        if (oracle::md(sum, static_cast<Coord>(t.size())) != 1) st.out.fail("deconvolver identity");
      }

      for (std::size_t d0 : {1, 2, 3}) {
        auto ctx = std::make_shared<DenserContext>(T, d0);
        Csets cs{ctx->dens(), 1};
        for (std::size_t D = 1; region_size(*ctx->a_space(D)) <= kRegion; ++D) {
          auto sp = ctx->a_space(D);
          for (std::size_t j = 0; j <= D; ++j) {
            auto n = ctx->removed_cset(D, j);
            st.run("removed_cset", n, points_where(*sp, [&](auto a) { return cs.in_c(a, D, j); }));
            if (j == 0 || region_size(*ctx->a_space(D + 1)) > kRegion) continue;
            auto u = ctx->use_cset(n, j, D, true);
            st.run("use_cset", u, points_where(*ctx->a_space(D + 1), cs.dagger([](auto) { return false; }, D)));
          }
        }
        for (std::size_t r = 1; r <= 4; ++r)
          for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
            std::vector<std::size_t> idx;
            for (std::size_t j = 1; j <= r; ++j)
              if (mask >> (j - 1) & 1) idx.push_back(j);
            const std::size_t m = idx.size();
            if (region_size(*ctx->a_space(r + m)) > kRegion) continue;
            Pred Y = [&, r](std::span<const Coord> a) {
              for (auto j : idx)
                if (cs.in_c(a, r, j)) return false;
              return true;
            };
            for (std::size_t s = 0; s < m; ++s) Y = cs.dagger(Y, r + s);
            st.run("m_csets", ctx->m_csets(r, idx), points_where(*ctx->a_space(r + m), Y));
          }
        const std::size_t d = ctx->d();
        if (region_size(*ctx->ga_space(d)) > kRegion) continue;
        auto gsp = ctx->ga_space(d);
        for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
          std::vector<std::size_t> S;
          for (std::size_t j = 1; j <= d; ++j)
            if (mask >> (j - 1) & 1) S.push_back(j);
          NodePtr n;
          try {
            n = ctx->tiler(S);
          } catch (const Error& e) {
            if (e.code() != Errc::parity && e.code() != Errc::bound) st.out.fail(std::string("tiler: ") + e.what());
            continue;
          }
          st.run("tiler", n, points_where(*gsp, [&](std::span<const Coord> p) {
                   for (auto j : S)
                     if (cs.in_c(p.subspan(1), d, j)) return true;
                   return false;
                 }));
        }
      }
    }
}

Outcome c5() {
  LemmaStats st;
  std::mt19937_64 g(5);
  auto t0 = Clock::now();
  try {
    simple_lemmas(st, g);
    general_lemmas(st, g);
  } catch (const std::exception& e) {
    st.out.fail(std::string("threw: ") + e.what());
  }
  const double s = since(t0);
  if (s >= kC5Seconds) st.out.fail("too slow");
  std::string counts;
  for (const auto& [k, v] : st.checked) counts += " " + k + "=" + std::to_string(v);
  st.out.detail = (st.out.pass ? "" : st.out.detail + ";") + counts + " t=" + std::to_string(s) + "s (<" +
                  std::to_string(static_cast<int>(kC5Seconds)) + ")";
  return st.out;
}

// ---- criterion 6
Outcome c6() {
  Outcome o;
  const Tile s(2, {{0, 0}, {1, 0}, {1, 1}, {2, 1}});
  std::vector<std::pair<std::string, NodePtr>> fx;
  auto tp = std::make_shared<const Tile>(s);
  SpaceSignature::Builder b;
  b.block({4, 2}, tp);
  auto torus = make_explicit(std::move(b).build(), {{0, {0, 0}}, {0, {2, 0}}});
  fx.push_back({"S-torus", torus});
  fx.push_back({"S-plane", lift(torus, Projection{{4, 2}}, {tp})});
  for (Coord k = 3; k <= 5; ++k) {
    SimpleContext ctx(k, 2);
    for (std::size_t d = 1; ipow_sat(static_cast<std::uint64_t>(k), d) <= kRegion; ++d)
      fx.push_back({"cbo k=" + std::to_string(k) + " d=" + std::to_string(d), ctx.cover_but_one(d, Point(d, 0))});
  }
  auto ctx = std::make_shared<DenserContext>(BlockSet::from_tile({3}, parse_tile("X.X")), 2);
  fx.push_back({"tiler", ctx->tiler_m(1)});
  for (std::size_t D = 1; D <= 5; ++D) fx.push_back({"removed_cset", ctx->removed_cset(D, 1)});
  fx.push_back({"simple X.X", synthesize_simple(3, 2).root});

  std::size_t compared = 0, agreed = 0;
  for (auto& [name, n] : fx) {
    const auto box = domain_box(n->space(), n->period());
    if (box_volume(box) > kRegion) continue;
    // materialize vs locate
    auto mat = materialize(*n);
    std::set<Placement> by_locate;
    std::vector<Point> hole;
    oracle::for_box(box, [&](const Point& q) {
      auto pl = n->find(q);
      if (pl) by_locate.insert(reduce_placement(n->space(), *pl, n->period()));
      else hole.push_back(q);
    });
    if (std::set<Placement>(mat.begin(), mat.end()) != by_locate || by_locate.size() != mat.size())
      o.fail(name + ": materialize and locate differ");
    // exhaustive vs sampled, on the node and on a copy with one placement masked
    std::set<Point> hs(hole.begin(), hole.end());
    SampleOptions so;
    // a masked two-cell copy gets about ten hits or more
    so.samples = std::min<std::uint64_t>(20 * box_volume(box), 400'000);
    so.hole = [&](std::span<const Coord> p) { return hs.count(Point(p.begin(), p.end())) > 0; };
    bool ex = verify_exhaustive(*n, hole).ok, sa = verify_sampled(*n, so).ok;
    if (!mat.empty()) {
      auto masked = make_mask(n, {mat.front()});
      bool ex2 = verify_exhaustive(*masked, hole).ok, sa2 = verify_sampled(*masked, so).ok;
      if (ex2 || sa2) o.fail(name + ": masked copy not flagged");
    }
    ++compared;
    if (ex == sa && ex) ++agreed;
    else o.fail(name + ": exhaustive " + (ex ? "ok" : "bad") + ", sampled " + (sa ? "ok" : "bad"));
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + "fixtures=" + std::to_string(compared) + " agreed=" + std::to_string(agreed);
  return o;
}

// ---- criterion 7 (stretch, non-gating)
Outcome c7() {
  Outcome o;
  auto t0 = Clock::now();
  auto r = prove_not_tiles(parse_tile("XXX.XXX"), 2, 40, kDefaultBudget);
  if (r.status != "UNSAT") o.fail("no obstruction within the default budget");
  o.detail = (o.pass ? "" : o.detail + "; ") + "status=" + r.status + " box=" + std::to_string(r.box) +
             " nodes=" + std::to_string(r.nodes) + " t=" + std::to_string(since(t0)) + "s (non-gating)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{{1, c1}, {2, c2}, {3, c3}, {4, c4},
                                                                      {5, c5}, {6, c6}, {7, c7}};
  bool ok = true;
  for (const auto& [id, f] : criteria) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::printf("criterion %d: %s %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (id != 7) ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
