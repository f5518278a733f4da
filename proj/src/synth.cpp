#include "tilesmith/synth.hpp"

#include "tilesmith/general.hpp"
#include "tilesmith/oracle.hpp"
#include "tilesmith/simple.hpp"

namespace tilesmith {

namespace {

NodePtr lift_torus(const Tile& tile, const std::vector<Coord>& moduli, const SearchResult& r) {
  std::vector<Point> pts;
  for (const auto& p : tile.points()) {
    Point q(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) q[a] = mod_floor(p[a], moduli[a]);
    pts.push_back(std::move(q));
  }
  SpaceSignature::Builder b;
  b.block(moduli, std::make_shared<const Tile>(tile.dim(), std::move(pts)));
  auto space = std::move(b).build();
  std::vector<Placement> pls;
  for (const auto& c : r.witness) pls.push_back({0, c.offset});
  return lift(make_explicit(space, std::move(pls)), Projection{moduli}, {std::make_shared<const Tile>(tile)});
}

}  // namespace

NodePtr torus_shortcut(const Tile& input) {
  Tile tile = input.normalized();
  const std::size_t b = tile.dim();
  const Coord n = static_cast<Coord>(tile.size());
  auto lo = [&](std::size_t a) { return std::max<Coord>(tile.extent(a) + 1, 2); };
  if (b == 1) {
    for (Coord m = lo(0); m <= 60; ++m) {
      if (m % n != 0) continue;
      auto r = decide({tile, true, {m}, Symmetry::translate, false, false}, 1'000'000);
      if (r.status == "SAT") return lift_torus(tile, {m}, r);
    }
  } else if (b == 2) {
    for (Coord area = 1; area <= 144; ++area) {
      if (area % n != 0) continue;
      for (Coord m1 = lo(0); m1 <= area; ++m1) {
        if (area % m1 != 0 || area / m1 < lo(1)) continue;
        std::vector<Coord> mod{m1, area / m1};
        auto r = decide({tile, true, mod, Symmetry::translate, false, false}, 1'000'000);
        if (r.status == "SAT") return lift_torus(tile, mod, r);
      }
    }
  }
  return nullptr;
}

SynthOutput synthesize(const Tile& input, const SynthOptions& opt) {
  Tile tile = input.normalized();
  SynthOutput out;
  if (opt.method != "auto" && opt.method != "simple" && opt.method != "general")
    throw Error(Errc::parameter, "method must be auto, simple or general");
  if (opt.shortcut) {
    if (auto node = torus_shortcut(tile)) {
      out.root = node;
      out.d = tile.dim();
      out.method = "shortcut";
      out.trace = json{{"method", "shortcut"}, {"d", out.d}};
      return out;
    }
  }
  auto pi = as_punctured_interval(tile);
  std::string method = opt.method;
  if (method == "auto") method = pi ? "simple" : "general";
  if (method == "simple") {
    if (!pi) throw Error(Errc::parameter, "the simple method needs a punctured interval {0..k-1} minus one inner point");
    auto r = synthesize_simple(pi->first, pi->second);
    out.root = r.root;
    out.d = r.d;
    out.trace = r.trace();
  } else {
    auto r = synthesize_general(tile);
    out.root = r.root;
    out.d = r.d;
    out.trace = r.trace();
  }
  out.method = method;
  return out;
}

}  // namespace tilesmith
