#include "tilesmith/verify.hpp"

#include <algorithm>
#include <thread>
#include <unordered_set>

#include "tilesmith/kernels.hpp"
#include "tilesmith/rng.hpp"

namespace tilesmith {

namespace {

constexpr std::size_t kMaxWitnesses = 16;

void add(VerifyReport& r, Violation v) {
  r.ok = false;
  ++r.violation_count;
  if (r.violations.size() < kMaxWitnesses) r.violations.push_back(std::move(v));
}

void add_integrity(VerifyReport& r, const Node& node) {
  // collect_dag wants a shared pointer; walk from the node's children instead
  std::vector<const Node*> stack{&node};
  std::unordered_set<const Node*> seen{&node};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    for (auto& msg : n->integrity_issues()) add(r, {"integrity", {}, {}, msg});
    for (const auto& c : n->children())
      if (c && seen.insert(c.get()).second) stack.push_back(c.get());
  }
}

}  // namespace

json VerifyReport::to_json() const {
  json v = json::array();
  for (const auto& x : violations) {
    json copies = json::array();
    for (const auto& c : x.copies) copies.push_back(placement_to_json(c));
    json e{{"kind", x.kind}, {"point", x.point}, {"copies", copies}};
    if (!x.detail.empty()) e["detail"] = x.detail;
    v.push_back(std::move(e));
  }
  json j{{"ok", ok},
         {"mode", mode},
         {"points_checked", points_checked},
         {"covered", covered_count},
         {"placements", placements},
         {"violation_count", violation_count},
         {"violations", v}};
  if (mode == "sampled") {
    j["samples"] = samples;
    j["seed"] = seed;
  }
  return j;
}

VerifyReport verify_exhaustive(const SpaceSignature& s, const std::vector<Placement>& placements,
                               const std::vector<Coord>& period, const HoleFn& hole,
                               std::uint64_t limit) {
  VerifyReport rep;
  rep.mode = "exhaustive";
  rep.placements = placements.size();
  const std::size_t n = s.axis_count();
  std::vector<Coord> box(n);
  for (std::size_t a = 0; a < n; ++a) {
    if (s.is_free(a)) {
      Coord p = a < period.size() ? period[a] : 0;
      if (p <= 0) throw Error(Errc::parameter, "exhaustive verification needs a period on every free axis");
      box[a] = p;
    } else {
      box[a] = s.modulus(a);
    }
  }
  std::uint64_t vol = box_volume(box);
  if (vol > limit) {
    throw Error(Errc::limit_exceeded, "fundamental domain has " +
                                          (vol == UINT64_MAX ? std::string("too many")
                                                             : std::to_string(vol)) +
                                          " points, over the limit " + std::to_string(limit));
  }
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t a = n; a-- > 1;) stride[a - 1] = stride[a] * static_cast<std::size_t>(box[a]);
  auto point_of = [&](std::size_t idx) {
    Point p(n);
    for (std::size_t a = 0; a < n; ++a) {
      p[a] = static_cast<Coord>(idx / stride[a]);
      idx %= stride[a];
    }
    return p;
  };

  std::vector<std::uint8_t> expected(vol, 0), counts(vol, 0);
  for_each_point(s, box, [&](std::span<const Coord> p) {
    if (hole && hole(p)) return;
    std::size_t idx = 0;
    for (std::size_t a = 0; a < n; ++a) idx += static_cast<std::size_t>(p[a]) * stride[a];
    expected[idx] = 1;
    ++rep.points_checked;
  });

  for (const auto& pl : placements) {
    if (pl.block >= s.block_count() || pl.offset.size() != n) {
      add(rep, {"bad-placement", {}, {pl}, "placement does not fit the space"});
      continue;
    }
    const auto& b = s.block(pl.block);
    bool bad = false;
    for (std::size_t a = 0; a < n && !bad; ++a) {
      if (pl.offset[a] < 0 || pl.offset[a] >= box[a]) {
        add(rep, {"bad-placement", pl.offset, {pl}, "offset outside the fundamental domain"});
        bad = true;
      }
    }
    for (std::size_t a = 0; a < b.dim && !bad; ++a) {
      std::size_t ax = b.first_axis + a;
      if (b.tile->extent(a) >= box[ax]) {
        add(rep, {"bad-placement", pl.offset, {pl},
                  s.is_free(ax) ? "tile does not fit inside one period"
                                : "copy overlaps itself under cyclic wrap"});
        bad = true;
      }
    }
    if (bad) continue;
    for (const auto& t : b.tile->points()) {
      std::size_t idx = 0;
      for (std::size_t a = 0; a < n; ++a) {
        Coord v = pl.offset[a];
        if (a >= b.first_axis && a < b.first_axis + b.dim) v = mod_floor(v + t[a - b.first_axis], box[a]);
        idx += static_cast<std::size_t>(v) * stride[a];
      }
      if (counts[idx] < 255) ++counts[idx];
    }
  }

  std::size_t i = 0;
  while ((i = kernels::first_mismatch_u8(expected.data(), counts.data(), vol, i)) < vol) {
    Point p = point_of(i);
    std::string kind = counts[i] == 0 ? "uncovered" : (expected[i] == 0 ? "covers-hole" : "overlap");
    Violation v{kind, p, {}, {}};
    if (counts[i] > 0 && rep.violations.size() < kMaxWitnesses) {
      for (const auto& pl : placements) {
        if (pl.block >= s.block_count() || pl.offset.size() != n) continue;
        const auto& b = s.block(pl.block);
        for (const auto& t : b.tile->points()) {
          bool hit = true;
          for (std::size_t a = 0; a < n && hit; ++a) {
            Coord c = pl.offset[a];
            if (a >= b.first_axis && a < b.first_axis + b.dim) c = mod_floor(c + t[a - b.first_axis], box[a]);
            hit = c == p[a];
          }
          if (hit) {
            v.copies.push_back(pl);
            break;
          }
        }
        if (v.copies.size() >= 4) break;
      }
    }
    add(rep, std::move(v));
    ++i;
  }
  for (std::size_t j = 0; j < vol; ++j) rep.covered_count += counts[j] != 0;
  return rep;
}

VerifyReport verify_exhaustive(const Node& node, const std::vector<Point>& hole, std::uint64_t limit) {
  auto pls = materialize(node, node.period(), limit);
  std::set<Point> hs;
  for (const auto& h : hole) hs.insert(node.space().reduce(h));
  HoleFn fn;
  if (!hs.empty()) fn = [&hs](std::span<const Coord> p) { return hs.count(Point(p.begin(), p.end())) > 0; };
  auto rep = verify_exhaustive(node.space(), pls, node.period(), fn, limit);
  add_integrity(rep, node);
  return rep;
}

namespace {

// Checks one point; returns the first problem found.
std::optional<Violation> check_point(const Node& node, const Point& p, const HoleFn& hole) {
  const auto& s = node.space();
  bool in_hole = hole && hole(p);
  auto pl = node.find(p);
  if (in_hole) {
    if (pl) return Violation{"covers-hole", p, {*pl}, {}};
    return std::nullopt;
  }
  if (!pl) return Violation{"uncovered", p, {}, {}};
  if (pl->block >= s.block_count() || pl->offset.size() != s.axis_count()) {
    return Violation{"bad-placement", p, {*pl}, "placement does not fit the space"};
  }
  if (!placement_is_proper(*pl, s)) return Violation{"bad-placement", p, {*pl}, "copy is not proper"};
  if (!cover_contains(*pl, s, p)) {
    return Violation{"inconsistent", p, {*pl}, "located copy does not contain the point"};
  }
  for (const auto& q : cover(*pl, s)) {
    if (!s.contains(q)) return Violation{"covers-hole", q, {*pl}, "copy leaves the region"};
    if (hole && hole(q)) return Violation{"covers-hole", q, {*pl}, {}};
    auto r = node.find(q);
    if (!r) return Violation{"inconsistent", q, {*pl}, "cell of the located copy is not covered"};
    if (!same_copy(s, *pl, *r)) return Violation{"overlap", q, {*pl, *r}, {}};
  }
  return std::nullopt;
}

}  // namespace

VerifyReport verify_sampled(const Node& node, const SampleOptions& opt) {
  VerifyReport rep;
  rep.mode = "sampled";
  rep.samples = opt.samples;
  rep.seed = opt.seed;
  const auto& s = node.space();
  const std::size_t n = s.axis_count();

  std::vector<std::vector<Point>> domain_elems(s.block_count());
  for (std::size_t j = 0; j < s.block_count(); ++j)
    if (s.block(j).domain) domain_elems[j] = s.block(j).domain->elements();

  auto sample = [&](std::uint64_t index) {
    auto rng = SplitMix64::stream(opt.seed, index);
    Point p(n);
    for (std::size_t j = 0; j < s.block_count(); ++j) {
      const auto& b = s.block(j);
      if (!domain_elems[j].empty()) {
        const auto& e = domain_elems[j][rng.below(domain_elems[j].size())];
        std::copy(e.begin(), e.end(), p.begin() + static_cast<std::ptrdiff_t>(b.first_axis));
        continue;
      }
      for (std::size_t a = b.first_axis; a < b.first_axis + b.dim; ++a) {
        if (!s.is_free(a)) {
          p[a] = rng.range(0, s.modulus(a));
          continue;
        }
        Coord per = std::min<Coord>(node.period()[a], Coord{1} << 40);
        p[a] = per > 0 ? rng.range(-per, 2 * per) : rng.range(-16, 16);
      }
    }
    return p;
  };

  unsigned threads = std::max(1u, opt.threads);
  std::vector<std::vector<std::pair<std::uint64_t, Violation>>> found(threads);
  auto worker = [&](unsigned t) {
    for (std::uint64_t i = t; i < opt.samples; i += threads) {
      Point p = sample(i);
      try {
        if (auto v = check_point(node, p, opt.hole)) found[t].emplace_back(i, std::move(*v));
      } catch (const Error& e) {
        found[t].emplace_back(i, Violation{"inconsistent", p, {}, e.what()});
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  std::vector<std::pair<std::uint64_t, Violation>> all;
  for (auto& f : found)
    for (auto& x : f) all.push_back(std::move(x));
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& x : all) add(rep, std::move(x.second));
  rep.points_checked = opt.samples;
  rep.covered_count = opt.samples - all.size();
  add_integrity(rep, node);
  return rep;
}

VerifyReport verify_locate_all(const Node& node, const HoleFn& hole, std::uint64_t limit) {
  VerifyReport rep;
  rep.mode = "locate-all";
  auto box = domain_box(node.space(), node.period());
  if (box_volume(box) > limit) throw Error(Errc::limit_exceeded, "domain too large for locate-all");
  for_each_point(node.space(), box, [&](std::span<const Coord> p) {
    ++rep.points_checked;
    Point q(p.begin(), p.end());
    if (auto v = check_point(node, q, hole)) add(rep, std::move(*v));
    else if (!(hole && hole(p))) ++rep.covered_count;
  });
  add_integrity(rep, node);
  return rep;
}

}  // namespace tilesmith
