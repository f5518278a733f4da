#include "tilesmith/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "tilesmith/kernels.hpp"

namespace tilesmith {

const char* symmetry_name(Symmetry s) {
  switch (s) {
    case Symmetry::translate: return "translate";
    case Symmetry::permute: return "perm";
    case Symmetry::full: return "full";
  }
  return "translate";
}

Symmetry symmetry_from_name(const std::string& name) {
  if (name == "translate") return Symmetry::translate;
  if (name == "perm" || name == "permute") return Symmetry::permute;
  if (name == "full") return Symmetry::full;
  throw Error(Errc::parameter, "symmetry must be translate, perm or full");
}

std::vector<Tile> orientations(const Tile& tile, Symmetry s) {
  const std::size_t b = tile.dim();
  Tile base = tile.normalized();
  std::vector<std::size_t> perm(b);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::set<std::vector<Point>> seen{base.points()};
  std::vector<Tile> out{base};
  if (s == Symmetry::translate) return out;
  std::vector<Tile> rest;
  do {
    const std::uint64_t signs = s == Symmetry::full ? (std::uint64_t{1} << b) : 1;
    for (std::uint64_t m = 0; m < signs; ++m) {
      std::vector<Point> pts;
      for (const auto& p : base.points()) {
        Point q(b);
        for (std::size_t a = 0; a < b; ++a) q[a] = (m >> a & 1) ? -p[perm[a]] : p[perm[a]];
        pts.push_back(std::move(q));
      }
      Tile t = Tile(b, std::move(pts)).normalized();
      if (seen.insert(t.points()).second) rest.push_back(std::move(t));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::sort(rest.begin(), rest.end(), [](const Tile& x, const Tile& y) { return x.points() < y.points(); });
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

json SearchResult::to_json() const {
  json w = json::array();
  for (const auto& c : witness) w.push_back(json{{"orientation", c.orientation}, {"offset", c.offset}});
  json o = json::array();
  for (const auto& t : orientations) o.push_back(tile_to_json(t));
  return json{{"status", status}, {"witness", w}, {"orientations", o}, {"nodes", nodes}, {"elapsed", elapsed}};
}

namespace {

struct Candidate {
  Copy copy;
  std::vector<std::uint32_t> cells;  // inside the domain, sorted
  std::vector<Point> outside;        // overhang cells
};

class Search {
 public:
  Search(const SearchProblem& pr, std::uint64_t budget) : pr_(pr), budget_(budget) {}

  SearchResult run() {
    auto t0 = std::chrono::steady_clock::now();
    SearchResult res;
    res.orientations = orientations(pr_.tile, pr_.symmetry);
    orients_ = res.orientations;
    setup();
    const bool divisible = pr_.overhang || cells_ % pr_.tile.size() == 0;
    if (!divisible) {
      res.status = "UNSAT";
    } else {
      int r = dfs();
      res.status = r > 0 ? "SAT" : (r == 0 ? "UNSAT" : "TIMEOUT");
      if (r > 0)
        for (auto i : chosen_) res.witness.push_back(cands_[i].copy);
      std::sort(res.witness.begin(), res.witness.end(), [](const Copy& a, const Copy& b) {
        return std::tie(a.offset, a.orientation) < std::tie(b.offset, b.orientation);
      });
    }
    res.nodes = nodes_;
    res.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  }

 private:
  void setup() {
    const std::size_t d = pr_.extents.size();
    if (d != pr_.tile.dim()) throw Error(Errc::shape_mismatch, "domain dimension differs from the tile");
    std::uint64_t n = 1;
    for (Coord e : pr_.extents) {
      if (e < 1) throw Error(Errc::parameter, "domain extents must be positive");
      n *= static_cast<std::uint64_t>(e);
      if (n > kMaxCells) throw Error(Errc::domain_too_large, "search domain over 10^4 cells");
    }
    cells_ = n;
    stride_.assign(d, 1);
    for (std::size_t a = d; a-- > 1;) stride_[a - 1] = stride_[a] * static_cast<std::uint64_t>(pr_.extents[a]);

    std::set<std::vector<std::uint32_t>> torus_seen;
    for (std::size_t o = 0; o < orients_.size(); ++o) {
      const Tile& t = orients_[o];
      // offsets: torus -> every cell; box -> every offset putting a cell in the box
      std::vector<Coord> lo(d), hi(d);
      for (std::size_t a = 0; a < d; ++a) {
        if (pr_.torus || !pr_.overhang) {
          lo[a] = 0;
          hi[a] = pr_.torus ? pr_.extents[a] : pr_.extents[a] - t.extent(a);
        } else {
          lo[a] = -t.extent(a);
          hi[a] = pr_.extents[a];
        }
        if (hi[a] <= lo[a]) hi[a] = lo[a];
      }
      bool empty = false;
      for (std::size_t a = 0; a < d; ++a) empty = empty || hi[a] <= lo[a];
      if (empty) continue;
      Point v = lo;
      for (;;) {
        Candidate c{{o, v}, {}, {}};
        for (const auto& p : t.points()) {
          std::uint64_t idx = 0;
          bool inside = true;
          Point q(d);
          for (std::size_t a = 0; a < d; ++a) {
            q[a] = p[a] + v[a];
            if (pr_.torus) q[a] = mod_floor(q[a], pr_.extents[a]);
            else if (q[a] < 0 || q[a] >= pr_.extents[a]) inside = false;
            if (inside) idx += static_cast<std::uint64_t>(q[a]) * stride_[a];
          }
          if (inside) c.cells.push_back(static_cast<std::uint32_t>(idx));
          else c.outside.push_back(std::move(q));
        }
        std::sort(c.cells.begin(), c.cells.end());
        bool ok = !c.cells.empty();
        if (pr_.torus) {
          // self-overlapping wraps are not copies; equal cell sets are the same copy
          ok = ok && std::adjacent_find(c.cells.begin(), c.cells.end()) == c.cells.end() &&
               torus_seen.insert(c.cells).second;
        }
        if (ok) cands_.push_back(std::move(c));
        std::size_t a = d;
        while (a > 0 && ++v[a - 1] >= hi[a - 1]) {
          v[a - 1] = lo[a - 1];
          --a;
        }
        if (a == 0) break;
      }
    }
    std::stable_sort(cands_.begin(), cands_.end(), [](const Candidate& x, const Candidate& y) {
      return std::tie(x.copy.orientation, x.copy.offset) < std::tie(y.copy.orientation, y.copy.offset);
    });
    by_cell_.assign(cells_, {});
    for (std::uint32_t i = 0; i < cands_.size(); ++i)
      for (auto c : cands_[i].cells) by_cell_[c].push_back(i);
    words_.assign((cells_ + 63) / 64, 0);
    if (cells_ % 64) words_.back() = ~std::uint64_t{0} << (cells_ % 64);  // padding counts as covered
  }

  bool test(std::uint32_t c) const { return words_[c >> 6] >> (c & 63) & 1; }
  void flip(std::uint32_t c) { words_[c >> 6] ^= std::uint64_t{1} << (c & 63); }

  bool fits(const Candidate& c) const {
    for (auto x : c.cells)
      if (test(x)) return false;
    for (const auto& p : c.outside)
      if (outside_.count(p)) return false;
    return true;
  }

  void toggle(const Candidate& c, bool place) {
    for (auto x : c.cells) flip(x);
    for (const auto& p : c.outside) {
      if (place) outside_.insert(p);
      else outside_.erase(p);
    }
  }

  // 1 found, 0 exhausted, -1 budget
  int dfs() {
    std::size_t first = kernels::find_first_zero_bit(words_.data(), words_.size() * 64);
    if (first >= cells_) return 1;
    std::uint32_t cell = static_cast<std::uint32_t>(first);
    if (pr_.fewest) {
      std::size_t best = SIZE_MAX;
      for (std::uint32_t c = cell; c < cells_; ++c) {
        if (test(c)) continue;
        std::size_t n = 0;
        for (auto i : by_cell_[c]) n += fits(cands_[i]);
        if (n < best) {
          best = n;
          cell = c;
          if (n <= 1) break;
        }
      }
    }
    for (auto i : by_cell_[cell]) {
      const auto& c = cands_[i];
      if (!fits(c)) continue;
      if (++nodes_ > budget_) return -1;
      toggle(c, true);
      chosen_.push_back(i);
      int r = dfs();
      if (r != 0) return r;
      chosen_.pop_back();
      toggle(c, false);
    }
    return 0;
  }

  const SearchProblem& pr_;
  std::uint64_t budget_;
  std::vector<Tile> orients_;
  std::uint64_t cells_ = 0;
  std::vector<std::uint64_t> stride_;
  std::vector<Candidate> cands_;
  std::vector<std::vector<std::uint32_t>> by_cell_;
  std::vector<std::uint64_t> words_;
  std::unordered_set<Point, PointHash> outside_;
  std::vector<std::uint32_t> chosen_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

SearchResult decide(const SearchProblem& problem, std::uint64_t budget) {
  if (problem.tile.size() == 0) throw Error(Errc::parameter, "empty tile");
  if (problem.torus && problem.overhang) throw Error(Errc::parameter, "overhang applies to boxes only");
  return Search(problem, budget).run();
}

json ObstructionResult::to_json() const {
  return json{{"status", status}, {"box", box}, {"nodes", nodes}, {"attempts", attempts}};
}

ObstructionResult prove_not_tiles(const Tile& tile, std::size_t d, Coord max_box, std::uint64_t budget,
                                  Symmetry symmetry) {
  if (d == 0) throw Error(Errc::parameter, "dimension must be positive");
  Tile t = tile.normalized();
  if (t.dim() > d) throw Error(Errc::shape_mismatch, "tile dimension exceeds d");
  if (t.dim() < d) {
    // pad with zero coordinates
    std::vector<Point> pts;
    for (auto p : t.points()) {
      p.resize(d, 0);
      pts.push_back(std::move(p));
    }
    t = Tile(d, std::move(pts));
  }
  ObstructionResult out;
  out.status = "inconclusive";
  for (Coord n = 1; n <= max_box; ++n) {
    std::uint64_t cells = 1;
    bool big = false;
    for (std::size_t a = 0; a < d && !big; ++a) {
      cells *= static_cast<std::uint64_t>(n);
      big = cells > kMaxCells;
    }
    if (big) break;
    SearchProblem pr{t, false, std::vector<Coord>(d, n), symmetry, true, false};
    auto r = decide(pr, budget - out.nodes);
    out.nodes += r.nodes;
    out.box = n;
    out.attempts.push_back(json{{"box", n}, {"status", r.status}, {"nodes", r.nodes}});
    if (r.status == "UNSAT") {
      out.status = "UNSAT";
      return out;
    }
    if (r.status == "TIMEOUT" || out.nodes >= budget) break;
  }
  return out;
}

Tile density_family_tile(Coord k) {
  if (k < 2) throw Error(Errc::parameter, "k must be at least 2");
  std::vector<Point> pts;
  for (Coord v = 0; v < k; ++v) pts.push_back({v});
  for (Coord j = 1; j < k; ++j) pts.push_back({k - 1 + k * j});
  const Coord second = k + k * k - 1;
  for (Coord v = 0; v < k; ++v) pts.push_back({second + v});
  return Tile(1, std::move(pts));
}

bool density_bound(Coord k, std::size_t d) {
  if (k < 2 || d < 1) throw Error(Errc::parameter, "need k >= 2 and d >= 1");
  return static_cast<Coord>(d) * (3 * k - 1) < k * k + 2 * k - 1;
}

}  // namespace tilesmith
