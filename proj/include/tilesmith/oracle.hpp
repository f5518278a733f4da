#pragma once

// Exact-cover search over finite tori and boxes, obstruction boxes for
// non-tilability, and the counting bound for the two-interval family.

#include <string>
#include <vector>

#include "tilesmith/space.hpp"

namespace tilesmith {

enum class Symmetry { translate, permute, full };

const char* symmetry_name(Symmetry s);
Symmetry symmetry_from_name(const std::string& name);

/// Distinct normalized images of the tile under the allowed isometries, in
/// sorted order; the identity image comes first.
std::vector<Tile> orientations(const Tile& tile, Symmetry s);

struct SearchProblem {
  Tile tile;
  bool torus = true;
  std::vector<Coord> extents;  // torus moduli or box side lengths
  Symmetry symmetry = Symmetry::translate;
  bool overhang = false;  // box only: copies may stick out
  bool fewest = false;    // branch on the cell with the fewest candidates
};

struct Copy {
  std::size_t orientation = 0;
  Point offset;
  friend bool operator==(const Copy&, const Copy&) = default;
};

struct SearchResult {
  std::string status;  // SAT | UNSAT | TIMEOUT
  std::vector<Tile> orientations;
  std::vector<Copy> witness;
  std::uint64_t nodes = 0;
  double elapsed = 0;
  json to_json() const;
};

constexpr std::uint64_t kDefaultBudget = 100'000'000;
constexpr std::uint64_t kMaxCells = 10'000;

/// Complete backtracking. Throws domain_too_large beyond kMaxCells cells.
SearchResult decide(const SearchProblem& problem, std::uint64_t budget = kDefaultBudget);

struct ObstructionResult {
  std::string status;  // UNSAT | inconclusive
  Coord box = 0;       // side length of the last box tried
  std::uint64_t nodes = 0;
  std::vector<json> attempts;
  json to_json() const;
};

/// Decides cubes of growing side with overhang; stops at the first UNSAT.
/// `budget` is shared across all boxes.
ObstructionResult prove_not_tiles(const Tile& tile, std::size_t d, Coord max_box,
                                  std::uint64_t budget = kDefaultBudget,
                                  Symmetry symmetry = Symmetry::full);

/// Two length-k intervals, k^2 - 1 apart, with every k-th gap cell filled.
Tile density_family_tile(Coord k);
/// True iff d (3k - 1) < k^2 + 2k - 1.
bool density_bound(Coord k, std::size_t d);

}  // namespace tilesmith
