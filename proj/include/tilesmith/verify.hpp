#pragma once

// Partition checkers. The exhaustive one counts coverage over a fundamental
// domain; the sampled one checks locate-consistency at seeded random points.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tilesmith/construction.hpp"

namespace tilesmith {

struct Violation {
  std::string kind;  // uncovered | overlap | covers-hole | bad-placement | inconsistent | integrity
  Point point;
  std::vector<Placement> copies;
  std::string detail;
};

struct VerifyReport {
  bool ok = true;
  std::string mode;
  std::uint64_t points_checked = 0;
  std::uint64_t covered_count = 0;
  std::uint64_t placements = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t violation_count = 0;
  std::vector<Violation> violations;  // first few witnesses only

  json to_json() const;
};

/// Expected-hole predicate: true for points that must stay uncovered.
using HoleFn = std::function<bool(std::span<const Coord>)>;

/// Every point of the fundamental domain (free axes wrapped by `period`) that
/// lies in the space and outside the hole is covered exactly once; hole
/// points are not covered. Placements must be proper, have offsets inside
/// the domain and tiles shorter than the period on free axes.
VerifyReport verify_exhaustive(const SpaceSignature& s, const std::vector<Placement>& placements,
                               const std::vector<Coord>& period, const HoleFn& hole = {},
                               std::uint64_t limit = kDefaultLimit);
/// Materializes the node and checks it. A hole given as a point list.
VerifyReport verify_exhaustive(const Node& node, const std::vector<Point>& hole = {},
                               std::uint64_t limit = kDefaultLimit);

struct SampleOptions {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  HoleFn hole;  // default: the node must cover the whole space
};

VerifyReport verify_sampled(const Node& node, const SampleOptions& opt);

/// The sampled checks run at every point of the fundamental domain.
VerifyReport verify_locate_all(const Node& node, const HoleFn& hole = {},
                               std::uint64_t limit = kDefaultLimit);

}  // namespace tilesmith
