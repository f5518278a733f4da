#pragma once

// Serialized tilings. Explicit certificates list the placements of one
// fundamental domain; construction certificates carry the node DAG.

#include <string>
#include <vector>

#include "tilesmith/construction.hpp"
#include "tilesmith/verify.hpp"

namespace tilesmith {

struct Certificate {
  SpacePtr space;
  std::vector<Coord> period;  // one entry per free axis, 0 = aperiodic
  std::string mode;           // "explicit-periodic" | "construction"
  std::vector<Placement> placements;
  NodePtr root;
  json meta = json::object();
};

/// Post-order node list with shared space and set registries.
json dag_to_json(const NodePtr& root);
/// Rebuilds through the public builders; any inconsistency is `malformed`.
NodePtr dag_from_json(const json& j);

json certificate_to_json(const Certificate& c);
Certificate certificate_from_json(const json& j);

/// Explicit when the tiling is periodic and one fundamental domain has at
/// most `limit` points, construction otherwise.
Certificate make_certificate(const NodePtr& root, json meta, std::uint64_t limit = kDefaultLimit);

/// A node answering queries for the certificate (explicit ones get wrapped).
NodePtr certificate_node(const Certificate& c);

/// Per-axis period (cyclic axes: modulus) from the per-free-axis list.
std::vector<Coord> full_period(const SpaceSignature& s, const std::vector<Coord>& free_period);

struct VerifyOptions {
  std::string mode = "auto";  // auto | exhaustive | sampled
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::uint64_t limit = kDefaultLimit;
};

/// Exhaustive on explicit placements (or the materialized DAG), sampled
/// otherwise. `auto` picks exhaustive when the domain fits the limit.
VerifyReport verify_certificate(const Certificate& c, const VerifyOptions& opt);

}  // namespace tilesmith
