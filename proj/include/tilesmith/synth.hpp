#pragma once

// Method dispatch for synthesis, shared by the command line and the tests.

#include <string>

#include "tilesmith/construction.hpp"

namespace tilesmith {

struct SynthOptions {
  std::string method = "auto";  // auto | simple | general
  bool shortcut = false;        // try a torus tiling first (b <= 2)
};

struct SynthOutput {
  NodePtr root;
  std::size_t d = 0;
  std::string method;  // the pipeline that produced root
  json trace;
};

/// Tiling of Z^d by the tile. `simple` needs a punctured interval; `auto`
/// uses simple when it applies and general otherwise.
SynthOutput synthesize(const Tile& tile, const SynthOptions& opt);

/// Smallest torus tiling found by the oracle, lifted to Z^b; nullptr if none
/// among the tried tori (1-D: m <= 60, 2-D: m1 m2 <= 144).
NodePtr torus_shortcut(const Tile& tile);

}  // namespace tilesmith
