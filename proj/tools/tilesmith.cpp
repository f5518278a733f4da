// tilesmith command line: synth / verify / decide / render / bound.
// Exit codes: 0 ok, 1 verification failed, 2 usage or input error, 3 internal.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tilesmith/certificate.hpp"
#include "tilesmith/oracle.hpp"
#include "tilesmith/render.hpp"
#include "tilesmith/synth.hpp"
#include "tilesmith/verify.hpp"

using namespace tilesmith;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2, kInternal = 3;

std::vector<Coord> parse_dims(const std::string& s) {
  std::vector<Coord> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(Errc::parse, "bad size list '" + s + "' (expected e.g. 4x2)");
    }
  }
  if (out.empty()) throw Error(Errc::parse, "empty size list");
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::parse, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::parameter, "cannot write " + path);
  out << text;
}

struct SynthArgs {
  std::string tile, method = "auto", out;
  bool trace = false, shortcut = false;
  std::uint64_t limit = 0, samples = 0, seed = 1;  // samples 0: auto
};

int cmd_synth(const SynthArgs& a) {
  Tile tile = parse_tile(a.tile);
  auto res = synthesize(tile, {a.method, a.shortcut});
  const std::uint64_t samples = a.samples ? a.samples : (res.root->space().axis_count() <= 4096 ? 2000 : 50);
  json meta{{"pipeline", res.method},
            {"d", res.d},
            {"tile", tile_to_text(tile)},
            {"limit", a.limit},
            {"seed", a.seed},
            {"check_samples", samples}};
  if (a.trace) meta["trace"] = res.trace;
  auto cert = make_certificate(res.root, meta, a.limit);

  // self-check before anything is written
  VerifyOptions vo;
  vo.mode = cert.mode == "explicit-periodic" ? "exhaustive" : "sampled";
  vo.samples = samples;
  vo.seed = a.seed;
  vo.limit = a.limit;
  auto rep = verify_certificate(cert, vo);
  if (!rep.ok) {
    std::cerr << "internal: synthesized tiling failed its own check\n" << rep.to_json().dump(2) << "\n";
    return kInternal;
  }
  std::string text = certificate_to_json(cert).dump() + "\n";
  if (!a.out.empty()) write_text(a.out, text);
  std::cout << "tile=" << tile_to_text(tile) << " method=" << res.method << " d=" << res.d
            << " mode=" << cert.mode << "\n";
  if (a.trace) std::cout << res.trace.dump(2) << "\n";
  return kOk;
}

struct VerifyArgs {
  std::string path, mode = "auto";
  std::uint64_t samples = 10000, seed = 1, limit = 0;
  unsigned threads = 1;
};

int cmd_verify(const VerifyArgs& a) {
  auto cert = certificate_from_json(read_json(a.path));
  VerifyOptions vo{a.mode, a.samples, a.seed, a.threads, a.limit};
  auto rep = verify_certificate(cert, vo);
  std::cout << rep.to_json().dump(2) << "\n";
  return rep.ok ? kOk : kFail;
}

struct DecideArgs {
  std::string tile, torus, box, symmetry = "translate";
  std::size_t dim = 0;
  bool overhang = false, fewest = false, prove = false;
  Coord max_box = 40;
  std::uint64_t budget = kDefaultBudget;
};

int cmd_decide(const DecideArgs& a) {
  Tile tile = parse_tile(a.tile);
  Symmetry sym = symmetry_from_name(a.symmetry);
  if (a.prove) {
    std::size_t d = a.dim ? a.dim : tile.dim();
    auto r = prove_not_tiles(tile, d, a.max_box, a.budget, sym);
    std::cout << r.to_json().dump(2) << "\n";
    return kOk;
  }
  if (a.torus.empty() == a.box.empty()) throw Error(Errc::parameter, "give exactly one of --torus or --box");
  SearchProblem pr;
  pr.torus = !a.torus.empty();
  pr.extents = parse_dims(pr.torus ? a.torus : a.box);
  std::size_t d = a.dim ? a.dim : pr.extents.size();
  if (pr.extents.size() == 1 && d > 1) pr.extents.assign(d, pr.extents[0]);
  if (tile.dim() < pr.extents.size()) {
    std::vector<Point> pts;
    for (auto p : tile.points()) {
      p.resize(pr.extents.size(), 0);
      pts.push_back(std::move(p));
    }
    tile = Tile(pr.extents.size(), std::move(pts));
  }
  pr.tile = tile;
  pr.symmetry = sym;
  pr.overhang = a.overhang;
  pr.fewest = a.fewest;
  auto r = decide(pr, a.budget);
  json j = r.to_json();
  j["budget"] = a.budget;
  std::cout << j.dump(2) << "\n";
  return kOk;
}

struct RenderArgs {
  std::string path, axes = "0,1", at, format = "ascii", out;
  Coord width = 0, height = 0;
};

std::vector<Coord> parse_csv(const std::string& s) {
  std::vector<Coord> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoll(part));
    } catch (const std::exception&) {
      throw Error(Errc::parse, "bad number list '" + s + "'");
    }
  }
  return out;
}

int cmd_render(const RenderArgs& a) {
  auto cert = certificate_from_json(read_json(a.path));
  auto node = certificate_node(cert);
  RenderOptions ro;
  auto ax = parse_csv(a.axes);
  if (ax.empty() || ax.size() > 2 || ax[0] < 0 || (ax.size() == 2 && ax[1] < 0))
    throw Error(Errc::parameter, "--axes takes one or two axis indices");
  ro.ax = static_cast<std::size_t>(ax[0]);
  ro.ay = ax.size() == 2 ? static_cast<std::size_t>(ax[1]) : ro.ax + 1;
  ro.at = parse_csv(a.at);
  ro.width = a.width;
  ro.height = a.height;
  ro.format = a.format;
  write_text(a.out, render(*node, ro));
  return kOk;
}

int cmd_bound(Coord k, std::size_t d) {
  Tile t = density_family_tile(k);
  bool out = density_bound(k, d);
  std::cout << json{{"k", k},
                    {"d", d},
                    {"tile", render_tile_1d(t)},
                    {"size", t.size()},
                    {"lhs", static_cast<Coord>(d) * static_cast<Coord>(t.size())},
                    {"rhs", k * k + 2 * k - 1},
                    {"ruled_out", out}}
                   .dump(2)
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tilesmith: constructive tilings of Z^d by a finite tile"};
  app.require_subcommand(1);

  const std::uint64_t env_limit = limit_from_env();

  SynthArgs sa;
  sa.limit = env_limit;
  auto* synth = app.add_subcommand("synth", "synthesize a tiling and write its certificate");
  synth->add_option("--tile", sa.tile, "tile: X/. string or JSON list of points")->required();
  synth->add_option("--method", sa.method, "auto | simple | general")->capture_default_str();
  synth->add_option("--out", sa.out, "certificate path");
  synth->add_flag("--trace", sa.trace, "print pipeline internals");
  synth->add_flag("--shortcut", sa.shortcut, "try a torus tiling found by the oracle first");
  synth->add_option("--limit", sa.limit, "materialization limit (TILESMITH_LIMIT)")->capture_default_str();
  synth->add_option("--samples", sa.samples, "self-check samples for construction certificates (0: 2000, or 50 for huge points)")
      ->capture_default_str();
  synth->add_option("--seed", sa.seed, "self-check seed")->capture_default_str();

  VerifyArgs va;
  va.limit = env_limit;
  auto* verify = app.add_subcommand("verify", "check a certificate");
  verify->add_option("path", va.path, "certificate file")->required();
  verify->add_option("--mode", va.mode, "auto | exhaustive | sampled")->capture_default_str();
  verify->add_option("--samples", va.samples, "sample count")->capture_default_str();
  verify->add_option("--seed", va.seed, "sampling seed")->capture_default_str();
  verify->add_option("--threads", va.threads, "sampling threads")->capture_default_str();
  verify->add_option("--limit", va.limit, "materialization limit (TILESMITH_LIMIT)")->capture_default_str();

  DecideArgs da;
  auto* dec = app.add_subcommand("decide", "exact-cover search on a torus or box");
  dec->add_option("--tile", da.tile, "tile")->required();
  dec->add_option("--torus", da.torus, "torus moduli, e.g. 4x2");
  dec->add_option("--box", da.box, "box side lengths, e.g. 30 or 6x6");
  dec->add_option("--dim", da.dim, "dimension (a single box or torus size is repeated)");
  dec->add_option("--symmetry", da.symmetry, "translate | perm | full")->capture_default_str();
  dec->add_flag("--overhang", da.overhang, "box copies may extend outside the box");
  dec->add_flag("--fewest", da.fewest, "branch on the cell with the fewest candidates");
  dec->add_flag("--prove", da.prove, "search growing boxes with overhang for an obstruction");
  dec->add_option("--max-box", da.max_box, "largest box side tried by --prove")->capture_default_str();
  dec->add_option("--budget", da.budget, "search node budget")->capture_default_str();

  RenderArgs ra;
  auto* rend = app.add_subcommand("render", "draw a two-dimensional slice of a certificate");
  rend->add_option("path", ra.path, "certificate file")->required();
  rend->add_option("--axes", ra.axes, "the two drawn axes, e.g. 0,1")->capture_default_str();
  rend->add_option("--at", ra.at, "values of the remaining axes, comma separated");
  rend->add_option("--width", ra.width, "cells along the first axis (0: one period)");
  rend->add_option("--height", ra.height, "cells along the second axis (0: one period)");
  rend->add_option("--format", ra.format, "ascii | svg")->capture_default_str();
  rend->add_option("--out", ra.out, "output path (default stdout)");

  Coord bk = 4;
  std::size_t bd = 1;
  auto* bound = app.add_subcommand("bound", "counting bound for the two-interval tile family");
  bound->add_option("--k", bk, "interval length")->capture_default_str();
  bound->add_option("--d", bd, "dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*synth) return cmd_synth(sa);
    if (*verify) return cmd_verify(va);
    if (*dec) return cmd_decide(da);
    if (*rend) return cmd_render(ra);
    if (*bound) return cmd_bound(bk, bd);
  } catch (const Error& e) {
    std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
