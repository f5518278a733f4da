#include "tilesmith/space.hpp"

#include <algorithm>
#include <sstream>

namespace tilesmith {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::parse: return "parse";
    case Errc::parameter: return "parameter";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::not_injective: return "projection-not-injective-on-tile";
    case Errc::limit_exceeded: return "limit-exceeded";
    case Errc::point_outside: return "point-outside-region";
    case Errc::point_in_hole: return "point-in-hole";
    case Errc::parity: return "parity";
    case Errc::bound: return "bound";
    case Errc::family_too_small: return "family-too-small";
    case Errc::containment: return "containment";
    case Errc::domain_too_large: return "domain-too-large";
    case Errc::malformed: return "malformed";
    case Errc::base_case: return "base-case";
  }
  return "unknown";
}

std::string point_to_string(std::span<const Coord> p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ',';
    os << p[i];
  }
  os << ')';
  return os.str();
}

// ---------------------------------------------------------------- Tile

Tile::Tile(std::size_t dim, std::vector<Point> points) : dim_(dim), points_(std::move(points)) {
  if (points_.empty()) throw Error(Errc::parse, "empty tile");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw Error(Errc::parse, "ragged tile coordinates");
  }
  std::sort(points_.begin(), points_.end());
  if (std::adjacent_find(points_.begin(), points_.end()) != points_.end()) {
    throw Error(Errc::parse, "duplicate tile point");
  }
}

Point Tile::bbox_min() const {
  Point m = points_.front();
  for (const auto& p : points_)
    for (std::size_t a = 0; a < dim_; ++a) m[a] = std::min(m[a], p[a]);
  return m;
}

Point Tile::bbox_max() const {
  Point m = points_.front();
  for (const auto& p : points_)
    for (std::size_t a = 0; a < dim_; ++a) m[a] = std::max(m[a], p[a]);
  return m;
}

Coord Tile::extent(std::size_t axis) const {
  return bbox_max()[axis] - bbox_min()[axis];
}

Coord Tile::box_size() const {
  Coord k = 1;
  auto lo = bbox_min();
  auto hi = bbox_max();
  for (std::size_t a = 0; a < dim_; ++a) k = std::max(k, hi[a] - lo[a] + 1);
  return k;
}

bool Tile::is_normalized() const {
  auto lo = bbox_min();
  return std::all_of(lo.begin(), lo.end(), [](Coord c) { return c == 0; });
}

Tile Tile::normalized() const {
  auto lo = bbox_min();
  for (auto& c : lo) c = -c;
  return translated(lo);
}

Tile Tile::translated(std::span<const Coord> v) const {
  std::vector<Point> pts = points_;
  for (auto& p : pts)
    for (std::size_t a = 0; a < dim_; ++a) p[a] += v[a];
  return Tile(dim_, std::move(pts));
}

bool Tile::contains(std::span<const Coord> p) const {
  return std::binary_search(points_.begin(), points_.end(), p,
                            [](const auto& a, const auto& b) {
                              return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                                                  b.end());
                            });
}

Tile parse_tile(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(Errc::parse, "empty tile");
  text = text.substr(first);
  text = text.substr(0, text.find_last_not_of(" \t\r\n") + 1);
  if (text.front() == '[') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(Errc::parse, std::string("tile JSON: ") + e.what());
    }
    return tile_from_json(j).normalized();
  }
  std::vector<Point> pts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == 'X' || text[i] == 'x') {
      pts.push_back({static_cast<Coord>(i)});
    } else if (text[i] != '.') {
      throw Error(Errc::parse, std::string("illegal tile character '") + text[i] + "'");
    }
  }
  if (pts.empty()) throw Error(Errc::parse, "empty tile");
  return Tile(1, std::move(pts)).normalized();
}

std::string render_tile_1d(const Tile& tile) {
  if (tile.dim() != 1) throw Error(Errc::parameter, "render_tile_1d needs a 1-D tile");
  Tile t = tile.normalized();
  std::string s(static_cast<std::size_t>(t.extent(0) + 1), '.');
  for (const auto& p : t.points()) s[static_cast<std::size_t>(p[0])] = 'X';
  return s;
}

std::string tile_to_text(const Tile& tile) {
  if (tile.dim() == 1) return render_tile_1d(tile);
  return tile_to_json(tile).dump();
}

json tile_to_json(const Tile& tile) {
  json arr = json::array();
  for (const auto& p : tile.points()) arr.push_back(p);
  return arr;
}

Tile tile_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(Errc::parse, "tile must be a non-empty array");
  std::vector<Point> pts;
  std::size_t dim = 0;
  for (const auto& v : j) {
    if (!v.is_array()) throw Error(Errc::parse, "tile points must be integer arrays");
    Point p;
    for (const auto& c : v) {
      if (!c.is_number_integer()) throw Error(Errc::parse, "tile coordinates must be integers");
      p.push_back(c.get<Coord>());
    }
    if (pts.empty()) dim = p.size();
    if (p.size() != dim || dim == 0) throw Error(Errc::parse, "ragged tile coordinates");
    pts.push_back(std::move(p));
  }
  return Tile(dim, std::move(pts));
}

// ------------------------------------------------------------ BlockSet

namespace {
std::size_t group_order(const std::vector<Coord>& moduli) {
  std::size_t n = 1;
  for (Coord m : moduli) {
    if (m <= 0) throw Error(Errc::parameter, "block set needs cyclic axes");
    n *= static_cast<std::size_t>(m);
  }
  return n;
}
}  // namespace

BlockSet::BlockSet(std::vector<Coord> moduli, const std::vector<Point>& elems)
    : moduli_(std::move(moduli)), bits_(group_order(moduli_), 0) {
  for (const auto& e : elems) {
    auto i = index_of(e);
    if (!bits_[i]) ++count_;
    bits_[i] = 1;
  }
}

BlockSet BlockSet::full(std::vector<Coord> moduli) {
  BlockSet s;
  s.moduli_ = std::move(moduli);
  s.bits_.assign(group_order(s.moduli_), 1);
  s.count_ = s.bits_.size();
  return s;
}

BlockSet BlockSet::from_tile(std::vector<Coord> moduli, const Tile& tile) {
  return BlockSet(std::move(moduli), tile.points());
}

std::size_t BlockSet::index_of(std::span<const Coord> p) const {
  std::size_t i = 0;
  for (std::size_t a = 0; a < moduli_.size(); ++a) {
    i = i * static_cast<std::size_t>(moduli_[a]) + static_cast<std::size_t>(mod_floor(p[a], moduli_[a]));
  }
  return i;
}

Point BlockSet::point_at(std::size_t index) const {
  Point p(moduli_.size());
  for (std::size_t a = moduli_.size(); a-- > 0;) {
    p[a] = static_cast<Coord>(index % static_cast<std::size_t>(moduli_[a]));
    index /= static_cast<std::size_t>(moduli_[a]);
  }
  return p;
}

bool BlockSet::contains(std::span<const Coord> p) const {
  return bits_[index_of(p)] != 0;
}

std::vector<Point> BlockSet::elements() const {
  std::vector<Point> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(point_at(i));
  return out;
}

BlockSet BlockSet::translated(std::span<const Coord> v) const {
  std::vector<Point> el = elements();
  for (auto& p : el)
    for (std::size_t a = 0; a < p.size(); ++a) p[a] = mod_floor(p[a] + v[a], moduli_[a]);
  return BlockSet(moduli_, el);
}

BlockSet BlockSet::set_union(const BlockSet& o) const {
  BlockSet r = *this;
  r.count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    r.bits_[i] = bits_[i] | o.bits_[i];
    r.count_ += r.bits_[i];
  }
  return r;
}

BlockSet BlockSet::set_minus(const BlockSet& o) const {
  BlockSet r = *this;
  r.count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    r.bits_[i] = bits_[i] & !o.bits_[i];
    r.count_ += r.bits_[i];
  }
  return r;
}

BlockSet BlockSet::set_intersection(const BlockSet& o) const {
  BlockSet r = *this;
  r.count_ = 0;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    r.bits_[i] = bits_[i] & o.bits_[i];
    r.count_ += r.bits_[i];
  }
  return r;
}

Tile BlockSet::as_tile() const {
  return Tile(moduli_.size(), elements());
}

// ------------------------------------------------------ SpaceSignature

SpaceSignature::Builder& SpaceSignature::Builder::block(std::vector<Coord> moduli, TilePtr tile,
                                                        BlockSetPtr domain) {
  if (!tile || tile->dim() != moduli.size()) {
    throw Error(Errc::shape_mismatch, "block tile dimension must equal block axis count");
  }
  for (Coord m : moduli) {
    if (m < 0 || m == 1) throw Error(Errc::parameter, "cyclic moduli must be >= 2");
  }
  if (domain) {
    if (domain->moduli() != moduli) throw Error(Errc::shape_mismatch, "domain/block moduli differ");
    if (domain->empty()) throw Error(Errc::parameter, "empty block domain");
  }
  blocks_.push_back(Block{moduli_.size(), moduli.size(), std::move(tile), std::move(domain)});
  moduli_.insert(moduli_.end(), moduli.begin(), moduli.end());
  return *this;
}

SpacePtr SpaceSignature::Builder::build() && {
  auto s = std::make_shared<SpaceSignature>();
  s->moduli_ = std::move(moduli_);
  s->blocks_ = std::move(blocks_);
  return s;
}

std::vector<Coord> SpaceSignature::block_moduli(std::size_t j) const {
  const auto& b = blocks_[j];
  return {moduli_.begin() + static_cast<std::ptrdiff_t>(b.first_axis),
          moduli_.begin() + static_cast<std::ptrdiff_t>(b.first_axis + b.dim)};
}

std::size_t SpaceSignature::block_of_axis(std::size_t axis) const {
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (axis >= blocks_[j].first_axis && axis < blocks_[j].first_axis + blocks_[j].dim) return j;
  }
  throw Error(Errc::parameter, "axis out of range");
}

bool SpaceSignature::contains(std::span<const Coord> p) const {
  if (p.size() != moduli_.size()) return false;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (moduli_[a] != 0 && (p[a] < 0 || p[a] >= moduli_[a])) return false;
  }
  for (const auto& b : blocks_) {
    if (b.domain && !b.domain->contains(p.subspan(b.first_axis, b.dim))) return false;
  }
  return true;
}

Point SpaceSignature::reduce(std::span<const Coord> p) const {
  Point r(p.begin(), p.end());
  for (std::size_t a = 0; a < r.size(); ++a)
    if (moduli_[a] != 0) r[a] = mod_floor(r[a], moduli_[a]);
  return r;
}

std::vector<std::size_t> SpaceSignature::free_axes() const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < moduli_.size(); ++a)
    if (moduli_[a] == 0) out.push_back(a);
  return out;
}

SpacePtr SpaceSignature::without_block(std::size_t j) const {
  Builder b;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (i == j) continue;
    b.block(block_moduli(i), blocks_[i].tile, blocks_[i].domain);
  }
  return std::move(b).build();
}

SpacePtr SpaceSignature::with_tile(std::size_t j, TilePtr tile) const {
  auto s = std::make_shared<SpaceSignature>(*this);
  if (!tile || tile->dim() != s->blocks_[j].dim) throw Error(Errc::shape_mismatch, "tile dimension");
  s->blocks_[j].tile = std::move(tile);
  return s;
}

bool SpaceSignature::same_as(const SpaceSignature& o) const {
  if (this == &o) return true;
  if (moduli_ != o.moduli_ || blocks_.size() != o.blocks_.size()) return false;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    const auto& a = blocks_[j];
    const auto& b = o.blocks_[j];
    if (a.first_axis != b.first_axis || a.dim != b.dim) return false;
    if (a.tile != b.tile && !(*a.tile == *b.tile)) return false;
    if (static_cast<bool>(a.domain) != static_cast<bool>(b.domain)) return false;
    if (a.domain && a.domain != b.domain && !(*a.domain == *b.domain)) return false;
  }
  return true;
}

json space_to_json(const SpaceSignature& s) {
  json axes = json::array();
  for (Coord m : s.moduli()) {
    axes.push_back(json{{"mod", m == 0 ? json(nullptr) : json(m)}});
  }
  json blocks = json::array();
  for (const auto& b : s.blocks()) {
    json jb{{"from", b.first_axis}, {"to", b.first_axis + b.dim}, {"tile", tile_to_json(*b.tile)}};
    if (b.domain) jb["domain"] = tile_to_json(b.domain->as_tile());
    blocks.push_back(std::move(jb));
  }
  return json{{"axes", std::move(axes)}, {"blocks", std::move(blocks)}};
}

SpacePtr space_from_json(const json& j) {
  try {
    std::vector<Coord> moduli;
    for (const auto& a : j.at("axes")) {
      const auto& m = a.at("mod");
      moduli.push_back(m.is_null() ? 0 : m.get<Coord>());
    }
    SpaceSignature::Builder b;
    std::size_t expect = 0;
    for (const auto& jb : j.at("blocks")) {
      auto from = jb.at("from").get<std::size_t>();
      auto to = jb.at("to").get<std::size_t>();
      if (from != expect || to <= from || to > moduli.size()) {
        throw Error(Errc::malformed, "block boundaries must cover all axes exactly once");
      }
      std::vector<Coord> bm(moduli.begin() + static_cast<std::ptrdiff_t>(from),
                            moduli.begin() + static_cast<std::ptrdiff_t>(to));
      auto tile = std::make_shared<const Tile>(tile_from_json(jb.at("tile")));
      BlockSetPtr dom;
      if (jb.contains("domain")) {
        dom = std::make_shared<const BlockSet>(bm, tile_from_json(jb.at("domain")).points());
      }
      b.block(std::move(bm), std::move(tile), std::move(dom));
      expect = to;
    }
    if (expect != moduli.size()) throw Error(Errc::malformed, "blocks do not cover all axes");
    return std::move(b).build();
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("space signature: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::malformed) throw;
    throw Error(Errc::malformed, std::string("space signature: ") + e.what());
  }
}

// ----------------------------------------------------------- Placement

std::vector<Point> cover(const Placement& pl, const SpaceSignature& sig) {
  const auto& b = sig.block(pl.block);
  std::vector<Point> out;
  out.reserve(b.tile->size());
  for (const auto& t : b.tile->points()) {
    Point q = pl.offset;
    for (std::size_t a = 0; a < b.dim; ++a) {
      std::size_t ax = b.first_axis + a;
      q[ax] += t[a];
      if (sig.modulus(ax) != 0) q[ax] = mod_floor(q[ax], sig.modulus(ax));
    }
    out.push_back(std::move(q));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool cover_contains(const Placement& pl, const SpaceSignature& sig, std::span<const Coord> p) {
  if (p.size() != pl.offset.size()) return false;
  const auto& b = sig.block(pl.block);
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (a >= b.first_axis && a < b.first_axis + b.dim) continue;
    Coord m = sig.modulus(a);
    if (m != 0 ? mod_floor(p[a] - pl.offset[a], m) != 0 : p[a] != pl.offset[a]) return false;
  }
  for (const auto& t : b.tile->points()) {
    bool hit = true;
    for (std::size_t a = 0; a < b.dim && hit; ++a) {
      std::size_t ax = b.first_axis + a;
      Coord m = sig.modulus(ax);
      Coord diff = p[ax] - pl.offset[ax] - t[a];
      hit = m != 0 ? mod_floor(diff, m) == 0 : diff == 0;
    }
    if (hit) return true;
  }
  return false;
}

bool placement_is_proper(const Placement& pl, const SpaceSignature& sig) {
  return cover(pl, sig).size() == sig.block(pl.block).tile->size();
}

json placement_to_json(const Placement& pl) {
  return json{{"block", pl.block}, {"offset", pl.offset}};
}

Placement placement_from_json(const json& j) {
  try {
    return Placement{j.at("block").get<std::size_t>(), j.at("offset").get<Point>()};
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("placement: ") + e.what());
  }
}

// ---------------------------------------------------------- Projection

Point Projection::apply(std::span<const Coord> p) const {
  Point r(p.begin(), p.end());
  for (std::size_t a = 0; a < r.size(); ++a)
    if (moduli[a] != 0) r[a] = mod_floor(r[a], moduli[a]);
  return r;
}

bool Projection::is_identity() const {
  return std::all_of(moduli.begin(), moduli.end(), [](Coord m) { return m == 0; });
}

ProjectedTile project_tile(const Tile& t, const Projection& p) {
  if (p.moduli.size() != t.dim()) throw Error(Errc::shape_mismatch, "projection/tile dimension");
  std::vector<Point> img;
  for (const auto& q : t.points()) img.push_back(p.apply(q));
  std::sort(img.begin(), img.end());
  img.erase(std::unique(img.begin(), img.end()), img.end());
  bool inj = img.size() == t.size();
  return ProjectedTile{Tile(t.dim(), std::move(img)), inj};
}

}  // namespace tilesmith
