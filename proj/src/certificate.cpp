#include "tilesmith/certificate.hpp"

#include <set>

#include "tilesmith/general.hpp"

namespace tilesmith {

namespace {

class Writer final : public DagWriter {
 public:
  std::size_t node(const NodePtr& n) override {
    if (auto it = nodes_.find(n.get()); it != nodes_.end()) return it->second;
    json params = n->params(*this);  // children get their ids first
    std::size_t id = list_.size();
    list_.push_back(json{{"id", id},
                         {"kind", node_kind_name(n->kind())},
                         {"space", space(n->space_ptr())},
                         {"params", std::move(params)}});
    nodes_.emplace(n.get(), id);
    return id;
  }
  std::size_t space(const SpacePtr& s) override {
    if (auto it = space_ptrs_.find(s.get()); it != space_ptrs_.end()) return it->second;
    json j = space_to_json(*s);
    std::string key = j.dump();
    auto [it, fresh] = space_keys_.emplace(key, spaces_.size());
    if (fresh) spaces_.push_back(std::move(j));
    space_ptrs_.emplace(s.get(), it->second);
    return it->second;
  }
  std::size_t set(const BlockSetPtr& s) override {
    if (auto it = set_ptrs_.find(s.get()); it != set_ptrs_.end()) return it->second;
    json j{{"moduli", s->moduli()}, {"elements", s->elements()}};
    std::string key = j.dump();
    auto [it, fresh] = set_keys_.emplace(key, sets_.size());
    if (fresh) sets_.push_back(std::move(j));
    set_ptrs_.emplace(s.get(), it->second);
    return it->second;
  }

  json finish(std::size_t root) {
    return json{{"root", root}, {"nodes", std::move(list_)}, {"spaces", std::move(spaces_)},
                {"sets", std::move(sets_)}};
  }

 private:
  std::unordered_map<const Node*, std::size_t> nodes_;
  json list_ = json::array();
  std::unordered_map<const SpaceSignature*, std::size_t> space_ptrs_;
  std::map<std::string, std::size_t> space_keys_;
  json spaces_ = json::array();
  std::unordered_map<const BlockSet*, std::size_t> set_ptrs_;
  std::map<std::string, std::size_t> set_keys_;
  json sets_ = json::array();
};

class Reader final : public DagReader {
 public:
  explicit Reader(const json& j) : j_(j) {
    spaces_.resize(j.at("spaces").size());
    sets_.resize(j.at("sets").size());
  }
  NodePtr node(std::size_t id) override {
    if (id >= built_.size() || !built_[id]) throw Error(Errc::malformed, "node refers to a later or unknown node");
    return built_[id];
  }
  SpacePtr space(std::size_t id) override {
    if (id >= spaces_.size()) throw Error(Errc::malformed, "unknown space id");
    if (!spaces_[id]) spaces_[id] = space_from_json(j_.at("spaces").at(id));
    return spaces_[id];
  }
  BlockSetPtr set(std::size_t id) override {
    if (id >= sets_.size()) throw Error(Errc::malformed, "unknown set id");
    if (!sets_[id]) {
      const auto& s = j_.at("sets").at(id);
      sets_[id] = std::make_shared<const BlockSet>(s.at("moduli").get<std::vector<Coord>>(),
                                                   s.at("elements").get<std::vector<Point>>());
    }
    return sets_[id];
  }

  NodePtr build() {
    const auto& nodes = j_.at("nodes");
    built_.assign(nodes.size(), nullptr);
    for (std::size_t id = 0; id < nodes.size(); ++id) {
      const auto& n = nodes[id];
      if (n.at("id").get<std::size_t>() != id) throw Error(Errc::malformed, "node ids must be sequential");
      built_[id] = load(node_kind_from_name(n.at("kind").get<std::string>()), space(n.at("space").get<std::size_t>()),
                        n.at("params"));
    }
    return node(j_.at("root").get<std::size_t>());
  }

 private:
  NodePtr child(const json& v) { return v.is_null() ? nullptr : node(v.get<std::size_t>()); }

  std::vector<NodePtr> child_list(const json& arr) {
    std::vector<NodePtr> out;
    for (const auto& v : arr) out.push_back(child(v));
    return out;
  }

  static std::vector<Placement> placements(const json& arr) {
    std::vector<Placement> out;
    for (const auto& p : arr) out.push_back(placement_from_json(p));
    return out;
  }

  NodePtr load(NodeKind kind, const SpacePtr& space, const json& p) {
    NodePtr n;
    switch (kind) {
      case NodeKind::explicit_list:
        n = make_explicit(space, placements(p.at("placements")), p.at("period").get<std::vector<Coord>>());
        break;
      case NodeKind::slice:
        n = make_slice(space, p.at("block").get<std::size_t>(), p.at("key").get<std::vector<Coord>>(),
                       child_list(p.at("children")));
        break;
      case NodeKind::embed:
        n = make_embed(child(p.at("child")), p.at("perm").get<std::vector<std::size_t>>(),
                       p.at("offset").get<Point>());
        break;
      case NodeKind::disjoint_union:
        n = make_union(child_list(p.at("children")));
        break;
      case NodeKind::product: {
        std::vector<BlockSetPtr> sets;
        for (const auto& s : p.at("sets")) sets.push_back(s.is_null() ? nullptr : set(s.get<std::size_t>()));
        n = make_product(space, p.at("block").get<std::size_t>(), p.at("offset").get<Point>(), std::move(sets));
        break;
      }
      case NodeKind::mask:
        n = make_mask(child(p.at("child")), placements(p.at("excluded")));
        break;
      case NodeKind::compose: {
        std::vector<LayoutEntry> layout;
        for (const auto& e : p.at("layout")) layout.push_back({e.at(0).get<int>(), e.at(1).get<std::size_t>()});
        n = compose(child(p.at("outer")), child(p.at("inner")),
                    p.at("designated").get<std::vector<std::size_t>>(), std::move(layout));
        break;
      }
      case NodeKind::lift: {
        auto c = child(p.at("child"));
        auto flags = p.at("lifted").get<std::vector<bool>>();
        if (flags.size() != space->block_count() || c->space().axis_count() != space->axis_count())
          throw Error(Errc::malformed, "lift: shape differs from its child");
        Projection proj{std::vector<Coord>(space->axis_count(), 0)};
        std::vector<TilePtr> tiles(space->block_count());
        for (std::size_t j = 0; j < flags.size(); ++j) {
          tiles[j] = space->block(j).tile;
          if (!flags[j]) continue;
          const auto& b = space->block(j);
          for (std::size_t a = b.first_axis; a < b.first_axis + b.dim; ++a) proj.moduli[a] = c->space().modulus(a);
        }
        n = lift(c, proj, tiles);
        break;
      }
      case NodeKind::blueprint:
      case NodeKind::coverholes:
        n = load_general_node(kind, space, p);
        break;
    }
    if (!n || !n->space().same_as(*space)) throw Error(Errc::malformed, "node does not rebuild to its declared space");
    return n;
  }

  const json& j_;
  std::vector<SpacePtr> spaces_;
  std::vector<BlockSetPtr> sets_;
  std::vector<NodePtr> built_;
};

}  // namespace

json dag_to_json(const NodePtr& root) {
  Writer w;
  std::size_t id = w.node(root);
  return w.finish(id);
}

NodePtr dag_from_json(const json& j) {
  try {
    Reader r(j);
    return r.build();
  } catch (const Error& e) {
    throw Error(Errc::malformed, std::string("construction payload: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("construction payload: ") + e.what());
  }
}

std::vector<Coord> full_period(const SpaceSignature& s, const std::vector<Coord>& free_period) {
  std::vector<Coord> out(s.axis_count());
  std::size_t f = 0;
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (!s.is_free(a)) {
      out[a] = s.modulus(a);
    } else {
      if (f >= free_period.size()) throw Error(Errc::malformed, "period list shorter than the free axes");
      out[a] = free_period[f++];
    }
  }
  if (f != free_period.size()) throw Error(Errc::malformed, "period list longer than the free axes");
  return out;
}

json certificate_to_json(const Certificate& c) {
  json tiles = json::array();
  std::set<std::string> seen;
  for (const auto& b : c.space->blocks()) {
    json t = tile_to_json(*b.tile);
    if (seen.insert(t.dump()).second) tiles.push_back(std::move(t));
  }
  json payload;
  if (c.mode == "explicit-periodic") {
    json pl = json::array();
    for (const auto& p : c.placements) pl.push_back(placement_to_json(p));
    payload = json{{"placements", std::move(pl)}};
  } else {
    payload = dag_to_json(c.root);
  }
  return json{{"space", space_to_json(*c.space)}, {"tiles", std::move(tiles)}, {"period", c.period},
              {"mode", c.mode},                    {"payload", std::move(payload)}, {"meta", c.meta}};
}

Certificate certificate_from_json(const json& j) {
  Certificate c;
  try {
    c.space = space_from_json(j.at("space"));
    c.period = j.at("period").get<std::vector<Coord>>();
    full_period(*c.space, c.period);
    c.mode = j.at("mode").get<std::string>();
    c.meta = j.value("meta", json::object());
    const auto& payload = j.at("payload");
    if (c.mode == "explicit-periodic") {
      for (const auto& p : payload.at("placements")) c.placements.push_back(placement_from_json(p));
      for (Coord p : c.period)
        if (p <= 0) throw Error(Errc::malformed, "explicit certificate needs a positive period on every free axis");
    } else if (c.mode == "construction") {
      c.root = dag_from_json(payload);
      if (!c.root->space().same_as(*c.space)) throw Error(Errc::malformed, "construction root space differs");
    } else {
      throw Error(Errc::malformed, "unknown certificate mode '" + c.mode + "'");
    }
  } catch (const Error& e) {
    if (e.code() == Errc::malformed) throw;
    throw Error(Errc::malformed, e.what());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed, std::string("certificate: ") + e.what());
  }
  return c;
}

Certificate make_certificate(const NodePtr& root, json meta, std::uint64_t limit) {
  Certificate c;
  c.space = root->space_ptr();
  for (auto a : c.space->free_axes()) c.period.push_back(root->period()[a]);
  c.meta = std::move(meta);
  bool fits = root->periodic() && box_volume(domain_box(*c.space, root->period())) <= limit;
  if (fits) {
    c.mode = "explicit-periodic";
    c.placements = materialize(*root, limit);
  } else {
    c.mode = "construction";
    c.root = root;
  }
  return c;
}

NodePtr certificate_node(const Certificate& c) {
  if (c.mode == "construction") return c.root;
  return make_explicit(c.space, c.placements, full_period(*c.space, c.period));
}

VerifyReport verify_certificate(const Certificate& c, const VerifyOptions& opt) {
  auto per = full_period(*c.space, c.period);
  bool periodic = true;
  for (auto a : c.space->free_axes()) periodic = periodic && per[a] > 0;
  std::string mode = opt.mode;
  if (mode == "auto") {
    mode = periodic && box_volume(domain_box(*c.space, per)) <= opt.limit ? "exhaustive" : "sampled";
  }
  if (mode == "exhaustive") {
    if (c.mode == "explicit-periodic") return verify_exhaustive(*c.space, c.placements, per, {}, opt.limit);
    return verify_exhaustive(*c.root, {}, opt.limit);
  }
  if (mode != "sampled") throw Error(Errc::parameter, "verification mode must be auto, exhaustive or sampled");
  SampleOptions so;
  so.samples = opt.samples;
  so.seed = opt.seed;
  so.threads = opt.threads;
  return verify_sampled(*certificate_node(c), so);
}

}  // namespace tilesmith
