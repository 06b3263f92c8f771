#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdsp/core.hpp"
#include "rdsp/geo.hpp"

namespace rdsp {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Physical layer knobs. A transmission reaches exactly the active nodes
// within range_m (disk model); concurrent in-range transmissions destroy
// each other at the receiver when loss_on_collision holds.
struct RadioModel {
  double range_m = 90.0;
  double bitrate_bps = 1'000'000.0;
  double per_hop_proc_s = 0.002;
  double proc_jitter_s = 0.0;  // extra per-hop latency, U[0, this]
  double csma_max_backoff_s = 0.010;
  bool loss_on_collision = true;
};

inline double airtime_s(const RadioModel& radio, std::size_t size_bytes) {
  return static_cast<double>(size_bytes) * 8.0 / radio.bitrate_bps;
}

struct NodeSpec {
  NodeId id;
  std::string label;
  Role role = Role::Relay;
  GeoPosition position;
};

struct NamedPath {
  std::string name;
  std::vector<NodeId> relays;  // client-adjacent first, server-adjacent last
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::vector<NodeSpec> nodes;
  RadioModel radio;
  MessageSizeModel sizes;
  double hello_interval_s = 2.0;   // relay beacon period
  double advert_interval_s = 1.0;  // table broadcast period
  double timer_jitter_s = 0.005;   // per-round control timer jitter
  double duration_s = 550.0;
  int request_count = 100;
  double press_window_s = 500.0;
  int repeats = 5;
  std::vector<NamedPath> paths;
  std::optional<std::string> active_path;

  const NodeSpec* find(NodeId id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
  const NodeSpec* server() const {
    for (const auto& n : nodes)
      if (n.role == Role::Server) return &n;
    return nullptr;
  }
  std::vector<const NodeSpec*> clients() const {
    std::vector<const NodeSpec*> out;
    for (const auto& n : nodes)
      if (n.role == Role::Client) out.push_back(&n);
    return out;
  }
  const NamedPath* path(const std::string& path_name) const {
    for (const auto& p : paths)
      if (p.name == path_name) return &p;
    return nullptr;
  }
  std::map<NodeId, std::string> labels() const {
    std::map<NodeId, std::string> out;
    for (const auto& n : nodes) out[n.id] = n.label;
    return out;
  }
};

inline bool in_range(const ScenarioConfig& cfg, const NodeSpec& a,
                     const NodeSpec& b) {
  return haversine_distance(a.position, b.position) <= cfg.radio.range_m;
}

// Structural checks shared by the loader and the built-ins. Client-less
// configs are permitted (they produce hello-only traces).
inline void validate(const ScenarioConfig& cfg) {
  if (cfg.nodes.empty()) throw ScenarioError("scenario has no nodes");
  int servers = 0;
  std::set<std::uint32_t> ids;
  std::set<std::string> labels;
  for (const auto& n : cfg.nodes) {
    if (!ids.insert(n.id.value).second)
      throw ScenarioError("duplicate NodeId " + std::to_string(n.id.value));
    if (!labels.insert(n.label).second)
      throw ScenarioError("duplicate node label " + n.label);
    if (!is_valid(n.position))
      throw ScenarioError("node " + n.label + " has an invalid position");
    if (n.role == Role::Server) ++servers;
  }
  if (servers == 0) throw ScenarioError("zero servers");
  if (servers > 1) throw ScenarioError("more than one server");
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.nodes.size(); ++j)
      if (cfg.nodes[i].position == cfg.nodes[j].position)
        throw ScenarioError("nodes " + cfg.nodes[i].label + " and " +
                            cfg.nodes[j].label + " share a position");
  if (cfg.radio.range_m <= 0 || cfg.radio.bitrate_bps <= 0 ||
      cfg.radio.per_hop_proc_s < 0 || cfg.radio.proc_jitter_s < 0 ||
      cfg.radio.csma_max_backoff_s <= 0)
    throw ScenarioError("radio parameters out of range");
  if (cfg.duration_s <= 0 || cfg.request_count < 0 ||
      cfg.press_window_s <= 0 || cfg.press_window_s > cfg.duration_s)
    throw ScenarioError("run parameters out of range");
  if (cfg.hello_interval_s <= 0 || cfg.advert_interval_s <= 0 ||
      cfg.timer_jitter_s < 0)
    throw ScenarioError("timer parameters out of range");

  for (const auto* client : cfg.clients()) {
    bool connected = false;
    for (const auto& n : cfg.nodes) {
      if (n.id == client->id) continue;
      if ((n.role == Role::Relay || n.role == Role::Server) &&
          in_range(cfg, *client, n)) {
        connected = true;
        break;
      }
    }
    if (!connected) throw ScenarioError("disconnected client " + client->label);
  }

  const NodeSpec* server = cfg.server();
  std::set<std::string> path_names;
  for (const auto& p : cfg.paths) {
    if (!path_names.insert(p.name).second)
      throw ScenarioError("duplicate path name " + p.name);
    if (p.relays.empty())
      throw ScenarioError("path " + p.name + " has no relays");
    for (NodeId r : p.relays) {
      const NodeSpec* n = cfg.find(r);
      if (!n)
        throw ScenarioError("path " + p.name + " references unknown node " +
                            std::to_string(r.value));
      if (n->role != Role::Relay)
        throw ScenarioError("path " + p.name + " includes non-relay " +
                            n->label);
    }
    const NodeSpec* first = cfg.find(p.relays.front());
    const NodeSpec* last = cfg.find(p.relays.back());
    bool head_ok = false;
    for (const auto* client : cfg.clients())
      if (in_range(cfg, *client, *first)) head_ok = true;
    if (!head_ok)
      throw ScenarioError("path " + p.name +
                          " does not start adjacent to a client");
    if (!in_range(cfg, *last, *server))
      throw ScenarioError("path " + p.name +
                          " does not end adjacent to the server");
  }
  if (cfg.active_path && !cfg.path(*cfg.active_path))
    throw ScenarioError("active path " + *cfg.active_path + " is not defined");
}

// Sum of per-hop great-circle distances client -> relays -> server.
inline double path_distance(const ScenarioConfig& cfg,
                            const std::string& path_name) {
  const NamedPath* p = cfg.path(path_name);
  if (!p) throw ScenarioError("unknown path " + path_name);
  const NodeSpec* server = cfg.server();
  if (!server) throw ScenarioError("scenario has no server");
  const NodeSpec* first = cfg.find(p->relays.front());
  const NodeSpec* client = nullptr;
  double best = 0.0;
  for (const auto* c : cfg.clients()) {
    double d = haversine_distance(c->position, first->position);
    if (!client || d < best) {
      client = c;
      best = d;
    }
  }
  if (!client) throw ScenarioError("path distance needs a client");
  double total = best;
  for (std::size_t i = 0; i + 1 < p->relays.size(); ++i)
    total += haversine_distance(cfg.find(p->relays[i])->position,
                                cfg.find(p->relays[i + 1])->position);
  total += haversine_distance(cfg.find(p->relays.back())->position,
                              server->position);
  return total;
}

// Keep the endpoints plus one path's relays; used for per-path campaigns.
inline ScenarioConfig restrict_to_path(const ScenarioConfig& cfg,
                                       const std::string& path_name) {
  const NamedPath* p = cfg.path(path_name);
  if (!p) throw ScenarioError("unknown path " + path_name);
  ScenarioConfig out = cfg;
  out.nodes.clear();
  std::set<std::uint32_t> keep;
  for (NodeId r : p->relays) keep.insert(r.value);
  for (const auto& n : cfg.nodes)
    if (n.role != Role::Relay || keep.contains(n.id.value))
      out.nodes.push_back(n);
  out.paths = {*p};
  out.active_path = path_name;
  validate(out);
  return out;
}

namespace detail {

struct PlanarBuilder {
  GeoPosition anchor;
  std::vector<std::pair<double, double>> pts;  // x east, y north (meters)

  GeoPosition at(double x, double y) const {
    return local_offset(anchor, x, y);
  }
};

inline std::pair<double, double> lerp(std::pair<double, double> a,
                                      std::pair<double, double> b, double t) {
  return {a.first + t * (b.first - a.first),
          a.second + t * (b.second - a.second)};
}

inline double planar_dist(std::pair<double, double> a,
                          std::pair<double, double> b) {
  return std::hypot(a.first - b.first, a.second - b.second);
}

// Points at given cumulative arc lengths along a planar polyline.
inline std::vector<std::pair<double, double>> walk_polyline(
    const std::vector<std::pair<double, double>>& poly,
    const std::vector<double>& marks) {
  std::vector<std::pair<double, double>> out;
  for (double s : marks) {
    double acc = 0.0;
    bool placed = false;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      const double len = planar_dist(poly[i], poly[i + 1]);
      if (s <= acc + len + 1e-9) {
        out.push_back(lerp(poly[i], poly[i + 1], (s - acc) / len));
        placed = true;
        break;
      }
      acc += len;
    }
    if (!placed) out.push_back(poly.back());
  }
  return out;
}

}  // namespace detail

// Single straight chain: server, n relays at even spacing, client at the
// far end. Used for overhead smoke runs and protocol experiments.
inline ScenarioConfig builtin_chain(int relay_count, double spacing_m = 88.0) {
  if (relay_count < 1) throw ScenarioError("chain needs at least one relay");
  ScenarioConfig cfg;
  cfg.name = "chain" + std::to_string(relay_count);
  const GeoPosition anchor{33.76, 72.36};
  auto add = [&](NodeId id, std::string label, Role role, double east_m) {
    cfg.nodes.push_back(
        NodeSpec{id, std::move(label), role, local_offset(anchor, east_m, 0)});
  };
  add(NodeId{0}, "S", Role::Server, 0.0);
  add(NodeId{1}, "C", Role::Client, spacing_m * (relay_count + 1));
  NamedPath path{"chain", {}};
  for (int k = 1; k <= relay_count; ++k) {
    NodeId id{static_cast<std::uint32_t>(1 + k)};
    add(id, "r" + std::to_string(k), Role::Relay, spacing_m * k);
    path.relays.push_back(id);
  }
  // client-adjacent relay first
  std::reverse(path.relays.begin(), path.relays.end());
  cfg.paths.push_back(std::move(path));
  cfg.active_path = "chain";
  validate(cfg);
  return cfg;
}

// Two routes between one client and one server: a 3-relay straight branch
// and an 8-relay branch laid on a circular arc, with no cross-branch radio
// adjacency. Converged dynamic IDs are 3,2,1 and 8..1 outward from the
// server, so the client hears min 3 and max 8.
inline ScenarioConfig builtin_twobranch() {
  ScenarioConfig cfg;
  cfg.name = "twobranch";
  cfg.duration_s = 90.0;
  cfg.request_count = 1;
  cfg.press_window_s = 60.0;

  const GeoPosition anchor{33.76, 72.36};
  const double spacing = 88.0;
  const double chord = 4 * spacing;  // C to S
  const double arc = 9 * spacing;    // long branch length

  // Solve sin(x)/x = chord/arc for the half-angle of the arc.
  double x = 2.0;
  for (int i = 0; i < 60; ++i) {
    const double f = std::sin(x) / x - chord / arc;
    const double df = (std::cos(x) * x - std::sin(x)) / (x * x);
    x -= f / df;
  }
  const double radius = arc / (2 * x);
  const double cx = chord / 2;
  const double cy = -radius * std::cos(x);
  const double a0 = std::atan2(-cy, -cx);

  auto add = [&](NodeId id, std::string label, Role role, double ex,
                 double ny) {
    cfg.nodes.push_back(
        NodeSpec{id, std::move(label), role, local_offset(anchor, ex, ny)});
  };
  add(NodeId{0}, "S", Role::Server, chord, 0.0);
  add(NodeId{1}, "C", Role::Client, 0.0, 0.0);
  NamedPath short_path{"short", {}};
  for (int k = 1; k <= 3; ++k) {
    NodeId id{static_cast<std::uint32_t>(1 + k)};
    add(id, "a" + std::to_string(k), Role::Relay, spacing * k, 0.0);
    short_path.relays.push_back(id);
  }
  NamedPath long_path{"long", {}};
  for (int k = 1; k <= 8; ++k) {
    // sweep the major arc from C toward S
    const double ang = a0 - (2 * x) * (static_cast<double>(k) / 9.0);
    NodeId id{static_cast<std::uint32_t>(4 + k)};
    add(id, "b" + std::to_string(k), Role::Relay,
        cx + radius * std::cos(ang), cy + radius * std::sin(ang));
    long_path.relays.push_back(id);
  }
  cfg.paths.push_back(std::move(short_path));
  cfg.paths.push_back(std::move(long_path));
  validate(cfg);
  return cfg;
}

// Campus deployment: one client, one server, 23 relays on four routes.
// Paths 1 and 2 share a three-relay trunk between waypoints Z and S.
// Surveyed waypoint edges: CY 358, YZ 90, ZS 268, CZ 352, CX 352, XS 441,
// CS 582 (meters). Per-path hop spacing is chosen so hop sums land on the
// surveyed route lengths; the longest hop (97 m, path 3) sets the 97.5 m
// radio range.
inline ScenarioConfig builtin_campus() {
  ScenarioConfig cfg;
  cfg.name = "campus";
  cfg.radio.range_m = 97.5;
  // Channel constants calibrated against the field measurements this
  // deployment reproduces (see README, "Calibration"). The long timer
  // jitter keeps periodic control traffic from phase-locking with the
  // five-second request cadence.
  cfg.radio.bitrate_bps = 112'000.0;
  cfg.radio.per_hop_proc_s = 0.003;
  cfg.radio.proc_jitter_s = 0.008;
  cfg.radio.csma_max_backoff_s = 0.100;
  cfg.timer_jitter_s = 0.5;

  using P = std::pair<double, double>;
  const P c{0.0, 0.0};
  const P z{352.0, 0.0};
  const double yx = (352.0 * 352.0 + 358.0 * 358.0 - 90.0 * 90.0) / 704.0;
  const P y{yx, std::sqrt(358.0 * 358.0 - yx * yx)};
  const double sx = (352.0 * 352.0 + 582.0 * 582.0 - 268.0 * 268.0) / 704.0;
  const P s{sx, -std::sqrt(582.0 * 582.0 - sx * sx)};
  const double cs = std::hypot(s.first, s.second);
  const double cos_a =
      (352.0 * 352.0 + cs * cs - 441.0 * 441.0) / (2.0 * 352.0 * cs);
  const double sin_a = std::sqrt(1.0 - cos_a * cos_a);
  const P u{s.first / cs, s.second / cs};
  // X sits on the opposite side of the C-S line from Y.
  const P xw{352.0 * (u.first * cos_a + u.second * sin_a),
             352.0 * (-u.first * sin_a + u.second * cos_a)};

  const GeoPosition anchor{33.76, 72.36};
  detail::PlanarBuilder plane{anchor, {}};

  auto add = [&](NodeId id, std::string label, Role role, P pt) {
    cfg.nodes.push_back(NodeSpec{id, std::move(label), role,
                                 plane.at(pt.first, pt.second)});
  };
  add(NodeId{0}, "S", Role::Server, s);
  add(NodeId{1}, "C", Role::Client, c);

  std::uint32_t next_id = 2;
  auto add_relays = [&](const std::string& prefix,
                        const std::vector<P>& pts) {
    std::vector<NodeId> ids;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      NodeId id{next_id++};
      add(id, prefix + std::to_string(k + 1), Role::Relay, pts[k]);
      ids.push_back(id);
    }
    return ids;
  };

  // Path 1 approach along C->Y->Z, then the shared trunk.
  auto p1_own = add_relays(
      "p1r", detail::walk_polyline({c, y, z}, {89.6, 179.2, 268.8, 358.4}));
  auto trunk = add_relays(
      "t", detail::walk_polyline({z, s}, {0.0, 268.0 / 3, 2 * 268.0 / 3}));
  auto p2_own = add_relays(
      "p2r", detail::walk_polyline({c, z}, {88.0, 176.0, 264.0}));
  auto p3 = add_relays(
      "p3r", detail::walk_polyline({c, s}, {97.0, 194.0, 291.0, 388.0, 485.0}));
  std::vector<double> p4_marks;
  for (int k = 1; k <= 8; ++k) p4_marks.push_back(793.0 / 9 * k);
  auto p4 = add_relays("p4r", detail::walk_polyline({c, xw, s}, p4_marks));

  auto join = [](std::vector<NodeId> a, const std::vector<NodeId>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  cfg.paths.push_back(NamedPath{"path-1", join(p1_own, trunk)});
  cfg.paths.push_back(NamedPath{"path-2", join(p2_own, trunk)});
  cfg.paths.push_back(NamedPath{"path-3", p3});
  cfg.paths.push_back(NamedPath{"path-4", p4});
  validate(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Line-oriented scenario file format: [scenario]/[radio]/[sizes] key-value
// sections plus repeated [node] and [path] sections, # comments, UTF-8.

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ParseCursor {
  std::string source;
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ScenarioError(source + ":" + std::to_string(line) + ": " + msg);
  }
  double number(const std::string& v) const {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) fail("malformed number '" + v + "'");
      return d;
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception&) {
      fail("malformed number '" + v + "'");
    }
  }
  bool boolean(const std::string& v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("expected true/false, got '" + v + "'");
  }
};

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text,
                                     const std::string& source = "scenario") {
  ScenarioConfig cfg;
  cfg.name = source;
  detail::ParseCursor at{source, 0};

  enum class Section { None, Scenario, Radio, Sizes, Node, Path };
  Section section = Section::None;
  std::optional<NodeSpec> node;
  bool node_has_id = false, node_has_lat = false, node_has_lon = false;
  std::optional<NamedPath> path;
  std::set<std::uint32_t> seen_ids;

  auto flush_node = [&]() {
    if (!node) return;
    if (!node_has_id) at.fail("node section missing id");
    if (node->label.empty()) node->label = "n" + std::to_string(node->id.value);
    if (!node_has_lat || !node_has_lon)
      at.fail("node " + node->label + " missing lat/lon");
    if (!seen_ids.insert(node->id.value).second)
      at.fail("duplicate NodeId " + std::to_string(node->id.value));
    cfg.nodes.push_back(*node);
    node.reset();
  };
  auto flush_path = [&]() {
    if (!path) return;
    if (path->name.empty()) at.fail("path section missing name");
    cfg.paths.push_back(*path);
    path.reset();
  };

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++at.line;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      flush_node();
      flush_path();
      const std::string name = line.substr(1, line.size() - 2);
      if (name == "scenario") section = Section::Scenario;
      else if (name == "radio") section = Section::Radio;
      else if (name == "sizes") section = Section::Sizes;
      else if (name == "node") {
        section = Section::Node;
        node = NodeSpec{};
        node_has_id = node_has_lat = node_has_lon = false;
      } else if (name == "path") {
        section = Section::Path;
        path = NamedPath{};
      } else {
        at.fail("unknown section [" + name + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");

    switch (section) {
      case Section::None:
        at.fail("key outside of any section");
      case Section::Scenario:
        if (key == "name") cfg.name = value;
        else if (key == "duration_s") cfg.duration_s = at.number(value);
        else if (key == "request_count")
          cfg.request_count = static_cast<int>(at.number(value));
        else if (key == "press_window_s") cfg.press_window_s = at.number(value);
        else if (key == "hello_interval_s")
          cfg.hello_interval_s = at.number(value);
        else if (key == "advert_interval_s")
          cfg.advert_interval_s = at.number(value);
        else if (key == "timer_jitter_s") cfg.timer_jitter_s = at.number(value);
        else if (key == "repeats") cfg.repeats = static_cast<int>(at.number(value));
        else at.fail("unknown scenario key '" + key + "'");
        break;
      case Section::Radio:
        if (key == "range_m") cfg.radio.range_m = at.number(value);
        else if (key == "bitrate_bps") cfg.radio.bitrate_bps = at.number(value);
        else if (key == "per_hop_proc_s")
          cfg.radio.per_hop_proc_s = at.number(value);
        else if (key == "proc_jitter_s")
          cfg.radio.proc_jitter_s = at.number(value);
        else if (key == "csma_max_backoff_s")
          cfg.radio.csma_max_backoff_s = at.number(value);
        else if (key == "loss_on_collision")
          cfg.radio.loss_on_collision = at.boolean(value);
        else at.fail("unknown radio key '" + key + "'");
        break;
      case Section::Sizes:
        if (key == "hello_bytes")
          cfg.sizes.hello_bytes = static_cast<std::size_t>(at.number(value));
        else if (key == "request_bytes")
          cfg.sizes.request_bytes = static_cast<std::size_t>(at.number(value));
        else if (key == "ack_bytes")
          cfg.sizes.ack_bytes = static_cast<std::size_t>(at.number(value));
        else if (key == "advert_base_bytes")
          cfg.sizes.advert_base_bytes =
              static_cast<std::size_t>(at.number(value));
        else if (key == "advert_entry_bytes")
          cfg.sizes.advert_entry_bytes =
              static_cast<std::size_t>(at.number(value));
        else at.fail("unknown sizes key '" + key + "'");
        break;
      case Section::Node:
        if (key == "id") {
          const double v = at.number(value);
          if (v < 0 || v != std::floor(v)) at.fail("node id must be a non-negative integer");
          node->id = NodeId{static_cast<std::uint32_t>(v)};
          node_has_id = true;
        } else if (key == "label") {
          node->label = value;
        } else if (key == "role") {
          if (value == "client") node->role = Role::Client;
          else if (value == "relay") node->role = Role::Relay;
          else if (value == "server") node->role = Role::Server;
          else at.fail("unknown role '" + value + "'");
        } else if (key == "lat") {
          node->position.latitude_deg = at.number(value);
          node_has_lat = true;
        } else if (key == "lon") {
          node->position.longitude_deg = at.number(value);
          node_has_lon = true;
        } else {
          at.fail("unknown node key '" + key + "'");
        }
        break;
      case Section::Path:
        if (key == "name") {
          path->name = value;
        } else if (key == "relays") {
          std::string item;
          std::istringstream vs(value);
          while (std::getline(vs, item, ',')) {
            std::istringstream ws(item);
            std::string tok;
            while (ws >> tok)
              path->relays.push_back(
                  NodeId{static_cast<std::uint32_t>(at.number(tok))});
          }
        } else {
          at.fail("unknown path key '" + key + "'");
        }
        break;
    }
  }
  flush_node();
  flush_path();
  validate(cfg);
  return cfg;
}

inline ScenarioConfig load_scenario(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + file_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), file_path);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// Inverse of parse_scenario; numbers keep full precision so the round trip
// reproduces the config exactly.
inline std::string format_scenario(const ScenarioConfig& cfg) {
  std::string out;
  auto kv = [&](const char* k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  out += "# relay network scenario\n[scenario]\n";
  kv("name", cfg.name);
  kv("duration_s", detail::format_double(cfg.duration_s));
  kv("request_count", std::to_string(cfg.request_count));
  kv("press_window_s", detail::format_double(cfg.press_window_s));
  kv("hello_interval_s", detail::format_double(cfg.hello_interval_s));
  kv("advert_interval_s", detail::format_double(cfg.advert_interval_s));
  kv("timer_jitter_s", detail::format_double(cfg.timer_jitter_s));
  kv("repeats", std::to_string(cfg.repeats));
  out += "\n[radio]\n";
  kv("range_m", detail::format_double(cfg.radio.range_m));
  kv("bitrate_bps", detail::format_double(cfg.radio.bitrate_bps));
  kv("per_hop_proc_s", detail::format_double(cfg.radio.per_hop_proc_s));
  kv("proc_jitter_s", detail::format_double(cfg.radio.proc_jitter_s));
  kv("csma_max_backoff_s",
     detail::format_double(cfg.radio.csma_max_backoff_s));
  kv("loss_on_collision", cfg.radio.loss_on_collision ? "true" : "false");
  out += "\n[sizes]\n";
  kv("hello_bytes", std::to_string(cfg.sizes.hello_bytes));
  kv("request_bytes", std::to_string(cfg.sizes.request_bytes));
  kv("ack_bytes", std::to_string(cfg.sizes.ack_bytes));
  kv("advert_base_bytes", std::to_string(cfg.sizes.advert_base_bytes));
  kv("advert_entry_bytes", std::to_string(cfg.sizes.advert_entry_bytes));
  for (const auto& n : cfg.nodes) {
    out += "\n[node]\n";
    kv("id", std::to_string(n.id.value));
    kv("label", n.label);
    kv("role", to_string(n.role));
    kv("lat", detail::format_double(n.position.latitude_deg));
    kv("lon", detail::format_double(n.position.longitude_deg));
  }
  for (const auto& p : cfg.paths) {
    out += "\n[path]\n";
    kv("name", p.name);
    std::string ids;
    for (NodeId r : p.relays) {
      if (!ids.empty()) ids += ' ';
      ids += std::to_string(r.value);
    }
    kv("relays", ids);
  }
  return out;
}

inline void save_scenario(const ScenarioConfig& cfg,
                          const std::string& file_path) {
  std::ofstream out(file_path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write scenario file " + file_path);
  out << format_scenario(cfg);
}

}  // namespace rdsp
