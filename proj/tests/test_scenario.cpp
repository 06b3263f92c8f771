#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rdsp/scenario.hpp"

using namespace rdsp;

namespace {

ScenarioConfig tiny() {
  ScenarioConfig cfg;
  cfg.name = "tiny";
  const GeoPosition anchor{33.76, 72.36};
  cfg.nodes.push_back({NodeId{0}, "S", Role::Server, anchor});
  cfg.nodes.push_back({NodeId{2}, "r1", Role::Relay, local_offset(anchor, 88, 0)});
  cfg.nodes.push_back({NodeId{1}, "C", Role::Client, local_offset(anchor, 176, 0)});
  cfg.paths.push_back({"chain", {NodeId{2}}});
  return cfg;
}

int count_prefix(const ScenarioConfig& cfg, const std::string& prefix) {
  int n = 0;
  for (const auto& node : cfg.nodes)
    if (node.label.starts_with(prefix)) ++n;
  return n;
}

}  // namespace

TEST_CASE("validation rejects malformed configs") {
  CHECK_NOTHROW(validate(tiny()));

  SECTION("duplicate node id") {
    auto cfg = tiny();
    cfg.nodes[1].id = NodeId{0};
    cfg.nodes[1].label = "other";
    CHECK_THROWS_WITH(validate(cfg), "duplicate NodeId 0");
  }
  SECTION("duplicate label") {
    auto cfg = tiny();
    cfg.nodes[1].label = "S";
    CHECK_THROWS_WITH(validate(cfg), "duplicate node label S");
  }
  SECTION("server count") {
    auto cfg = tiny();
    cfg.nodes[0].role = Role::Relay;
    cfg.nodes[0].label = "x";
    cfg.paths.clear();
    CHECK_THROWS_WITH(validate(cfg), "zero servers");
    cfg = tiny();
    cfg.nodes[1].role = Role::Server;
    cfg.paths.clear();
    CHECK_THROWS_WITH(validate(cfg), "more than one server");
  }
  SECTION("shared position") {
    auto cfg = tiny();
    cfg.nodes[1].position = cfg.nodes[0].position;
    CHECK_THROWS_WITH(validate(cfg),
                      Catch::Matchers::ContainsSubstring("share a position"));
  }
  SECTION("client out of everyone's range") {
    auto cfg = tiny();
    cfg.nodes[2].position = local_offset(GeoPosition{33.76, 72.36}, 5000, 0);
    CHECK_THROWS_WITH(validate(cfg), "disconnected client C");
  }
  SECTION("radio and timer parameters") {
    auto cfg = tiny();
    cfg.radio.range_m = 0.0;
    CHECK_THROWS_WITH(validate(cfg), "radio parameters out of range");
    cfg = tiny();
    cfg.radio.proc_jitter_s = -0.001;
    CHECK_THROWS_WITH(validate(cfg), "radio parameters out of range");
    cfg = tiny();
    cfg.press_window_s = cfg.duration_s + 1;
    CHECK_THROWS_WITH(validate(cfg), "run parameters out of range");
    cfg = tiny();
    cfg.timer_jitter_s = -1;
    CHECK_THROWS_WITH(validate(cfg), "timer parameters out of range");
  }
  SECTION("paths must connect client to server") {
    auto cfg = tiny();
    cfg.paths[0].relays = {};
    CHECK_THROWS_WITH(validate(cfg), "path chain has no relays");
    cfg = tiny();
    cfg.paths[0].relays = {NodeId{77}};
    CHECK_THROWS_WITH(validate(cfg),
                      "path chain references unknown node 77");
    cfg = tiny();
    cfg.active_path = "nope";
    CHECK_THROWS_WITH(validate(cfg), "active path nope is not defined");
  }
}

TEST_CASE("chain builder lays out an adjacent line") {
  const ScenarioConfig cfg = builtin_chain(5);
  CHECK(cfg.nodes.size() == 7);
  REQUIRE(cfg.paths.size() == 1);
  CHECK(cfg.paths[0].relays.size() == 5);

  // Adjacency holds hop by hop and only hop by hop.
  const NodeSpec* server = cfg.server();
  const NodeSpec* client = cfg.find(NodeId{1});
  const NamedPath& path = cfg.paths[0];
  CHECK(in_range(cfg, *client, *cfg.find(path.relays.front())));
  CHECK(in_range(cfg, *cfg.find(path.relays.back()), *server));
  for (std::size_t i = 0; i + 1 < path.relays.size(); ++i)
    CHECK(in_range(cfg, *cfg.find(path.relays[i]), *cfg.find(path.relays[i + 1])));
  CHECK_FALSE(in_range(cfg, *client, *server));
  CHECK_FALSE(in_range(cfg, *client, *cfg.find(path.relays[1])));

  CHECK(path_distance(cfg, "chain") == Catch::Approx(6 * 88.0).margin(0.5));
  CHECK_THROWS_AS(builtin_chain(0), ScenarioError);
}

TEST_CASE("two-branch builder keeps the branches radio-disjoint") {
  const ScenarioConfig cfg = builtin_twobranch();
  CHECK(cfg.nodes.size() == 13);
  REQUIRE(cfg.paths.size() == 2);
  CHECK(cfg.path("short")->relays.size() == 3);
  CHECK(cfg.path("long")->relays.size() == 8);

  // Expected disk-graph edges: the two chains, nothing across.
  std::set<std::pair<std::string, std::string>> edges;
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.nodes.size(); ++j)
      if (in_range(cfg, cfg.nodes[i], cfg.nodes[j])) {
        auto a = cfg.nodes[i].label, b = cfg.nodes[j].label;
        edges.insert({std::min(a, b), std::max(a, b)});
      }
  const std::set<std::pair<std::string, std::string>> expected{
      {"C", "a1"},  {"a1", "a2"}, {"a2", "a3"}, {"S", "a3"},
      {"C", "b1"},  {"b1", "b2"}, {"b2", "b3"}, {"b3", "b4"},
      {"b4", "b5"}, {"b5", "b6"}, {"b6", "b7"}, {"b7", "b8"},
      {"S", "b8"}};
  CHECK(edges == expected);
}

TEST_CASE("campus builder matches the surveyed route book") {
  const ScenarioConfig cfg = builtin_campus();
  CHECK(cfg.nodes.size() == 25);
  CHECK(count_prefix(cfg, "p1r") == 4);
  CHECK(count_prefix(cfg, "t") == 3);
  CHECK(count_prefix(cfg, "p2r") == 3);
  CHECK(count_prefix(cfg, "p3r") == 5);
  CHECK(count_prefix(cfg, "p4r") == 8);
  REQUIRE(cfg.paths.size() == 4);
  CHECK(cfg.path("path-1")->relays.size() == 7);
  CHECK(cfg.path("path-2")->relays.size() == 6);
  CHECK(cfg.path("path-3")->relays.size() == 5);
  CHECK(cfg.path("path-4")->relays.size() == 8);

  CHECK(path_distance(cfg, "path-1") == Catch::Approx(715.524).margin(0.01));
  CHECK(path_distance(cfg, "path-2") == Catch::Approx(620.001).margin(0.01));
  CHECK(path_distance(cfg, "path-3") == Catch::Approx(582.005).margin(0.01));
  CHECK(path_distance(cfg, "path-4") == Catch::Approx(792.597).margin(0.01));

  // Paths 1 and 2 share the trunk relays.
  const auto& p1 = cfg.path("path-1")->relays;
  const auto& p2 = cfg.path("path-2")->relays;
  CHECK(std::vector<NodeId>(p1.end() - 3, p1.end()) ==
        std::vector<NodeId>(p2.end() - 3, p2.end()));
}

TEST_CASE("restrict_to_path keeps endpoints and one route") {
  const ScenarioConfig campus = builtin_campus();
  const ScenarioConfig only3 = restrict_to_path(campus, "path-3");
  CHECK(only3.nodes.size() == 7);  // client, server, five relays
  CHECK(only3.active_path == "path-3");
  REQUIRE(only3.paths.size() == 1);
  CHECK(only3.paths[0].name == "path-3");
  CHECK(only3.server() != nullptr);
  CHECK(only3.clients().size() == 1);
  CHECK_THROWS_WITH(restrict_to_path(campus, "path-9"),
                    "unknown path path-9");
}

TEST_CASE("scenario text round trips exactly") {
  ScenarioConfig cfg = builtin_campus();
  cfg.repeats = 7;
  const std::string text = format_scenario(cfg);
  const ScenarioConfig back = parse_scenario(text, "campus.scn");

  REQUIRE(back.nodes.size() == cfg.nodes.size());
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
    CHECK(back.nodes[i].id == cfg.nodes[i].id);
    CHECK(back.nodes[i].label == cfg.nodes[i].label);
    CHECK(back.nodes[i].role == cfg.nodes[i].role);
    CHECK(back.nodes[i].position.latitude_deg ==
          cfg.nodes[i].position.latitude_deg);
    CHECK(back.nodes[i].position.longitude_deg ==
          cfg.nodes[i].position.longitude_deg);
  }
  CHECK(back.radio.range_m == cfg.radio.range_m);
  CHECK(back.radio.bitrate_bps == cfg.radio.bitrate_bps);
  CHECK(back.radio.per_hop_proc_s == cfg.radio.per_hop_proc_s);
  CHECK(back.radio.proc_jitter_s == cfg.radio.proc_jitter_s);
  CHECK(back.radio.csma_max_backoff_s == cfg.radio.csma_max_backoff_s);
  CHECK(back.timer_jitter_s == cfg.timer_jitter_s);
  CHECK(back.repeats == 7);
  REQUIRE(back.paths.size() == 4);
  CHECK(back.paths[2].relays == cfg.paths[2].relays);

  // And the round trip is a fixed point of the formatter.
  ScenarioConfig named = back;
  named.name = cfg.name;
  CHECK(format_scenario(named) == text);
}

TEST_CASE("parser reports position and cause") {
  auto parse = [](const std::string& text) {
    return parse_scenario(text, "bad.scn");
  };

  CHECK_THROWS_WITH(parse("[scenario]\nspeed = 3\n"),
                    "bad.scn:2: unknown scenario key 'speed'");
  CHECK_THROWS_WITH(parse("[warp]\n"), "bad.scn:1: unknown section [warp]");
  CHECK_THROWS_WITH(parse("[scenario]\nduration_s = fast\n"),
                    "bad.scn:2: malformed number 'fast'");
  CHECK_THROWS_WITH(parse("duration_s = 5\n"),
                    "bad.scn:1: key outside of any section");
  CHECK_THROWS_WITH(parse("[radio]\nloss_on_collision = maybe\n"),
                    "bad.scn:2: expected true/false, got 'maybe'");
  CHECK_THROWS_WITH(parse("[node]\nlabel = x\n"),
                    Catch::Matchers::ContainsSubstring("missing id"));
  CHECK_THROWS_WITH(
      parse("[node]\nid = 3\nlat = 1\nlon = 1\n[node]\nid = 3\nlat=1.1\nlon=1\n"),
      Catch::Matchers::ContainsSubstring("duplicate NodeId 3"));

  CHECK_THROWS_WITH(load_scenario("/no/such/file.scn"),
                    "cannot open scenario file /no/such/file.scn");
}

TEST_CASE("parsed scenario runs through structural validation") {
  const std::string text =
      "# two nodes, no client\n"
      "[scenario]\n"
      "name = pair\n"
      "duration_s = 10\n"
      "request_count = 0\n"
      "press_window_s = 5\n"
      "[node]\n"
      "id = 0\n"
      "label = S\n"
      "role = server\n"
      "lat = 33.76\n"
      "lon = 72.36\n"
      "[node]\n"
      "id = 2\n"
      "role = relay\n"
      "lat = 33.7608\n"
      "lon = 72.36\n";
  const ScenarioConfig cfg = parse_scenario(text, "pair.scn");
  CHECK(cfg.name == "pair");
  CHECK(cfg.nodes.size() == 2);
  CHECK(cfg.nodes[1].label == "n2");  // defaulted label
  CHECK(cfg.request_count == 0);
}
