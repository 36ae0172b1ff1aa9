#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "cpslab/json_io.hpp"
#include "cpslab/report.hpp"

using namespace cpslab;

namespace {

Json base_spec() {
  return Json::parse(R"({
    "horizon": 1,
    "nodes": [{"id": "r", "parent": null, "time": 0},
              {"id": "a", "parent": "r", "time": 1},
              {"id": "b", "parent": "r", "time": 1}],
    "bid": {"r": 1, "a": 1, "b": 3},
    "ask": {"r": 2, "a": "3/2", "b": 3}
  })");
}

void expect_spec_error(const Json& j, const std::string& needle) {
  try {
    (void)market_from_json(j);
    FAIL("expected a spec error mentioning '" << needle << "'");
  } catch (const SpecError& e) {
    INFO("message: " << e.what());
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

struct TempFile {
  std::string path;
  TempFile(const std::string& name, const std::string& contents) : path(name) {
    std::ofstream(path) << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("market specs parse with exact numerics and default weights") {
  auto m = market_from_json(base_spec());
  CHECK(m.tree.size() == 3);
  CHECK(m.tree.horizon() == 1);
  CHECK(m.bid[m.tree.index_of("r")] == Rational(1));
  CHECK(m.ask[m.tree.index_of("a")] == make_rational(3, 2));
  CHECK(m.ask[m.tree.index_of("b")] == Rational(3));
  // No explicit weights: uniform over each sibling set.
  CHECK(m.weight[m.tree.index_of("r")] == Rational(1));
  CHECK(m.weight[m.tree.index_of("a")] == make_rational(1, 2));
  CHECK(m.weight[m.tree.index_of("b")] == make_rational(1, 2));
}

TEST_CASE("number tokens mean their decimal spelling, not the nearest double") {
  CHECK(rational_from_json(Json(0.1), "x") == make_rational(1, 10));
  CHECK(rational_from_json(Json(0.25), "x") == make_rational(1, 4));
  CHECK(rational_from_json(Json(3), "x") == Rational(3));
  CHECK(rational_from_json(Json("1/3"), "x") == make_rational(1, 3));
  CHECK(rational_from_json(Json("-0.5"), "x") == make_rational(-1, 2));
  CHECK_THROWS_AS(rational_from_json(Json(true), "x"), SpecError);
  CHECK_THROWS_AS(rational_from_json(Json("abc"), "x"), SpecError);
  CHECK_THROWS_AS(rational_from_json(Json("1/0"), "x"), SpecError);
}

TEST_CASE("structural problems are reported by name") {
  expect_spec_error(Json::array(), "top level must be an object");

  Json no_bid = base_spec();
  no_bid.erase("bid");
  expect_spec_error(no_bid, "missing 'bid'");

  Json bad_nodes = base_spec();
  bad_nodes["nodes"] = "r";
  expect_spec_error(bad_nodes, "'nodes' must be an array");

  Json no_time = base_spec();
  no_time["nodes"][1].erase("time");
  expect_spec_error(no_time, "need 'id' and 'time'");

  Json bad_id = base_spec();
  bad_id["nodes"][0]["id"] = true;
  expect_spec_error(bad_id, "node id must be a string or integer");

  Json unknown = base_spec();
  unknown["bid"]["zzz"] = 1;
  expect_spec_error(unknown, "references unknown node");

  Json missing = base_spec();
  missing["bid"].erase("a");
  expect_spec_error(missing, "missing node a");

  Json horizon = base_spec();
  horizon["horizon"] = 2;
  expect_spec_error(horizon, "declared horizon");

  Json partial_weights = base_spec();
  partial_weights["nodes"][0]["weight"] = 1;
  expect_spec_error(partial_weights, "either all nodes carry 'weight' or none do");

  Json bad_quote = base_spec();
  bad_quote["bid"]["a"] = "1.2.3";
  expect_spec_error(bad_quote, "cannot parse numeric value");
}

TEST_CASE("integer node ids normalize through their literal spelling") {
  Json j = Json::parse(R"({
    "nodes": [{"id": 0, "time": 0}, {"id": 1, "parent": 0, "time": 1}],
    "bid": {"0": 1, "1": 1},
    "ask": {"0": 2, "1": 2}
  })");
  auto m = market_from_json(j);
  CHECK(m.tree.size() == 2);
  CHECK(m.tree.has_node("0"));
  CHECK(m.bid[m.tree.index_of("1")] == Rational(1));
}

TEST_CASE("explicit weights parse exactly and apply to every node") {
  Json j = base_spec();
  j["nodes"][0]["weight"] = 1;
  j["nodes"][1]["weight"] = "2/3";
  j["nodes"][2]["weight"] = "1/3";
  auto m = market_from_json(j);
  CHECK(m.weight[m.tree.index_of("a")] == make_rational(2, 3));
  CHECK(m.weight[m.tree.index_of("b")] == make_rational(1, 3));
}

TEST_CASE("strategies default missing nodes to zero and reject unknown ones") {
  auto m = market_from_json(base_spec());
  auto s = strategy_from_json(Json::parse(R"({"a": "1/2"})"), m.tree);
  CHECK(s.stock[m.tree.index_of("a")] == make_rational(1, 2));
  CHECK(s.stock[m.tree.index_of("r")] == Rational(0));
  CHECK(s.stock[m.tree.index_of("b")] == Rational(0));

  CHECK_THROWS_AS(strategy_from_json(Json::parse(R"({"zzz": 1})"), m.tree), SpecError);
  CHECK_THROWS_AS(strategy_from_json(Json::array(), m.tree), SpecError);
}

TEST_CASE("file loading reports missing and malformed inputs") {
  CHECK_THROWS_AS(load_market_file("/nonexistent/market.json"), SpecError);

  TempFile broken("tmp_broken_market.json", "{ not json");
  try {
    (void)load_market_file(broken.path);
    FAIL("expected a malformed-JSON error");
  } catch (const SpecError& e) {
    CHECK(std::string(e.what()).find("malformed JSON") != std::string::npos);
  }

  TempFile good("tmp_good_market.json", base_spec().dump());
  auto m = load_market_file(good.path);
  CHECK(m.tree.size() == 3);

  CHECK_THROWS_AS(load_strategy_file("/nonexistent/strategy.json", m.tree), SpecError);
  TempFile strat("tmp_strategy.json", R"({"b": -2})");
  auto s = load_strategy_file(strat.path, m.tree);
  CHECK(s.stock[m.tree.index_of("b")] == Rational(-2));
}

TEST_CASE("report dumps are deterministic and hashable") {
  // Key-ordered serialization: insertion order must not leak into output.
  Json a, b;
  a["x"] = 1;
  a["y"] = 2;
  b["y"] = 2;
  b["x"] = 1;
  CHECK(dump_report(a) == dump_report(b));
  CHECK(dump_report(a).back() == '\n');

  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("abc") == "e71fa2190541574b");

  TempFile in("tmp_hash_input.json", "{}");
  CHECK(read_file_bytes(in.path) == "{}");

  RunConfig cfg;
  cfg.command = "check";
  cfg.inputs = {in.path};
  cfg.seed = 42;
  Json rep = make_report(cfg, ArithMode::kRational, Json{{"holds", true}});
  REQUIRE(rep.contains("config"));
  REQUIRE(rep.contains("provenance"));
  REQUIRE(rep.contains("result"));
  CHECK(rep["config"]["command"] == "check");
  CHECK(rep["config"]["seed"] == 42);
  CHECK(rep["provenance"]["arith"] == "rational");
  CHECK(rep["provenance"]["input_hash"][in.path] == fnv1a_hex("{}"));
  CHECK(rep["result"]["holds"] == true);

  // Same config, same inputs: byte-identical reports.
  Json rep2 = make_report(cfg, ArithMode::kRational, Json{{"holds", true}});
  CHECK(dump_report(rep) == dump_report(rep2));
}
