#include <catch2/catch_amalgamated.hpp>

#include "cpslab/corpus.hpp"
#include "cpslab/rng.hpp"
#include "cpslab/tree.hpp"

using namespace cpslab;

TEST_CASE("build indexes nodes in time order with parent links") {
  EventTree t = EventTree::build({{"r", "", 0},
                                  {"a", "r", 1},
                                  {"b", "r", 1},
                                  {"a1", "a", 2},
                                  {"a2", "a", 2},
                                  {"b1", "b", 2}});
  REQUIRE(t.size() == 6);
  CHECK(t.horizon() == 2);
  CHECK(t.root() == 0);
  CHECK(t.node(t.root()).id == "r");
  CHECK(t.node(t.index_of("a1")).parent == t.index_of("a"));
  CHECK(t.node(t.index_of("a")).children.size() == 2);
  CHECK(t.is_terminal(t.index_of("b1")));
  CHECK_FALSE(t.is_terminal(t.index_of("b")));
  // indices are time-ordered: parents always precede children
  for (int i = 0; i < t.size(); ++i)
    if (t.node(i).parent >= 0) CHECK(t.node(i).parent < i);
  CHECK(t.terminals().size() == 3);
}

TEST_CASE("build rejects malformed trees") {
  // unknown parent
  CHECK_THROWS_AS(EventTree::build({{"r", "", 0}, {"a", "zz", 1}}), SpecError);
  // root not at time zero
  CHECK_THROWS_AS(EventTree::build({{"r", "", 1}}), SpecError);
  // child time must be parent time + 1
  CHECK_THROWS_AS(EventTree::build({{"r", "", 0}, {"a", "r", 2}}), SpecError);
  // two roots
  CHECK_THROWS_AS(EventTree::build({{"r", "", 0}, {"s", "", 0}}), SpecError);
  // duplicate id
  CHECK_THROWS_AS(EventTree::build({{"r", "", 0}, {"a", "r", 1}, {"a", "r", 1}}), SpecError);
  // leaves at different depths
  CHECK_THROWS_AS(
      EventTree::build({{"r", "", 0}, {"a", "r", 1}, {"b", "r", 1}, {"a1", "a", 2}}),
      SpecError);
  // empty
  CHECK_THROWS_AS(EventTree::build({}), SpecError);
}

TEST_CASE("path probabilities multiply transition weights to the root") {
  EventTree t = EventTree::build({{"r", "", 0},
                                  {"a", "r", 1},
                                  {"b", "r", 1},
                                  {"aa", "a", 2},
                                  {"ab", "a", 2},
                                  {"bb", "b", 2}});
  MarketModel<Rational> m;
  m.tree = t;
  m.bid.assign(t.size(), Rational(1));
  m.ask.assign(t.size(), Rational(1));
  m.weight.assign(t.size(), Rational(1));
  m.weight[t.index_of("a")] = make_rational(1, 3);
  m.weight[t.index_of("b")] = make_rational(2, 3);
  m.weight[t.index_of("aa")] = make_rational(1, 4);
  m.weight[t.index_of("ab")] = make_rational(3, 4);
  CHECK(m.path_prob(t.index_of("ab")) == make_rational(1, 4));
  CHECK(m.path_prob(t.index_of("bb")) == make_rational(2, 3));
  CHECK(m.path_prob(t.root()) == Rational(1));
}

TEST_CASE("validate_market reports economic defects as data") {
  EventTree t = EventTree::build({{"r", "", 0}, {"a", "r", 1}, {"b", "r", 1}});
  MarketModel<Rational> m;
  m.tree = t;
  m.bid = {Rational(1), Rational(1), Rational(1)};
  m.ask = {Rational(2), Rational(2), Rational(2)};
  m.weight = {Rational(1), make_rational(1, 2), make_rational(1, 2)};
  CHECK(validate_market(m).empty());

  auto find_rule = [](const std::vector<MarketViolation>& v, const std::string& rule) {
    for (const auto& x : v)
      if (x.rule == rule) return true;
    return false;
  };

  auto bad = m;
  bad.ask[1] = Rational(0);  // bid above ask, and a terminal ask at zero
  auto v = validate_market(bad);
  CHECK(find_rule(v, "bid_above_ask"));
  CHECK(find_rule(v, "terminal_ask_not_positive"));

  bad = m;
  bad.bid[2] = Rational(-1);
  CHECK(find_rule(validate_market(bad), "bid_negative"));

  bad = m;
  bad.weight[1] = Rational(0);
  CHECK(find_rule(validate_market(bad), "weight_not_positive"));

  bad = m;
  bad.weight[2] = make_rational(3, 4);
  CHECK(find_rule(validate_market(bad), "weights_not_normalized"));
}

TEST_CASE("random trees are structurally sound and deterministic per seed") {
  SimRng a(42, 7), b(42, 7);
  EventTree ta = random_tree(a, 5, 3);
  EventTree tb = random_tree(b, 5, 3);
  REQUIRE(ta.size() == tb.size());
  for (int i = 0; i < ta.size(); ++i) {
    CHECK(ta.node(i).id == tb.node(i).id);
    CHECK(ta.node(i).parent == tb.node(i).parent);
  }
  // every non-terminal has between 1 and 3 children; depth within bound
  for (int i = 0; i < ta.size(); ++i) {
    CHECK(ta.node(i).time <= 5);
    if (!ta.is_terminal(i)) {
      CHECK(ta.node(i).children.size() >= 1);
      CHECK(ta.node(i).children.size() <= 3);
    } else {
      CHECK(ta.node(i).time == ta.horizon());
    }
  }
}

TEST_CASE("model conversion maps rationals to doubles entrywise") {
  EventTree t = EventTree::build({{"r", "", 0}, {"a", "r", 1}});
  MarketModel<Rational> m;
  m.tree = t;
  m.bid = {make_rational(1, 2), Rational(1)};
  m.ask = {Rational(1), Rational(2)};
  m.weight = {Rational(1), Rational(1)};
  auto d = convert_model<Rational, double>(m);
  CHECK(d.bid[0] == 0.5);
  CHECK(d.ask[1] == 2.0);
  CHECK(d.tree.size() == 2);
}
