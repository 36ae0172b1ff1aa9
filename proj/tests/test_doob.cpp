#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <tuple>
#include <vector>

#include "cpslab/corpus.hpp"
#include "cpslab/doob.hpp"
#include "cpslab/rational.hpp"

using namespace cpslab;

namespace {

using Rows = std::vector<std::tuple<std::string, std::string, int>>;

EventTree one_step(int kids) {
  Rows rows{{"r", "", 0}};
  for (int c = 0; c < kids; ++c) rows.emplace_back("c" + std::to_string(c), "r", 1);
  return EventTree::build(rows);
}

/// Full binary tree; children of a node are appended in (up, down) order,
/// so tree.node(n).children[0] is always the up move.
EventTree binary_tree(int depth) {
  Rows rows{{"r", "", 0}};
  std::vector<std::string> frontier{"r"};
  for (int t = 1; t <= depth; ++t) {
    std::vector<std::string> next;
    for (const auto& p : frontier) {
      for (const char* tag : {"u", "d"}) {
        std::string id = (p == "r" ? std::string() : p) + tag;
        rows.emplace_back(id, p, t);
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }
  return EventTree::build(rows);
}

/// Walk with per-step drift `mu` and symmetric moves of +-1/2 on a binary
/// tree (up = children[0]). Parents precede children in index order.
TreeProcess<Rational> drifted_walk(const EventTree& tree, const Rational& mu) {
  TreeProcess<Rational> y(tree.size(), Rational(0));
  for (int n = 0; n < tree.size(); ++n) {
    const auto& ch = tree.node(n).children;
    if (ch.empty()) continue;
    y[ch[0]] = y[n] + mu + make_rational(1, 2);
    y[ch[1]] = y[n] + mu - make_rational(1, 2);
  }
  return y;
}

/// Survive-or-drop pump of depth T: from every surviving node the process
/// either stays at 0 or drops to -1 (equal weights); dropped branches are
/// absorbed at -1 until the horizon. Each surviving step compensates a
/// conditional drift of -1/2, so the compensator grows without bound in T.
struct Pump {
  EventTree tree;
  TreeProcess<Rational> y;
};

Pump pump(int horizon) {
  Rows rows{{"r", "", 0}};
  std::string survivor = "r";
  for (int t = 1; t <= horizon; ++t) {
    std::string drop = "x" + std::to_string(t);
    rows.emplace_back(drop, survivor, t);
    std::string prev = drop;
    for (int k = t + 1; k <= horizon; ++k) {
      std::string link = drop + "_" + std::to_string(k);
      rows.emplace_back(link, prev, k);
      prev = link;
    }
    std::string stay = "s" + std::to_string(t);
    rows.emplace_back(stay, survivor, t);
    survivor = stay;
  }
  Pump p;
  p.tree = EventTree::build(rows);
  p.y.assign(p.tree.size(), Rational(0));
  for (int n = 0; n < p.tree.size(); ++n)
    if (p.tree.node(n).id[0] == 'x') p.y[n] = Rational(-1);
  return p;
}

TreeProcess<Rational> unit_weights(const EventTree& tree) {
  return TreeProcess<Rational>(tree.size(), Rational(1));
}

}  // namespace

TEST_CASE("conditional weights normalize sibling masses and validate input") {
  EventTree tree = one_step(3);
  TreeProcess<Rational> w{Rational(1), Rational(1), Rational(2), Rational(1)};
  auto cond = conditional_weights(tree, w);
  CHECK(cond[tree.root()] == Rational(1));
  CHECK(cond[tree.index_of("c0")] == make_rational(1, 4));
  CHECK(cond[tree.index_of("c1")] == make_rational(1, 2));
  CHECK(cond[tree.index_of("c2")] == make_rational(1, 4));

  auto reach = reach_probabilities(tree, cond);
  CHECK(reach[tree.root()] == Rational(1));
  CHECK(reach[tree.index_of("c1")] == make_rational(1, 2));

  TreeProcess<Rational> neg = w;
  neg[tree.index_of("c0")] = Rational(-1);
  CHECK_THROWS_AS(conditional_weights(tree, neg), SpecError);

  TreeProcess<Rational> dead(tree.size(), Rational(0));
  dead[tree.root()] = Rational(1);
  CHECK_THROWS_AS(conditional_weights(tree, dead), SpecError);

  TreeProcess<Rational> short_w(tree.size() - 1, Rational(1));
  CHECK_THROWS_AS(conditional_weights(tree, short_w), ShapeMismatch);
}

TEST_CASE("decomposing a drifted walk recovers the linear compensator") {
  EventTree tree = binary_tree(3);
  const Rational mu = make_rational(-1, 10);
  auto y = drifted_walk(tree, mu);
  auto w = unit_weights(tree);

  auto dec = doob_decompose(tree, w, y, /*declared_supermartingale=*/true);
  for (int n = 0; n < tree.size(); ++n) {
    // A_t = t/10, predictable and started at zero.
    CHECK(dec.drift[n] == make_rational(tree.node(n).time, 10));
    CHECK(dec.martingale[n] == y[n] + dec.drift[n]);
  }

  // The martingale part has zero conditional drift at every internal node.
  auto cond = conditional_weights(tree, w);
  for (int n = 0; n < tree.size(); ++n) {
    const auto& ch = tree.node(n).children;
    if (ch.empty()) continue;
    Rational mean(0);
    for (int c : ch) mean += cond[c] * dec.martingale[c];
    CHECK(mean == dec.martingale[n]);
  }

  TreeProcess<Rational> short_y(tree.size() - 1, Rational(0));
  CHECK_THROWS_AS(doob_decompose(tree, w, short_y), ShapeMismatch);
}

TEST_CASE("declared supermartingales reject upward drift, undeclared ones split anyway") {
  EventTree tree = binary_tree(2);
  auto y = drifted_walk(tree, make_rational(1, 10));
  auto w = unit_weights(tree);
  CHECK_THROWS_AS(doob_decompose(tree, w, y, /*declared_supermartingale=*/true),
                  NotSupermartingale);

  // Without the declaration the split still holds: A_t = -t/10 and M = Y + A
  // has zero conditional drift.
  auto dec = doob_decompose(tree, w, y);
  auto cond = conditional_weights(tree, w);
  for (int n = 0; n < tree.size(); ++n) {
    CHECK(dec.drift[n] == make_rational(-tree.node(n).time, 10));
    const auto& ch = tree.node(n).children;
    if (ch.empty()) continue;
    Rational mean(0);
    for (int c : ch) mean += cond[c] * dec.martingale[c];
    CHECK(mean == dec.martingale[n]);
  }
}

TEST_CASE("second-moment bounds hold across the sampled regime corpus") {
  int passed = 0;
  for (int i = 0; i < 50; ++i) {
    SimRng rng(9001, static_cast<std::uint64_t>(i));
    EventTree tree = random_tree(rng, 4, 3);
    auto w = random_weights(rng, tree);
    auto inst = random_supermartingale(rng, tree, w);
    auto rep = verify_moment_bounds(tree, w, inst.y, inst.eps1, inst.eps2, inst.eps3);
    REQUIRE(rep.preconditions_ok);
    CHECK(rep.e_a2 <= rep.bound_a2);
    CHECK(rep.e_m2 <= rep.bound_m2);
    if (rep.pass) ++passed;
  }
  CHECK(passed == 50);
}

TEST_CASE("survive-or-drop pump honestly fails the compensator bound outside the regime") {
  // Preconditions all hold with eps1 = 0, eps2 = 1, eps3 = 0 (the tail
  // constraint is vacuous at eps2 = 1), yet E(A_T^2) at depth 6 is
  //   sum_{k=1..6} 2^-k (k/2)^2 + 2^-6 (6/2)^2 = 177/128 > 1 = (1+eps1)(eps2+eps3),
  // so the report must carry an honest bound failure, not a precondition one.
  Pump p = pump(6);
  auto rep = verify_moment_bounds(p.tree, unit_weights(p.tree), p.y, Rational(0), Rational(1),
                                  Rational(0));
  REQUIRE(rep.preconditions_ok);
  CHECK(rep.violated.empty());
  CHECK(rep.e_a2 == make_rational(177, 128));
  CHECK(rep.bound_a2 == Rational(1));
  CHECK_FALSE(rep.a2_ok);
  // The martingale part stays inside its (looser) bound: E(M_T^2) = 63/128 <= 2.
  CHECK(rep.e_m2 == make_rational(63, 128));
  CHECK(rep.bound_m2 == Rational(2));
  CHECK(rep.m2_ok);
  CHECK_FALSE(rep.pass);
  CHECK(rep.a2_ratio == Catch::Approx(1.3828125));
}

TEST_CASE("precondition violations are named without evaluating the bounds") {
  EventTree tree = one_step(2);
  auto w = unit_weights(tree);
  auto check_violation = [&](const TreeProcess<Rational>& y, const Rational& e1,
                             const Rational& e2, const Rational& e3, const std::string& prefix) {
    auto rep = verify_moment_bounds(tree, w, y, e1, e2, e3);
    CHECK_FALSE(rep.preconditions_ok);
    CHECK_FALSE(rep.pass);
    INFO("violated = " << rep.violated);
    CHECK(rep.violated.rfind(prefix, 0) == 0);
  };

  TreeProcess<Rational> flat(tree.size(), Rational(0));
  check_violation(flat, Rational(-1), Rational(0), Rational(0), "epsilons must be nonnegative");

  TreeProcess<Rational> off{make_rational(1, 10), Rational(0), Rational(0)};
  check_violation(off, make_rational(1, 2), Rational(0), Rational(0), "Y_0 = 0");

  TreeProcess<Rational> tall{Rational(0), make_rational(1, 2), make_rational(-1, 2)};
  check_violation(tall, make_rational(1, 4), Rational(1), Rational(0), "Y <= eps1");

  TreeProcess<Rational> deep{Rational(0), make_rational(-3, 2), Rational(0)};
  check_violation(deep, make_rational(1, 2), Rational(1), Rational(0), "Y >= -1");

  TreeProcess<Rational> up{Rational(0), make_rational(1, 4), make_rational(1, 4)};
  check_violation(up, make_rational(1, 2), Rational(1), Rational(0), "supermartingale");

  TreeProcess<Rational> heavy{Rational(0), Rational(-1), Rational(0)};
  check_violation(heavy, make_rational(1, 2), make_rational(1, 2), make_rational(1, 4),
                  "P(Y_T < -eps2) <= eps3");

  TreeProcess<Rational> short_y(tree.size() - 1, Rational(0));
  CHECK_THROWS_AS(verify_moment_bounds(tree, w, short_y, Rational(0), Rational(0), Rational(0)),
                  ShapeMismatch);
}

TEST_CASE("capped uniform distance on the tree") {
  EventTree tree = one_step(2);
  auto w = unit_weights(tree);
  TreeProcess<Rational> x(tree.size(), Rational(0));

  CHECK(d_up(tree, w, x, x) == Rational(0));

  TreeProcess<Rational> far(tree.size(), Rational(2));
  CHECK(d_up(tree, w, x, far) == Rational(1));  // capped at 1

  TreeProcess<Rational> leaves{Rational(0), make_rational(-1, 2), make_rational(1, 2)};
  CHECK(d_up(tree, w, x, leaves) == make_rational(1, 2));

  TreeProcess<Rational> one_branch{Rational(0), make_rational(1, 2), Rational(0)};
  CHECK(d_up(tree, w, x, one_branch) == make_rational(1, 4));

  TreeProcess<Rational> short_x(tree.size() - 1, Rational(0));
  CHECK_THROWS_AS(d_up(tree, w, short_x, x), ShapeMismatch);
}

TEST_CASE("one-step bracket is tight for a symmetric jump") {
  EventTree tree = one_step(2);
  TreeProcess<Rational> x{Rational(0), make_rational(3, 10), make_rational(-3, 10)};
  auto b = emery_distance_bounds(tree, unit_weights(tree), x);
  CHECK(b.lower == make_rational(3, 10));
  CHECK(b.upper == make_rational(3, 10));

  TreeProcess<Rational> short_x(tree.size() - 1, Rational(0));
  CHECK_THROWS_AS(emery_distance_bounds(tree, unit_weights(tree), short_x), ShapeMismatch);
}

TEST_CASE("bracket lower edge never exceeds the upper edge") {
  for (int i = 0; i < 30; ++i) {
    SimRng rng(417, static_cast<std::uint64_t>(i));
    EventTree tree = random_tree(rng, 4, 3);
    auto w = random_weights(rng, tree);
    auto inst = random_supermartingale(rng, tree, w);
    auto b = emery_distance_bounds(tree, w, inst.y, /*random_candidates=*/8, /*seed=*/99);
    CHECK(b.lower >= Rational(0));
    CHECK(b.lower <= b.upper);
    CHECK(b.upper <= Rational(1));
  }
}

TEST_CASE("regime bound formula: pinned values and monotonicity") {
  CHECK(emery_regime_bound(0.0) == 0.0);
  CHECK(emery_regime_bound(0.01) == Catch::Approx(0.962877975350084).epsilon(1e-12));
  CHECK(emery_regime_bound(0.25) == Catch::Approx(5.975810211375969).epsilon(1e-12));
  double prev = 0.0;
  for (double eps = 0.01; eps <= 0.3; eps += 0.01) {
    double v = emery_regime_bound(eps);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("path-ensemble distances mirror the tree definitions") {
  std::vector<std::vector<double>> x{{0.0, 0.5, 1.0}, {0.0, -0.5, -1.0}};
  CHECK(d_up(x, x) == 0.0);

  auto y = x;
  for (auto& path : y)
    for (auto& v : path) v += 2.0;
  CHECK(d_up(x, y) == 1.0);  // capped at 1

  auto z = x;
  z[0][2] += 0.25;
  CHECK(d_up(x, z) == Catch::Approx(0.125));  // mean of {0.25, 0}

  std::vector<std::vector<double>> ragged{{0.0, 0.5}, {0.0}};
  CHECK_THROWS_AS(d_up(x, ragged), ShapeMismatch);
  CHECK_THROWS_AS(d_up(std::vector<std::vector<double>>{}, x), ShapeMismatch);

  auto b = emery_distance_bounds(std::vector<std::vector<double>>{{0.0, 0.3}});
  CHECK(b.lower == Catch::Approx(0.3));
  CHECK(b.upper == Catch::Approx(0.3));
  CHECK_THROWS_AS(emery_distance_bounds(std::vector<std::vector<double>>{}), ShapeMismatch);
  CHECK_THROWS_AS(emery_distance_bounds(ragged), ShapeMismatch);
}
