#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cpslab/pathlab.hpp"

using namespace cpslab;

TEST_CASE("scenario names roundtrip") {
  for (Scenario s : {Scenario::kConstant, Scenario::kBrownian, Scenario::kJumpDate,
                     Scenario::kAdmissibility}) {
    auto back = scenario_from_name(scenario_name(s));
    REQUIRE(back.has_value());
    CHECK(*back == s);
  }
  CHECK_FALSE(scenario_from_name("poisson").has_value());
}

TEST_CASE("parameter validation rejects unusable inputs") {
  ScenarioParams p;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, p, 0, 1, 1), BadParams);
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, p, 16, 0, 1), BadParams);

  ScenarioParams neg_vol;
  neg_vol.vol = -0.1;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, neg_vol, 16, 1, 1), BadParams);

  ScenarioParams flat;
  flat.ask0 = 0.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kConstant, flat, 16, 1, 1), BadParams);
  flat.ask0 = 1.0;
  flat.bid0 = 2.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kConstant, flat, 16, 1, 1), BadParams);

  ScenarioParams bad_h;
  bad_h.horizon = 0.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, bad_h, 16, 1, 1), BadParams);

  ScenarioParams neg_bid;
  neg_bid.bid0 = -1.0;
  neg_bid.ask0 = 1.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, neg_bid, 16, 1, 1), BadParams);

  ScenarioParams inverted;
  inverted.bid0 = 2.0;
  inverted.ask0 = 1.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, inverted, 16, 1, 1), BadParams);

  ScenarioParams bad_t1;
  bad_t1.t1 = 0.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kJumpDate, bad_t1, 16, 1, 1), BadParams);
  bad_t1.t1 = 1.5;
  CHECK_THROWS_AS(simulate_paths(Scenario::kJumpDate, bad_t1, 16, 1, 1), BadParams);

  CHECK_THROWS_AS(simulate_paths(Scenario::kAdmissibility, p, 5, 1, 1), BadParams);
  CHECK_THROWS_AS(simulate_paths(Scenario::kAdmissibility, p, 2, 1, 1), BadParams);

  CHECK_THROWS_AS(admissibility_example_run(1, 4, 16, 1), BadParams);

  // A zero-volatility driver pinned at ask 0 can never produce a positive
  // terminal ask; the generator reports that instead of looping forever.
  ScenarioParams absorbed;
  absorbed.bid0 = 0.0;
  absorbed.ask0 = 0.0;
  absorbed.vol = 0.0;
  CHECK_THROWS_AS(simulate_paths(Scenario::kBrownian, absorbed, 16, 1, 1), BadParams);
}

TEST_CASE("simulation is reproducible and shape-correct") {
  ScenarioParams p;
  PathSet a = simulate_paths(Scenario::kBrownian, p, 64, 5, 7);
  CHECK(a.scenarios() == 5);
  CHECK(a.h() == Catch::Approx(1.0 / 64));
  for (int i = 0; i < a.scenarios(); ++i) {
    REQUIRE(a.bid[i].size() == 65);
    for (std::size_t k = 0; k < a.bid[i].size(); ++k) {
      CHECK(a.bid[i][k] >= 0.0);
      CHECK(a.bid[i][k] <= a.ask[i][k]);
    }
    // The Brownian family's achievable envelopes are the raw quotes.
    CHECK(a.xbid[i] == a.bid[i]);
    CHECK(a.xask[i] == a.ask[i]);
  }
  CHECK(a.tau_index.empty());

  PathSet b = simulate_paths(Scenario::kBrownian, p, 64, 5, 7);
  CHECK(a.bid == b.bid);
  CHECK(a.ask == b.ask);
  CHECK(a.bid[0] != a.bid[1]);  // scenario streams are independent

  PathSet c = simulate_paths(Scenario::kBrownian, p, 64, 5, 8);
  CHECK(a.bid != c.bid);

  PathSet flat = simulate_paths(Scenario::kConstant, p, 16, 2, 1);
  for (double s : flat.spread(0)) CHECK(s == 0.0);

  PathSet adm = simulate_paths(Scenario::kAdmissibility, p, 32, 3, 1);
  CHECK(adm.horizon == 2.0);
  CHECK(adm.tau_index.size() == 3);
  CHECK(adm.u_draw.size() == 3);
}

TEST_CASE("jump-date quotes sit on the analytic branch") {
  ScenarioParams p;  // t1 = 0.5 on [0, 1]
  const int steps = 64, i1 = 32;
  for (int i = 0; i < 4; ++i) {
    ScenarioDraw d = draw_scenario(Scenario::kJumpDate, p, steps, 3, i);
    for (int k = 0; k < i1; ++k) {
      CHECK(d.bid[k] == 0.0);
      CHECK(d.ask[k] == 1.0);
    }
    CHECK(d.bid[i1] >= 0.0);  // reborn at |driver(t1)|
    for (int k = 0; k <= steps; ++k)
      CHECK(d.ask[k] == Catch::Approx(std::max(d.bid[k], 0.0) + 1.0));
    CHECK(d.xbid == d.bid);
    CHECK(d.xask == d.ask);
  }
}

TEST_CASE("capital-requirement scenario snaps the driver at the hitting time") {
  const int steps = 128, cap = steps / 2;
  bool saw_early_hit = false;
  for (int i = 0; i < 20; ++i) {
    ScenarioDraw d = draw_scenario(Scenario::kAdmissibility, ScenarioParams{}, steps, 5, i);
    REQUIRE(d.tau_index >= 1);
    REQUIRE(d.tau_index <= cap);
    CHECK(d.u > 0.0);
    CHECK(d.u <= 1.0);
    for (int k = 0; k < d.tau_index; ++k) {
      CHECK(d.bid[k] == 1.0);
      CHECK(d.xbid[k] == 2.0);
    }
    const double post = (d.ask[d.tau_index] + 2.0) / 2.0;
    for (int k = d.tau_index; k <= steps; ++k) {
      CHECK(d.bid[k] == Catch::Approx(post));
      CHECK(d.xbid[k] == Catch::Approx(post));
      CHECK(d.ask[k] == Catch::Approx(d.ask[d.tau_index]));  // driver stopped at tau
    }
    if (d.tau_index < cap) {
      saw_early_hit = true;
      CHECK(d.ask[d.tau_index] == Catch::Approx(3.0 - d.u));  // snapped, no overshoot
    }
  }
  CHECK(saw_early_hit);
}

TEST_CASE("excursions: jump starts, continuous starts, and horizon runs") {
  // A spread that jumps over theta: interval reported from its first
  // positive index.
  std::vector<double> step{0, 0, 0, 0.6, 0.6, 0.6, 0, 0, 0, 0};
  auto dec = detect_excursions(step, 0.0, 0.3);
  REQUIRE(dec.excursions.size() == 1);
  CHECK(dec.excursions[0].start == 3);
  CHECK(dec.excursions[0].end == 6);
  CHECK_FALSE(dec.excursions[0].continuous_start);
  CHECK_FALSE(dec.excursions[0].runs_to_horizon);
  REQUIRE(dec.frictionless.size() == 2);
  CHECK(dec.frictionless[0] == std::pair<int, int>(0, 3));
  CHECK(dec.frictionless[1] == std::pair<int, int>(6, 10));

  // A spread growing out of zero: the interval is extended to include the
  // preceding zero index.
  const int n = 100;
  std::vector<double> sine(n + 1);
  for (int k = 0; k <= n; ++k) sine[k] = std::sin(3.14159265358979323846 * k / n);
  sine[n] = 0.0;
  auto dsin = detect_excursions(sine, 0.0, 0.1);
  REQUIRE(dsin.excursions.size() == 1);
  CHECK(dsin.excursions[0].continuous_start);
  CHECK(dsin.excursions[0].start == 0);
  CHECK(dsin.excursions[0].end == n);
  CHECK_FALSE(dsin.excursions[0].runs_to_horizon);

  // Open at the horizon.
  std::vector<double> open{0, 0.5, 0.7};
  auto dopen = detect_excursions(open, 0.0, 0.3);
  REQUIRE(dopen.excursions.size() == 1);
  CHECK(dopen.excursions[0].start == 1);
  CHECK(dopen.excursions[0].end == 3);
  CHECK(dopen.excursions[0].runs_to_horizon);

  // Positive at index 0: nothing to extend into, reported from 0.
  std::vector<double> born{0.1, 0.0, 0.0};
  auto dborn = detect_excursions(born, 0.0, 0.3);
  REQUIRE(dborn.excursions.size() == 1);
  CHECK(dborn.excursions[0].start == 0);
  CHECK_FALSE(dborn.excursions[0].continuous_start);

  // PathSet overload with the default threshold: a frictionless market has
  // no excursions at all.
  PathSet flat = simulate_paths(Scenario::kConstant, ScenarioParams{}, 16, 1, 1);
  auto dflat = detect_excursions(flat, 0, 1e-12);
  CHECK(dflat.excursions.empty());
  REQUIRE(dflat.frictionless.size() == 1);
  CHECK(dflat.frictionless[0] == std::pair<int, int>(0, 17));
}

TEST_CASE("zero classification flags unresolvable zeros honestly") {
  // Oscillation faster than the window: the zeros at 0 and 2 each see >= 2
  // excursion starts ahead and are reported ambiguous, never reassigned.
  std::vector<double> osc{0, 1, 0, 1, 0, 1, 0};
  auto rep = check_zero_classification(osc, 0.0, 0.5);
  REQUIRE(rep.zeros == std::vector<int>{0, 2, 4, 6});
  CHECK(rep.ambiguous == 2);
  CHECK(rep.ambiguous_indices == std::vector<int>{0, 2});
  // The zero at 4 has only the jump-start run at 5 ahead; 6 ends the grid.
  CHECK(rep.right_interior == 2);
  CHECK(rep.excursion_start == 0);

  // A single continuous excursion start is recognized as such.
  std::vector<double> grow{0, 0.1, 0.9, 0, 0};
  auto rep2 = check_zero_classification(grow, 0.0, 0.5);
  CHECK(rep2.excursion_start == 1);
  CHECK(rep2.right_interior == 2);
  CHECK(rep2.ambiguous == 0);

  // Grid-scale sawtooth: excursions accumulate faster than the forward
  // window resolves them, so almost every zero is ambiguous.
  const int N = 4096;
  const double h = 1.0 / N;
  std::vector<double> saw(N + 1);
  for (int k = 0; k <= N; ++k) {
    int r = k % 8;
    saw[k] = 2.0 * h * (r < 4 ? r : 8 - r);
  }
  auto rep3 = check_zero_classification(saw, 2.0 * h, std::sqrt(h));
  CHECK(rep3.zeros.size() == rep3.kinds.size());
  CHECK(rep3.ambiguous > 400);
  CHECK(rep3.ambiguous + rep3.right_interior + rep3.excursion_start ==
        static_cast<int>(rep3.zeros.size()));
  REQUIRE_FALSE(rep3.ambiguous_indices.empty());
  CHECK(rep3.ambiguous_indices.front() == 0);
}

TEST_CASE("dormant wealth is constant on excursions and idempotent") {
  std::vector<double> spread{0, 1, 1, 0, 1, 1};
  auto dec = detect_excursions(spread, 0.0, 0.5);
  REQUIRE(dec.excursions.size() == 2);
  CHECK(dec.excursions[1].runs_to_horizon);

  std::vector<double> wealth{1, 2, 3, 4, 5, 6};
  auto v = dormant_transform(wealth, dec);
  // Closed excursion [1,3): frozen at the pre-close value wealth[2] = 3.
  // Open excursion [4,6): frozen at the horizon value 6.
  CHECK(v == std::vector<double>{1, 3, 3, 4, 6, 6});
  CHECK(dormant_transform(v, dec) == v);

  auto none = detect_excursions(std::vector<double>(6, 0.0), 0.0, 0.5);
  CHECK(dormant_transform(wealth, none) == wealth);
}

TEST_CASE("pointwise ledger matches hand accounting") {
  std::vector<double> bid{1, 1, 1}, ask{2, 2, 2}, stock{1, 1, 0};
  auto bond = path_bond(bid, ask, stock);
  CHECK(bond == std::vector<double>{-2, -2, -1});  // buy 1 at 2, hold, sell 1 at 1

  CHECK(liquidation_value_pt(-2, 1, 1, 2) == -1.0);
  CHECK(cost_value_pt(-2, 1, 1, 2) == 0.0);
  CHECK(admissibility_slack_pt(-2, 1, 1.0, 1, 2) == 1.0);

  CHECK(path_minimal_constant(bond, stock, bid, ask) == Catch::Approx(0.5));
  for (std::size_t k = 0; k < stock.size(); ++k) {
    CHECK(admissibility_slack_pt(bond[k], stock[k], 0.5, bid[k], ask[k]) >= 0.0);
  }
  CHECK(admissibility_slack_pt(bond[0], stock[0], 0.49, bid[0], ask[0]) < 0.0);

  // Short position, constant binding while still short: slack hits zero
  // exactly at the root of the ask branch.
  const double m_short = minimal_constant_pt(0, -1, 1, 2);
  CHECK(m_short == Catch::Approx(2.0 / 3.0));
  CHECK(admissibility_slack_pt(0, -1, m_short, 1, 2) == Catch::Approx(0.0).margin(1e-15));

  // Short position whose offset M + stock turns positive first: the bid
  // branch governs.
  const double m_flip = minimal_constant_pt(-5, -1, 1, 2);
  CHECK(m_flip == Catch::Approx(3.0));
  CHECK(admissibility_slack_pt(-5, -1, 3.0, 1, 2) == Catch::Approx(0.0).margin(1e-15));
  CHECK(admissibility_slack_pt(-5, -1, 2.9, 1, 2) < 0.0);
}

TEST_CASE("worst-case risk bounds hold for admissible capital-requirement strategies") {
  const int steps = 256;
  int early_hits = 0;
  for (int i = 0; i < 200; ++i) {
    ScenarioDraw d = draw_scenario(Scenario::kAdmissibility, ScenarioParams{}, steps, 21, i);
    auto stock = admissibility_strategy(d, 4);
    auto rep = worst_case_risk_check(d.bid, d.ask, d.xbid, d.xask, stock, 0.75);
    REQUIRE(rep.preconditions_ok);
    CHECK(rep.pass());
    CHECK(rep.checked == steps + 1);
    CHECK(rep.min_margin1 >= -1e-9);
    CHECK(rep.min_margin2 >= -1e-9);
    if (d.tau_index < steps / 2) ++early_hits;
  }
  CHECK(early_hits > 0);
}

TEST_CASE("risk check surfaces failed preconditions instead of fudging them") {
  const int steps = 256;
  // Find a scenario that genuinely needs more than M = 0.5 under raw quotes.
  for (int i = 0; i < 200; ++i) {
    ScenarioDraw d = draw_scenario(Scenario::kAdmissibility, ScenarioParams{}, steps, 21, i);
    auto stock = admissibility_strategy(d, 4);
    auto bond = path_bond(d.bid, d.ask, stock);
    if (path_minimal_constant(bond, stock, d.bid, d.ask) <= 0.55) continue;
    auto rep = worst_case_risk_check(d.bid, d.ask, d.xbid, d.xask, stock, 0.5);
    CHECK_FALSE(rep.preconditions_ok);
    CHECK(rep.precondition == "strategy is not M-admissible at raw quotes");
    CHECK(rep.first_precondition_index >= 0);
    CHECK_FALSE(rep.pass());
    return;
  }
  FAIL("no scenario requiring more than M = 0.5 found");
}

TEST_CASE("risk check refuses generators with negative lower envelopes") {
  ScenarioParams p;
  const int steps = 128;
  for (int i = 0; i < 50; ++i) {
    ScenarioDraw d = draw_scenario(Scenario::kJumpDate, p, steps, 13, i);
    double lo = 0.0;
    for (double v : d.xbid) lo = std::min(lo, v);
    if (lo >= -1e-9) continue;
    std::vector<double> flat(steps + 1, 0.0);
    auto rep = worst_case_risk_check(d.bid, d.ask, d.xbid, d.xask, flat, 1.0);
    CHECK_FALSE(rep.preconditions_ok);
    CHECK(rep.precondition == "negative lower envelope");
    CHECK(rep.first_precondition_index >= 0);
    return;
  }
  FAIL("no jump-date scenario with a negative lower envelope found");
}

TEST_CASE("capital requirements explode under raw quotes, stay bounded under envelopes") {
  CHECK(admissibility_ramp(0.0) == 0.0);
  CHECK(admissibility_ramp(0.75) == Catch::Approx(1.0));
  CHECK(admissibility_analytic_constant(4.0) == Catch::Approx(0.75));
  CHECK(admissibility_analytic_constant(16.0) == Catch::Approx(1.875));

  AdmissibilityRun r4 = admissibility_example_run(4, 200, 2048, 31);
  CHECK(r4.analytic_mn == Catch::Approx(0.75));
  // Grid estimates are biased low by the Stieltjes-sum deficit but land
  // within 10% of the analytic constant on a fine grid.
  CHECK(r4.raw_constant_max > 0.675);
  CHECK(r4.raw_constant_max < 0.7501);
  CHECK(r4.env_constant_max < 1.0);
  CHECK(r4.env_constant_max <= r4.raw_constant_max);
  CHECK(r4.raw_constant_mean <= r4.raw_constant_max);
  CHECK(r4.terminal_min <= r4.terminal_mean);
  CHECK(r4.terminal_mean <= r4.terminal_max);

  AdmissibilityRun r16 = admissibility_example_run(16, 200, 2048, 31);
  CHECK(r16.raw_constant_max > 1.0);          // requirement keeps growing with n
  CHECK(r16.env_constant_max < 1.0);          // envelope requirement does not
  CHECK(r16.raw_constant_max > r4.raw_constant_max);
}

TEST_CASE("a positive lower envelope is born at the jump date") {
  JumpDateRun run = jump_date_example_run(0.5, 256, 4000, 11);
  CHECK(run.fraction_positive == 1.0);
  CHECK(run.max_pre_jump == 0.0);
  CHECK(run.target_mean == Catch::Approx(std::sqrt(1.0 / 3.14159265358979323846)));
  CHECK(run.std_error < 0.02);
  CHECK(std::abs(run.mean_at_t1 - run.target_mean) < 4.0 * run.std_error + 0.01);
}
