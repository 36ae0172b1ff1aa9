// cps-lab: command-line entry point for the bid-ask scenario-tree laboratory.
//
// Commands: envelopes | value | check | find-cps | duality | simulate | doob
// | accept. All input and output is JSON. Exit codes: 0 success (or verdict
// holds), 1 condition-violated verdict, 2 input or usage error.
//
// Arithmetic kernel: exact rationals when --certified is given, otherwise
// chosen by model size, overridable with CPS_LAB_ARITH=rational|float. Float
// LP runs that stall numerically are retried on the exact kernel.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpslab/accept.hpp"
#include "cpslab/arbitrage.hpp"
#include "cpslab/corpus.hpp"
#include "cpslab/cps.hpp"
#include "cpslab/doob.hpp"
#include "cpslab/envelopes.hpp"
#include "cpslab/json_io.hpp"
#include "cpslab/ledger.hpp"
#include "cpslab/pathlab.hpp"
#include "cpslab/report.hpp"
#include "cpslab/simplex.hpp"
#include "cpslab/tree.hpp"

namespace {

using namespace cpslab;

int emit(const RunConfig& cfg, ArithMode mode, Json body, int exit_code) {
  Json rep = make_report(cfg, mode, std::move(body));
  const std::string text = dump_report(rep);
  if (!cfg.out_path.empty()) {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw SpecError("cannot write output file: " + cfg.out_path);
    f << text;
  }
  std::cout << text;
  return exit_code;
}

ArithMode pick_mode(bool certified, std::size_t nodes) {
  return certified ? ArithMode::kRational : select_arith_mode(nodes);
}

Strategy<double> convert_strategy(const Strategy<Rational>& s) {
  Strategy<double> out;
  out.stock.reserve(s.stock.size());
  for (const auto& x : s.stock) out.stock.push_back(arith_traits<Rational>::to_dbl(x));
  return out;
}

// ---------------------------------------------------------------------------
// envelopes
// ---------------------------------------------------------------------------

template <class F>
Json envelopes_body(const MarketModel<F>& m) {
  auto env = compute_envelopes(m);
  Json nodes = Json::object();
  for (int i = 0; i < m.tree.size(); ++i)
    nodes[m.tree.node(i).id] = {{"x_bid", json_value(env.x_bid[i])},
                                {"x_ask", json_value(env.x_ask[i])}};
  Json crossed = Json::array();
  for (int i : envelope_crossing(m.tree, env)) crossed.push_back(m.tree.node(i).id);
  return Json{{"envelopes", nodes}, {"crossed_nodes", crossed}};
}

int run_envelopes(const RunConfig& cfg) {
  auto m = load_market_file(cfg.inputs.at(0));
  const ArithMode mode = pick_mode(cfg.certified, m.tree.size());
  Json body = (mode == ArithMode::kRational)
                  ? envelopes_body(m)
                  : envelopes_body(convert_model<Rational, double>(m));
  return emit(cfg, mode, std::move(body), 0);
}

// ---------------------------------------------------------------------------
// value
// ---------------------------------------------------------------------------

template <class F>
Json value_body(const MarketModel<F>& m, const Strategy<F>& phi, ExecPrices exec,
                const std::optional<F>& madm, int& exit_code) {
  auto env = compute_envelopes(m);
  auto bond = wealth_ledger(m, env, phi, exec);
  auto pv = portfolio_values(m, env, phi, bond);
  Json nodes = Json::object();
  for (int i = 0; i < m.tree.size(); ++i)
    nodes[m.tree.node(i).id] = {{"bond", json_value(bond[i])},
                                {"stock", json_value(phi.stock[i])},
                                {"v_liq", json_value(pv.v_liq[i])},
                                {"v_cost", json_value(pv.v_cost[i])},
                                {"a_sup", json_value(pv.a_sup[i])}};
  Json body{{"execution", exec == ExecPrices::kRaw ? "raw" : "envelopes"},
            {"nodes", nodes},
            {"minimal_admissibility_constant",
             json_value(minimal_admissibility_constant(m, env, phi, bond))}};
  if (madm) {
    auto rep = is_admissible(m, env, phi, bond, *madm);
    Json adm{{"M", json_value(*madm)},
             {"admissible", rep.admissible},
             {"worst_slack", json_value(rep.worst_slack)}};
    if (rep.first_violation) adm["first_violation"] = m.tree.node(*rep.first_violation).id;
    body["admissibility"] = adm;
    if (!rep.admissible) exit_code = 1;
  }
  return body;
}

int run_value(const RunConfig& cfg, const std::string& exec_name, const std::string& madm_text) {
  auto m = load_market_file(cfg.inputs.at(0));
  auto phi = load_strategy_file(cfg.inputs.at(1), m.tree);
  const ExecPrices exec = (exec_name == "raw") ? ExecPrices::kRaw : ExecPrices::kEnvelopes;
  const ArithMode mode = pick_mode(cfg.certified, m.tree.size());
  int exit_code = 0;
  Json body;
  std::optional<Rational> madm_q;
  if (!madm_text.empty()) {
    madm_q = parse_rational(madm_text);
    if (!madm_q) throw SpecError("cannot parse --madm value: " + madm_text);
  }
  if (mode == ArithMode::kRational) {
    body = value_body(m, phi, exec, madm_q, exit_code);
  } else {
    std::optional<double> madm;
    if (madm_q) madm = arith_traits<Rational>::to_dbl(*madm_q);
    body = value_body(convert_model<Rational, double>(m), convert_strategy(phi), exec, madm,
                      exit_code);
  }
  return emit(cfg, mode, std::move(body), exit_code);
}

// ---------------------------------------------------------------------------
// check / find-cps / duality
// ---------------------------------------------------------------------------

template <class F>
Json verdict_body(const MarketModel<F>& m, const ArbitrageVerdict<F>& v) {
  Json body{{"condition", v.condition == ArbCondition::kNaNf ? "na-nf" : "na-ps"},
            {"holds", v.holds},
            {"certified", v.certified},
            {"reason", v.reason}};
  if (!v.holds) {
    Json w{{"node", v.witness_node},
           {"time", v.witness_time},
           {"v_liq", json_value(v.witness_v_liq)},
           {"v_cost", json_value(v.witness_v_cost)}};
    body["witness"] = w;
    if (v.has_certificate) {
      Json stock = Json::object();
      for (int i = 0; i < m.tree.size(); ++i)
        stock[m.tree.node(i).id] = json_value(v.certificate.stock[i]);
      body["certificate"] = {{"stock", stock},
                             {"execution",
                              v.certificate_prices == ExecPrices::kRaw ? "raw" : "envelopes"}};
    }
  }
  return body;
}

template <class F>
Json check_body(const MarketModel<F>& m, const std::string& condition, int& exit_code) {
  auto env = compute_envelopes(m);
  auto v = (condition == "na-ps") ? check_na_ps(m, env) : check_na_nf(m, env);
  if (!v.holds) exit_code = 1;
  return verdict_body(m, v);
}

int run_check(const RunConfig& cfg, const std::string& condition) {
  auto m = load_market_file(cfg.inputs.at(0));
  ArithMode mode = pick_mode(cfg.certified, m.tree.size());
  int exit_code = 0;
  Json body;
  if (mode == ArithMode::kRational) {
    body = check_body(m, condition, exit_code);
  } else {
    try {
      body = check_body(convert_model<Rational, double>(m), condition, exit_code);
    } catch (const LpNumericalFailure&) {
      mode = ArithMode::kRational;  // exact retry
      body = check_body(m, condition, exit_code);
    }
  }
  return emit(cfg, mode, std::move(body), exit_code);
}

template <class F>
Json cps_body(const MarketModel<F>& m, bool strict, int& exit_code) {
  auto env = compute_envelopes(m);
  auto cert = find_cps(m, env, strict);
  if (!cert) {
    exit_code = 1;
    return Json{{"exists", false}, {"strict", strict}};
  }
  Json price = Json::object(), weight = Json::object();
  for (int i = 0; i < m.tree.size(); ++i) {
    price[m.tree.node(i).id] = json_value(cert->price[i]);
    weight[m.tree.node(i).id] = json_value(cert->weight[i]);
  }
  Json body{{"exists", true},
            {"strict", strict},
            {"delta", json_value(cert->delta)},
            {"price", price},
            {"weight", weight}};
  if (strict) body["strict_slack"] = json_value(cert->strict_slack);
  auto ver = verify_cps(m, env, *cert);
  body["verified"] = ver.pass;
  return body;
}

int run_find_cps(const RunConfig& cfg, bool strict) {
  auto m = load_market_file(cfg.inputs.at(0));
  ArithMode mode = pick_mode(cfg.certified, m.tree.size());
  int exit_code = 0;
  Json body;
  if (mode == ArithMode::kRational) {
    body = cps_body(m, strict, exit_code);
  } else {
    try {
      body = cps_body(convert_model<Rational, double>(m), strict, exit_code);
    } catch (const LpNumericalFailure&) {
      mode = ArithMode::kRational;
      body = cps_body(m, strict, exit_code);
    }
  }
  return emit(cfg, mode, std::move(body), exit_code);
}

template <class F>
Json duality_body(const MarketModel<F>& m, int& exit_code) {
  auto env = compute_envelopes(m);
  auto v = check_na_nf(m, env);
  auto cert = find_cps(m, env);
  const bool cps_exists = cert.has_value();
  const bool consistent = (v.holds == cps_exists);
  if (!consistent) exit_code = 1;
  Json body{{"na_nf_holds", v.holds},
            {"cps_exists", cps_exists},
            {"consistent", consistent}};
  if (cert) body["delta"] = json_value(cert->delta);
  return body;
}

int run_duality(const RunConfig& cfg) {
  auto m = load_market_file(cfg.inputs.at(0));
  ArithMode mode = pick_mode(cfg.certified, m.tree.size());
  int exit_code = 0;
  Json body;
  if (mode == ArithMode::kRational) {
    body = duality_body(m, exit_code);
  } else {
    try {
      body = duality_body(convert_model<Rational, double>(m), exit_code);
    } catch (const LpNumericalFailure&) {
      mode = ArithMode::kRational;
      body = duality_body(m, exit_code);
    }
  }
  return emit(cfg, mode, std::move(body), exit_code);
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

Json excursion_json(const ExcursionDecomposition& dec) {
  Json list = Json::array();
  for (const auto& e : dec.excursions)
    list.push_back({{"start", e.start},
                    {"end", e.end},
                    {"continuous_start", e.continuous_start},
                    {"runs_to_horizon", e.runs_to_horizon}});
  return list;
}

int run_simulate(const RunConfig& cfg, const ScenarioParams& params, double eps) {
  auto kind = scenario_from_name(cfg.scenario);
  if (!kind) throw BadParams("unknown scenario: " + cfg.scenario);
  PathSet ps = simulate_paths(*kind, params, cfg.grid, cfg.n_scen, cfg.seed);
  Json scen = Json::array();
  const int detail_cap = std::min(ps.scenarios(), 8);
  for (int i = 0; i < detail_cap; ++i) {
    auto dec = detect_excursions(ps, i, eps);
    auto zc = check_zero_classification(ps, i, eps);
    Json row{{"scenario", i},
             {"excursions", excursion_json(dec)},
             {"zeros",
              {{"right_interior", zc.right_interior},
               {"excursion_start", zc.excursion_start},
               {"ambiguous", zc.ambiguous}}}};
    if (*kind == Scenario::kAdmissibility) {
      row["tau_index"] = ps.tau_index[i];
      row["u"] = ps.u_draw[i];
    }
    scen.push_back(row);
  }
  int total_excursions = 0, total_ambiguous = 0;
  double max_spread = 0.0;
  for (int i = 0; i < ps.scenarios(); ++i) {
    auto dec = detect_excursions(ps, i, eps);
    total_excursions += static_cast<int>(dec.excursions.size());
    auto zc = check_zero_classification(ps, i, eps);
    total_ambiguous += zc.ambiguous;
    for (double s : ps.spread(i)) max_spread = std::max(max_spread, s);
  }
  Json body{{"scenario", scenario_name(*kind)},
            {"n_scen", ps.scenarios()},
            {"grid", ps.steps},
            {"horizon", ps.horizon},
            {"eps", eps},
            {"summary",
             {{"total_excursions", total_excursions},
              {"total_ambiguous_zeros", total_ambiguous},
              {"max_spread", max_spread}}},
            {"scenarios", scen}};
  return emit(cfg, ArithMode::kFloat, std::move(body), 0);
}

// ---------------------------------------------------------------------------
// doob corpus
// ---------------------------------------------------------------------------

int run_doob(const RunConfig& cfg) {
  int violations = 0, precondition_failures = 0, emery_order_failures = 0;
  double worst_a2 = 0.0, worst_m2 = 0.0;
  for (int i = 0; i < cfg.count; ++i) {
    SimRng rng(cfg.seed, 700000 + i);
    EventTree tree = random_tree(rng, 4, 3);
    auto weight = random_weights(rng, tree);
    auto inst = random_supermartingale(rng, tree, weight);
    auto rep = verify_moment_bounds(tree, weight, inst.y, inst.eps1, inst.eps2, inst.eps3);
    if (!rep.preconditions_ok)
      ++precondition_failures;
    else if (!rep.pass)
      ++violations;
    worst_a2 = std::max(worst_a2, rep.a2_ratio);
    worst_m2 = std::max(worst_m2, rep.m2_ratio);
    auto eb = emery_distance_bounds(tree, weight, inst.y);
    if (eb.lower > eb.upper) ++emery_order_failures;
  }
  const bool ok = violations == 0 && precondition_failures == 0 && emery_order_failures == 0;
  Json body{{"count", cfg.count},
            {"bound_violations", violations},
            {"precondition_failures", precondition_failures},
            {"emery_order_failures", emery_order_failures},
            {"worst_a2_ratio", worst_a2},
            {"worst_m2_ratio", worst_m2},
            {"pass", ok}};
  return emit(cfg, ArithMode::kRational, std::move(body), ok ? 0 : 1);
}

// ---------------------------------------------------------------------------
// accept
// ---------------------------------------------------------------------------

int run_accept(const RunConfig& cfg, double scale, bool mutate) {
  AcceptOptions o;
  o.seed = cfg.seed;
  o.scale = scale;
  o.mutate_envelopes = mutate;
  auto summary = run_acceptance(o);
  for (const auto& it : summary.items)
    std::cerr << "criterion " << it.id << " (" << it.name << "): "
              << (it.ok() ? (it.status == "widened" ? "PASS (widened)" : "PASS") : "FAIL")
              << " - " << it.detail << "\n";
  return emit(cfg, ArithMode::kRational, summary.to_json(), summary.all_ok ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bid-ask scenario-tree laboratory"};
  app.require_subcommand(1);

  std::string spec_path, strategy_path, out_path, condition = "na-nf", exec_name = "envelopes";
  std::string madm_text, scenario = "brownian";
  bool certified = false, strict = false, mutate = false;
  std::uint64_t seed = 2023;
  int grid = 200, n_scen = 8, count = 200;
  double scale = 1.0, eps = 1e-6, tol = kFloatTol;
  ScenarioParams params;

  auto add_common = [&](CLI::App* cmd, bool needs_spec) {
    if (needs_spec)
      cmd->add_option("--spec", spec_path, "market specification JSON")->required();
    cmd->add_flag("--certified", certified, "force the exact rational kernel");
    cmd->add_option("--out", out_path, "also write the report to this file");
    cmd->add_option("--tol", tol, "float-mode tolerance override (echoed in the report)");
  };

  auto* cmd_env = app.add_subcommand("envelopes", "actual bid/ask envelopes and crossings");
  add_common(cmd_env, true);

  auto* cmd_value = app.add_subcommand("value", "ledger valuation of a strategy");
  add_common(cmd_value, true);
  cmd_value->add_option("--strategy", strategy_path, "strategy JSON")->required();
  cmd_value->add_option("--mode", exec_name, "execution prices: envelopes|raw")
      ->check(CLI::IsMember({"envelopes", "raw"}));
  cmd_value->add_option("--madm", madm_text, "admissibility constant M (rational literal)");

  auto* cmd_check = app.add_subcommand("check", "no-arbitrage verdicts");
  add_common(cmd_check, true);
  cmd_check->add_option("--condition", condition, "na-nf|na-ps")
      ->check(CLI::IsMember({"na-nf", "na-ps"}));

  auto* cmd_cps = app.add_subcommand("find-cps", "search for a consistent price system");
  add_common(cmd_cps, true);
  cmd_cps->add_flag("--strict", strict, "require prices strictly inside the envelopes");

  auto* cmd_dual = app.add_subcommand("duality", "checker vs CPS search consistency");
  add_common(cmd_dual, true);

  auto* cmd_sim = app.add_subcommand("simulate", "sampled bid/ask scenario paths");
  add_common(cmd_sim, false);
  cmd_sim->add_option("--scenario", scenario, "constant|brownian|jump-date|admissibility");
  cmd_sim->add_option("--n-scen", n_scen, "scenario count");
  cmd_sim->add_option("--grid", grid, "grid steps");
  cmd_sim->add_option("--seed", seed, "master seed");
  cmd_sim->add_option("--eps", eps, "excursion threshold");
  cmd_sim->add_option("--horizon", params.horizon, "time horizon (capital-requirement scenario forces 2)");
  cmd_sim->add_option("--bid0", params.bid0, "initial bid quote");
  cmd_sim->add_option("--ask0", params.ask0, "initial ask quote (equal quotes give a frictionless run)");
  cmd_sim->add_option("--drift-bid", params.drift_bid, "bid drift per unit time");
  cmd_sim->add_option("--drift-ask", params.drift_ask, "ask drift per unit time");
  cmd_sim->add_option("--vol", params.vol, "volatility of the shared driver");
  cmd_sim->add_option("--t1", params.t1, "jump date of the jump-date scenario");

  auto* cmd_doob = app.add_subcommand("doob", "decomposition bound corpus");
  add_common(cmd_doob, false);
  std::string corpus = "random";
  cmd_doob->add_option("--corpus", corpus, "corpus kind")->check(CLI::IsMember({"random"}));
  cmd_doob->add_option("--count", count, "instance count");
  cmd_doob->add_option("--seed", seed, "master seed");

  auto* cmd_accept = app.add_subcommand("accept", "acceptance gate");
  add_common(cmd_accept, false);
  cmd_accept->add_option("--seed", seed, "master seed");
  cmd_accept->add_option("--scale", scale, "scenario-count scale factor (0, 1]");
  cmd_accept->add_flag("--mutate-envelopes", mutate,
                       "negative control: corrupt the checker's envelope feed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  cfg.certified = certified;
  cfg.seed = seed;
  cfg.grid = grid;
  cfg.n_scen = n_scen;
  cfg.count = count;
  cfg.scenario = scenario;
  cfg.out_path = out_path;
  cfg.tolerance = tol;
  if (!spec_path.empty()) cfg.inputs.push_back(spec_path);
  if (!strategy_path.empty()) cfg.inputs.push_back(strategy_path);

  try {
    if (app.got_subcommand(cmd_env)) {
      cfg.command = "envelopes";
      return run_envelopes(cfg);
    }
    if (app.got_subcommand(cmd_value)) {
      cfg.command = "value";
      cfg.extra = Json{{"mode", exec_name}};
      if (!madm_text.empty()) cfg.extra["madm"] = madm_text;
      return run_value(cfg, exec_name, madm_text);
    }
    if (app.got_subcommand(cmd_check)) {
      cfg.command = "check";
      cfg.extra = Json{{"condition", condition}};
      return run_check(cfg, condition);
    }
    if (app.got_subcommand(cmd_cps)) {
      cfg.command = "find-cps";
      cfg.extra = Json{{"strict", strict}};
      return run_find_cps(cfg, strict);
    }
    if (app.got_subcommand(cmd_dual)) {
      cfg.command = "duality";
      return run_duality(cfg);
    }
    if (app.got_subcommand(cmd_sim)) {
      cfg.command = "simulate";
      cfg.extra = Json{{"eps", eps},
                       {"horizon", params.horizon},
                       {"vol", params.vol},
                       {"t1", params.t1}};
      return run_simulate(cfg, params, eps);
    }
    if (app.got_subcommand(cmd_doob)) {
      cfg.command = "doob";
      cfg.extra = Json{{"corpus", corpus}};
      return run_doob(cfg);
    }
    if (app.got_subcommand(cmd_accept)) {
      cfg.command = "accept";
      cfg.extra = Json{{"scale", scale}, {"mutate_envelopes", mutate}};
      return run_accept(cfg, scale, mutate);
    }
  } catch (const Json::parse_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const SpecError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const BadParams& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const LedgerError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
