#pragma once

// Consistent price systems by linear programming.
//
// A consistent price system is a strictly positive process S between
// the actual envelopes together with a measure Q, equivalent to the
// reference measure, making S a Q-martingale. On a finite tree the
// search is linear in the unnormalized node masses m(n) (= Q-probability
// of reaching n) and node values y(n) = m(n) * S(n):
//   m(root) = 1,   m(n) = sum over children m(c),
//   y(n) = sum over children y(c),
//   x_bid(n) m(n) <= y(n) <= x_ask(n) m(n).
// Strict positivity — the open part of "equivalent measure" — becomes
// the checkable certificate delta: maximize delta subject to
// m(n) >= delta everywhere and y(leaf) >= delta (terminal prices must
// stay away from zero). delta > 0 at the optimum iff a consistent
// price system exists; S = y/m and Q transition weights m(c)/m(n)
// reconstruct it.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpslab/arbitrage.hpp"
#include "cpslab/arith.hpp"
#include "cpslab/envelopes.hpp"
#include "cpslab/simplex.hpp"
#include "cpslab/tree.hpp"

namespace cpslab {

template <class F>
struct CpsCertificate {
  TreeProcess<F> price;   // S(n)
  TreeProcess<F> weight;  // Q transition weight from parent; 1 at root
  F delta = F(0);         // certified minimum of node masses / leaf values
  bool strict_mode = false;
  F strict_slack = F(0);  // min mass-weighted interior slack (strict mode)
};

namespace detail {

template <class F>
void add_cps_constraints(const MarketModel<F>& m, const EnvelopePair<F>& env, LpProblem<F>& lp,
                         std::vector<int>& vm, std::vector<int>& vy) {
  const EventTree& tree = m.tree;
  vm.resize(tree.size());
  vy.resize(tree.size());
  for (int i = 0; i < tree.size(); ++i) {
    vm[i] = lp.add_var(F(0));
    vy[i] = lp.add_var(F(0));
  }
  lp.add_row({{vm[tree.root()], F(1)}}, RowSense::kEq, F(1));
  for (int i = 0; i < tree.size(); ++i) {
    const auto& ch = tree.node(i).children;
    if (!ch.empty()) {
      std::vector<std::pair<int, F>> mass{{vm[i], F(1)}}, val{{vy[i], F(1)}};
      for (int c : ch) {
        mass.emplace_back(vm[c], F(-1));
        val.emplace_back(vy[c], F(-1));
      }
      lp.add_row(std::move(mass), RowSense::kEq, F(0));
      lp.add_row(std::move(val), RowSense::kEq, F(0));
    }
    lp.add_row({{vy[i], F(1)}, {vm[i], -env.x_bid[i]}}, RowSense::kGe, F(0));
    lp.add_row({{vm[i], env.x_ask[i]}, {vy[i], F(-1)}}, RowSense::kGe, F(0));
  }
}

}  // namespace detail

/// Search for a consistent price system. Returns the certificate iff
/// one exists (optimal delta > 0); strict mode additionally pushes S
/// into the interior of the envelope band wherever the band has width,
/// maximizing the minimal mass-weighted slack (an extension beyond the
/// base construction).
template <class F>
std::optional<CpsCertificate<F>> find_cps(const MarketModel<F>& m, const EnvelopePair<F>& env,
                                          bool strict = false) {
  const EventTree& tree = m.tree;
  LpProblem<F> lp;
  std::vector<int> vm, vy;
  detail::add_cps_constraints(m, env, lp, vm, vy);
  int vdelta = lp.add_var(F(1));
  for (int i = 0; i < tree.size(); ++i)
    lp.add_row({{vm[i], F(1)}, {vdelta, F(-1)}}, RowSense::kGe, F(0));
  for (int leaf : tree.terminals())
    lp.add_row({{vy[leaf], F(1)}, {vdelta, F(-1)}}, RowSense::kGe, F(0));
  auto res = solve_lp(lp);
  // Infeasible is a real outcome: any price system yields a feasible point,
  // so an empty feasible set certifies that none exists. Unbounded cannot
  // happen (the root-mass row pins delta <= 1).
  if (res.status == LpStatus::kInfeasible) return std::nullopt;
  if (res.status != LpStatus::kOptimal)
    throw std::logic_error("mass LP cannot be unbounded (delta <= root mass = 1)");
  const F tol = arith_traits<F>::tol();
  if (!(res.x[vdelta] > tol)) return std::nullopt;

  std::vector<F> mass(tree.size()), value(tree.size());
  F delta = res.x[vdelta];
  if (strict) {
    // Second phase: keep half the certified mass floor, maximize the
    // minimal interior slack over nodes with a positive envelope
    // spread. sigma <= y - x_bid m and sigma <= x_ask m - y there.
    LpProblem<F> lp2;
    std::vector<int> wm, wy;
    detail::add_cps_constraints(m, env, lp2, wm, wy);
    int vsigma = lp2.add_var(F(1));
    F floor = delta / F(2);
    bool any_spread = false;
    for (int i = 0; i < tree.size(); ++i) {
      lp2.add_row({{wm[i], F(1)}}, RowSense::kGe, floor);
      if (definitely_positive(F(env.x_ask[i] - env.x_bid[i]))) {
        any_spread = true;
        lp2.add_row({{wy[i], F(1)}, {wm[i], -env.x_bid[i]}, {vsigma, F(-1)}}, RowSense::kGe,
                    F(0));
        lp2.add_row({{wm[i], env.x_ask[i]}, {wy[i], F(-1)}, {vsigma, F(-1)}}, RowSense::kGe,
                    F(0));
      }
    }
    for (int leaf : tree.terminals())
      lp2.add_row({{wy[leaf], F(1)}}, RowSense::kGe, floor);
    if (any_spread) {
      auto res2 = solve_lp(lp2);
      if (res2.status != LpStatus::kOptimal)
        throw std::logic_error("strict-slack LP is feasible and slack-bounded on spread nodes");
      for (int i = 0; i < tree.size(); ++i) {
        mass[i] = res2.x[wm[i]];
        value[i] = res2.x[wy[i]];
      }
      CpsCertificate<F> cert;
      cert.strict_mode = true;
      cert.strict_slack = res2.objective;
      cert.delta = floor;
      cert.price.resize(tree.size());
      cert.weight.assign(tree.size(), F(1));
      for (int i = 0; i < tree.size(); ++i) {
        cert.price[i] = value[i] / mass[i];
        int p = tree.node(i).parent;
        if (p >= 0) cert.weight[i] = mass[i] / mass[p];
      }
      return cert;
    }
    // No spread anywhere: fall through to the base certificate.
  }
  for (int i = 0; i < tree.size(); ++i) {
    mass[i] = res.x[vm[i]];
    value[i] = res.x[vy[i]];
  }
  CpsCertificate<F> cert;
  cert.delta = delta;
  cert.strict_mode = strict;
  cert.price.resize(tree.size());
  cert.weight.assign(tree.size(), F(1));
  for (int i = 0; i < tree.size(); ++i) {
    cert.price[i] = value[i] / mass[i];
    int p = tree.node(i).parent;
    if (p >= 0) cert.weight[i] = mass[i] / mass[p];
  }
  return cert;
}

/// Independent re-validation of a certificate (from this module or
/// anywhere else): martingale residual, weight normalization, weight
/// positivity, price positivity, envelope bounds.
template <class F>
struct CpsVerification {
  F max_martingale_residual = F(0);
  F max_weight_sum_residual = F(0);
  F max_bound_violation = F(0);
  F min_weight = F(0);
  F min_price = F(0);
  bool pass = false;
};

template <class F>
CpsVerification<F> verify_cps(const MarketModel<F>& m, const EnvelopePair<F>& env,
                              const CpsCertificate<F>& cert) {
  const EventTree& tree = m.tree;
  CpsVerification<F> rep;
  auto abs_f = [](const F& x) { return x < F(0) ? F(-x) : x; };
  bool first = true;
  for (int i = 0; i < tree.size(); ++i) {
    const auto& ch = tree.node(i).children;
    if (!ch.empty()) {
      F ev(0), wsum(0);
      for (int c : ch) {
        ev += cert.weight[c] * cert.price[c];
        wsum += cert.weight[c];
      }
      F res = abs_f(F(cert.price[i] - ev));
      if (res > rep.max_martingale_residual) rep.max_martingale_residual = res;
      F wres = abs_f(F(wsum - F(1)));
      if (wres > rep.max_weight_sum_residual) rep.max_weight_sum_residual = wres;
    }
    F viol = positive_part(F(env.x_bid[i] - cert.price[i]));
    F viol2 = positive_part(F(cert.price[i] - env.x_ask[i]));
    if (viol2 > viol) viol = viol2;
    if (viol > rep.max_bound_violation) rep.max_bound_violation = viol;
    F w = i == tree.root() ? F(1) : cert.weight[i];
    if (first || w < rep.min_weight) rep.min_weight = w;
    if (first || cert.price[i] < rep.min_price) rep.min_price = cert.price[i];
    first = false;
  }
  const F tol = arith_traits<F>::tol();
  rep.pass = rep.max_martingale_residual <= tol && rep.max_weight_sum_residual <= tol &&
             rep.max_bound_violation <= tol && definitely_positive(rep.min_weight) &&
             definitely_positive(rep.min_price);
  return rep;
}

/// Converse direction: the frictionless market quoting S on both sides
/// under the original reference measure must itself be clean — both
/// no-arbitrage conditions hold and positions stay finite wherever the
/// price actually moves.
template <class F>
struct RoundtripReport {
  bool na_nf_holds = false;
  bool na_ps_holds = false;
  bool positions_finite = false;
  bool pass = false;
};

template <class F>
RoundtripReport<F> frictionless_roundtrip(const MarketModel<F>& original,
                                          const CpsCertificate<F>& cert) {
  MarketModel<F> m;
  m.tree = original.tree;
  m.bid = cert.price;
  m.ask = cert.price;
  m.weight = original.weight;
  auto env = compute_envelopes(m);
  RoundtripReport<F> rep;
  rep.na_nf_holds = check_na_nf(m, env).holds;
  rep.na_ps_holds = check_na_ps(m, env).holds;
  rep.positions_finite = true;
  for (int i = 0; i < m.tree.size(); ++i) {
    if (m.tree.is_terminal(i)) continue;
    auto bound = position_bound(m, env, i);
    if (!bound) continue;  // reversible: no finiteness claim
    auto lp = max_position_lp(m, env, i);
    if (!lp || *lp > *bound + arith_traits<F>::tol()) rep.positions_finite = false;
  }
  rep.pass = rep.na_nf_holds && rep.na_ps_holds && rep.positions_finite;
  return rep;
}

}  // namespace cpslab
