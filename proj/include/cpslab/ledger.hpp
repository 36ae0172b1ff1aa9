#pragma once

// Self-financing wealth accounting on event trees.
//
// A strategy is the stock holding phi(n) after trading at node n; the
// bond account is derived: each net trade d = phi(n) - phi(parent)
// moves the bond by -d+ * ask + d- * bid at the node's own prices
// (post-trade convention: positions are chosen with the information at
// the node and executed there). Execution prices are the envelopes by
// default; raw quotes are available for comparison runs.
//
// Portfolio values (always at envelope prices):
//   v_liq  = bond + phi+ * x_bid - phi- * x_ask   (liquidate now)
//   v_cost = bond + phi+ * x_ask - phi- * x_bid   (rebuild now)
// M-admissibility at every node:
//   bond + M + (phi+M)+ * x_bid - (phi+M)- * x_ask >= 0,
// i.e. the liquidation value of the position topped up with M bonds
// and M shares stays nonnegative.

#include <optional>
#include <string>
#include <vector>

#include "cpslab/envelopes.hpp"
#include "cpslab/tree.hpp"

namespace cpslab {

struct LedgerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExecPrices { kEnvelopes, kRaw };

template <class F>
struct Strategy {
  TreeProcess<F> stock;  // phi(n), post-trade holding at node n
};

/// Bond account implied by the self-financing rule.
/// Envelope mode refuses to trade where the envelopes cross.
template <class F>
TreeProcess<F> wealth_ledger(const MarketModel<F>& m, const EnvelopePair<F>& env,
                             const Strategy<F>& phi,
                             ExecPrices mode = ExecPrices::kEnvelopes) {
  const EventTree& tree = m.tree;
  const TreeProcess<F>& pb = mode == ExecPrices::kEnvelopes ? env.x_bid : m.bid;
  const TreeProcess<F>& pa = mode == ExecPrices::kEnvelopes ? env.x_ask : m.ask;
  TreeProcess<F> bond(tree.size());
  for (int n = 0; n < tree.size(); ++n) {
    int p = tree.node(n).parent;
    F prev_stock = p < 0 ? F(0) : phi.stock[p];
    F prev_bond = p < 0 ? F(0) : bond[p];
    F d = phi.stock[n] - prev_stock;
    if (mode == ExecPrices::kEnvelopes && crossed_at(env, n) &&
        (definitely_positive(d) || definitely_negative(d)))
      throw LedgerError("trade at crossed node " + tree.node(n).id);
    bond[n] = prev_bond - positive_part(d) * pa[n] + negative_part(d) * pb[n];
  }
  return bond;
}

template <class F>
struct PortfolioValues {
  TreeProcess<F> v_liq;
  TreeProcess<F> v_cost;
  /// Running pathwise supremum of v_cost (from the flat pre-trade start,
  /// whose cost value is 0), so a_sup >= 0 everywhere.
  TreeProcess<F> a_sup;
};

template <class F>
PortfolioValues<F> portfolio_values(const MarketModel<F>& m, const EnvelopePair<F>& env,
                                    const Strategy<F>& phi, const TreeProcess<F>& bond) {
  const EventTree& tree = m.tree;
  PortfolioValues<F> out;
  out.v_liq.resize(tree.size());
  out.v_cost.resize(tree.size());
  out.a_sup.resize(tree.size());
  for (int n = 0; n < tree.size(); ++n) {
    const F& s = phi.stock[n];
    out.v_liq[n] = bond[n] + positive_part(s) * env.x_bid[n] - negative_part(s) * env.x_ask[n];
    out.v_cost[n] = bond[n] + positive_part(s) * env.x_ask[n] - negative_part(s) * env.x_bid[n];
    int p = tree.node(n).parent;
    F prev = p < 0 ? F(0) : out.a_sup[p];
    out.a_sup[n] = out.v_cost[n] > prev ? out.v_cost[n] : prev;
  }
  return out;
}

/// Admissibility slack at one node; >= 0 means the node passes.
template <class F>
F admissibility_slack(const EnvelopePair<F>& env, const F& bond, const F& stock, const F& M,
                      int n) {
  F s = stock + M;
  return bond + M + positive_part(s) * env.x_bid[n] - negative_part(s) * env.x_ask[n];
}

template <class F>
struct AdmissibilityReport {
  bool admissible = true;
  std::optional<int> first_violation;  // node index
  F worst_slack = F(0);
};

template <class F>
AdmissibilityReport<F> is_admissible(const MarketModel<F>& m, const EnvelopePair<F>& env,
                                     const Strategy<F>& phi, const TreeProcess<F>& bond,
                                     const F& M) {
  AdmissibilityReport<F> rep;
  const F tol = arith_traits<F>::tol();
  for (int n = 0; n < m.tree.size(); ++n) {
    F slack = admissibility_slack(env, bond[n], phi.stock[n], M, n);
    if (n == 0 || slack < rep.worst_slack) rep.worst_slack = slack;
    if (slack < -tol && rep.admissible) {
      rep.admissible = false;
      rep.first_violation = n;
    }
  }
  return rep;
}

/// Smallest M >= 0 making the strategy M-admissible. The slack is
/// continuous and strictly increasing in M (slope 1 + x_bid or
/// 1 + x_ask), so the per-node requirement solves in closed form.
template <class F>
F minimal_admissibility_constant(const MarketModel<F>& m, const EnvelopePair<F>& env,
                                 const Strategy<F>& phi, const TreeProcess<F>& bond) {
  F m_star(0);
  for (int n = 0; n < m.tree.size(); ++n) {
    const F& b = bond[n];
    const F& s = phi.stock[n];
    F need(0);
    if (s >= F(0)) {
      need = -(b + s * env.x_bid[n]) / (F(1) + env.x_bid[n]);
    } else {
      // With M <= -s the position including the top-up stays short.
      F short_root = -(b + s * env.x_ask[n]) / (F(1) + env.x_ask[n]);
      if (short_root < F(-s))
        need = short_root;
      else
        need = -(b + s * env.x_bid[n]) / (F(1) + env.x_bid[n]);
    }
    if (need > m_star) m_star = need;
  }
  return m_star;
}

/// Liquidation floor of the carried-in position against the one-step
/// sibling extremes: at node n (time t), the holdings chosen at the
/// parent are topped up with M and valued at the worst quote the
/// sibling set can reveal at t,
///   L(n) = bond(parent) + M + (phi(parent)+M)+ * min-sibling x_bid
///                           - (phi(parent)+M)- * max-sibling x_ask.
/// L is constant across sibling sets (known one step ahead) and any
/// M-admissible strategy satisfies L >= 0: trading at a node's own
/// prices never raises the admissibility slack there, so the carried-in
/// slack dominates the post-trade slack at the extremal sibling.
template <class F>
struct FloorReport {
  TreeProcess<F> floor;
  bool ok = true;
  std::optional<int> first_violation;
};

template <class F>
FloorReport<F> predictable_liquidation_floor(const MarketModel<F>& m,
                                             const EnvelopePair<F>& env,
                                             const Strategy<F>& phi,
                                             const TreeProcess<F>& bond, const F& M) {
  const EventTree& tree = m.tree;
  PredictablePair<F> lo = predictable_envelopes(tree, env.x_bid);
  PredictablePair<F> hi = predictable_envelopes(tree, env.x_ask);
  FloorReport<F> rep;
  rep.floor.resize(tree.size());
  const F tol = arith_traits<F>::tol();
  for (int n = 0; n < tree.size(); ++n) {
    int p = tree.node(n).parent;
    F pb = p < 0 ? F(0) : bond[p];
    F ps = p < 0 ? F(0) : phi.stock[p];
    F s = ps + M;
    rep.floor[n] = pb + M + positive_part(s) * lo.lower[n] - negative_part(s) * hi.upper[n];
    if (rep.floor[n] < -tol && rep.ok) {
      rep.ok = false;
      rep.first_violation = n;
    }
  }
  return rep;
}

}  // namespace cpslab
