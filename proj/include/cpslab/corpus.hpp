#pragma once

// Deterministic random corpora for property tests and the acceptance gate.
//
// Everything draws through SimRng streams derived from a master seed, so a
// corpus is a pure function of (seed, index).  Prices and weights are built
// from small-denominator rationals to keep exact LP runs fast.

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "cpslab/envelopes.hpp"
#include "cpslab/ledger.hpp"
#include "cpslab/rational.hpp"
#include "cpslab/rng.hpp"
#include "cpslab/tree.hpp"

namespace cpslab {

// Random event tree: every leaf sits at the same horizon (a scenario tree
// property the builder enforces), depth uniform on [1, max_depth], branching
// uniform on [1, max_branch] per inner node.
inline EventTree random_tree(SimRng& rng, int max_depth, int max_branch) {
  const int depth = static_cast<int>(rng.uniform_int(1, max_depth));
  std::vector<std::tuple<std::string, std::string, int>> rows;
  rows.emplace_back("n0", "", 0);
  std::vector<std::pair<std::string, int>> frontier{{"n0", 0}};
  int next_id = 1;
  while (!frontier.empty()) {
    std::vector<std::pair<std::string, int>> next;
    for (const auto& [id, t] : frontier) {
      if (t == depth) continue;
      const int kids = static_cast<int>(rng.uniform_int(1, max_branch));
      for (int c = 0; c < kids; ++c) {
        std::string cid = "n" + std::to_string(next_id++);
        rows.emplace_back(cid, id, t + 1);
        next.emplace_back(cid, t + 1);
      }
    }
    frontier = std::move(next);
  }
  return EventTree::build(rows);
}

inline TreeProcess<Rational> random_weights(SimRng& rng, const EventTree& tree) {
  TreeProcess<Rational> w(tree.size(), Rational(1));
  for (int i = 0; i < tree.size(); ++i) {
    const auto& kids = tree.node(i).children;
    if (kids.empty()) continue;
    Rational total(0);
    std::vector<Rational> raw(kids.size());
    for (std::size_t c = 0; c < kids.size(); ++c) {
      raw[c] = Rational(rng.uniform_int(1, 4));
      total += raw[c];
    }
    for (std::size_t c = 0; c < kids.size(); ++c) w[kids[c]] = raw[c] / total;
  }
  return w;
}

// Unconstrained quotes: independent small-rational bid/ask per node, spread
// zero with positive probability (frictionless nodes create envelope
// crossings and arbitrage-rich models).
inline MarketModel<Rational> random_market(SimRng& rng, const EventTree& tree) {
  MarketModel<Rational> m;
  m.tree = tree;
  m.bid.resize(tree.size());
  m.ask.resize(tree.size());
  m.weight = random_weights(rng, tree);
  for (int i = 0; i < tree.size(); ++i) {
    const long q = rng.uniform_int(1, 4);
    m.bid[i] = make_rational(rng.uniform_int(0, 3 * q), q);
    if (rng.uniform_int(0, 2) == 0) {
      m.ask[i] = m.bid[i];  // frictionless node
    } else {
      m.ask[i] = m.bid[i] + make_rational(rng.uniform_int(0, 2 * q), q);
    }
    if (tree.is_terminal(i) && m.ask[i] == Rational(0)) m.ask[i] = make_rational(1, 2);
  }
  return m;
}

// Arbitrage-free quotes by construction: bid/ask wrap a strictly positive
// exact martingale mid (multiplicative increments recentred to conditional
// mean one), so (mid, weights) is a consistent price system and the
// numeraire-free no-arbitrage condition holds.
inline MarketModel<Rational> random_martingale_market(SimRng& rng, const EventTree& tree) {
  MarketModel<Rational> m;
  m.tree = tree;
  m.bid.resize(tree.size());
  m.ask.resize(tree.size());
  m.weight = random_weights(rng, tree);
  TreeProcess<Rational> mid(tree.size());
  mid[tree.root()] = Rational(2);
  for (int i = 0; i < tree.size(); ++i) {
    const auto& kids = tree.node(i).children;
    if (!kids.empty()) {
      std::vector<Rational> g(kids.size());
      Rational mean(0);
      for (std::size_t c = 0; c < kids.size(); ++c) {
        g[c] = Rational(1) + make_rational(rng.uniform_int(-2, 2), 8);
        mean += m.weight[kids[c]] * g[c];
      }
      for (std::size_t c = 0; c < kids.size(); ++c)
        mid[kids[c]] = mid[i] * g[c] / mean;
    }
    const Rational half = make_rational(rng.uniform_int(0, 2), 16);
    m.bid[i] = mid[i] * (Rational(1) - half);
    m.ask[i] = mid[i] * (Rational(1) + half);
  }
  return m;
}

// Random stock path on the tree with small-denominator positions in [-2, 2].
inline Strategy<Rational> random_strategy(SimRng& rng, const EventTree& tree) {
  Strategy<Rational> s;
  s.stock.resize(tree.size());
  for (int i = 0; i < tree.size(); ++i)
    s.stock[i] = make_rational(rng.uniform_int(-8, 8), 4);
  return s;
}

// Strategy whose terminal bond and stock components both clear -M for the
// smallest such M >= 0 (exact), built from raw-price execution.
struct TerminalBoundedDraw {
  Strategy<Rational> phi;
  TreeProcess<Rational> bond;
  Rational M;
};

inline TerminalBoundedDraw random_terminal_bounded_strategy(SimRng& rng,
                                                            const MarketModel<Rational>& m,
                                                            const EnvelopePair<Rational>& env) {
  TerminalBoundedDraw d;
  d.phi = random_strategy(rng, m.tree);
  d.bond = wealth_ledger(m, env, d.phi, ExecPrices::kRaw);
  Rational m_floor(0);
  for (int n : m.tree.terminals()) {
    if (-d.bond[n] > m_floor) m_floor = -d.bond[n];
    if (-d.phi.stock[n] > m_floor) m_floor = -d.phi.stock[n];
  }
  d.M = m_floor;
  return d;
}

// Nearly-null supermartingale instance: Y_0 = 0, Y <= eps1, Y >= -1,
// conditional drift <= 0 exactly, and P(Y_T < -eps2) = eps3 with
// eps1, eps2, eps3 all <= 0.3 (the regime the second-moment bounds are
// asserted over). Construction: recentred bounded increments with a small
// downward drift, then halved until the regime constraints hold.
struct SupermartingaleInstance {
  TreeProcess<Rational> y;
  Rational eps1, eps2, eps3;
};

inline SupermartingaleInstance random_supermartingale(SimRng& rng, const EventTree& tree,
                                                      const TreeProcess<Rational>& weight) {
  SupermartingaleInstance inst;
  inst.y.assign(tree.size(), Rational(0));
  for (int i = 0; i < tree.size(); ++i) {
    const auto& kids = tree.node(i).children;
    if (kids.empty()) continue;
    std::vector<Rational> r(kids.size());
    Rational mean(0);
    for (std::size_t c = 0; c < kids.size(); ++c) {
      r[c] = make_rational(rng.uniform_int(-6, 6), 20);
      mean += weight[kids[c]] * r[c];
    }
    const Rational drift = make_rational(rng.uniform_int(0, 2), 100);
    for (std::size_t c = 0; c < kids.size(); ++c)
      inst.y[kids[c]] = inst.y[i] + r[c] - mean - drift;
  }

  // Reach probabilities of the leaves for the exact tail.
  TreeProcess<Rational> reach(tree.size(), Rational(1));
  for (int i = 0; i < tree.size(); ++i)
    if (tree.node(i).parent >= 0) reach[i] = reach[tree.node(i).parent] * weight[i];

  const Rational cap(3, 10), tail_cap(1, 4), floor_cap(9, 10);
  for (;;) {
    Rational max_pos(0), max_neg(0), tail(0);
    for (int i = 0; i < tree.size(); ++i) {
      if (inst.y[i] > max_pos) max_pos = inst.y[i];
      if (-inst.y[i] > max_neg) max_neg = -inst.y[i];
    }
    for (int n : tree.terminals())
      if (inst.y[n] < -cap) tail += reach[n];
    if (max_pos <= cap && max_neg <= floor_cap && tail <= tail_cap) {
      inst.eps1 = max_pos;
      inst.eps2 = cap;
      inst.eps3 = tail;
      return inst;
    }
    for (int i = 0; i < tree.size(); ++i) inst.y[i] /= Rational(2);
  }
}

// Random strategy on a sampled path: a jittery walk with occasional blocks
// and jumps, liquidated nowhere in particular. Positions stay modest so the
// minimal admissibility constants remain O(1).
inline std::vector<double> random_path_strategy(SimRng& rng, int npts) {
  std::vector<double> stock(npts, 0.0);
  double pos = 0.0;
  for (int k = 0; k < npts; ++k) {
    const long move = rng.uniform_int(0, 19);
    if (move == 0)
      pos += static_cast<double>(rng.uniform_int(-2, 2));  // block trade
    else if (move < 14)
      pos += 0.25 * rng.normal();  // jitter
    // else hold
    if (pos > 4.0) pos = 4.0;
    if (pos < -4.0) pos = -4.0;
    stock[k] = pos;
  }
  return stock;
}

}  // namespace cpslab
