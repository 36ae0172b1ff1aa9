#pragma once

// Achievable bid/ask envelopes on event trees.
//
// x_bid(n): best liquidation price obtainable with certainty at n or
// later (sell now at bid, or wait — every branch then offers its own
// x_bid). x_ask(n): dually, the sure acquisition price. On trees both
// are one backward sweep:
//   terminal: x_bid = bid, x_ask = ask
//   inner:    x_bid(n) = max(bid(n), min over children of x_bid)
//             x_ask(n) = min(ask(n), max over children of x_ask)
// x_bid(n) > x_ask(n) ("crossed") is representable on purpose: it is
// the footprint of a sure round-trip profit and downstream checks turn
// it into an explicit arbitrage verdict.

#include <string>
#include <vector>

#include "cpslab/tree.hpp"

namespace cpslab {

template <class F>
struct EnvelopePair {
  TreeProcess<F> x_bid;
  TreeProcess<F> x_ask;
};

template <class F>
EnvelopePair<F> compute_envelopes(const MarketModel<F>& m) {
  const EventTree& tree = m.tree;
  EnvelopePair<F> env;
  env.x_bid.resize(tree.size());
  env.x_ask.resize(tree.size());
  for (int n : tree.backward_order()) {
    if (tree.is_terminal(n)) {
      env.x_bid[n] = m.bid[n];
      env.x_ask[n] = m.ask[n];
      continue;
    }
    const auto& ch = tree.node(n).children;
    F lo = env.x_bid[ch[0]];
    F hi = env.x_ask[ch[0]];
    for (std::size_t k = 1; k < ch.size(); ++k) {
      if (env.x_bid[ch[k]] < lo) lo = env.x_bid[ch[k]];
      if (env.x_ask[ch[k]] > hi) hi = env.x_ask[ch[k]];
    }
    env.x_bid[n] = m.bid[n] > lo ? m.bid[n] : lo;
    env.x_ask[n] = m.ask[n] < hi ? m.ask[n] : hi;
  }
  return env;
}

/// Nodes where the envelopes cross (x_bid > x_ask beyond tolerance).
template <class F>
std::vector<int> envelope_crossing(const EventTree& tree, const EnvelopePair<F>& env) {
  std::vector<int> out;
  for (int i = 0; i < tree.size(); ++i)
    if (definitely_positive(F(env.x_bid[i] - env.x_ask[i]))) out.push_back(i);
  return out;
}

template <class F>
bool crossed_at(const EnvelopePair<F>& env, int n) {
  return definitely_positive(F(env.x_bid[n] - env.x_ask[n]));
}

/// One-step-ahead extremes over sibling sets: at a node with t >= 1 the
/// lower (upper) value is the min (max) of p over all children of its
/// parent, itself included; the root maps to its own value. The result
/// is constant across each sibling set, i.e. known one step earlier.
template <class F>
struct PredictablePair {
  TreeProcess<F> lower;
  TreeProcess<F> upper;
};

template <class F>
PredictablePair<F> predictable_envelopes(const EventTree& tree, const TreeProcess<F>& p) {
  PredictablePair<F> out;
  out.lower.resize(tree.size());
  out.upper.resize(tree.size());
  out.lower[tree.root()] = p[tree.root()];
  out.upper[tree.root()] = p[tree.root()];
  for (int n = 0; n < tree.size(); ++n) {
    const auto& ch = tree.node(n).children;
    if (ch.empty()) continue;
    F lo = p[ch[0]], hi = p[ch[0]];
    for (std::size_t k = 1; k < ch.size(); ++k) {
      if (p[ch[k]] < lo) lo = p[ch[k]];
      if (p[ch[k]] > hi) hi = p[ch[k]];
    }
    for (int c : ch) {
      out.lower[c] = lo;
      out.upper[c] = hi;
    }
  }
  return out;
}

}  // namespace cpslab
