#pragma once

// Finite event trees with integer time steps 0..T. Every terminal node
// sits at t = T; inner nodes may have a single child (deterministic
// step). A market model attaches bid/ask quotes and transition weights
// to the tree. Structural problems are exceptions; economic rule
// violations (negative bid, bid > ask, ...) are data returned by
// validate_market so that diagnostic tooling can show them.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cpslab/arith.hpp"

namespace cpslab {

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TreeNode {
  std::string id;
  int parent = -1;  // -1 at the root
  int time = 0;
  std::vector<int> children;
};

class EventTree {
 public:
  /// nodes: (id, parent_id, time); parent_id empty for the root.
  /// Input order is free; nodes are stored so parents precede children
  /// (stable by time, then input order) and indices refer to that order.
  static EventTree build(
      const std::vector<std::tuple<std::string, std::string, int>>& specs) {
    EventTree t;
    std::vector<std::size_t> order(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return std::get<2>(specs[a]) < std::get<2>(specs[b]);
    });
    std::map<std::string, int> index;
    for (auto src : order) {
      const auto& [id, parent_id, time] = specs[src];
      if (index.count(id)) throw SpecError("duplicate node id: " + id);
      TreeNode n;
      n.id = id;
      n.time = time;
      if (parent_id.empty()) {
        if (t.root_ >= 0) throw SpecError("multiple roots: " + id);
        if (time != 0) throw SpecError("root must have time 0: " + id);
        t.root_ = static_cast<int>(t.nodes_.size());
      } else {
        auto it = index.find(parent_id);
        if (it == index.end())
          throw SpecError("node " + id + " references unknown parent " + parent_id);
        n.parent = it->second;
        if (time != t.nodes_[n.parent].time + 1)
          throw SpecError("node " + id + " time must be parent time + 1");
      }
      index[id] = static_cast<int>(t.nodes_.size());
      t.nodes_.push_back(std::move(n));
    }
    if (t.root_ < 0) throw SpecError("tree has no root");
    for (int i = 0; i < static_cast<int>(t.nodes_.size()); ++i) {
      if (t.nodes_[i].parent >= 0) t.nodes_[t.nodes_[i].parent].children.push_back(i);
      t.horizon_ = std::max(t.horizon_, t.nodes_[i].time);
    }
    for (const auto& n : t.nodes_)
      if (n.children.empty() && n.time != t.horizon_)
        throw SpecError("terminal node " + n.id + " not at the horizon");
    t.index_ = std::move(index);
    return t;
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  int horizon() const { return horizon_; }
  int root() const { return root_; }
  const TreeNode& node(int i) const { return nodes_[i]; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  bool is_terminal(int i) const { return nodes_[i].children.empty(); }

  int index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw SpecError("unknown node id: " + id);
    return it->second;
  }
  bool has_node(const std::string& id) const { return index_.count(id) > 0; }

  std::vector<int> terminals() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (is_terminal(i)) out.push_back(i);
    return out;
  }

  std::vector<int> nodes_at_time(int t) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (nodes_[i].time == t) out.push_back(i);
    return out;
  }

  /// All root-to-terminal paths as node index sequences.
  std::vector<std::vector<int>> enumerate_paths() const {
    std::vector<std::vector<int>> paths;
    std::vector<int> cur;
    walk(root_, cur, paths);
    return paths;
  }

  /// Indices in reverse-topological order (children before parents).
  std::vector<int> backward_order() const {
    std::vector<int> order(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return nodes_[a].time > nodes_[b].time;
    });
    return order;
  }

 private:
  void walk(int n, std::vector<int>& cur, std::vector<std::vector<int>>& out) const {
    cur.push_back(n);
    if (is_terminal(n)) out.push_back(cur);
    for (int c : nodes_[n].children) walk(c, cur, out);
    cur.pop_back();
  }

  std::vector<TreeNode> nodes_;
  std::map<std::string, int> index_;
  int root_ = -1;
  int horizon_ = 0;
};

/// One scalar per tree node, indexed like the tree.
template <class F>
using TreeProcess = std::vector<F>;

template <class F>
struct MarketModel {
  EventTree tree;
  TreeProcess<F> bid;
  TreeProcess<F> ask;
  /// Transition probability from the parent (1 at the root).
  TreeProcess<F> weight;

  /// Probability of the path through node i.
  F path_prob(int i) const {
    F p = weight[i];
    for (int n = tree.node(i).parent; n >= 0; n = tree.node(n).parent) p *= weight[n];
    return p;
  }
};

struct MarketViolation {
  std::string node_id;
  std::string rule;    // e.g. "bid_negative", "bid_above_ask"
  std::string detail;
};

/// Economic validity checks; structural validity is guaranteed by build().
template <class F>
std::vector<MarketViolation> validate_market(const MarketModel<F>& m) {
  using T = arith_traits<F>;
  std::vector<MarketViolation> out;
  const F tol = T::tol();
  for (int i = 0; i < m.tree.size(); ++i) {
    const auto& id = m.tree.node(i).id;
    if (m.bid[i] < -tol)
      out.push_back({id, "bid_negative", T::str(m.bid[i])});
    if (m.bid[i] > m.ask[i] + tol)
      out.push_back({id, "bid_above_ask",
                     T::str(m.bid[i]) + " > " + T::str(m.ask[i])});
    if (m.tree.is_terminal(i) && !definitely_positive(m.ask[i]))
      out.push_back({id, "terminal_ask_not_positive", T::str(m.ask[i])});
    if (!(m.weight[i] > tol))
      out.push_back({id, "weight_not_positive", T::str(m.weight[i])});
  }
  // sibling weights sum to one
  for (int i = 0; i < m.tree.size(); ++i) {
    if (m.tree.is_terminal(i)) continue;
    F s = T::zero();
    for (int c : m.tree.node(i).children) s += m.weight[c];
    F err = s - T::one();
    if (err < F(0)) err = F(-err);
    if (err > tol)
      out.push_back({m.tree.node(i).id, "weights_not_normalized", T::str(s)});
  }
  if (m.weight[m.tree.root()] != T::one()) {
    F err = m.weight[m.tree.root()] - T::one();
    if (err < F(0)) err = F(-err);
    if (err > tol)
      out.push_back({m.tree.node(m.tree.root()).id, "root_weight_not_one",
                     T::str(m.weight[m.tree.root()])});
  }
  return out;
}

template <class F, class G>
MarketModel<G> convert_model(const MarketModel<F>& m) {
  MarketModel<G> out;
  out.tree = m.tree;
  out.bid.reserve(m.bid.size());
  out.ask.reserve(m.ask.size());
  out.weight.reserve(m.weight.size());
  for (const auto& x : m.bid) out.bid.push_back(G(arith_traits<F>::to_dbl(x)));
  for (const auto& x : m.ask) out.ask.push_back(G(arith_traits<F>::to_dbl(x)));
  for (const auto& x : m.weight) out.weight.push_back(G(arith_traits<F>::to_dbl(x)));
  return out;
}

}  // namespace cpslab
