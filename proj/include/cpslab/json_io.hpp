#pragma once

// JSON ingestion and emission.
//
// Market spec format:
//   { "horizon": T,
//     "nodes":   [{"id": n, "parent": p|null, "time": t, "weight": w}, ...],
//     "bid":     {"<id>": value, ...},
//     "ask":     {"<id>": value, ...} }
//
// Strategy format: {"<id>": stock holding, ...}; missing ids mean 0.
//
// Numeric values are accepted as JSON numbers or as strings ("0.25",
// "1/3"). Number tokens are interpreted through their shortest decimal
// representation, so "0.1" means exactly 1/10, not the nearest double.
// Reports always render exact values as "p/q" strings: that keeps
// certified output byte-stable across platforms.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cpslab/ledger.hpp"
#include "cpslab/rational.hpp"
#include "cpslab/tree.hpp"

namespace cpslab {

using Json = nlohmann::json;

inline Rational rational_from_json(const Json& j, const std::string& where) {
  std::string text;
  if (j.is_string())
    text = j.get<std::string>();
  else if (j.is_number())
    text = j.dump();
  else
    throw SpecError(where + ": expected number or numeric string, got " + j.dump());
  auto r = parse_rational(text);
  if (!r) throw SpecError(where + ": cannot parse numeric value '" + text + "'");
  return *r;
}

inline Json json_value(const Rational& r) { return Json(to_string(r)); }
inline Json json_value(double d) { return Json(d); }

/// Parse a market model (exact arithmetic) from its JSON spec.
inline MarketModel<Rational> market_from_json(const Json& j) {
  if (!j.is_object()) throw SpecError("market spec: top level must be an object");
  for (const auto& key : {"nodes", "bid", "ask"})
    if (!j.contains(key)) throw SpecError(std::string("market spec: missing '") + key + "'");
  // Node ids are strings; bare JSON numbers are accepted and normalized
  // through their literal spelling ("0" and 0 name the same node).
  auto id_text = [](const Json& v, const std::string& where) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw SpecError(where + ": node id must be a string or integer, got " + v.dump());
  };
  std::vector<std::tuple<std::string, std::string, int>> rows;
  if (!j["nodes"].is_array()) throw SpecError("market spec: 'nodes' must be an array");
  for (const auto& nj : j["nodes"]) {
    if (!nj.contains("id") || !nj.contains("time"))
      throw SpecError("market spec: node entries need 'id' and 'time'");
    std::string id = id_text(nj["id"], "market spec");
    std::string parent;
    if (nj.contains("parent") && !nj["parent"].is_null())
      parent = id_text(nj["parent"], "market spec");
    rows.emplace_back(id, parent, nj["time"].get<int>());
  }
  MarketModel<Rational> m;
  m.tree = EventTree::build(rows);
  if (j.contains("horizon")) {
    int declared = j["horizon"].get<int>();
    if (declared != m.tree.horizon())
      throw SpecError("market spec: declared horizon " + std::to_string(declared) +
                      " but terminal nodes sit at time " + std::to_string(m.tree.horizon()));
  }
  const std::size_t n = m.tree.size();
  m.bid.assign(n, Rational(0));
  m.ask.assign(n, Rational(0));
  m.weight.assign(n, Rational(1));
  auto read_quotes = [&](const char* key, TreeProcess<Rational>& dst) {
    const Json& table = j[key];
    if (!table.is_object()) throw SpecError(std::string("market spec: '") + key + "' must map id -> value");
    std::vector<bool> seen(n, false);
    for (auto it = table.begin(); it != table.end(); ++it) {
      if (!m.tree.has_node(it.key()))
        throw SpecError(std::string("market spec: ") + key + " references unknown node " + it.key());
      int idx = m.tree.index_of(it.key());
      dst[idx] = rational_from_json(it.value(), std::string(key) + "[" + it.key() + "]");
      seen[idx] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i])
        throw SpecError(std::string("market spec: ") + key + " missing node " +
                        m.tree.node(static_cast<int>(i)).id);
  };
  read_quotes("bid", m.bid);
  read_quotes("ask", m.ask);
  if (j["nodes"].size() > 0 && j["nodes"][0].contains("weight")) {
    for (const auto& nj : j["nodes"]) {
      if (!nj.contains("weight"))
        throw SpecError("market spec: either all nodes carry 'weight' or none do");
      int idx = m.tree.index_of(id_text(nj["id"], "market spec"));
      m.weight[idx] = rational_from_json(nj["weight"], "weight of node " + m.tree.node(idx).id);
    }
  } else {
    // Default reference weights: uniform over each sibling set.
    for (std::size_t i = 0; i < n; ++i) {
      const auto& nd = m.tree.node(static_cast<int>(i));
      if (nd.parent < 0) continue;
      std::size_t deg = m.tree.node(nd.parent).children.size();
      m.weight[i] = Rational(1) / Rational(static_cast<long>(deg));
    }
  }
  return m;
}

inline MarketModel<Rational> load_market_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open market spec file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SpecError("malformed JSON in " + path + ": " + e.what());
  }
  return market_from_json(j);
}

inline Strategy<Rational> strategy_from_json(const Json& j, const EventTree& tree) {
  if (!j.is_object()) throw SpecError("strategy: top level must map node id -> stock holding");
  Strategy<Rational> s;
  s.stock.assign(tree.size(), Rational(0));
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!tree.has_node(it.key())) throw SpecError("strategy references unknown node " + it.key());
    s.stock[tree.index_of(it.key())] = rational_from_json(it.value(), "strategy[" + it.key() + "]");
  }
  return s;
}

inline Strategy<Rational> load_strategy_file(const std::string& path, const EventTree& tree) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open strategy file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SpecError("malformed JSON in " + path + ": " + e.what());
  }
  return strategy_from_json(j, tree);
}

/// Deterministic serialization: nlohmann objects already iterate in key
/// order (std::map); a fixed indent keeps output byte-stable.
inline std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

/// FNV-1a over the raw input bytes; reports embed it as provenance.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cpslab
