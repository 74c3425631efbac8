#pragma once

// JSON and DOT formats for distributions, query sets, trees, reports and
// battleship layouts.

#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "migc/error.hpp"
#include "migc/model.hpp"
#include "migc/scenarios/battleship.hpp"

namespace migc {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

inline const Json& require(const Json& obj, const char* key, const char* context) {
  if (!obj.is_object()) parse_fail(std::string(context) + " must be a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) parse_fail(std::string(context) + " is missing \"" + key + "\"");
  return *it;
}

inline std::size_t as_index(const Json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) parse_fail(what + " must be a non-negative integer");
  return v.get<std::size_t>();
}

inline std::string label_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return v.dump();
  parse_fail("labels must be strings or numbers");
}

}  // namespace detail

inline Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    detail::parse_fail(std::string("malformed JSON: ") + e.what());
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) detail::parse_fail("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str());
}

// ---- distributions ---------------------------------------------------------

/// {"labels": [...], "probs": [...]}; labels may be strings or numbers and
/// default to "1".."N" when absent.
inline Distribution distribution_from_json(const Json& j, DistributionOptions options = {}) {
  const Json& probs = detail::require(j, "probs", "distribution");
  if (!probs.is_array()) detail::parse_fail("\"probs\" must be an array");
  std::vector<double> p;
  for (const Json& v : probs) {
    if (!v.is_number()) detail::parse_fail("\"probs\" entries must be numbers");
    p.push_back(v.get<double>());
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    const Json& raw = j.at("labels");
    if (!raw.is_array()) detail::parse_fail("\"labels\" must be an array");
    for (const Json& v : raw) labels.push_back(detail::label_text(v));
  } else {
    for (std::size_t i = 0; i < p.size(); ++i) labels.push_back(std::to_string(i + 1));
  }
  return Distribution::validate(std::move(labels), std::move(p), options);
}

inline Json distribution_to_json(const Distribution& dist) {
  Json j;
  j["labels"] = std::vector<std::string>(dist.labels().begin(), dist.labels().end());
  j["probs"] = std::vector<double>(dist.probs().begin(), dist.probs().end());
  return j;
}

// ---- query sets ------------------------------------------------------------

/// {"d": D, "unconstrained": bool, "queries": [{"id": k, "cells": [[...], ...]}]}
/// over a universe of `universe` symbols.
inline QuerySet query_set_from_json(const Json& j, std::size_t universe) {
  const std::size_t d = detail::as_index(detail::require(j, "d", "query set"), "\"d\"");
  const bool unconstrained = j.value("unconstrained", false);
  if (unconstrained) return QuerySet::unconstrained(d, universe);
  const Json& queries = detail::require(j, "queries", "query set");
  if (!queries.is_array()) detail::parse_fail("\"queries\" must be an array");
  std::vector<std::pair<std::size_t, std::vector<SymbolSet>>> raw;
  for (std::size_t pos = 0; pos < queries.size(); ++pos) {
    const Json& q = queries[pos];
    const std::size_t id =
        q.contains("id") ? detail::as_index(q.at("id"), "query id") : pos;
    const Json& cells = detail::require(q, "cells", "query");
    if (!cells.is_array()) detail::parse_fail("\"cells\" must be an array of arrays");
    std::vector<SymbolSet> parsed;
    for (const Json& cell : cells) {
      if (!cell.is_array()) detail::parse_fail("\"cells\" must be an array of arrays");
      SymbolSet s;
      for (const Json& v : cell) s.push_back(detail::as_index(v, "symbol index"));
      parsed.push_back(std::move(s));
    }
    raw.emplace_back(id, std::move(parsed));
  }
  return QuerySet::constrained_with_ids(d, universe, std::move(raw));
}

struct Instance {
  Distribution dist;
  QuerySet qset;
};

/// Loads a distribution and its query set together. With allow_zero the
/// dropped zero-mass symbols are also removed from the query cells and the
/// remaining indices renumbered.
inline Instance instance_from_json(const Json& dist_json, const Json& qset_json, DistributionOptions options = {}) {
  Distribution dist = distribution_from_json(dist_json, options);
  if (!options.allow_zero) return {dist, query_set_from_json(qset_json, dist.size())};

  const Json& probs = dist_json.at("probs");
  constexpr std::size_t kDropped = static_cast<std::size_t>(-1);
  std::vector<std::size_t> renumber;
  std::size_t next = 0;
  for (const Json& p : probs) renumber.push_back(p.get<double>() == 0.0 ? kDropped : next++);

  Json remapped = qset_json;
  if (remapped.is_object() && remapped.contains("queries") && remapped["queries"].is_array()) {
    for (Json& q : remapped["queries"]) {
      if (!q.is_object() || !q.contains("cells") || !q["cells"].is_array()) continue;
      for (Json& cell : q["cells"]) {
        if (!cell.is_array()) continue;
        Json kept = Json::array();
        for (const Json& v : cell) {
          const std::size_t s = detail::as_index(v, "symbol index");
          if (s >= renumber.size()) {
            kept.push_back(s);  // left out of range on purpose
          } else if (renumber[s] != kDropped) {
            kept.push_back(renumber[s]);
          }
        }
        cell = std::move(kept);
      }
    }
  }
  return {dist, query_set_from_json(remapped, dist.size())};
}

inline Json query_set_to_json(const QuerySet& qset) {
  Json j;
  j["d"] = qset.arity();
  j["unconstrained"] = qset.is_unconstrained();
  if (!qset.is_unconstrained()) {
    Json queries = Json::array();
    for (const Query& q : qset.queries()) {
      Json cells = Json::array();
      for (const SymbolSet& c : q.cells()) cells.push_back(c);
      queries.push_back({{"id", q.id()}, {"cells", cells}});
    }
    j["queries"] = queries;
  }
  return j;
}

// ---- trees -----------------------------------------------------------------

/// Nested form: {"leaf": i} or {"query": id | null, "children": {"a": ...}}.
/// A null query marks a free partition chosen from an unconstrained set.
inline Json tree_to_json(const DecisionTree& tree) {
  if (tree.empty()) throw Error(ErrorCode::InvalidTree, "tree has no nodes");
  std::size_t budget = tree.size();
  std::function<Json(NodeId)> emit = [&](NodeId id) -> Json {
    if (budget-- == 0) throw Error(ErrorCode::InvalidTree, "tree contains a cycle");
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) return {{"leaf", *n.symbol}};
    Json children = Json::object();
    for (const auto& [answer, child] : n.children) children[std::to_string(answer)] = emit(child);
    Json out;
    out["query"] = n.query_id ? Json(*n.query_id) : Json(nullptr);
    out["children"] = std::move(children);
    return out;
  };
  return emit(tree.root());
}

inline DecisionTree tree_from_json(const Json& j, std::size_t arity) {
  DecisionTree tree(arity);
  std::function<NodeId(const Json&, std::size_t)> build = [&](const Json& node, std::size_t depth) -> NodeId {
    if (depth > 4096) detail::parse_fail("tree is nested too deeply");
    if (!node.is_object()) detail::parse_fail("tree nodes must be objects");
    if (node.contains("leaf")) return tree.add_leaf(detail::as_index(node.at("leaf"), "leaf symbol"));
    const Json& q = detail::require(node, "query", "tree node");
    std::optional<std::size_t> qid;
    if (!q.is_null()) qid = detail::as_index(q, "query id");
    const Json& kids = detail::require(node, "children", "tree node");
    if (!kids.is_object()) detail::parse_fail("\"children\" must be an object keyed by answer");
    std::vector<std::pair<std::size_t, NodeId>> children;
    for (const auto& [key, child] : kids.items()) {
      std::size_t answer = 0;
      try {
        std::size_t used = 0;
        answer = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        detail::parse_fail("answer key \"" + key + "\" is not an index");
      }
      children.emplace_back(answer, build(child, depth + 1));
    }
    return tree.add_internal(qid, std::move(children));
  };
  tree.set_root(build(j, 0));
  return tree;
}

inline std::string tree_to_dot(const DecisionTree& tree, const Distribution& dist) {
  std::string out = "digraph tree {\n  node [fontname=\"Helvetica\"];\n";
  for (NodeId id = 0; id < tree.size(); ++id) {
    const TreeNode& n = tree.node(id);
    std::string label;
    if (n.is_leaf()) {
      label = *n.symbol < dist.size() ? dist.label(*n.symbol) : std::to_string(*n.symbol);
      std::string escaped;
      for (char c : label) {
        if (c == '"' || c == '\\') escaped.push_back('\\');
        escaped.push_back(c);
      }
      out += "  n" + std::to_string(id) + " [shape=box,label=\"" + escaped + "\"];\n";
    } else {
      label = n.query_id ? "Q" + std::to_string(*n.query_id) : "split";
      out += "  n" + std::to_string(id) + " [shape=ellipse,label=\"" + label + "\"];\n";
    }
  }
  for (NodeId id = 0; id < tree.size(); ++id) {
    for (const auto& [answer, child] : tree.node(id).children) {
      out += "  n" + std::to_string(id) + " -> n" + std::to_string(child) + " [label=\"" + std::to_string(answer) +
             "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

inline Json report_to_json(const CodeReport& report, const Distribution& dist) {
  Json j;
  j["d"] = report.arity;
  j["expected_length"] = report.expected_length;
  j["entropy"] = report.entropy_base_d;
  Json lengths = Json::object();
  for (std::size_t i = 0; i < report.per_symbol_lengths.size(); ++i) {
    lengths[dist.label(i)] = report.per_symbol_lengths[i];
  }
  j["per_symbol_lengths"] = lengths;
  if (!report.codewords.empty()) {
    Json words = Json::object();
    for (std::size_t i = 0; i < report.codewords.size(); ++i) {
      std::string w;
      for (std::size_t digit : report.codewords[i]) w += std::to_string(digit) + (report.arity > 10 ? "." : "");
      words[dist.label(i)] = w;
    }
    j["codewords"] = words;
  }
  return j;
}

// ---- battleship ------------------------------------------------------------

/// Every field optional; absent fields keep their defaults.
inline BattleshipConfig battleship_config_from_json(const Json& j) {
  BattleshipConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) detail::parse_fail("battleship config must be an object");
  if (j.contains("rows")) cfg.rows = detail::as_index(j.at("rows"), "\"rows\"");
  if (j.contains("cols")) cfg.cols = detail::as_index(j.at("cols"), "\"cols\"");
  if (j.contains("layout_count")) cfg.layout_count = detail::as_index(j.at("layout_count"), "\"layout_count\"");
  if (j.contains("seed")) cfg.seed = detail::as_index(j.at("seed"), "\"seed\"");
  if (j.contains("dedup")) {
    if (!j.at("dedup").is_boolean()) detail::parse_fail("\"dedup\" must be a boolean");
    cfg.dedup = j.at("dedup").get<bool>();
  }
  if (j.contains("stop_rule")) {
    if (!j.at("stop_rule").is_string()) detail::parse_fail("\"stop_rule\" must be a string");
    cfg.stop_rule = parse_stop_rule(j.at("stop_rule").get<std::string>());
  }
  if (j.contains("fleets")) {
    const Json& f = j.at("fleets");
    if (!f.is_array()) detail::parse_fail("\"fleets\" must be an array of arrays");
    cfg.fleets.clear();
    for (const Json& player : f) {
      if (!player.is_array()) detail::parse_fail("\"fleets\" must be an array of arrays");
      std::vector<std::size_t> lengths;
      for (const Json& v : player) lengths.push_back(detail::as_index(v, "ship length"));
      cfg.fleets.push_back(std::move(lengths));
    }
  }
  return cfg;
}

inline Json battleship_config_to_json(const BattleshipConfig& cfg) {
  return {{"rows", cfg.rows},
          {"cols", cfg.cols},
          {"fleets", cfg.fleets},
          {"layout_count", cfg.layout_count},
          {"stop_rule", std::string(to_string(cfg.stop_rule))},
          {"seed", cfg.seed},
          {"dedup", cfg.dedup}};
}

inline Json ship_to_json(const Ship& s) {
  return {{"owner", s.owner},
          {"row", s.row},
          {"col", s.col},
          {"height", s.horizontal ? 1 : s.length},
          {"width", s.horizontal ? s.length : 1}};
}

/// {"rows", "cols", "players", "layouts": [[ship rectangle, ...], ...]}.
inline Json layouts_to_json(const LayoutSet& set) {
  Json layouts = Json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    Json ships = Json::array();
    for (const Ship& s : set.ships(i)) ships.push_back(ship_to_json(s));
    layouts.push_back(std::move(ships));
  }
  return {{"rows", set.rows()}, {"cols", set.cols()}, {"players", set.players()}, {"layouts", layouts}};
}

inline LayoutSet layouts_from_json(const Json& j) {
  LayoutSet set(detail::as_index(detail::require(j, "rows", "layout file"), "\"rows\""),
                detail::as_index(detail::require(j, "cols", "layout file"), "\"cols\""),
                detail::as_index(detail::require(j, "players", "layout file"), "\"players\""));
  const Json& layouts = detail::require(j, "layouts", "layout file");
  if (!layouts.is_array()) detail::parse_fail("\"layouts\" must be an array");
  for (const Json& layout : layouts) {
    if (!layout.is_array()) detail::parse_fail("each layout must be an array of ships");
    std::vector<Ship> ships;
    for (const Json& s : layout) {
      const std::size_t h = detail::as_index(detail::require(s, "height", "ship"), "\"height\"");
      const std::size_t w = detail::as_index(detail::require(s, "width", "ship"), "\"width\"");
      if (h != 1 && w != 1) detail::parse_fail("ships must be one cell wide");
      ships.push_back({detail::as_index(detail::require(s, "owner", "ship"), "\"owner\""),
                       detail::as_index(detail::require(s, "row", "ship"), "\"row\""),
                       detail::as_index(detail::require(s, "col", "ship"), "\"col\""), std::max(h, w), h == 1});
    }
    set.add(ships);
  }
  return set;
}

}  // namespace migc
