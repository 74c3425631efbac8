#pragma once

// Domain types for decision-constrained querying and the information
// primitives over them: total probability, partition entropy, induced
// partitions and information gain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "migc/error.hpp"
#include "migc/numeric.hpp"

namespace migc {

using SymbolIndex = std::size_t;

/// A set of symbol indices kept sorted ascending without duplicates.
using SymbolSet = std::vector<SymbolIndex>;

inline SymbolSet make_symbol_set(std::vector<SymbolIndex> items) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return items;
}

inline SymbolSet full_symbol_set(std::size_t n) {
  SymbolSet out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

inline std::string format_symbol_set(const SymbolSet& set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(set[i]);
  }
  return out + "}";
}

// ---------------------------------------------------------------------------
// Distribution
// ---------------------------------------------------------------------------

struct DistributionOptions {
  /// Drop zero-mass symbols instead of rejecting them.
  bool allow_zero = false;
};

/// Probability mass over N >= 1 uniquely labeled symbols, all strictly
/// positive and summing to one.
class Distribution {
 public:
  static Distribution validate(std::vector<std::string> labels, std::vector<double> probs,
                               DistributionOptions options = {}) {
    if (labels.size() != probs.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "labels and probs differ in length (" + std::to_string(labels.size()) + " vs " +
                      std::to_string(probs.size()) + ")");
    }
    std::vector<std::string> kept_labels;
    std::vector<double> kept_probs;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double p = probs[i];
      if (options.allow_zero && p == 0.0) continue;
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::NonPositiveMass,
                    "symbol '" + labels[i] + "' has non-positive mass " + std::to_string(p));
      }
      kept_labels.push_back(std::move(labels[i]));
      kept_probs.push_back(p);
    }
    if (kept_probs.empty()) {
      throw Error(ErrorCode::EmptyDistribution, "distribution has no symbols");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& label : kept_labels) {
      if (!seen.insert(label).second) {
        throw Error(ErrorCode::DuplicateLabel, "duplicate label '" + label + "'");
      }
    }
    const double total = compensated_sum(kept_probs);
    if (std::abs(total - 1.0) > 1e-6) {
      throw Error(ErrorCode::MassSumError,
                  "probabilities sum to " + std::to_string(total) + ", expected 1");
    }
    for (double& p : kept_probs) p /= total;

    Distribution d;
    d.labels_ = std::move(kept_labels);
    d.probs_ = std::move(kept_probs);
    return d;
  }

  /// Uniform distribution over n symbols labeled "1".."n".
  static Distribution uniform(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
    return validate(std::move(labels), std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  double prob(SymbolIndex i) const { return probs_.at(i); }
  const std::string& label(SymbolIndex i) const { return labels_.at(i); }

  std::optional<SymbolIndex> find(std::string_view label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    return std::nullopt;
  }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  Distribution() = default;

  std::vector<std::string> labels_;
  std::vector<double> probs_;
};

inline Distribution validate_distribution(std::vector<std::string> labels, std::vector<double> probs,
                                          DistributionOptions options = {}) {
  return Distribution::validate(std::move(labels), std::move(probs), options);
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

/// One admissible question: disjoint answer cells covering the symbol
/// universe. Answer j means "X is in cells()[j]". Cells supplied empty are
/// kept so that answer indices keep their meaning.
class Query {
 public:
  /// Canonicalizes raw cells against a universe of `universe` symbols: checks
  /// range and disjointness, then appends the complement as a final cell when
  /// it is nonempty.
  static Query canonical(std::size_t id, std::vector<SymbolSet> raw_cells, std::size_t universe,
                         std::size_t arity) {
    if (raw_cells.empty()) {
      throw Error(ErrorCode::TooManyCells, "query " + std::to_string(id) + " has no cells");
    }
    constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
    Query q;
    q.id_ = id;
    q.answer_of_.assign(universe, kUnassigned);
    for (auto& cell : raw_cells) {
      cell = make_symbol_set(std::move(cell));
      for (SymbolIndex s : cell) {
        if (s >= universe) {
          throw Error(ErrorCode::OutOfRangeIndex, "query " + std::to_string(id) + " references symbol " +
                                                      std::to_string(s) + " outside 0.." +
                                                      std::to_string(universe - 1));
        }
        if (q.answer_of_[s] != kUnassigned) {
          throw Error(ErrorCode::OverlappingCells,
                      "query " + std::to_string(id) + " places symbol " + std::to_string(s) + " in two cells");
        }
        q.answer_of_[s] = q.cells_.size();
      }
      q.cells_.push_back(std::move(cell));
    }
    SymbolSet complement;
    for (SymbolIndex s = 0; s < universe; ++s) {
      if (q.answer_of_[s] == kUnassigned) complement.push_back(s);
    }
    if (!complement.empty()) {
      for (SymbolIndex s : complement) q.answer_of_[s] = q.cells_.size();
      q.cells_.push_back(std::move(complement));
    }
    if (q.cells_.size() > arity) {
      throw Error(ErrorCode::TooManyCells, "query " + std::to_string(id) + " needs " +
                                               std::to_string(q.cells_.size()) + " answers but arity is " +
                                               std::to_string(arity));
    }
    return q;
  }

  std::size_t id() const noexcept { return id_; }
  std::span<const SymbolSet> cells() const noexcept { return cells_; }
  std::size_t answer_count() const noexcept { return cells_.size(); }
  std::size_t answer_of(SymbolIndex s) const { return answer_of_.at(s); }

 private:
  Query() = default;

  std::size_t id_ = 0;
  std::vector<SymbolSet> cells_;
  std::vector<std::size_t> answer_of_;
};

/// The admissible question pool. An unconstrained set admits every partition
/// of every candidate set into at most arity() cells.
class QuerySet {
 public:
  static QuerySet unconstrained(std::size_t arity, std::size_t universe) {
    check_arity(arity);
    QuerySet qs;
    qs.arity_ = arity;
    qs.universe_ = universe;
    qs.unconstrained_ = true;
    return qs;
  }

  /// Query ids are the positions in `raw_queries`.
  static QuerySet constrained(std::size_t arity, std::size_t universe,
                              std::vector<std::vector<SymbolSet>> raw_queries) {
    check_arity(arity);
    QuerySet qs;
    qs.arity_ = arity;
    qs.universe_ = universe;
    for (std::size_t id = 0; id < raw_queries.size(); ++id) {
      qs.queries_.push_back(Query::canonical(id, std::move(raw_queries[id]), universe, arity));
    }
    return qs;
  }

  /// Accepts explicit ids, which must be a permutation of 0..K-1.
  static QuerySet constrained_with_ids(std::size_t arity, std::size_t universe,
                                       std::vector<std::pair<std::size_t, std::vector<SymbolSet>>> raw) {
    std::vector<std::vector<SymbolSet>> ordered(raw.size());
    std::vector<bool> present(raw.size(), false);
    for (auto& [id, cells] : raw) {
      if (id >= raw.size() || present[id]) {
        throw Error(ErrorCode::InvalidQueryId,
                    "query ids must be unique and dense from 0; got " + std::to_string(id));
      }
      present[id] = true;
      ordered[id] = std::move(cells);
    }
    return constrained(arity, universe, std::move(ordered));
  }

  std::size_t arity() const noexcept { return arity_; }
  std::size_t universe_size() const noexcept { return universe_; }
  bool is_unconstrained() const noexcept { return unconstrained_; }
  std::span<const Query> queries() const noexcept { return queries_; }
  const Query& query(std::size_t id) const { return queries_.at(id); }

 private:
  static void check_arity(std::size_t arity) {
    if (arity < 2) throw Error(ErrorCode::InvalidArgument, "arity must be at least 2");
  }

  std::size_t arity_ = 2;
  std::size_t universe_ = 0;
  bool unconstrained_ = false;
  std::vector<Query> queries_;
};

// ---------------------------------------------------------------------------
// Partitions
// ---------------------------------------------------------------------------

/// A query's answer cells restricted to a candidate set, with conditional
/// masses. Empty cells are dropped; `answers[j]` is the answer index that
/// leads to `cells[j]`.
struct PartitionView {
  std::vector<SymbolSet> cells;
  std::vector<double> masses;
  std::vector<std::size_t> answers;
  std::optional<std::size_t> source_query;
};

inline void check_symbols(std::span<const SymbolIndex> set, const Distribution& dist) {
  for (SymbolIndex s : set) {
    if (s >= dist.size()) {
      throw Error(ErrorCode::OutOfRangeIndex,
                  "symbol " + std::to_string(s) + " outside distribution of size " + std::to_string(dist.size()));
    }
  }
}

inline double total_probability(std::span<const SymbolIndex> cell, const Distribution& dist) {
  check_symbols(cell, dist);
  CompensatedAccumulator acc;
  for (SymbolIndex s : cell) acc.add(dist.prob(s));
  return acc.value();
}

/// -sum p(U_j) log p(U_j) over cells, with masses normalized to the union.
inline double partition_entropy(std::span<const SymbolSet> cells, const Distribution& dist, double base) {
  std::vector<bool> used(dist.size(), false);
  std::vector<double> masses;
  masses.reserve(cells.size());
  for (const auto& cell : cells) {
    check_symbols(cell, dist);
    for (SymbolIndex s : cell) {
      if (used[s]) {
        throw Error(ErrorCode::OverlappingCells, "symbol " + std::to_string(s) + " appears in two cells");
      }
      used[s] = true;
    }
    masses.push_back(total_probability(cell, dist));
  }
  return entropy_of_masses(masses, base);
}

inline double partition_entropy(const PartitionView& view, double base) {
  return entropy_of_masses(view.masses, base);
}

inline PartitionView induced_partition(const Query& query, std::span<const SymbolIndex> candidates,
                                       const Distribution& dist) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "candidate set is empty");
  check_symbols(candidates, dist);
  std::vector<SymbolSet> by_answer(query.answer_count());
  for (SymbolIndex s : candidates) by_answer[query.answer_of(s)].push_back(s);

  PartitionView view;
  view.source_query = query.id();
  std::vector<double> raw;
  for (std::size_t a = 0; a < by_answer.size(); ++a) {
    if (by_answer[a].empty()) continue;
    raw.push_back(total_probability(by_answer[a], dist));
    view.answers.push_back(a);
    view.cells.push_back(std::move(by_answer[a]));
  }
  const double total = compensated_sum(raw);
  view.masses.reserve(raw.size());
  for (double m : raw) view.masses.push_back(m / total);
  return view;
}

/// I(X;Q) = H(X) - sum_j p_j H(X | Q = j), evaluated directly on the
/// conditional distribution over `candidates`.
inline double information_gain(const Query& query, std::span<const SymbolIndex> candidates,
                               const Distribution& dist, double base) {
  const PartitionView view = induced_partition(query, candidates, dist);
  const double candidate_mass = total_probability(candidates, dist);

  std::vector<double> conditional;
  conditional.reserve(candidates.size());
  for (SymbolIndex s : candidates) conditional.push_back(dist.prob(s) / candidate_mass);
  const double prior_entropy = entropy_of_masses(conditional, base);

  CompensatedAccumulator posterior;
  for (std::size_t j = 0; j < view.cells.size(); ++j) {
    std::vector<double> within;
    for (SymbolIndex s : view.cells[j]) within.push_back(dist.prob(s));
    posterior.add(view.masses[j] * entropy_of_masses(within, base));
  }
  return prior_entropy - posterior.value();
}

// ---------------------------------------------------------------------------
// Decision trees
// ---------------------------------------------------------------------------

using NodeId = std::size_t;

struct TreeNode {
  /// Set when the node asks a query from a constrained set; unset for a
  /// free partition drawn from an unconstrained set.
  std::optional<std::size_t> query_id;
  /// Set exactly on leaves.
  std::optional<SymbolIndex> symbol;
  /// (answer index, child) pairs in ascending answer order.
  std::vector<std::pair<std::size_t, NodeId>> children;

  bool is_leaf() const noexcept { return symbol.has_value(); }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// A querying strategy stored as a node arena. Internal nodes carry a query,
/// edges carry answers, leaves carry symbols; depth is code length.
class DecisionTree {
 public:
  explicit DecisionTree(std::size_t arity = 2) : arity_(arity) {}

  NodeId add_leaf(SymbolIndex symbol) {
    TreeNode node;
    node.symbol = symbol;
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  NodeId add_internal(std::optional<std::size_t> query_id,
                      std::vector<std::pair<std::size_t, NodeId>> children) {
    std::sort(children.begin(), children.end());
    TreeNode node;
    node.query_id = query_id;
    node.children = std::move(children);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  }

  void set_root(NodeId root) noexcept { root_ = root; }

  NodeId root() const noexcept { return root_; }
  std::size_t arity() const noexcept { return arity_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }
  std::span<const TreeNode> nodes() const noexcept { return nodes_; }

  /// Child reached by `answer`, if any.
  std::optional<NodeId> child(NodeId id, std::size_t answer) const {
    for (const auto& [a, c] : node(id).children) {
      if (a == answer) return c;
    }
    return std::nullopt;
  }

  /// Leaf symbols under `id`, sorted.
  SymbolSet leaves_under(NodeId id) const {
    SymbolSet out;
    std::vector<NodeId> stack{id};
    std::size_t steps = 0;
    while (!stack.empty() && steps++ <= nodes_.size()) {
      const NodeId cur = stack.back();
      stack.pop_back();
      if (cur >= nodes_.size()) continue;
      const TreeNode& n = nodes_[cur];
      if (n.is_leaf()) out.push_back(*n.symbol);
      for (const auto& entry : n.children) stack.push_back(entry.second);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::size_t arity_;
  NodeId root_ = 0;
  std::vector<TreeNode> nodes_;
};

/// Per-symbol code lengths and their expectation, in base-`arity` digits.
struct CodeReport {
  std::size_t arity = 2;
  std::vector<std::size_t> per_symbol_lengths;
  double expected_length = 0.0;
  double entropy_base_d = 0.0;
  /// Only filled by coders that assign explicit codewords.
  std::vector<std::vector<std::size_t>> codewords;
};

inline CodeReport make_report(std::vector<std::size_t> lengths, const Distribution& dist, std::size_t arity) {
  CodeReport report;
  report.arity = arity;
  CompensatedAccumulator acc;
  for (std::size_t i = 0; i < lengths.size(); ++i) acc.add(dist.prob(i) * static_cast<double>(lengths[i]));
  report.expected_length = acc.value();
  report.entropy_base_d = entropy_of_masses(dist.probs(), static_cast<double>(arity));
  report.per_symbol_lengths = std::move(lengths);
  return report;
}

/// Depth of every symbol's leaf; throws InvalidTree unless each symbol
/// appears at exactly one reachable leaf.
inline CodeReport expected_length(const DecisionTree& tree, const Distribution& dist) {
  if (tree.empty()) throw Error(ErrorCode::InvalidTree, "tree has no nodes");
  constexpr std::size_t kMissing = static_cast<std::size_t>(-1);
  std::vector<std::size_t> depth(dist.size(), kMissing);
  std::vector<std::pair<NodeId, std::size_t>> stack{{tree.root(), 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto [id, d] = stack.back();
    stack.pop_back();
    if (id >= tree.size() || ++visited > tree.size()) {
      throw Error(ErrorCode::InvalidTree, "tree references a missing node or contains a cycle");
    }
    const TreeNode& n = tree.node(id);
    if (n.is_leaf()) {
      const SymbolIndex s = *n.symbol;
      if (s >= dist.size()) throw Error(ErrorCode::InvalidTree, "leaf symbol out of range");
      if (depth[s] != kMissing) {
        throw Error(ErrorCode::InvalidTree, "symbol " + std::to_string(s) + " appears at two leaves");
      }
      depth[s] = d;
      continue;
    }
    if (n.children.empty()) throw Error(ErrorCode::InvalidTree, "internal node without children");
    for (const auto& entry : n.children) stack.emplace_back(entry.second, d + 1);
  }
  for (std::size_t s = 0; s < depth.size(); ++s) {
    if (depth[s] == kMissing) throw Error(ErrorCode::InvalidTree, "symbol " + std::to_string(s) + " has no leaf");
  }
  return make_report(std::move(depth), dist, tree.arity());
}

struct TreeVerdict {
  bool valid = true;
  std::string reason;

  explicit operator bool() const noexcept { return valid; }
};

namespace detail {

inline TreeVerdict invalid(std::string reason) { return TreeVerdict{false, std::move(reason)}; }

inline TreeVerdict validate_node(const DecisionTree& tree, NodeId id, const SymbolSet& candidates,
                                 const Distribution& dist, const QuerySet& qset, std::vector<bool>& seen) {
  if (id >= tree.size()) return invalid("node " + std::to_string(id) + " does not exist");
  if (seen[id]) return invalid("node " + std::to_string(id) + " is reachable twice");
  seen[id] = true;
  const TreeNode& n = tree.node(id);
  const std::string where = "node " + std::to_string(id) + ": ";

  if (n.is_leaf()) {
    if (!n.children.empty()) return invalid(where + "leaf with children");
    if (candidates.size() != 1 || candidates.front() != *n.symbol) {
      return invalid(where + "leaf for symbol " + std::to_string(*n.symbol) + " but candidates are " +
                     format_symbol_set(candidates));
    }
    return {};
  }
  if (n.children.empty()) return invalid(where + "internal node without children");

  std::vector<std::pair<NodeId, SymbolSet>> expected;
  if (n.query_id) {
    if (qset.is_unconstrained()) return invalid(where + "query id used with an unconstrained query set");
    if (*n.query_id >= qset.queries().size()) {
      return invalid(where + "query " + std::to_string(*n.query_id) + " is not in the query set");
    }
    const PartitionView view = induced_partition(qset.query(*n.query_id), candidates, dist);
    if (view.cells.size() != n.children.size()) {
      return invalid(where + "children do not match the query's nonempty cells");
    }
    for (std::size_t j = 0; j < view.cells.size(); ++j) {
      if (n.children[j].first != view.answers[j]) {
        return invalid(where + "children do not match the query's nonempty cells");
      }
      expected.emplace_back(n.children[j].second, view.cells[j]);
    }
  } else {
    if (!qset.is_unconstrained()) return invalid(where + "query is not in the query set");
    if (n.children.size() > qset.arity()) return invalid(where + "more answers than the arity allows");
    std::vector<bool> covered(dist.size(), false);
    std::size_t count = 0;
    for (std::size_t j = 0; j < n.children.size(); ++j) {
      const auto [answer, child] = n.children[j];
      if (answer >= qset.arity()) return invalid(where + "answer index out of range");
      if (j > 0 && n.children[j - 1].first == answer) return invalid(where + "duplicate answer index");
      SymbolSet cell = tree.leaves_under(child);
      if (cell.empty()) return invalid(where + "empty answer cell");
      for (SymbolIndex s : cell) {
        if (s >= dist.size() || !std::binary_search(candidates.begin(), candidates.end(), s)) {
          return invalid(where + "answer cell leaves the candidate set");
        }
        if (covered[s]) return invalid(where + "symbol " + std::to_string(s) + " appears in two cells");
        covered[s] = true;
        ++count;
      }
      expected.emplace_back(child, std::move(cell));
    }
    if (count != candidates.size()) return invalid(where + "answer cells do not cover the candidate set");
  }
  for (const auto& [child, cell] : expected) {
    TreeVerdict v = validate_node(tree, child, cell, dist, qset, seen);
    if (!v) return v;
  }
  return {};
}

}  // namespace detail

/// Checks every DecisionTree invariant against `dist` and `qset` and returns
/// the first violation found.
inline TreeVerdict tree_validate(const DecisionTree& tree, const Distribution& dist, const QuerySet& qset) {
  if (tree.empty()) return detail::invalid("tree has no nodes");
  if (tree.arity() != qset.arity()) {
    return detail::invalid("tree arity " + std::to_string(tree.arity()) + " differs from query set arity " +
                           std::to_string(qset.arity()));
  }
  if (qset.universe_size() != dist.size()) {
    return detail::invalid("query set universe differs from distribution size");
  }
  std::vector<bool> seen(tree.size(), false);
  try {
    return detail::validate_node(tree, tree.root(), full_symbol_set(dist.size()), dist, qset, seen);
  } catch (const Error& e) {
    return detail::invalid(e.what());
  }
}

/// Groups symbols that no query separates. Identification is feasible iff
/// every class is a singleton.
inline std::vector<SymbolSet> distinguishability_classes(const QuerySet& qset) {
  const std::size_t n = qset.universe_size();
  if (qset.is_unconstrained()) {
    std::vector<SymbolSet> out;
    for (SymbolIndex s = 0; s < n; ++s) out.push_back({s});
    return out;
  }
  std::vector<SymbolSet> ordered;
  std::map<std::vector<std::size_t>, std::size_t> slot;
  for (SymbolIndex s = 0; s < n; ++s) {
    std::vector<std::size_t> signature;
    signature.reserve(qset.queries().size());
    for (const Query& q : qset.queries()) signature.push_back(q.answer_of(s));
    auto [it, inserted] = slot.try_emplace(std::move(signature), ordered.size());
    if (inserted) ordered.emplace_back();
    ordered[it->second].push_back(s);
  }
  return ordered;
}

}  // namespace migc
