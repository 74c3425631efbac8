#pragma once

// Tree-construction algorithms: the greedy maximum-information-gain builder,
// D-ary Huffman and Shannon baselines, and an exact memoized oracle for
// constrained query sets.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "migc/error.hpp"
#include "migc/model.hpp"
#include "migc/numeric.hpp"
#include "migc/partition_search.hpp"

namespace migc {

namespace detail {

inline void require_feasible(const Distribution& dist, const QuerySet& qset) {
  if (qset.universe_size() != dist.size()) {
    throw Error(ErrorCode::InvalidArgument, "query set covers " + std::to_string(qset.universe_size()) +
                                                " symbols but the distribution has " + std::to_string(dist.size()));
  }
  for (const SymbolSet& cls : distinguishability_classes(qset)) {
    if (cls.size() > 1) {
      throw Error(ErrorCode::InfeasibleQuerySet, "no query separates the symbols " + format_symbol_set(cls));
    }
  }
}

class MigcBuilder {
 public:
  MigcBuilder(const Distribution& dist, const QuerySet& qset, SearchBudget budget)
      : dist_(dist), qset_(qset), budget_(budget), tree_(qset.arity()) {}

  DecisionTree run() {
    tree_.set_root(build(full_symbol_set(dist_.size())));
    return std::move(tree_);
  }

 private:
  NodeId build(const SymbolSet& candidates) {
    if (candidates.size() == 1) return tree_.add_leaf(candidates.front());

    PartitionView best;
    if (qset_.is_unconstrained()) {
      best = optimal_partition_unconstrained(dist_, candidates, qset_.arity(), budget_).view;
    } else {
      const double base = static_cast<double>(qset_.arity());
      double best_entropy = -1.0;
      for (const Query& q : qset_.queries()) {
        PartitionView view = induced_partition(q, candidates, dist_);
        if (view.cells.size() < 2) continue;
        const double h = partition_entropy(view, base);
        if (h > best_entropy + kTieTolerance) {
          best_entropy = h;
          best = std::move(view);
        }
      }
      if (best_entropy < 0.0) {
        throw Error(ErrorCode::InfeasibleQuerySet,
                    "no admissible query splits the candidate set " + format_symbol_set(candidates));
      }
    }

    std::vector<std::pair<std::size_t, NodeId>> children;
    for (std::size_t j = 0; j < best.cells.size(); ++j) {
      children.emplace_back(best.answers[j], build(best.cells[j]));
    }
    return tree_.add_internal(best.source_query, std::move(children));
  }

  const Distribution& dist_;
  const QuerySet& qset_;
  SearchBudget budget_;
  DecisionTree tree_;
};

}  // namespace detail

/// Top-down greedy construction: at every candidate set with two or more
/// symbols, ask the admissible query whose induced partition has maximum
/// entropy (ties go to the lowest query id), then recurse into each
/// nonempty answer cell.
inline DecisionTree migc_build(const Distribution& dist, const QuerySet& qset, SearchBudget budget = {}) {
  detail::require_feasible(dist, qset);
  return detail::MigcBuilder(dist, qset, budget).run();
}

/// The binary special case of migc_build.
inline DecisionTree gbsc_build(const Distribution& dist, const QuerySet& qset, SearchBudget budget = {}) {
  if (qset.arity() != 2) {
    throw Error(ErrorCode::InvalidArgument, "gbsc needs a binary query set, got arity " + std::to_string(qset.arity()));
  }
  return migc_build(dist, qset, budget);
}

// ---------------------------------------------------------------------------
// Huffman
// ---------------------------------------------------------------------------

struct CodedTree {
  CodeReport report;
  DecisionTree tree;
};

/// D-ary Huffman code. The symbol list is padded with zero-mass dummies so
/// that (N' - 1) mod (D - 1) == 0; equal masses merge in insertion order.
/// The returned tree uses free partitions and omits the dummies.
inline CodedTree huffman_dary(const Distribution& dist, std::size_t arity) {
  if (arity < 2) throw Error(ErrorCode::InvalidArgument, "arity must be at least 2");
  const std::size_t n = dist.size();

  struct Item {
    double mass;
    std::size_t order;
    std::optional<NodeId> node;  // empty for dummies
  };
  struct Heavier {
    bool operator()(const Item& a, const Item& b) const {
      if (a.mass != b.mass) return a.mass > b.mass;
      return a.order > b.order;
    }
  };

  DecisionTree tree(arity);
  std::priority_queue<Item, std::vector<Item>, Heavier> heap;
  std::size_t order = 0;
  for (SymbolIndex s = 0; s < n; ++s) heap.push({dist.prob(s), order++, tree.add_leaf(s)});
  const std::size_t dummies = n > 1 ? (arity - 1 - (n - 1) % (arity - 1)) % (arity - 1) : 0;
  for (std::size_t i = 0; i < dummies; ++i) heap.push({0.0, order++, std::nullopt});

  while (heap.size() > 1) {
    double mass = 0.0;
    std::vector<std::pair<std::size_t, NodeId>> children;
    for (std::size_t i = 0; i < arity && !heap.empty(); ++i) {
      Item item = heap.top();
      heap.pop();
      mass += item.mass;
      if (item.node) children.emplace_back(children.size(), *item.node);
    }
    heap.push({mass, order++, tree.add_internal(std::nullopt, std::move(children))});
  }
  tree.set_root(*heap.top().node);

  CodedTree out{expected_length(tree, dist), std::move(tree)};
  return out;
}

// ---------------------------------------------------------------------------
// Shannon
// ---------------------------------------------------------------------------

/// Lengths ceil(log_D(1/p_i)) with canonical codewords (sorted by length,
/// then symbol index, counting in base D).
inline CodeReport shannon_dary(const Distribution& dist, std::size_t arity) {
  if (arity < 2) throw Error(ErrorCode::InvalidArgument, "arity must be at least 2");
  const std::size_t n = dist.size();
  std::vector<std::size_t> lengths(n);
  for (SymbolIndex s = 0; s < n; ++s) lengths[s] = ceil_log_inverse(dist.prob(s), arity);

  CompensatedAccumulator kraft;
  for (std::size_t l : lengths) kraft.add(std::pow(static_cast<double>(arity), -static_cast<double>(l)));
  if (kraft.value() > 1.0 + kTieTolerance) {
    throw Error(ErrorCode::KraftViolation, "Kraft sum " + std::to_string(kraft.value()) + " exceeds 1");
  }

  std::vector<SymbolIndex> by_length(n);
  for (SymbolIndex s = 0; s < n; ++s) by_length[s] = s;
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](SymbolIndex a, SymbolIndex b) { return lengths[a] < lengths[b]; });

  std::vector<std::vector<std::size_t>> codewords(n);
  std::vector<std::size_t> code;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const SymbolIndex s = by_length[rank];
    if (rank > 0) {
      // increment in base D
      std::size_t pos = code.size();
      while (pos > 0) {
        --pos;
        if (++code[pos] < arity) break;
        code[pos] = 0;
        if (pos == 0) throw Error(ErrorCode::KraftViolation, "canonical code space exhausted");
      }
      if (code.empty()) throw Error(ErrorCode::KraftViolation, "canonical code space exhausted");
    }
    code.resize(lengths[s], 0);
    codewords[s] = code;
  }

  CodeReport report = make_report(std::move(lengths), dist, arity);
  report.codewords = std::move(codewords);
  return report;
}

/// Prefix tree spelled by a set of codewords; edges are digits.
inline DecisionTree tree_from_codewords(const std::vector<std::vector<std::size_t>>& codewords, std::size_t arity) {
  struct Trie {
    std::optional<SymbolIndex> symbol;
    std::vector<std::pair<std::size_t, std::size_t>> next;
  };
  std::vector<Trie> trie(1);
  for (SymbolIndex s = 0; s < codewords.size(); ++s) {
    std::size_t at = 0;
    for (std::size_t digit : codewords[s]) {
      if (digit >= arity) throw Error(ErrorCode::InvalidArgument, "codeword digit exceeds arity");
      auto it = std::find_if(trie[at].next.begin(), trie[at].next.end(),
                             [&](const auto& e) { return e.first == digit; });
      if (it == trie[at].next.end()) {
        trie.emplace_back();
        trie[at].next.emplace_back(digit, trie.size() - 1);
        at = trie.size() - 1;
      } else {
        at = it->second;
      }
    }
    if (trie[at].symbol || !trie[at].next.empty()) {
      throw Error(ErrorCode::InvalidArgument, "codewords do not form a prefix code");
    }
    trie[at].symbol = s;
  }

  DecisionTree tree(arity);
  auto emit = [&](auto&& self, std::size_t at) -> NodeId {
    if (trie[at].symbol) {
      if (!trie[at].next.empty()) throw Error(ErrorCode::InvalidArgument, "codewords do not form a prefix code");
      return tree.add_leaf(*trie[at].symbol);
    }
    std::vector<std::pair<std::size_t, NodeId>> children;
    for (const auto& [digit, child] : trie[at].next) children.emplace_back(digit, self(self, child));
    return tree.add_internal(std::nullopt, std::move(children));
  };
  tree.set_root(emit(emit, 0));
  return tree;
}

// ---------------------------------------------------------------------------
// Exact oracle
// ---------------------------------------------------------------------------

struct OptimalTree {
  CodeReport report;
  DecisionTree tree;
  double optimum = 0.0;
  std::size_t states = 0;
};

namespace detail {

class BruteForceSolver {
 public:
  BruteForceSolver(const Distribution& dist, const QuerySet& qset, std::uint64_t state_limit)
      : dist_(dist), qset_(qset), state_limit_(state_limit) {
    const std::size_t n = dist.size();
    chunk_mass_.assign((n + 7) / 8, std::array<double, 256>{});
    for (std::size_t chunk = 0; chunk < chunk_mass_.size(); ++chunk) {
      for (std::size_t bits = 0; bits < 256; ++bits) {
        double m = 0.0;
        for (std::size_t b = 0; b < 8; ++b) {
          const std::size_t s = chunk * 8 + b;
          if ((bits >> b) & 1U && s < n) m += dist.prob(s);
        }
        chunk_mass_[chunk][bits] = m;
      }
    }
    for (const Query& q : qset.queries()) {
      std::vector<std::uint64_t> masks;
      for (const SymbolSet& cell : q.cells()) {
        std::uint64_t mask = 0;
        for (SymbolIndex s : cell) mask |= std::uint64_t{1} << s;
        masks.push_back(mask);
      }
      cell_masks_.push_back(std::move(masks));
    }
  }

  /// Sum over internal nodes of their absolute mass, i.e. the expected
  /// number of queries scaled by p(mask).
  double solve(std::uint64_t mask) {
    if (std::has_single_bit(mask)) return 0.0;
    if (auto it = memo_.find(mask); it != memo_.end()) return it->second.cost;
    if (memo_.size() >= state_limit_) {
      throw Error(ErrorCode::TooLarge, "brute force explored more than " + std::to_string(state_limit_) + " states");
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_query = kNone;
    for (std::size_t q = 0; q < cell_masks_.size(); ++q) {
      std::size_t parts = 0;
      for (std::uint64_t cell : cell_masks_[q]) parts += (cell & mask) != 0;
      if (parts < 2) continue;
      double cost = 0.0;
      for (std::uint64_t cell : cell_masks_[q]) {
        if (const std::uint64_t sub = cell & mask; sub != 0) cost += solve(sub);
        if (cost >= best) break;
      }
      if (cost < best - kTieTolerance) {
        best = cost;
        best_query = q;
      }
    }
    if (best_query == kNone) {
      throw Error(ErrorCode::InfeasibleQuerySet, "no admissible query splits a reachable candidate set");
    }
    const double total = mass(mask) + best;
    memo_[mask] = {total, best_query};
    return total;
  }

  NodeId emit(DecisionTree& tree, std::uint64_t mask) const {
    if (std::has_single_bit(mask)) return tree.add_leaf(static_cast<SymbolIndex>(std::countr_zero(mask)));
    const std::size_t q = memo_.at(mask).query;
    std::vector<std::pair<std::size_t, NodeId>> children;
    for (std::size_t a = 0; a < cell_masks_[q].size(); ++a) {
      if (const std::uint64_t sub = cell_masks_[q][a] & mask; sub != 0) children.emplace_back(a, emit(tree, sub));
    }
    return tree.add_internal(q, std::move(children));
  }

  std::size_t states() const noexcept { return memo_.size(); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Entry {
    double cost;
    std::size_t query;
  };

  double mass(std::uint64_t mask) const noexcept {
    double m = 0.0;
    for (std::size_t chunk = 0; mask != 0; ++chunk, mask >>= 8) m += chunk_mass_[chunk][mask & 0xFFU];
    return m;
  }

  const Distribution& dist_;
  const QuerySet& qset_;
  std::uint64_t state_limit_;
  std::vector<std::array<double, 256>> chunk_mass_;
  std::vector<std::vector<std::uint64_t>> cell_masks_;
  std::unordered_map<std::uint64_t, Entry> memo_;
};

}  // namespace detail

/// Minimum expected query count over every valid tree for a constrained
/// query set, by memoized recursion over reachable candidate subsets
/// (bitmasks, N <= 64). Ties go to the lowest query id.
inline OptimalTree brute_force_optimal(const Distribution& dist, const QuerySet& qset, SearchBudget budget = {}) {
  if (qset.is_unconstrained()) {
    throw Error(ErrorCode::InvalidArgument, "brute force needs a finite (constrained) query set");
  }
  if (dist.size() > 64) {
    throw Error(ErrorCode::TooLarge, "brute force supports at most 64 symbols, got " + std::to_string(dist.size()));
  }
  detail::require_feasible(dist, qset);
  const std::uint64_t full = dist.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << dist.size()) - 1;

  detail::BruteForceSolver solver(dist, qset, budget.exact_state_limit);
  OptimalTree out;
  out.optimum = solver.solve(full);
  out.states = solver.states();
  out.tree = DecisionTree(qset.arity());
  out.tree.set_root(solver.emit(out.tree, full));
  out.report = expected_length(out.tree, dist);
  return out;
}

// ---------------------------------------------------------------------------
// Selection by name
// ---------------------------------------------------------------------------

enum class Coder { migc, gbsc, huffman, shannon, bruteforce };

inline std::optional<Coder> parse_coder(std::string_view name) {
  if (name == "migc") return Coder::migc;
  if (name == "gbsc") return Coder::gbsc;
  if (name == "huffman") return Coder::huffman;
  if (name == "shannon") return Coder::shannon;
  if (name == "bruteforce") return Coder::bruteforce;
  return std::nullopt;
}

inline std::string_view to_string(Coder coder) noexcept {
  switch (coder) {
    case Coder::migc: return "migc";
    case Coder::gbsc: return "gbsc";
    case Coder::huffman: return "huffman";
    case Coder::shannon: return "shannon";
    case Coder::bruteforce: return "bruteforce";
  }
  return "unknown";
}

/// Runs a coder and returns its tree with the matching report. Huffman and
/// Shannon ignore query constraints, so they only accept unconstrained sets.
inline CodedTree build_tree(Coder coder, const Distribution& dist, const QuerySet& qset, SearchBudget budget = {}) {
  const auto require_unconstrained = [&] {
    if (!qset.is_unconstrained()) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(to_string(coder)) + " ignores query constraints; use an unconstrained query set");
    }
    if (qset.universe_size() != dist.size()) {
      throw Error(ErrorCode::InvalidArgument, "query set universe differs from distribution size");
    }
  };
  switch (coder) {
    case Coder::migc: {
      DecisionTree tree = migc_build(dist, qset, budget);
      return {expected_length(tree, dist), std::move(tree)};
    }
    case Coder::gbsc: {
      DecisionTree tree = gbsc_build(dist, qset, budget);
      return {expected_length(tree, dist), std::move(tree)};
    }
    case Coder::huffman: require_unconstrained(); return huffman_dary(dist, qset.arity());
    case Coder::shannon: {
      require_unconstrained();
      CodeReport report = shannon_dary(dist, qset.arity());
      DecisionTree tree = tree_from_codewords(report.codewords, qset.arity());
      return {std::move(report), std::move(tree)};
    }
    case Coder::bruteforce: {
      OptimalTree opt = brute_force_optimal(dist, qset, budget);
      return {std::move(opt.report), std::move(opt.tree)};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown coder");
}

}  // namespace migc
