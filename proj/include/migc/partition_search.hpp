#pragma once

// Maximum-entropy partition of a candidate set into at most D cells when the
// query set is unconstrained.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "migc/error.hpp"
#include "migc/model.hpp"
#include "migc/numeric.hpp"

namespace migc {

enum class SearchMode { exact, heuristic, automatic };

struct SearchBudget {
  /// In automatic mode exact search runs iff D^k <= exact_state_limit.
  std::uint64_t exact_state_limit = std::uint64_t{1} << 24;
  SearchMode mode = SearchMode::automatic;
};

/// Cells hold positions into the mass vector handed to the search.
struct LocalPartition {
  std::vector<std::vector<std::size_t>> cells;
  std::vector<double> masses;
  bool exact = false;
};

namespace detail {

/// -sum l log l for loads summing to one (natural log).
inline double load_entropy(std::span<const double> loads) noexcept {
  double h = 0.0;
  for (double l : loads) {
    if (l > 0.0) h -= l * std::log(l);
  }
  return h;
}

/// Entropy of `loads` after pouring `remaining` mass into the lightest cells
/// (water-filling). No assignment of the remaining symbols can do better.
inline double water_filled_entropy(std::span<const double> loads, double remaining, std::vector<double>& scratch) {
  scratch.assign(loads.begin(), loads.end());
  std::sort(scratch.begin(), scratch.end());
  const std::size_t m = scratch.size();
  double level = scratch[0];
  double pool = remaining;
  std::size_t filled = 1;
  while (filled < m) {
    const double need = (scratch[filled] - level) * static_cast<double>(filled);
    if (need > pool) break;
    pool -= need;
    level = scratch[filled];
    ++filled;
  }
  level += pool / static_cast<double>(filled);
  for (std::size_t i = 0; i < filled; ++i) scratch[i] = level;
  return load_entropy(scratch);
}

class ExactPartitionSearch {
 public:
  ExactPartitionSearch(std::span<const double> weights, std::span<const std::size_t> order, std::size_t cells)
      : weights_(weights), order_(order), cell_count_(cells) {
    const std::size_t k = order.size();
    suffix_.assign(k + 1, 0.0);
    for (std::size_t i = k; i-- > 0;) suffix_[i] = suffix_[i + 1] + weights[order[i]];
    loads_.assign((k + 1) * cells, 0.0);
    assignment_.assign(k, 0);
    best_assignment_.assign(k, 0);
  }

  std::vector<std::size_t> run() {
    descend(0, 0);
    return best_assignment_;
  }

 private:
  std::span<const double> level(std::size_t depth) const {
    return {loads_.data() + depth * cell_count_, cell_count_};
  }

  void descend(std::size_t depth, std::size_t opened) {
    const std::size_t k = order_.size();
    if (depth == k) {
      const double h = load_entropy(level(depth));
      if (h > best_ + kTieTolerance) {
        best_ = h;
        best_assignment_ = assignment_;
      }
      return;
    }
    const double w = weights_[order_[depth]];
    const std::size_t limit = std::min(opened + 1, cell_count_);
    for (std::size_t c = 0; c < limit; ++c) {
      double* next = loads_.data() + (depth + 1) * cell_count_;
      const double* cur = loads_.data() + depth * cell_count_;
      std::copy(cur, cur + cell_count_, next);
      next[c] += w;
      if (depth + 1 < k) {
        const double bound = water_filled_entropy(level(depth + 1), suffix_[depth + 1], scratch_);
        if (bound <= best_ + kTieTolerance) continue;
      }
      assignment_[depth] = c;
      descend(depth + 1, std::max(opened, c + 1));
    }
  }

  std::span<const double> weights_;
  std::span<const std::size_t> order_;
  std::size_t cell_count_;
  std::vector<double> suffix_;
  std::vector<double> loads_;
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> best_assignment_;
  std::vector<double> scratch_;
  double best_ = -1.0;
};

}  // namespace detail

/// Partitions k weighted items into at most `arity` cells maximizing the
/// entropy of the cell masses. Exact mode runs branch-and-bound over items in
/// descending mass order; heuristic mode loads each item, heaviest first,
/// into the currently lightest cell. Cells come out in the order they are
/// opened by the search, items ascending within each cell.
inline LocalPartition optimal_partition_unconstrained(std::span<const double> masses, std::size_t arity,
                                                      SearchBudget budget = {}) {
  if (arity < 2) throw Error(ErrorCode::InvalidArgument, "arity must be at least 2");
  if (masses.empty()) throw Error(ErrorCode::EmptyCandidates, "no items to partition");
  if (budget.exact_state_limit < 1) throw Error(ErrorCode::InvalidArgument, "exact_state_limit must be >= 1");

  const std::size_t k = masses.size();
  const bool fits = saturating_pow(arity, k) <= budget.exact_state_limit;
  bool exact = false;
  switch (budget.mode) {
    case SearchMode::exact:
      if (!fits) {
        throw Error(ErrorCode::BudgetExceeded, std::to_string(arity) + "^" + std::to_string(k) +
                                                   " partition states exceed the exact search limit");
      }
      exact = true;
      break;
    case SearchMode::heuristic: exact = false; break;
    case SearchMode::automatic: exact = fits; break;
  }

  const double total = compensated_sum(masses);
  std::vector<double> weights(masses.begin(), masses.end());
  for (double& w : weights) w /= total;

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });

  const std::size_t cell_count = std::min(arity, k);
  std::vector<std::size_t> assignment;
  if (exact) {
    assignment = detail::ExactPartitionSearch(weights, order, cell_count).run();
  } else {
    assignment.resize(k);
    std::vector<double> loads(cell_count, 0.0);
    for (std::size_t pos = 0; pos < k; ++pos) {
      const std::size_t lightest = static_cast<std::size_t>(
          std::min_element(loads.begin(), loads.end()) - loads.begin());
      assignment[pos] = lightest;
      loads[lightest] += weights[order[pos]];
    }
  }

  LocalPartition result;
  result.exact = exact;
  std::vector<std::size_t> cell_of_slot(cell_count, static_cast<std::size_t>(-1));
  for (std::size_t pos = 0; pos < k; ++pos) {
    std::size_t& slot = cell_of_slot[assignment[pos]];
    if (slot == static_cast<std::size_t>(-1)) {
      slot = result.cells.size();
      result.cells.emplace_back();
    }
    result.cells[slot].push_back(order[pos]);
  }
  for (auto& cell : result.cells) {
    std::sort(cell.begin(), cell.end());
    CompensatedAccumulator acc;
    for (std::size_t i : cell) acc.add(weights[i]);
    result.masses.push_back(acc.value());
  }
  return result;
}

struct UnconstrainedPartition {
  PartitionView view;
  bool exact = false;
};

/// Symbol-level form over a candidate set; masses are conditional on it.
inline UnconstrainedPartition optimal_partition_unconstrained(const Distribution& dist,
                                                              std::span<const SymbolIndex> candidates,
                                                              std::size_t arity, SearchBudget budget = {}) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "candidate set is empty");
  check_symbols(candidates, dist);
  std::vector<double> masses;
  masses.reserve(candidates.size());
  for (SymbolIndex s : candidates) masses.push_back(dist.prob(s));
  LocalPartition local = optimal_partition_unconstrained(masses, arity, budget);

  UnconstrainedPartition out;
  out.exact = local.exact;
  out.view.masses = std::move(local.masses);
  for (std::size_t j = 0; j < local.cells.size(); ++j) {
    SymbolSet cell;
    for (std::size_t pos : local.cells[j]) cell.push_back(candidates[pos]);
    out.view.cells.push_back(make_symbol_set(std::move(cell)));
    out.view.answers.push_back(j);
  }
  return out;
}

}  // namespace migc
