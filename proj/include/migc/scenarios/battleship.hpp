#pragma once

// Three-outcome battleship: two players hide fleets on one shared board and a
// third player bombs cells, learning "hit player 1", "hit player 2" or
// "miss" each time. The solver knows a finite list of candidate layouts and
// always fires where the answer entropy over the surviving layouts is
// largest.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "migc/csv.hpp"
#include "migc/error.hpp"
#include "migc/numeric.hpp"
#include "migc/parallel.hpp"
#include "migc/random.hpp"

namespace migc {

enum class StopRule { identify, sink };

inline std::string_view to_string(StopRule rule) noexcept {
  return rule == StopRule::identify ? "identify" : "sink";
}

inline StopRule parse_stop_rule(std::string_view name) {
  if (name == "identify") return StopRule::identify;
  if (name == "sink") return StopRule::sink;
  throw Error(ErrorCode::InvalidArgument, "unknown stop rule '" + std::string(name) + "'");
}

struct BattleshipConfig {
  std::size_t rows = 10;
  std::size_t cols = 10;
  /// Ship lengths per player.
  std::vector<std::vector<std::size_t>> fleets{{5, 3}, {5, 3}};
  /// 3^12 sampled layouts.
  std::size_t layout_count = 531441;
  StopRule stop_rule = StopRule::identify;
  std::uint64_t seed = 0;
  /// Drop sampled layouts whose board repeats an earlier one.
  bool dedup = false;
};

struct Ship {
  std::size_t owner = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t length = 1;
  bool horizontal = true;

  friend bool operator==(const Ship&, const Ship&) = default;
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;

  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// A list of legal layouts stored flat. Each layout occupies the same number
/// of cells; `occupied(i)` lists them ascending with the owning player.
class LayoutSet {
 public:
  LayoutSet(std::size_t rows, std::size_t cols, std::size_t players) : rows_(rows), cols_(cols), players_(players) {
    if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "board must be at least 1x1");
    if (rows * cols > 65535) throw Error(ErrorCode::TooLarge, "board has more than 65535 cells");
    if (players == 0 || players > 254) throw Error(ErrorCode::InvalidArgument, "need between 1 and 254 players");
  }

  /// Appends a layout after checking it is on the board, non-overlapping and
  /// shaped like the layouts already present.
  void add(const std::vector<Ship>& ships) {
    std::vector<std::pair<std::uint16_t, std::uint8_t>> cells;
    for (const Ship& s : ships) {
      if (s.owner >= players_) throw Error(ErrorCode::InvalidArgument, "ship owner out of range");
      if (s.length == 0) throw Error(ErrorCode::InvalidArgument, "ship of length 0");
      const std::size_t last_row = s.row + (s.horizontal ? 0 : s.length - 1);
      const std::size_t last_col = s.col + (s.horizontal ? s.length - 1 : 0);
      if (last_row >= rows_ || last_col >= cols_) throw Error(ErrorCode::InvalidArgument, "ship leaves the board");
      for (std::size_t k = 0; k < s.length; ++k) {
        const std::size_t r = s.row + (s.horizontal ? 0 : k);
        const std::size_t c = s.col + (s.horizontal ? k : 0);
        cells.emplace_back(static_cast<std::uint16_t>(r * cols_ + c), static_cast<std::uint8_t>(s.owner));
      }
    }
    std::sort(cells.begin(), cells.end());
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (cells[i].first == cells[i - 1].first) throw Error(ErrorCode::InvalidArgument, "ships overlap");
    }
    if (size_ == 0) {
      cells_per_layout_ = cells.size();
      ships_per_layout_ = ships.size();
    } else if (cells.size() != cells_per_layout_ || ships.size() != ships_per_layout_) {
      throw Error(ErrorCode::InvalidArgument, "layouts must share one fleet shape");
    }
    for (const auto& [cell, owner] : cells) {
      cells_.push_back(cell);
      owners_.push_back(owner);
    }
    for (const Ship& s : ships) {
      ships_.push_back({static_cast<std::uint16_t>(s.row), static_cast<std::uint16_t>(s.col),
                        static_cast<std::uint16_t>(s.length), static_cast<std::uint8_t>(s.owner), s.horizontal});
    }
    ++size_;
    board_ids_.clear();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t cell_count() const noexcept { return rows_ * cols_; }
  std::size_t players() const noexcept { return players_; }
  /// One answer per player plus "miss".
  std::size_t answer_count() const noexcept { return players_ + 1; }
  std::size_t miss_answer() const noexcept { return players_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t cells_per_layout() const noexcept { return cells_per_layout_; }

  std::span<const std::uint16_t> occupied(std::size_t layout) const {
    return {cells_.data() + layout * cells_per_layout_, cells_per_layout_};
  }
  std::span<const std::uint8_t> owners(std::size_t layout) const {
    return {owners_.data() + layout * cells_per_layout_, cells_per_layout_};
  }
  std::vector<Ship> ships(std::size_t layout) const {
    std::vector<Ship> out;
    for (std::size_t k = 0; k < ships_per_layout_; ++k) {
      const PackedShip& p = ships_[layout * ships_per_layout_ + k];
      out.push_back({p.owner, p.row, p.col, p.length, p.horizontal});
    }
    return out;
  }

  /// Answer observed when firing at `cell` if `layout` is the true board.
  std::size_t answer(std::size_t layout, std::size_t cell) const {
    const auto occ = occupied(layout);
    const auto own = owners(layout);
    for (std::size_t k = 0; k < occ.size(); ++k) {
      if (occ[k] == cell) return own[k];
    }
    return miss_answer();
  }

  std::size_t cell_index(Cell c) const {
    if (c.row >= rows_ || c.col >= cols_) {
      throw Error(ErrorCode::InvalidArgument,
                  "cell (" + std::to_string(c.row) + "," + std::to_string(c.col) + ") is off the board");
    }
    return c.row * cols_ + c.col;
  }
  Cell cell_at(std::size_t index) const { return {index / cols_, index % cols_}; }

  /// Layouts with identical occupancy (cell -> owner) share a board id,
  /// namely the index of the first such layout. Shots cannot tell them apart.
  std::uint32_t board_id(std::size_t layout) const {
    ensure_board_ids();
    return board_ids_[layout];
  }
  bool has_duplicate_boards() const {
    ensure_board_ids();
    return duplicates_;
  }

 private:
  struct PackedShip {
    std::uint16_t row, col, length;
    std::uint8_t owner;
    bool horizontal;
  };

  void ensure_board_ids() const {
    if (board_ids_.size() == size_) return;
    board_ids_.resize(size_);
    duplicates_ = false;
    std::unordered_map<std::string, std::uint32_t> first;
    first.reserve(size_);
    std::string key;
    for (std::size_t i = 0; i < size_; ++i) {
      key.clear();
      const auto occ = occupied(i);
      const auto own = owners(i);
      for (std::size_t k = 0; k < occ.size(); ++k) {
        key.push_back(static_cast<char>(occ[k] & 0xFF));
        key.push_back(static_cast<char>(occ[k] >> 8));
        key.push_back(static_cast<char>(own[k]));
      }
      auto [it, inserted] = first.try_emplace(key, static_cast<std::uint32_t>(i));
      board_ids_[i] = it->second;
      duplicates_ = duplicates_ || !inserted;
    }
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t players_;
  std::size_t size_ = 0;
  std::size_t cells_per_layout_ = 0;
  std::size_t ships_per_layout_ = 0;
  std::vector<std::uint16_t> cells_;
  std::vector<std::uint8_t> owners_;
  std::vector<PackedShip> ships_;
  mutable std::vector<std::uint32_t> board_ids_;
  mutable bool duplicates_ = false;
};

namespace detail {

struct Placement {
  std::size_t row, col;
  bool horizontal;
};

inline std::vector<Placement> placements(std::size_t rows, std::size_t cols, std::size_t length) {
  std::vector<Placement> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + length <= cols; ++c) out.push_back({r, c, true});
  }
  if (length > 1) {
    for (std::size_t r = 0; r + length <= rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) out.push_back({r, c, false});
    }
  }
  return out;
}

struct FleetSlot {
  std::size_t owner;
  std::size_t length;
  std::vector<Placement> options;
};

inline std::vector<FleetSlot> fleet_slots(const BattleshipConfig& config) {
  if (config.fleets.empty()) throw Error(ErrorCode::InvalidArgument, "no players");
  std::vector<FleetSlot> slots;
  for (std::size_t p = 0; p < config.fleets.size(); ++p) {
    for (std::size_t length : config.fleets[p]) {
      if (length == 0) throw Error(ErrorCode::InvalidArgument, "ship of length 0");
      slots.push_back({p, length, placements(config.rows, config.cols, length)});
    }
  }
  if (slots.empty()) throw Error(ErrorCode::InvalidArgument, "fleets contain no ships");
  return slots;
}

inline bool fits(std::vector<std::uint8_t>& board, std::size_t cols, const Placement& pl, std::size_t length) {
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t idx = (pl.row + (pl.horizontal ? 0 : k)) * cols + pl.col + (pl.horizontal ? k : 0);
    if (board[idx]) return false;
  }
  return true;
}

inline void mark(std::vector<std::uint8_t>& board, std::size_t cols, const Placement& pl, std::size_t length,
                 std::uint8_t value) {
  for (std::size_t k = 0; k < length; ++k) {
    board[(pl.row + (pl.horizontal ? 0 : k)) * cols + pl.col + (pl.horizontal ? k : 0)] = value;
  }
}

/// Depth-first walk over every legal placement sequence; `visit` returns
/// false to stop early.
template <typename Visit>
bool enumerate_fleet(const std::vector<FleetSlot>& slots, std::size_t cols, std::vector<std::uint8_t>& board,
                     std::vector<Ship>& ships, Visit&& visit) {
  const std::size_t depth = ships.size();
  if (depth == slots.size()) return visit(ships);
  const FleetSlot& slot = slots[depth];
  for (const Placement& pl : slot.options) {
    if (!fits(board, cols, pl, slot.length)) continue;
    mark(board, cols, pl, slot.length, 1);
    ships.push_back({slot.owner, pl.row, pl.col, slot.length, pl.horizontal});
    const bool go_on = enumerate_fleet(slots, cols, board, ships, visit);
    ships.pop_back();
    mark(board, cols, pl, slot.length, 0);
    if (!go_on) return false;
  }
  return true;
}

inline void require_placeable(const BattleshipConfig& config, const std::vector<FleetSlot>& slots) {
  std::vector<std::uint8_t> board(config.rows * config.cols, 0);
  std::vector<Ship> ships;
  bool found = false;
  enumerate_fleet(slots, config.cols, board, ships, [&](const std::vector<Ship>&) {
    found = true;
    return false;
  });
  if (!found) throw Error(ErrorCode::ImpossibleFleet, "the fleets cannot be placed on the board");
}

inline constexpr std::uint64_t kLayoutStream = 0x4C41594F5554ULL;
inline constexpr std::uint64_t kTargetStream = 0x5441524745540000ULL;

}  // namespace detail

/// Samples `layout_count` legal layouts uniformly (whole-layout rejection),
/// deterministically for a given seed.
inline LayoutSet battleship_layouts(const BattleshipConfig& config) {
  if (config.layout_count < 1) throw Error(ErrorCode::InvalidArgument, "layout_count must be >= 1");
  LayoutSet set(config.rows, config.cols, config.fleets.size());
  const auto slots = detail::fleet_slots(config);
  detail::require_placeable(config, slots);

  Rng rng = make_stream(config.seed, detail::kLayoutStream);
  std::vector<std::uint8_t> board(config.rows * config.cols, 0);
  std::vector<Ship> ships;
  std::unordered_map<std::string, bool> seen;
  std::size_t consecutive_duplicates = 0;
  while (set.size() < config.layout_count) {
    std::fill(board.begin(), board.end(), 0);
    ships.clear();
    bool ok = true;
    for (const auto& slot : slots) {
      if (slot.options.empty()) {
        ok = false;
        break;
      }
      const auto& pl = slot.options[uniform_below(rng, slot.options.size())];
      if (!detail::fits(board, config.cols, pl, slot.length)) {
        ok = false;
        break;
      }
      detail::mark(board, config.cols, pl, slot.length, static_cast<std::uint8_t>(slot.owner + 1));
      ships.push_back({slot.owner, pl.row, pl.col, slot.length, pl.horizontal});
    }
    if (!ok) continue;
    if (config.dedup) {
      std::string key(board.begin(), board.end());
      if (!seen.emplace(std::move(key), true).second) {
        if (++consecutive_duplicates > 1000000) {
          throw Error(ErrorCode::ImpossibleFleet, "fewer distinct boards exist than layouts requested");
        }
        continue;
      }
      consecutive_duplicates = 0;
    }
    set.add(ships);
  }
  return set;
}

/// Every legal layout, in depth-first placement order. Throws TooLarge past
/// `limit` layouts.
inline LayoutSet enumerate_layouts(const BattleshipConfig& config, std::size_t limit = 10'000'000) {
  LayoutSet set(config.rows, config.cols, config.fleets.size());
  const auto slots = detail::fleet_slots(config);
  std::vector<std::uint8_t> board(config.rows * config.cols, 0);
  std::vector<Ship> ships;
  detail::enumerate_fleet(slots, config.cols, board, ships, [&](const std::vector<Ship>& layout) {
    if (set.size() >= limit) throw Error(ErrorCode::TooLarge, "more than " + std::to_string(limit) + " layouts");
    set.add(layout);
    return true;
  });
  if (set.size() == 0) throw Error(ErrorCode::ImpossibleFleet, "the fleets cannot be placed on the board");
  return set;
}

// ---------------------------------------------------------------------------
// Solver state
// ---------------------------------------------------------------------------

struct Shot {
  Cell cell;
  std::size_t answer = 0;

  friend bool operator==(const Shot&, const Shot&) = default;
};

/// Surviving layouts X_t, the shots so far and the entropy trace H(X_0..X_t)
/// in base answer_count() digits (trits for two players).
struct BattleshipState {
  std::vector<std::uint32_t> survivors;
  std::vector<Shot> shots;
  std::vector<double> entropy_trace;
  std::vector<bool> fired;

  friend bool operator==(const BattleshipState&, const BattleshipState&) = default;
};

/// Entropy of the uniform posterior over the surviving boards. Equals
/// log |X_t| whenever the surviving layouts are pairwise distinct boards.
inline double survivor_entropy(const LayoutSet& layouts, std::span<const std::uint32_t> survivors) {
  const double base = static_cast<double>(layouts.answer_count());
  if (survivors.empty()) return 0.0;
  if (!layouts.has_duplicate_boards()) {
    return std::log(static_cast<double>(survivors.size())) / std::log(base);
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(survivors.size());
  for (auto s : survivors) ids.push_back(layouts.board_id(s));
  std::sort(ids.begin(), ids.end());
  std::vector<std::uint64_t> counts;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    counts.push_back(j - i);
    i = j;
  }
  return entropy_of_counts(counts, base);
}

inline BattleshipState initial_state(const LayoutSet& layouts) {
  BattleshipState state;
  state.survivors.resize(layouts.size());
  for (std::size_t i = 0; i < layouts.size(); ++i) state.survivors[i] = static_cast<std::uint32_t>(i);
  state.fired.assign(layouts.cell_count(), false);
  state.entropy_trace.push_back(survivor_entropy(layouts, state.survivors));
  return state;
}

/// True once every surviving layout is the same board.
inline bool is_identified(const BattleshipState& state, const LayoutSet& layouts) {
  if (state.survivors.empty()) return false;
  const std::uint32_t first = layouts.board_id(state.survivors.front());
  return std::all_of(state.survivors.begin(), state.survivors.end(),
                     [&](std::uint32_t s) { return layouts.board_id(s) == first; });
}

/// Answer counts over the survivors, laid out [cell * answer_count() + answer].
inline std::vector<std::uint64_t> answer_counts(const BattleshipState& state, const LayoutSet& layouts) {
  const std::size_t k = layouts.answer_count();
  std::vector<std::uint64_t> counts(layouts.cell_count() * k, 0);
  for (auto s : state.survivors) {
    const auto occ = layouts.occupied(s);
    const auto own = layouts.owners(s);
    for (std::size_t i = 0; i < occ.size(); ++i) ++counts[occ[i] * k + own[i]];
  }
  const std::uint64_t total = state.survivors.size();
  for (std::size_t c = 0; c < layouts.cell_count(); ++c) {
    std::uint64_t hits = 0;
    for (std::size_t a = 0; a + 1 < k; ++a) hits += counts[c * k + a];
    counts[c * k + layouts.miss_answer()] = total - hits;
  }
  return counts;
}

struct ShotRecommendation {
  Cell cell;
  /// Probability of each answer (per player hit, then miss).
  std::vector<double> probabilities;
  double entropy = 0.0;
};

/// The unfired cell whose answer distribution over the survivors has maximum
/// entropy; ties go to the lowest (row, col).
inline ShotRecommendation battleship_next_shot(const BattleshipState& state, const LayoutSet& layouts) {
  if (state.survivors.empty()) throw Error(ErrorCode::ContradictoryAnswer, "no layout is consistent with the shots");
  if (is_identified(state, layouts)) throw Error(ErrorCode::Solved, "the board is already identified");
  const std::size_t k = layouts.answer_count();
  const auto counts = answer_counts(state, layouts);
  const double base = static_cast<double>(k);
  double best = -1.0;
  std::size_t best_cell = 0;
  for (std::size_t c = 0; c < layouts.cell_count(); ++c) {
    if (state.fired[c]) continue;
    const double h = entropy_of_counts(std::span<const std::uint64_t>(counts.data() + c * k, k), base);
    if (h > best + kTieTolerance) {
      best = h;
      best_cell = c;
    }
  }
  if (best < 0.0) throw Error(ErrorCode::Solved, "every cell has been fired at");
  ShotRecommendation rec;
  rec.cell = layouts.cell_at(best_cell);
  rec.entropy = best;
  const double total = static_cast<double>(state.survivors.size());
  for (std::size_t a = 0; a < k; ++a) rec.probabilities.push_back(static_cast<double>(counts[best_cell * k + a]) / total);
  return rec;
}

/// Records a shot and keeps only the layouts that agree with `answer`.
/// Throws ContradictoryAnswer, leaving the state untouched, when none do.
inline void apply_shot(BattleshipState& state, const LayoutSet& layouts, Cell cell, std::size_t answer) {
  const std::size_t idx = layouts.cell_index(cell);
  if (answer >= layouts.answer_count()) {
    throw Error(ErrorCode::InvalidAnswer, "answer " + std::to_string(answer) + " out of range");
  }
  if (state.fired[idx]) throw Error(ErrorCode::InvalidArgument, "cell already fired at");
  std::vector<std::uint32_t> kept;
  kept.reserve(state.survivors.size());
  for (auto s : state.survivors) {
    if (layouts.answer(s, idx) == answer) kept.push_back(s);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::ContradictoryAnswer, "no surviving layout gives that answer at that cell");
  }
  state.survivors = std::move(kept);
  state.fired[idx] = true;
  state.shots.push_back({cell, answer});
  state.entropy_trace.push_back(survivor_entropy(layouts, state.survivors));
}

/// Per-cell probability of each answer under the uniform posterior,
/// laid out [cell * answer_count() + answer].
inline std::vector<double> heatmap(const BattleshipState& state, const LayoutSet& layouts) {
  const auto counts = answer_counts(state, layouts);
  const double total = static_cast<double>(state.survivors.size());
  std::vector<double> probs(counts.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < counts.size(); ++i) probs[i] = static_cast<double>(counts[i]) / total;
  }
  return probs;
}

/// Self-play against a known target. Under `identify` the game stops once
/// the board is pinned down; under `sink` the remaining ship cells are then
/// fired at in ascending order, each counting as a try.
inline BattleshipState battleship_play(std::size_t target, const LayoutSet& layouts, StopRule stop_rule) {
  if (target >= layouts.size()) throw Error(ErrorCode::InvalidArgument, "target is not in the layout list");
  BattleshipState state = initial_state(layouts);
  while (!is_identified(state, layouts)) {
    const ShotRecommendation rec = battleship_next_shot(state, layouts);
    apply_shot(state, layouts, rec.cell, layouts.answer(target, layouts.cell_index(rec.cell)));
  }
  if (stop_rule == StopRule::sink) {
    for (std::uint16_t c : layouts.occupied(target)) {
      if (!state.fired[c]) apply_shot(state, layouts, layouts.cell_at(c), layouts.answer(target, c));
    }
  }
  return state;
}

struct BattleshipBenchResult {
  std::vector<std::size_t> targets;
  std::vector<std::size_t> tries;
  std::vector<std::vector<double>> traces;
  double mean_tries = 0.0;
  double initial_entropy = 0.0;
};

/// Target of game `game`: uniform over the layout list.
inline std::size_t battleship_target(std::uint64_t seed, std::size_t game, std::size_t layout_count) {
  Rng rng = make_stream(seed, detail::kTargetStream + game);
  return static_cast<std::size_t>(uniform_below(rng, layout_count));
}

inline BattleshipBenchResult battleship_bench(const BattleshipConfig& config, std::size_t games,
                                              std::size_t workers = 0) {
  if (games < 1) throw Error(ErrorCode::InvalidArgument, "games must be >= 1");
  const LayoutSet layouts = battleship_layouts(config);
  layouts.has_duplicate_boards();  // build the board index before sharing across threads

  BattleshipBenchResult result;
  result.targets.resize(games);
  result.tries.resize(games);
  result.traces.resize(games);
  parallel_for(games, workers, [&](std::size_t g) {
    const std::size_t target = battleship_target(config.seed, g, layouts.size());
    BattleshipState state = battleship_play(target, layouts, config.stop_rule);
    result.targets[g] = target;
    result.tries[g] = state.shots.size();
    result.traces[g] = std::move(state.entropy_trace);
  });
  double sum = 0.0;
  for (std::size_t t : result.tries) sum += static_cast<double>(t);
  result.mean_tries = sum / static_cast<double>(games);
  result.initial_entropy = survivor_entropy(layouts, initial_state(layouts).survivors);
  return result;
}

inline std::string battleship_csv(const BattleshipBenchResult& result) {
  std::string out = "game,tries\n";
  for (std::size_t g = 0; g < result.tries.size(); ++g) {
    append_csv_row(out, {std::to_string(g), std::to_string(result.tries[g])});
  }
  return out;
}

inline std::string traces_csv(const BattleshipBenchResult& result) {
  std::string out = "game,t,entropy_trits\n";
  for (std::size_t g = 0; g < result.traces.size(); ++g) {
    for (std::size_t t = 0; t < result.traces[g].size(); ++t) {
      append_csv_row(out, {std::to_string(g), std::to_string(t), format_real(result.traces[g][t])});
    }
  }
  return out;
}

}  // namespace migc
