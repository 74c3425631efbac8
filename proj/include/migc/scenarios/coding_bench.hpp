#pragma once

// Average code length of Huffman, MIGC and Shannon coding over random
// distributions with no query constraints.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "migc/coders.hpp"
#include "migc/csv.hpp"
#include "migc/error.hpp"
#include "migc/parallel.hpp"
#include "migc/random.hpp"

namespace migc {

struct BenchConfig {
  std::size_t n_min = 3;
  std::size_t n_max = 12;
  std::size_t samples_per_n = 1000;
  std::size_t arity = 3;
  std::uint64_t seed = 0;
  SearchBudget budget{};
  /// 0 = hardware concurrency. Results do not depend on it.
  std::size_t workers = 0;
};

struct CodingSample {
  std::size_t n = 0;
  std::size_t index = 0;
  double huffman = 0.0;
  double migc = 0.0;
  double shannon = 0.0;
  double entropy = 0.0;
  std::vector<std::size_t> huffman_lengths;
  std::vector<std::size_t> migc_lengths;
  std::vector<std::size_t> shannon_lengths;
};

struct CodingRow {
  std::size_t n = 0;
  double mean_huffman = 0.0;
  double mean_migc = 0.0;
  double mean_shannon = 0.0;
};

struct SymbolGap {
  std::size_t sample = 0;
  std::size_t symbol = 0;
  long shannon_minus_migc = 0;
  long migc_minus_huffman = 0;
};

struct CodingBenchResult {
  std::vector<CodingRow> rows;
  /// Per-symbol gaps for every sample at n_max.
  std::vector<SymbolGap> gaps;
  std::map<long, std::size_t> shannon_minus_migc_histogram;
  std::map<long, std::size_t> migc_minus_huffman_histogram;
  std::vector<CodingSample> samples;
};

/// Stream id of sample `index` at symbol count `n`.
inline std::uint64_t coding_stream(std::size_t n, std::size_t index) {
  return (static_cast<std::uint64_t>(n) << 32) | static_cast<std::uint64_t>(index);
}

inline CodingSample run_coding_sample(const BenchConfig& config, std::size_t n, std::size_t index) {
  Rng rng = make_stream(config.seed, coding_stream(n, index));
  const Distribution dist = sample_simplex(n, rng);
  const QuerySet free = QuerySet::unconstrained(config.arity, n);

  CodingSample s;
  s.n = n;
  s.index = index;
  CodeReport h = huffman_dary(dist, config.arity).report;
  CodeReport m = expected_length(migc_build(dist, free, config.budget), dist);
  CodeReport sh = shannon_dary(dist, config.arity);
  s.huffman = h.expected_length;
  s.migc = m.expected_length;
  s.shannon = sh.expected_length;
  s.entropy = m.entropy_base_d;
  s.huffman_lengths = std::move(h.per_symbol_lengths);
  s.migc_lengths = std::move(m.per_symbol_lengths);
  s.shannon_lengths = std::move(sh.per_symbol_lengths);
  return s;
}

inline CodingBenchResult bench_coding(const BenchConfig& config) {
  if (config.n_min < 2 || config.n_min > config.n_max) {
    throw Error(ErrorCode::InvalidArgument, "need 2 <= n_min <= n_max");
  }
  if (config.samples_per_n < 1) throw Error(ErrorCode::InvalidArgument, "samples_per_n must be >= 1");
  if (config.arity < 2) throw Error(ErrorCode::InvalidArgument, "arity must be at least 2");

  const std::size_t span = config.n_max - config.n_min + 1;
  const std::size_t total = span * config.samples_per_n;
  CodingBenchResult result;
  result.samples.resize(total);
  parallel_for(total, config.workers, [&](std::size_t task) {
    const std::size_t n = config.n_min + task / config.samples_per_n;
    result.samples[task] = run_coding_sample(config, n, task % config.samples_per_n);
  });

  for (std::size_t k = 0; k < span; ++k) {
    CompensatedAccumulator h, m, s;
    for (std::size_t i = 0; i < config.samples_per_n; ++i) {
      const CodingSample& cs = result.samples[k * config.samples_per_n + i];
      h.add(cs.huffman);
      m.add(cs.migc);
      s.add(cs.shannon);
    }
    const double count = static_cast<double>(config.samples_per_n);
    result.rows.push_back({config.n_min + k, h.value() / count, m.value() / count, s.value() / count});
  }

  for (std::size_t i = 0; i < config.samples_per_n; ++i) {
    const CodingSample& cs = result.samples[(span - 1) * config.samples_per_n + i];
    for (std::size_t sym = 0; sym < cs.n; ++sym) {
      SymbolGap gap{i, sym,
                    static_cast<long>(cs.shannon_lengths[sym]) - static_cast<long>(cs.migc_lengths[sym]),
                    static_cast<long>(cs.migc_lengths[sym]) - static_cast<long>(cs.huffman_lengths[sym])};
      ++result.shannon_minus_migc_histogram[gap.shannon_minus_migc];
      ++result.migc_minus_huffman_histogram[gap.migc_minus_huffman];
      result.gaps.push_back(gap);
    }
  }
  return result;
}

inline std::string coding_means_csv(const CodingBenchResult& result) {
  std::string out = "n,mean_huffman,mean_migc,mean_shannon\n";
  for (const CodingRow& r : result.rows) {
    append_csv_row(out, {std::to_string(r.n), format_real(r.mean_huffman), format_real(r.mean_migc),
                         format_real(r.mean_shannon)});
  }
  return out;
}

inline std::string coding_gaps_csv(const CodingBenchResult& result) {
  std::string out = "sample,symbol,shannon_minus_migc,migc_minus_huffman\n";
  for (const SymbolGap& g : result.gaps) {
    append_csv_row(out, {std::to_string(g.sample), std::to_string(g.symbol), std::to_string(g.shannon_minus_migc),
                         std::to_string(g.migc_minus_huffman)});
  }
  return out;
}

}  // namespace migc
