#pragma once

// Two-gene interval detection. Gene A sits on exon a and gene B on exon b
// (a != b); a probe covers a contiguous run of exons and reports which genes
// it touches.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "migc/coders.hpp"
#include "migc/csv.hpp"
#include "migc/error.hpp"
#include "migc/parallel.hpp"
#include "migc/random.hpp"

namespace migc {

enum class ProbeResult : std::size_t { a_only = 0, b_only = 1, both = 2, neither = 3 };

inline constexpr std::size_t kProbeResults = 4;

struct DnaInstance {
  std::size_t exons = 0;
  /// (exon of A, exon of B), zero-based, ordered by a then b.
  std::vector<std::pair<std::size_t, std::size_t>> targets;
  /// Inclusive exon intervals [first, last], ordered by first then last.
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
  /// One 4-ary query per interval; answer index is a ProbeResult.
  QuerySet probes;
  /// Binary baseline: per interval, "is A in it?" then "is B in it?".
  QuerySet single_gene_probes;
  std::vector<std::string> labels;
};

inline ProbeResult probe(std::pair<std::size_t, std::size_t> interval, std::pair<std::size_t, std::size_t> target) {
  const auto inside = [&](std::size_t e) { return interval.first <= e && e <= interval.second; };
  const bool a = inside(target.first);
  const bool b = inside(target.second);
  if (a && b) return ProbeResult::both;
  if (a) return ProbeResult::a_only;
  if (b) return ProbeResult::b_only;
  return ProbeResult::neither;
}

inline DnaInstance dna_instance(std::size_t exons) {
  if (exons < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 exons");
  DnaInstance inst;
  inst.exons = exons;
  for (std::size_t a = 0; a < exons; ++a) {
    for (std::size_t b = 0; b < exons; ++b) {
      if (a == b) continue;
      inst.targets.emplace_back(a, b);
      inst.labels.push_back("(" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ")");
    }
  }
  for (std::size_t i = 0; i < exons; ++i) {
    for (std::size_t j = i; j < exons; ++j) inst.intervals.emplace_back(i, j);
  }
  const std::size_t n = inst.targets.size();
  std::vector<std::vector<SymbolSet>> four_way;
  std::vector<std::vector<SymbolSet>> binary;
  for (const auto& interval : inst.intervals) {
    std::vector<SymbolSet> cells(kProbeResults);
    SymbolSet has_a, has_b;
    for (SymbolIndex t = 0; t < n; ++t) {
      const ProbeResult r = probe(interval, inst.targets[t]);
      cells[static_cast<std::size_t>(r)].push_back(t);
      if (r == ProbeResult::a_only || r == ProbeResult::both) has_a.push_back(t);
      if (r == ProbeResult::b_only || r == ProbeResult::both) has_b.push_back(t);
    }
    four_way.push_back(std::move(cells));
    binary.push_back({has_a});
    binary.push_back({has_b});
  }
  inst.probes = QuerySet::constrained(kProbeResults, n, std::move(four_way));
  inst.single_gene_probes = QuerySet::constrained(2, n, std::move(binary));
  return inst;
}

struct DnaSample {
  std::size_t sample = 0;
  double migc = 0.0;
  double bruteforce = 0.0;
  double gbsc = 0.0;
  double entropy = 0.0;
};

struct DnaBenchResult {
  std::size_t exons = 0;
  std::vector<DnaSample> samples;
  double mean_migc = 0.0;
  double mean_bruteforce = 0.0;
  double mean_gbsc = 0.0;
  /// Quantiles of migc - bruteforce at 0.5, 0.9, 0.95, 0.99.
  std::vector<std::pair<double, double>> gap_quantiles;
};

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline DnaBenchResult dna_bench(std::size_t exons, std::size_t samples, std::uint64_t seed, SearchBudget budget = {},
                                std::size_t workers = 0) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "samples must be >= 1");
  const DnaInstance inst = dna_instance(exons);
  if (inst.targets.size() > 64) {
    throw Error(ErrorCode::TooLarge, std::to_string(exons) + " exons give " + std::to_string(inst.targets.size()) +
                                         " targets; the exact oracle handles at most 64");
  }

  DnaBenchResult result;
  result.exons = exons;
  result.samples.resize(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    const Distribution sampled = sample_simplex(inst.targets.size(), rng);
    const Distribution dist = Distribution::validate(
        inst.labels, std::vector<double>(sampled.probs().begin(), sampled.probs().end()));
    DnaSample& s = result.samples[i];
    s.sample = i;
    s.migc = expected_length(migc_build(dist, inst.probes, budget), dist).expected_length;
    s.bruteforce = brute_force_optimal(dist, inst.probes, budget).report.expected_length;
    s.gbsc = expected_length(gbsc_build(dist, inst.single_gene_probes, budget), dist).expected_length;
    s.entropy = entropy_of_masses(dist.probs(), static_cast<double>(kProbeResults));
  });

  CompensatedAccumulator m, b, g;
  std::vector<double> gaps;
  for (const DnaSample& s : result.samples) {
    m.add(s.migc);
    b.add(s.bruteforce);
    g.add(s.gbsc);
    gaps.push_back(s.migc - s.bruteforce);
  }
  const double count = static_cast<double>(samples);
  result.mean_migc = m.value() / count;
  result.mean_bruteforce = b.value() / count;
  result.mean_gbsc = g.value() / count;
  for (double q : {0.5, 0.9, 0.95, 0.99}) result.gap_quantiles.emplace_back(q, quantile(gaps, q));
  return result;
}

inline std::string dna_csv(const DnaBenchResult& result) {
  std::string out = "sample,migc,bruteforce,gbsc\n";
  for (const DnaSample& s : result.samples) {
    append_csv_row(out, {std::to_string(s.sample), format_real(s.migc), format_real(s.bruteforce), format_real(s.gbsc)});
  }
  return out;
}

}  // namespace migc
