// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "migc/coders.hpp"
#include "migc/scenarios/battleship.hpp"
#include "migc/scenarios/coding_bench.hpp"
#include "migc/scenarios/dna.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace {

using namespace migc;
using Seconds = std::chrono::duration<double>;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* name, double limit_s, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v = check();
  const double took = Seconds(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && took > limit_s) {
    v.pass = false;
    v.detail += " | runtime over limit";
  }
  failures += v.pass ? 0 : 1;
  std::printf("%s %s (%.2fs%s) %s\n", v.pass ? "PASS" : "FAIL", name, took,
              limit_s > 0 ? (" / limit " + std::to_string(static_cast<int>(limit_s)) + "s").c_str() : "",
              v.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

/// Smallest k with D^k >= 1/p, computed by repeated division.
std::size_t shannon_depth(double p, std::size_t d) {
  std::size_t k = 0;
  double reach = 1.0;
  while (reach > p * (1.0 + 1e-12)) {
    reach /= static_cast<double>(d);
    ++k;
  }
  return k;
}

Verdict lemma_one() {
  Rng rng = make_stream(2024, 1);
  double worst = 0.0;
  std::size_t trials = 0;
  for (; trials < 1000; ++trials) {
    const std::size_t n = 2 + uniform_below(rng, 11);
    const std::size_t d = 2 + uniform_below(rng, 3);
    const Distribution dist = sample_simplex(n, rng);
    const Query q = Query::canonical(0, testing::random_query_cells(n, d, rng), n, d);
    const SymbolSet cand = testing::random_subset(n, rng);
    std::vector<double> cell_mass(q.answer_count(), 0.0);
    for (SymbolIndex s : cand) cell_mass[q.answer_of(s)] += dist.prob(s);
    const double hq = testing::plain_entropy(cell_mass, static_cast<double>(d));
    const double gain = information_gain(q, cand, dist, static_cast<double>(d));
    worst = std::max(worst, std::abs(gain - hq));
  }
  return {worst <= 1e-9, std::to_string(trials) + " trials, max |I(X;Q) - H(Q)| = " + fmt("%.3g", worst)};
}

Verdict lemma_two() {
  const SearchBudget exact{.exact_state_limit = std::uint64_t{1} << 24, .mode = SearchMode::exact};
  std::size_t depth_bad = 0, shannon_bad = 0, entropy_bad = 0, trials = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::size_t d = 2; d <= 4; ++d) {
      Rng rng = make_stream(77, n * 16 + d);
      for (int i = 0; i < 500; ++i, ++trials) {
        const Distribution dist = sample_simplex(n, rng);
        const QuerySet free = QuerySet::unconstrained(d, n);
        const CodeReport m = expected_length(migc_build(dist, free, exact), dist);
        double shannon = 0.0, h = 0.0;
        for (SymbolIndex s = 0; s < n; ++s) {
          const std::size_t bound = shannon_depth(dist.prob(s), d);
          depth_bad += m.per_symbol_lengths[s] > bound;
          shannon += dist.prob(s) * static_cast<double>(bound);
          h -= dist.prob(s) * std::log(dist.prob(s)) / std::log(static_cast<double>(d));
        }
        shannon_bad += m.expected_length > shannon + 1e-12;
        entropy_bad += !(m.expected_length < h + 1.0);
      }
    }
  }
  return {depth_bad + shannon_bad + entropy_bad == 0,
          std::to_string(trials) + " trials; depth violations " + std::to_string(depth_bad) + ", L_m > L_s " +
              std::to_string(shannon_bad) + ", L_m >= H+1 " + std::to_string(entropy_bad)};
}

CodingBenchResult coding_run() { return bench_coding({.n_min = 3, .n_max = 12, .samples_per_n = 1000, .arity = 3}); }

Verdict fig5a(const CodingBenchResult& r) {
  Verdict v;
  std::string worst;
  for (const CodingRow& row : r.rows) {
    const bool ordered = row.mean_huffman <= row.mean_migc && row.mean_migc <= row.mean_shannon;
    const bool strict = row.n <= 5 || (row.mean_huffman < row.mean_migc && row.mean_migc < row.mean_shannon);
    if (!ordered || !strict) {
      v.pass = false;
      worst += " n=" + std::to_string(row.n);
    }
  }
  const CodingRow& last = r.rows.back();
  v.detail = "N=3..12 x 1000; N=12 means huffman " + fmt("%.4f", last.mean_huffman) + " migc " +
             fmt("%.4f", last.mean_migc) + " shannon " + fmt("%.4f", last.mean_shannon) +
             (worst.empty() ? "" : "; violated at" + worst);
  return v;
}

Verdict fig5b(const CodingBenchResult& r) {
  std::size_t symbols = 0, negative = 0;
  long best = 0;
  for (const CodingSample& s : r.samples) {
    if (s.n != 10) continue;
    for (std::size_t k = 0; k < s.n; ++k) {
      const long gap = static_cast<long>(s.shannon_lengths[k]) - static_cast<long>(s.migc_lengths[k]);
      ++symbols;
      negative += gap < 0;
      best = std::max(best, gap);
    }
  }
  return {negative == 0 && symbols == 10000,
          std::to_string(symbols) + " symbols, " + std::to_string(negative) + " negative Shannon - MIGC gaps, max gap " +
              std::to_string(best)};
}

Verdict dna() {
  const DnaBenchResult six = dna_bench(6, 1000, 0);
  const double q95 = quantile([&] {
    std::vector<double> g;
    for (const DnaSample& s : six.samples) g.push_back(s.migc - s.bruteforce);
    return g;
  }(), 0.95);
  const bool mean_ok = std::abs(six.mean_bruteforce - 2.16) <= 0.10;
  const bool gap_ok = q95 <= 0.20;
  bool gbsc_ok = true;
  std::string per_n;
  for (std::size_t n : {4UL, 5UL, 6UL}) {
    const DnaBenchResult r = n == 6 ? six : dna_bench(n, 1000, 0);
    gbsc_ok = gbsc_ok && r.mean_migc <= r.mean_gbsc;
    per_n += " N=" + std::to_string(n) + " migc " + fmt("%.3f", r.mean_migc) + " gbsc " + fmt("%.3f", r.mean_gbsc) + ";";
  }
  return {mean_ok && gap_ok && gbsc_ok,
          std::string("mean bruteforce ") + fmt("%.4f", six.mean_bruteforce) + " (target 2.16 +- 0.10: " +
              (mean_ok ? "ok" : "miss") + "), q95 gap " + fmt("%.4f", q95) + " (<= 0.20: " + (gap_ok ? "ok" : "miss") +
              "), MIGC <= GBSC:" + per_n + (gbsc_ok ? " ok" : " miss")};
}

BattleshipBenchResult battleship_run() { return battleship_bench(BattleshipConfig{}, 100); }

Verdict battleship(const BattleshipBenchResult& r) {
  std::size_t rising = 0, big_drops = 0, shots = 0, unfinished = 0;
  double max_drop = 0.0;
  for (const auto& trace : r.traces) {
    unfinished += trace.back() != 0.0;
    for (std::size_t t = 1; t < trace.size(); ++t) {
      const double drop = trace[t - 1] - trace[t];
      ++shots;
      rising += drop < -1e-12;
      big_drops += drop > 1.0 + 1e-9;
      max_drop = std::max(max_drop, drop);
    }
  }
  // expected information per shot, recomputed by replaying a few games
  const LayoutSet layouts = battleship_layouts(BattleshipConfig{});
  double max_expected = 0.0;
  for (std::size_t g = 0; g < 5; ++g) {
    const std::size_t target = r.targets[g];
    BattleshipState st = initial_state(layouts);
    while (!is_identified(st, layouts)) {
      const ShotRecommendation rec = battleship_next_shot(st, layouts);
      max_expected = std::max(max_expected, rec.entropy);
      apply_shot(st, layouts, rec.cell, layouts.answer(target, layouts.cell_index(rec.cell)));
    }
  }
  const bool mean_ok = r.mean_tries >= 12.0;
  return {mean_ok && rising == 0 && big_drops == 0 && unfinished == 0 && r.traces.size() >= 50,
          std::to_string(r.traces.size()) + " games, mean tries " + fmt("%.3f", r.mean_tries) +
              " (>= 12: " + (mean_ok ? "ok" : "miss") + "), H0 " + fmt("%.4f", r.initial_entropy) + " trits, " +
              std::to_string(rising) + " rising steps, " + std::to_string(unfinished) + " traces not ending at 0, " +
              std::to_string(big_drops) + "/" + std::to_string(shots) + " shots dropping > 1 trit (max " +
              fmt("%.3f", max_drop) + "); max expected drop " + fmt("%.4f", max_expected)};
}

Verdict oracle_equivalence() {
  std::size_t worse = 0, invalid = 0;
  Rng rng = make_stream(99, 0);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 2 + uniform_below(rng, 7);
    const std::size_t d = 2 + uniform_below(rng, 3);
    const Distribution dist = sample_simplex(n, rng);
    const QuerySet qs = testing::random_feasible_queries(n, d, 2 + uniform_below(rng, 6), rng);
    const DecisionTree m = migc_build(dist, qs);
    const OptimalTree b = brute_force_optimal(dist, qs);
    invalid += !tree_validate(m, dist, qs) + !tree_validate(b.tree, dist, qs);
    const double lm = expected_length(m, dist).expected_length;
    worse += b.report.expected_length > lm + 1e-12;
    const double enumerated = testing::optimal_cost_by_enumeration(dist, qs, full_symbol_set(n));
    worse += std::abs(enumerated - b.report.expected_length) > 1e-9;
  }
  const Distribution d1 = testing::example1_dist();
  const QuerySet q1 = testing::example1_queries();
  const double m1 = expected_length(migc_build(d1, q1), d1).expected_length;
  const double b1 = brute_force_optimal(d1, q1).report.expected_length;
  const bool example_ok = m1 == 2.0 && b1 == 2.0;
  return {worse == 0 && invalid == 0 && example_ok,
          "200 instances: " + std::to_string(worse) + " ordering/oracle mismatches, " + std::to_string(invalid) +
              " invalid trees; Example 1 migc " + fmt("%.17g", m1) + " bruteforce " + fmt("%.17g", b1)};
}

Verdict determinism(const CodingBenchResult& coding, const BattleshipBenchResult& ships) {
  const CodingBenchResult coding2 = coding_run();
  const bool c = coding_means_csv(coding) == coding_means_csv(coding2) &&
                 coding_gaps_csv(coding) == coding_gaps_csv(coding2);
  const bool d = dna_csv(dna_bench(6, 1000, 0)) == dna_csv(dna_bench(6, 1000, 0, {}, 1));
  const BattleshipBenchResult ships2 = battleship_run();
  const bool b = battleship_csv(ships) == battleship_csv(ships2) && traces_csv(ships) == traces_csv(ships2);
  return {c && d && b, std::string("fig5/gaps ") + (c ? "identical" : "differ") + ", dna " +
                           (d ? "identical" : "differ") + ", battleship/traces " + (b ? "identical" : "differ")};
}

}  // namespace

int main() {
  report("lemma1_information_equals_partition_entropy", 5, lemma_one);
  report("lemma2_depth_bound_grid", 120, lemma_two);

  CodingBenchResult coding;
  report("coding_means_ordered_d3", 300, [&] {
    coding = coding_run();
    return fig5a(coding);
  });
  report("coding_symbol_gaps_nonnegative_n10", 0, [&] { return fig5b(coding); });
  report("dna_two_gene_detection", 600, dna);

  BattleshipBenchResult ships;
  report("battleship_identify_properties", 900, [&] {
    ships = battleship_run();
    return battleship(ships);
  });
  report("oracle_equivalence_constrained", 0, oracle_equivalence);
  report("benchmark_determinism", 0, [&] { return determinism(coding, ships); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
