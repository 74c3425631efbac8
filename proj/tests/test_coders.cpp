#include <gtest/gtest.h>

#include <cmath>

#include "migc/coders.hpp"
#include "migc/random.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace migc {
namespace {

using testing::example1_dist;
using testing::example1_queries;
using testing::example2_dist;

constexpr SearchBudget kExact{.exact_state_limit = std::uint64_t{1} << 24, .mode = SearchMode::exact};

TEST(OptimalPartition, ExampleTwoTernary) {
  const Distribution d = example2_dist();
  const UnconstrainedPartition p = optimal_partition_unconstrained(d, full_symbol_set(5), 3, kExact);
  EXPECT_TRUE(p.exact);
  ASSERT_EQ(p.view.cells.size(), 3U);
  EXPECT_EQ(p.view.cells[0], (SymbolSet{2}));     // {3}
  EXPECT_EQ(p.view.cells[1], (SymbolSet{0, 4}));  // {1,5}
  EXPECT_EQ(p.view.cells[2], (SymbolSet{1, 3}));  // {2,4}
  EXPECT_NEAR(p.view.masses[0], 0.30, 1e-12);
  EXPECT_NEAR(p.view.masses[1], 0.35, 1e-12);
  EXPECT_NEAR(p.view.masses[2], 0.35, 1e-12);
}

TEST(OptimalPartition, TrivialShapes) {
  const std::vector<double> uniform3{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const LocalPartition u = optimal_partition_unconstrained(uniform3, 3, kExact);
  ASSERT_EQ(u.cells.size(), 3U);
  EXPECT_NEAR(entropy_of_masses(u.masses, 3.0), 1.0, 1e-12);

  const std::vector<double> two{0.9, 0.1};
  const LocalPartition t = optimal_partition_unconstrained(two, 3, kExact);
  ASSERT_EQ(t.cells.size(), 2U);
  EXPECT_EQ(t.cells[0].size(), 1U);
  EXPECT_EQ(t.cells[1].size(), 1U);
}

TEST(OptimalPartition, BudgetModes) {
  const std::vector<double> masses(10, 0.1);
  const SearchBudget tiny{.exact_state_limit = 100, .mode = SearchMode::exact};
  try {
    optimal_partition_unconstrained(masses, 3, tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
  const LocalPartition fallback =
      optimal_partition_unconstrained(masses, 3, {.exact_state_limit = 100, .mode = SearchMode::automatic});
  EXPECT_FALSE(fallback.exact);
  std::size_t total = 0;
  for (const auto& c : fallback.cells) total += c.size();
  EXPECT_EQ(total, 10U);
  const LocalPartition auto_exact = optimal_partition_unconstrained(masses, 3, {});
  EXPECT_TRUE(auto_exact.exact);
}

TEST(OptimalPartition, HeuristicLoadsLightestCell) {
  const std::vector<double> masses{0.4, 0.3, 0.2, 0.1};
  const LocalPartition h = optimal_partition_unconstrained(masses, 2, {.mode = SearchMode::heuristic});
  // 0.4 -> A, 0.3 -> B, 0.2 -> B, 0.1 -> A
  ASSERT_EQ(h.cells.size(), 2U);
  EXPECT_EQ(h.cells[0], (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(h.cells[1], (std::vector<std::size_t>{1, 2}));
}

TEST(OptimalPartition, MatchesExhaustiveEnumeration) {
  Rng rng = make_stream(21, 0);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t k = 2 + uniform_below(rng, 8);
    const std::size_t arity = 2 + uniform_below(rng, 3);
    const Distribution d = sample_simplex(k, rng);
    std::vector<double> masses(d.probs().begin(), d.probs().end());
    const LocalPartition p = optimal_partition_unconstrained(masses, arity, kExact);
    const double expected = testing::max_partition_entropy_by_enumeration(masses, arity);
    ASSERT_NEAR(entropy_of_masses(p.masses, static_cast<double>(arity)), expected, 1e-12)
        << "trial " << trial << " k=" << k << " D=" << arity;
  }
}

TEST(Migc, ExampleOneBinaryConstrained) {
  const Distribution d = example1_dist();
  const QuerySet qs = example1_queries();
  const DecisionTree t = migc_build(d, qs);
  EXPECT_EQ(t.node(t.root()).query_id, std::size_t{0});
  EXPECT_TRUE(tree_validate(t, d, qs));
  EXPECT_NEAR(expected_length(t, d).expected_length, 2.0, 1e-12);
  EXPECT_EQ(gbsc_build(d, qs), t);
}

TEST(Migc, ExampleTwoTernaryUnconstrained) {
  const Distribution d = example2_dist();
  const QuerySet qs = QuerySet::unconstrained(3, 5);
  const DecisionTree t = migc_build(d, qs, kExact);
  EXPECT_TRUE(tree_validate(t, d, qs));
  const CodeReport r = expected_length(t, d);
  EXPECT_EQ(r.per_symbol_lengths, (std::vector<std::size_t>{2, 2, 1, 2, 2}));
  EXPECT_NEAR(r.expected_length, 1.7, 1e-12);
}

TEST(Migc, SingleSymbolAndErrors) {
  const Distribution one = validate_distribution({"x"}, {1.0});
  const DecisionTree t = migc_build(one, QuerySet::unconstrained(3, 1));
  EXPECT_TRUE(t.node(t.root()).is_leaf());
  EXPECT_EQ(expected_length(t, one).expected_length, 0.0);

  try {
    migc_build(Distribution::uniform(3), QuerySet::constrained(2, 3, {{{0}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleQuerySet);
  }
  EXPECT_THROW(gbsc_build(example2_dist(), QuerySet::unconstrained(3, 5)), Error);
}

TEST(Migc, Deterministic) {
  Rng rng = make_stream(22, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Distribution d = sample_simplex(9, rng);
    EXPECT_EQ(migc_build(d, QuerySet::unconstrained(3, 9)), migc_build(d, QuerySet::unconstrained(3, 9)));
  }
}

TEST(Huffman, HandMergedExamples) {
  const CodedTree binary = huffman_dary(example1_dist(), 2);
  EXPECT_EQ(binary.report.per_symbol_lengths, (std::vector<std::size_t>{3, 1, 3, 2}));
  EXPECT_NEAR(binary.report.expected_length, 1.9, 1e-12);
  EXPECT_TRUE(tree_validate(binary.tree, example1_dist(), QuerySet::unconstrained(2, 4)));

  const CodedTree ternary = huffman_dary(example2_dist(), 3);
  EXPECT_EQ(ternary.report.per_symbol_lengths, (std::vector<std::size_t>{2, 2, 1, 2, 1}));
  EXPECT_NEAR(ternary.report.expected_length, 1.45, 1e-12);

  const CodedTree flat = huffman_dary(Distribution::uniform(4), 4);
  EXPECT_EQ(flat.report.per_symbol_lengths, (std::vector<std::size_t>{1, 1, 1, 1}));
}

TEST(Huffman, PaddingWithDummies) {
  // N=4, D=3 needs one dummy; the dummy must not appear in the tree.
  const Distribution d = Distribution::uniform(4);
  const CodedTree h = huffman_dary(d, 3);
  EXPECT_TRUE(tree_validate(h.tree, d, QuerySet::unconstrained(3, 4)));
  EXPECT_NEAR(h.report.expected_length, 1.5, 1e-12);

  const CodedTree two = huffman_dary(validate_distribution({"a", "b"}, {0.7, 0.3}), 3);
  EXPECT_EQ(two.report.per_symbol_lengths, (std::vector<std::size_t>{1, 1}));
  const CodedTree one = huffman_dary(validate_distribution({"a"}, {1.0}), 3);
  EXPECT_EQ(one.report.per_symbol_lengths, (std::vector<std::size_t>{0}));
}

TEST(Huffman, MatchesExhaustiveOptimumOnSmallInstances) {
  // With a full query list (all subsets as binary queries), the exact oracle
  // equals the unconstrained optimum, which Huffman attains.
  Rng rng = make_stream(23, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 5);
    const Distribution d = sample_simplex(n, rng);
    std::vector<std::vector<SymbolSet>> all;
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) {
      SymbolSet cell;
      for (SymbolIndex s = 0; s < n; ++s) {
        if ((mask >> s) & 1U) cell.push_back(s);
      }
      all.push_back({cell});
    }
    const QuerySet qs = QuerySet::constrained(2, n, all);
    const double oracle = testing::optimal_cost_by_enumeration(d, qs, full_symbol_set(n));
    ASSERT_NEAR(huffman_dary(d, 2).report.expected_length, oracle, 1e-12);
  }
}

TEST(Shannon, Lengths) {
  EXPECT_EQ(shannon_dary(validate_distribution({"a", "b", "c"}, {0.25, 0.25, 0.5}), 3).per_symbol_lengths,
            (std::vector<std::size_t>{2, 2, 1}));
  EXPECT_EQ(shannon_dary(validate_distribution({"a", "b"}, {0.5, 0.5}), 2).per_symbol_lengths,
            (std::vector<std::size_t>{1, 1}));
  const CodeReport r = shannon_dary(example2_dist(), 3);
  EXPECT_EQ(r.per_symbol_lengths, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
  EXPECT_NEAR(r.expected_length, 2.1, 1e-12);
}

TEST(Shannon, CanonicalCodewordsFormAPrefixCode) {
  const CodeReport r = shannon_dary(example2_dist(), 3);
  // Lengths 2,2,2,2 then 3: 00, 01, 02, 10, then 110.
  EXPECT_EQ(r.codewords[1], (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(r.codewords[2], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.codewords[3], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(r.codewords[4], (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.codewords[0], (std::vector<std::size_t>{1, 1, 0}));
  const DecisionTree t = tree_from_codewords(r.codewords, 3);
  EXPECT_TRUE(tree_validate(t, example2_dist(), QuerySet::unconstrained(3, 5)));
  EXPECT_EQ(expected_length(t, example2_dist()).per_symbol_lengths, r.per_symbol_lengths);
}

TEST(BruteForce, ExampleOneAndTrivial) {
  const OptimalTree opt = brute_force_optimal(example1_dist(), example1_queries());
  EXPECT_NEAR(opt.optimum, 2.0, 1e-12);
  EXPECT_NEAR(opt.report.expected_length, 2.0, 1e-12);
  EXPECT_TRUE(tree_validate(opt.tree, example1_dist(), example1_queries()));

  const Distribution one = validate_distribution({"x"}, {1.0});
  EXPECT_EQ(brute_force_optimal(one, QuerySet::constrained(2, 1, {})).optimum, 0.0);

  EXPECT_THROW(brute_force_optimal(example2_dist(), QuerySet::unconstrained(3, 5)), Error);
  try {
    brute_force_optimal(Distribution::uniform(3), QuerySet::constrained(2, 3, {{{0}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleQuerySet);
  }
}

TEST(BruteForce, MatchesUnmemoizedEnumeration) {
  Rng rng = make_stream(24, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 6);
    const std::size_t arity = 2 + uniform_below(rng, 2);
    const Distribution d = sample_simplex(n, rng);
    const QuerySet qs = testing::random_feasible_queries(n, arity, 4, rng);
    const OptimalTree opt = brute_force_optimal(d, qs);
    const double oracle = testing::optimal_cost_by_enumeration(d, qs, full_symbol_set(n));
    ASSERT_NEAR(opt.optimum, oracle, 1e-12) << "trial " << trial;
    ASSERT_NEAR(opt.report.expected_length, oracle, 1e-9);
    ASSERT_TRUE(tree_validate(opt.tree, d, qs));
    ASSERT_LE(opt.optimum, expected_length(migc_build(d, qs), d).expected_length + 1e-12);
  }
}

TEST(BruteForce, StateLimit) {
  const Distribution d = Distribution::uniform(8);
  std::vector<std::vector<SymbolSet>> singletons;
  for (SymbolIndex s = 0; s < 8; ++s) singletons.push_back({{s}});
  try {
    brute_force_optimal(d, QuerySet::constrained(2, 8, singletons), {.exact_state_limit = 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

// Per-symbol depth bound and its consequences on a reduced sample; the full
// grid runs in the acceptance suite.
TEST(MigcProperties, DepthWithinShannonLength) {
  Rng rng = make_stream(25, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + uniform_below(rng, 9);
    const std::size_t arity = 2 + uniform_below(rng, 3);
    const Distribution d = sample_simplex(n, rng);
    const QuerySet qs = QuerySet::unconstrained(arity, n);
    const DecisionTree t = migc_build(d, qs, kExact);
    ASSERT_TRUE(tree_validate(t, d, qs));
    const CodeReport m = expected_length(t, d);
    const CodeReport s = shannon_dary(d, arity);
    const CodeReport h = huffman_dary(d, arity).report;
    for (SymbolIndex i = 0; i < n; ++i) ASSERT_LE(m.per_symbol_lengths[i], s.per_symbol_lengths[i]);
    ASSERT_LE(m.expected_length, s.expected_length + 1e-12);
    ASSERT_LT(m.expected_length, m.entropy_base_d + 1.0);
    ASSERT_LE(h.expected_length, m.expected_length + 1e-12);
    ASSERT_GE(h.expected_length, h.entropy_base_d - 1e-9);
  }
}

TEST(Coders, SelectionByName) {
  EXPECT_EQ(parse_coder("migc"), Coder::migc);
  EXPECT_EQ(parse_coder("bruteforce"), Coder::bruteforce);
  EXPECT_FALSE(parse_coder("fano"));
  const CodedTree h = build_tree(Coder::huffman, example2_dist(), QuerySet::unconstrained(3, 5));
  EXPECT_NEAR(h.report.expected_length, 1.45, 1e-12);
  EXPECT_THROW(build_tree(Coder::huffman, example1_dist(), example1_queries()), Error);
  for (Coder c : {Coder::migc, Coder::gbsc, Coder::bruteforce}) {
    const CodedTree t = build_tree(c, example1_dist(), example1_queries());
    EXPECT_TRUE(tree_validate(t.tree, example1_dist(), example1_queries()));
    EXPECT_NEAR(t.report.expected_length, 2.0, 1e-12);
  }
}

}  // namespace
}  // namespace migc
