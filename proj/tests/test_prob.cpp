#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fpl/phenomenon.hpp"
#include "fpl/prob.hpp"
#include "support/oracles.hpp"

using namespace fpl;
using namespace fpl::prob;

namespace {

Universe abc() { return Universe({"a", "b", "c"}); }
Universe u123() { return Universe({"1", "2", "3"}); }

Measure sixty_thirty_ten() { return Measure(abc(), {Rational(3, 5), Rational(3, 10), Rational(1, 10)}); }

phenomenon::RandomPhenomenon fair_coin(std::uint64_t seed = 0) {
  return phenomenon::RandomPhenomenon("coin", Universe({"1", "2"}), {0, 1}, seed);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

// Random measure with small denominators; atoms sum to 1.
Measure random_measure(const Universe& u, std::mt19937_64& g) {
  std::vector<long> w(u.size());
  long total = 0;
  for (auto& x : w) total += (x = long(g() % 7));
  if (total == 0) w[0] = total = 1;
  std::vector<Rational> atoms;
  for (long x : w) atoms.emplace_back(x, total);
  return Measure(u, atoms);
}

}  // namespace

TEST(Universe, RejectsEmptyAndDuplicates) {
  EXPECT_EQ(code_of([] { Universe(std::vector<std::string>{}); }), ErrorCode::InvalidUniverse);
  EXPECT_EQ(code_of([] { Universe({"a", "a"}); }), ErrorCode::InvalidUniverse);
  EXPECT_EQ(abc().index_of("c"), 2u);
  EXPECT_FALSE(abc().index_of("z"));
}

TEST(GenerateAlgebra, NoGeneratorsGivesTheMinimalAlgebra) {
  const auto alg = generate_algebra(u123(), {});
  EXPECT_EQ(alg.events, (std::set<Event>{0, 0b111}));
}

TEST(GenerateAlgebra, TwoSingletons) {
  const auto u = u123();
  const auto alg = generate_algebra(u, {make_event(u, {"1"}), make_event(u, {"2"})});
  EXPECT_EQ(alg.events, oracle::brute_force_closure(0b111, {0b001, 0b010}));
  EXPECT_EQ(alg.events.size(), 5u);
  EXPECT_FALSE(alg.contains(make_event(u, {"3"})));
}

TEST(GenerateAlgebra, AllSingletonsGiveThePowerSet) {
  const auto alg = generate_algebra(u123(), {0b001, 0b010, 0b100});
  EXPECT_EQ(alg.events.size(), 8u);
}

TEST(GenerateAlgebra, ComplementClosureIsOptIn) {
  const auto u = u123();
  EXPECT_EQ(generate_algebra(u, {0b001}).events.size(), 3u);
  EXPECT_EQ(generate_algebra(u, {0b001}, true).events, (std::set<Event>{0, 0b001, 0b110, 0b111}));
}

TEST(GenerateAlgebra, ForeignGeneratorIsRejected) {
  EXPECT_EQ(code_of([] { generate_algebra(u123(), {0b1000}); }), ErrorCode::ForeignElement);
  EXPECT_EQ(code_of([] { make_event(u123(), {"4"}); }), ErrorCode::ForeignElement);
}

TEST(GenerateAlgebra, MatchesBruteForceAndIsAFixedPoint) {
  std::mt19937_64 g(11);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + g() % 6;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("e" + std::to_string(i));
    const Universe u(ids);
    const Event all = full_event(u);
    std::vector<Event> gens(g() % 4);
    for (auto& e : gens) e = g() & all;
    const bool comp = g() % 2;
    const auto alg = generate_algebra(u, gens, comp);
    ASSERT_EQ(alg.events, oracle::brute_force_closure(all, gens, comp));
    const std::vector<Event> again(alg.events.begin(), alg.events.end());
    ASSERT_EQ(generate_algebra(u, again, comp).events, alg.events);
    for (Event a : alg.events)
      for (Event b : alg.events) {
        ASSERT_TRUE(alg.contains(a | b));
        ASSERT_TRUE(alg.contains(a & b));
      }
  }
}

TEST(EventProbability, HandSums) {
  const auto m = sixty_thirty_ten();
  EXPECT_EQ(event_probability(m, {"a", "c"}), Rational(7, 10));
  EXPECT_EQ(event_probability(m, Event{0}), Rational(0));
  EXPECT_EQ(event_probability(m, full_event(m.universe)), Rational(1));
  EXPECT_EQ(code_of([&] { event_probability(m, {"z"}); }), ErrorCode::ForeignElement);
}

TEST(MeasureFromCounts, ReducesToLowestTerms) {
  const auto m = measure_from_counts(abc(), {60, 30, 10});
  EXPECT_EQ(m.atoms, (std::vector<Rational>{Rational(3, 5), Rational(3, 10), Rational(1, 10)}));
}

TEST(ValidateMeasure, ValidMeasureOnFullAlgebraPasses) {
  const auto m = sixty_thirty_ten();
  const auto report = validate_measure(m, generate_algebra(m.universe, {0b001, 0b010, 0b100}));
  EXPECT_TRUE(report.passed());
  for (const char* name : {"range", "norm", "empty", "subadditivity", "disjoint_additivity", "equality_implies_disjoint"})
    ASSERT_NE(report.find(name), nullptr) << name;
  EXPECT_FALSE(report.find("equality_implies_disjoint")->skipped);
}

TEST(ValidateMeasure, BrokenNormIsReportedNotThrown) {
  const Measure m(abc(), {Rational(1, 2), Rational(3, 10), Rational(1, 10)});
  const auto report = validate_measure(m, generate_algebra(m.universe, {}));
  EXPECT_FALSE(report.passed());
  EXPECT_FALSE(report.find("norm")->passed);
  EXPECT_EQ(report.find("norm")->detail, "p(U) = 9/10");
}

TEST(ValidateMeasure, OutOfRangeAtom) {
  const Measure m(abc(), {Rational(3, 2), Rational(-1, 2), Rational(0)});
  const auto report = validate_measure(m, generate_algebra(m.universe, {0b001}));
  EXPECT_FALSE(report.find("range")->passed);
  EXPECT_TRUE(report.find("norm")->passed);
}

TEST(ValidateMeasure, ZeroAtomsSkipTheIffDirection) {
  // p(c) = 0, so {a,c} and {c} overlap yet are additive.
  const Measure m(abc(), {Rational(1, 2), Rational(1, 2), Rational(0)});
  const auto report = validate_measure(m, generate_algebra(m.universe, {0b001, 0b010, 0b100}));
  EXPECT_TRUE(report.passed());
  EXPECT_TRUE(report.find("equality_implies_disjoint")->skipped);
}

TEST(ValidateMeasure, UniverseMismatch) {
  EXPECT_EQ(code_of([] { validate_measure(sixty_thirty_ten(), generate_algebra(u123(), {})); }),
            ErrorCode::UniverseMismatch);
}

TEST(ValidateMeasure, RandomRationalMeasuresAreAdditiveOnDisjointPairs) {
  std::mt19937_64 g(5);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + g() % 5;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i + 1));
    const Universe u(ids);
    const auto m = random_measure(u, g);
    std::vector<Event> gens(g() % 4);
    for (auto& e : gens) e = g() & full_event(u);
    const auto alg = generate_algebra(u, gens);
    ASSERT_TRUE(validate_measure(m, alg).passed());
    for (Event a : alg.events)
      for (Event b : alg.events)
        if ((a & b) == 0) { ASSERT_EQ(event_probability(m, a | b), event_probability(m, a) + event_probability(m, b)); }
  }
}

TEST(WithinTolerance, BoundaryIsInclusive) {
  EXPECT_TRUE(within_tolerance(52, 100, Rational(1, 2), 0.02));
  EXPECT_TRUE(within_tolerance(48, 100, Rational(1, 2), 0.02));
  EXPECT_FALSE(within_tolerance(53, 100, Rational(1, 2), 0.02));
  EXPECT_TRUE(within_tolerance(1, 3, Rational(1, 3), 1e-9));
}

TEST(MetaProbability, FairCoinAgreesWithTheBinomialOracle) {
  const double exact = oracle::binomial_within(10000, 1, 2, 0.02);
  EXPECT_NEAR(exact, 0.99994, 5e-5);
  const double est = meta_probability(fair_coin(), "1", Rational(1, 2), 0.02, 10000, 200, 42);
  EXPECT_NEAR(est, exact, 0.01);
  EXPECT_GE(est, 0.99);
}

TEST(MetaProbability, DegenerateSamplerAlwaysHits) {
  const phenomenon::RandomPhenomenon one("one", Universe({"1"}), {0}, 0);
  EXPECT_EQ(meta_probability(one, "1", Rational(1), 1e-6, 7, 50, 3), 1.0);
}

TEST(MetaProbability, WrongTargetIsNearZero) {
  EXPECT_NEAR(oracle::binomial_within(10000, 0.5, 6, 10, 0.02), 0.0, 1e-12);
  EXPECT_LE(meta_probability(fair_coin(), "1", Rational(6, 10), 0.02, 10000, 100, 1), 0.01);
}

TEST(MetaProbability, DeterministicAndIndependentOfJobs) {
  const auto a = meta_probability(fair_coin(), "2", Rational(1, 2), 0.05, 200, 300, 9);
  const auto b = meta_probability(fair_coin(), "2", Rational(1, 2), 0.05, 200, 300, 9, {4});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, meta_probability(fair_coin(), "2", Rational(1, 2), 0.05, 200, 300, 9));
}

TEST(MetaProbability, TrendFollowsTheOracle) {
  // At eps = 0.05 the oracle rises from N' = 100 to 4N' = 400; each Monte
  // Carlo estimate stays within 3 standard errors of its oracle.
  const std::uint64_t M = 2000;
  const double lo = oracle::binomial_within(100, 1, 2, 0.05);
  const double hi = oracle::binomial_within(400, 1, 2, 0.05);
  EXPECT_GT(hi, lo);
  for (auto [n, exact] : {std::pair{100ull, lo}, {400ull, hi}}) {
    const double est = meta_probability(fair_coin(), "1", Rational(1, 2), 0.05, n, M, 17 + n);
    EXPECT_NEAR(est, exact, 3 * std::sqrt(exact * (1 - exact) / double(M))) << "N=" << n;
  }
}

TEST(MetaProbability, Errors) {
  EXPECT_EQ(code_of([] { meta_probability(fair_coin(), "7", Rational(1, 2), 0.1, 10, 10, 0); }), ErrorCode::UnknownLabel);
  EXPECT_EQ(code_of([] { meta_probability(fair_coin(), "1", Rational(1, 2), 0.0, 10, 10, 0); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { meta_probability(fair_coin(), "1", Rational(1, 2), 0.1, 0, 10, 0); }),
            ErrorCode::InvalidArgument);
}

TEST(FindN0, FairCoinCertifiesByFiveHundredTwelve) {
  // Chebyshev: p(1-p)/(eps^2 delta) = 0.25 / (0.01 * 0.05) = 500 <= 512.
  EXPECT_GE(oracle::binomial_within(512, 1, 2, 0.1), 0.95);
  const auto r = find_n0(fair_coin(), "1", Rational(1, 2), 0.1, 0.05, 200, 3);
  EXPECT_LE(r.n0, 512u);
  EXPECT_EQ(r.steps.back().trials, r.n0);
  EXPECT_GE(r.steps.back().estimate, 0.95);
  for (std::size_t i = 1; i < r.steps.size(); ++i) EXPECT_EQ(r.steps[i].trials, 2 * r.steps[i - 1].trials);
}

TEST(FindN0, VacuousEpsilonStopsAtTheFirstN) {
  EXPECT_EQ(find_n0(fair_coin(), "1", Rational(1, 2), 1.0, 0.05, 50, 3).n0, 16u);
}

TEST(FindN0, WrongTargetIsNotReached) {
  EXPECT_NEAR(oracle::binomial_within(4096, 0.5, 8, 10, 0.05), 0.0, 1e-12);
  N0Options opt;
  opt.cap = 4096;
  EXPECT_EQ(code_of([&] { find_n0(fair_coin(), "1", Rational(8, 10), 0.05, 0.05, 50, 3, opt); }),
            ErrorCode::NotReached);
}

TEST(FindN0, ParameterRanges) {
  EXPECT_EQ(code_of([] { find_n0(fair_coin(), "1", Rational(1, 2), 0.0, 0.05, 10, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { find_n0(fair_coin(), "1", Rational(1, 2), 0.1, 1.0, 10, 0); }), ErrorCode::InvalidArgument);
}

TEST(StatisticalStructures, SmallCases) {
  EXPECT_EQ(count_statistical_structures(2, 2), 3);
  EXPECT_EQ(count_statistical_structures(0, 1), 1);
  EXPECT_EQ(count_statistical_structures(0, 4), 1);
  EXPECT_EQ(count_statistical_structures(5, 3), 21);
  EXPECT_EQ(code_of([] { count_statistical_structures(3, 0); }), ErrorCode::InvalidArgument);
}

TEST(StatisticalStructures, MatchesEnumeration) {
  for (int n = 0; n <= 8; ++n)
    for (int q = 1; q <= 4; ++q)
      ASSERT_EQ(count_statistical_structures(n, q), oracle::compositions(n, q).size()) << n << "," << q;
}

TEST(StatisticalStructures, LargeValuesAreExact) {
  // C(1000 + 9, 9), computed by hand with an exact product.
  BigInt expected = 1;
  for (int i = 1; i <= 9; ++i) expected = expected * (1000 + i) / i;
  EXPECT_EQ(count_statistical_structures(1000, 10), expected);
}

TEST(StructureIndex, IsABijectionInDecreasingOrder) {
  for (int n = 0; n <= 6; ++n)
    for (int q = 1; q <= 4; ++q) {
      const auto all = oracle::compositions(n, q);  // lexicographically decreasing
      for (std::size_t k = 0; k < all.size(); ++k) {
        const std::vector<std::uint64_t> counts(all[k].begin(), all[k].end());
        ASSERT_EQ(structure_index(counts), k);
      }
    }
  const auto s = make_sequence_statistics({2, 1, 0});
  EXPECT_EQ(s.trials, 3u);
  EXPECT_EQ(s.structure_index, 1);
}
