#include <collatz_lab/cycles.hpp>

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace collatz_lab;

namespace {

using R = Rule;

// Brute force: x in [1, x_max] with T^k(x) = x, recorded with the word of
// rules fired along the way.
std::set<std::pair<std::string, std::uint64_t>> brute_cycles(unsigned max_k, std::uint64_t x_max) {
  std::set<std::pair<std::string, std::uint64_t>> out;
  for (std::uint64_t x = 1; x <= x_max; ++x) {
    std::vector<Rule> word;
    std::uint64_t v = x;
    for (unsigned k = 1; k <= max_k; ++k) {
      auto s = step(v);
      word.push_back(s.rule);
      v = s.value;
      if (v == x) out.emplace(RuleSequence(word).str(), x);
    }
  }
  return out;
}

std::vector<CycleCandidate> of_length(const std::vector<CycleCandidate>& all, std::size_t k) {
  std::vector<CycleCandidate> out;
  for (const auto& c : all)
    if (c.seq.k() == k) out.push_back(c);
  return out;
}

}  // namespace

TEST(AffineForm, SingleRulesAndTwoStepWords) {
  EXPECT_EQ(affine_form({R::R2}), (AffineForm{1, 1, 1}));
  EXPECT_EQ(affine_form({R::R1}), (AffineForm{0, 0, 1}));
  // (3x+1)/4 and (3x+2)/4.
  EXPECT_EQ(affine_form({R::R2, R::R1}), (AffineForm{1, 1, 2}));
  EXPECT_EQ(affine_form({R::R1, R::R2}), (AffineForm{1, 2, 2}));
  EXPECT_THROW(affine_form(RuleSequence{}), std::invalid_argument);
}

TEST(AffineForm, ZeroOffsetIffNoOddStep) {
  for (unsigned k = 1; k <= 10; ++k) {
    for (std::uint64_t m = 0; m < (1u << k); ++m) {
      auto f = affine_form(RuleSequence::from_mask(m, k));
      ASSERT_EQ(f.A == 0, f.r2 == 0);
    }
  }
}

TEST(AffineForm, AgreesWithSimulation) {
  // The closed form for A is checked against running T directly.
  std::mt19937_64 rng(7);
  for (std::uint64_t x = 1; x <= 10000; ++x) {
    std::size_t k = 1 + rng() % 40;
    std::vector<Rule> word;
    Nat v(x);
    for (std::size_t i = 0; i < k; ++i) {
      auto s = step(v);
      word.push_back(s.rule);
      v = s.value;
    }
    auto f = affine_form(RuleSequence(word));
    auto image = f.apply(Nat(x));
    ASSERT_TRUE(image.has_value()) << x;
    ASSERT_EQ(*image, v) << x << " k=" << k;
  }
}

TEST(FixedPoint, TwoCycleWords) {
  auto a = fixed_point({R::R1, R::R2});
  ASSERT_TRUE(a);
  EXPECT_EQ(a->x, 2);
  EXPECT_TRUE(a->consistent);
  EXPECT_TRUE(a->simple);
  auto b = fixed_point({R::R2, R::R1});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->x, 1);
  EXPECT_TRUE(b->consistent);
}

TEST(FixedPoint, AbsentCases) {
  EXPECT_FALSE(fixed_point({R::R2, R::R2}));  // 4 - 9 < 0
  EXPECT_FALSE(fixed_point({R::R2}));         // 2 - 3 < 0
  EXPECT_FALSE(fixed_point({R::R1}));         // x = 0
  EXPECT_FALSE(fixed_point({R::R1, R::R1}));  // x = 0
}

TEST(FixedPoint, IntegerFixedPointsAlwaysFollowTheirWord) {
  // The rational fixed point is the 2-adic start whose parity vector is the
  // periodic word, so every positive integer one is consistent.
  std::size_t seen = 0;
  for (unsigned k = 1; k <= 14; ++k) {
    for (std::uint64_t m = 0; m < (1u << k); ++m) {
      auto c = fixed_point(RuleSequence::from_mask(m, k));
      if (!c) continue;
      ++seen;
      EXPECT_TRUE(c->consistent) << c->seq.str();
      EXPECT_TRUE(drives_sequence(c->x, c->seq));
    }
  }
  EXPECT_GT(seen, 0u);
  // The parity check itself does reject a mismatched start.
  EXPECT_FALSE(drives_sequence(Nat(3), RuleSequence{Rule::R1, Rule::R2}));
  EXPECT_FALSE(drives_sequence(Nat(2), RuleSequence{Rule::R2, Rule::R1}));
}

TEST(FixedPoint, CycleBoundHoldsWheneverDivisorPositive) {
  for (unsigned k = 1; k <= 16; ++k) {
    for (std::size_t r2 = 0; r2 <= k; ++r2) {
      Nat d = (Nat(1) << k) - AffineForm::pow3(r2);
      ASSERT_EQ(d > 0, satisfies_cycle_bound(k, r2));
      // r1 > 0.58 r2 follows, with the exact constant log2(3) - 1 = 0.58496...
      if (d > 0) ASSERT_GT(static_cast<double>(k - r2), 0.58 * static_cast<double>(r2));
    }
  }
}

TEST(SearchCycles, NoCycleOfLengthThree) { EXPECT_TRUE(of_length(search_cycles(3, 1), 3).empty()); }

TEST(SearchCycles, LengthFourIsTheIteratedTwoCycle) {
  auto four = of_length(search_cycles(4, 1), 4);
  ASSERT_EQ(four.size(), 2u);
  EXPECT_EQ(four[0].seq, (RuleSequence{R::R1, R::R2, R::R1, R::R2}));
  EXPECT_EQ(four[0].x, 2);
  EXPECT_FALSE(four[0].simple);
  EXPECT_EQ(four[1].seq, (RuleSequence{R::R2, R::R1, R::R2, R::R1}));
  EXPECT_EQ(four[1].x, 1);
  EXPECT_FALSE(four[1].simple);
}

TEST(SearchCycles, AgreesWithBruteForceUpToTwelve) {
  auto found = search_cycles(12, 2);
  std::set<std::pair<std::string, std::uint64_t>> got;
  for (const auto& c : found) {
    ASSERT_LE(c.x, 10000);
    got.emplace(c.seq.str(), c.x.convert_to<std::uint64_t>());
  }
  EXPECT_EQ(got, brute_cycles(12, 10000));
}

TEST(SearchCycles, OrderingAndWorkerIndependence) {
  auto one = search_cycles(14, 1);
  auto many = search_cycles(14, 4);
  EXPECT_EQ(one, many);
  for (std::size_t i = 1; i < one.size(); ++i) EXPECT_LT(one[i - 1].seq, one[i].seq);
}

TEST(SearchCycles, CandidatesAreRotationClosedAndAvoidClassZero) {
  auto found = search_cycles(16, 1);
  std::set<std::string> words;
  for (const auto& c : found) words.insert(c.seq.str());
  for (const auto& c : found) {
    for (std::size_t r = 1; r < c.seq.k(); ++r) EXPECT_TRUE(words.contains(c.seq.rotated(r).str())) << c.seq.str();
    Nat v = c.x;
    for (std::size_t i = 0; i < c.seq.k(); ++i) {
      EXPECT_NE(mod_small(v, 3), 0u);
      v = step(v).value;
    }
    EXPECT_EQ(v, c.x);
  }
}

TEST(SearchCycles, ResourceGuard) {
  EXPECT_THROW(search_cycles(31), std::length_error);
  EXPECT_THROW(search_cycles(0), std::invalid_argument);
}

TEST(RuleSequence, ParsingAndPeriod) {
  EXPECT_EQ(RuleSequence::parse("R1-R2-R1-R2"), (RuleSequence{R::R1, R::R2, R::R1, R::R2}));
  EXPECT_EQ(RuleSequence::parse("212"), (RuleSequence{R::R2, R::R1, R::R2}));
  EXPECT_EQ(RuleSequence::parse("R1R2R1R2").period(), 2u);
  EXPECT_EQ(RuleSequence::parse("R1R1R2").period(), 3u);
  EXPECT_THROW(RuleSequence::parse("R3"), std::invalid_argument);
}

TEST(Fact5, SmallRangeAndNamedValues) {
  auto r = verify_fact5(100000, 2);
  EXPECT_TRUE(r.holds());
  EXPECT_TRUE(r.complete());
  EXPECT_EQ(check_small_cycles(1), std::nullopt);
  EXPECT_EQ(check_small_cycles(2), std::nullopt);
  EXPECT_EQ(check_small_cycles(4), std::nullopt);
  EXPECT_EQ(step(step(std::uint64_t{1}).value).value, 1u);
  EXPECT_EQ(step(step(std::uint64_t{4}).value).value, 1u);
  EXPECT_THROW(verify_fact5(1), std::invalid_argument);
}

TEST(C0Chain, Decompositions) {
  EXPECT_EQ(c0_chain(Nat(24)), (C0Chain{24, 3, 3}));
  EXPECT_EQ(c0_chain(Nat(42)), (C0Chain{42, 1, 21}));
  EXPECT_EQ(c0_chain(Nat(9)), (C0Chain{9, 0, 9}));
  EXPECT_THROW(c0_chain(Nat(10)), std::domain_error);
  EXPECT_THROW(c0_chain(Nat(0)), std::domain_error);
}

TEST(C0Chain, ChainWalksDownByHalving) {
  std::vector<std::uint64_t> walk{24};
  while (walk.back() % 2 == 0) walk.push_back(step(walk.back()).value);
  EXPECT_EQ(walk, (std::vector<std::uint64_t>{24, 12, 6, 3}));
  EXPECT_TRUE(verify_c0_chains(1, 100000, 2).holds());
}
