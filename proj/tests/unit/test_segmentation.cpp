#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "segnmt/segmentation.hpp"

using namespace segnmt;

namespace {

// Independent recursive oracle: best score over covers of words i..n.
double oracle_best(const SpanScores& s, int i) {
  const int n = s.size();
  if (i > n) return 0;
  double best = -INFINITY;
  for (int j = i; j <= n; ++j)
    if (s.defined(i, j)) best = std::max(best, s(i, j) + oracle_best(s, j + 1));
  return best;
}

SpanScores three_word_example() {
  SpanScores s(3);
  s.set(1, 1, -1.0);
  s.set(2, 2, -1.0);
  s.set(3, 3, -1.0);
  s.set(1, 2, -0.5);
  s.set(2, 3, -2.0);
  s.set(1, 3, -3.0);
  return s;
}

}  // namespace

TEST(Dp, ThreeWordExample) {
  auto s = three_word_example();
  auto seg = optimal_segmentation(s);
  EXPECT_DOUBLE_EQ(seg.score, -1.5);
  EXPECT_EQ(seg.spans, (std::vector<Span>{{1, 2}, {3, 3}}));
  EXPECT_DOUBLE_EQ(oracle_best(s, 1), -1.5);
}

TEST(Dp, SplitBeatsWhole) {
  SpanScores s(2);
  s.set(1, 1, -0.1);
  s.set(2, 2, -0.05);
  s.set(1, 2, -0.2);
  auto seg = optimal_segmentation(s);
  EXPECT_NEAR(seg.score, -0.15, 1e-15);
  EXPECT_EQ(seg.spans.size(), 2u);
}

TEST(Dp, TiesPreferLongerFinalSegment) {
  SpanScores s(4);
  for (int i = 1; i <= 4; ++i)
    for (int j = i; j <= 4; ++j) s.set(i, j, 0.0);
  auto seg = optimal_segmentation(s);
  EXPECT_EQ(seg.spans, (std::vector<Span>{{1, 4}}));
  EXPECT_EQ(brute_force_segmentation(s).spans, seg.spans);
}

TEST(Dp, UncoverableWord) {
  SpanScores s(3);
  s.set(1, 1, -1);
  s.set(3, 3, -1);
  try {
    optimal_segmentation(s);
    FAIL() << "expected UncoverableWordError";
  } catch (const UncoverableWordError& e) {
    EXPECT_EQ(e.word(), 2);
  }
  EXPECT_THROW(brute_force_segmentation(s), UncoverableWordError);
}

TEST(Dp, SingleWord) {
  SpanScores s(1);
  s.set(1, 1, -0.7);
  auto seg = optimal_segmentation(s);
  EXPECT_EQ(seg.spans, (std::vector<Span>{{1, 1}}));
  EXPECT_DOUBLE_EQ(seg.score, -0.7);
}

TEST(BruteForce, EnumeratesAllCovers) {
  auto s = three_word_example();
  std::size_t count = 0;
  auto seg = brute_force_segmentation(s, &count);
  EXPECT_EQ(count, 4u);
  EXPECT_EQ(seg, optimal_segmentation(s));
  SpanScores big(kBruteForceMaxWords + 1);
  EXPECT_THROW(brute_force_segmentation(big), std::invalid_argument);
}

TEST(Dp, MatchesOraclesOnRandomMatrices) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 0.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    const int cap = 1 + static_cast<int>(rng() % n);
    SpanScores s(n);
    for (int i = 1; i <= n; ++i)
      for (int j = i; j <= n && j - i + 1 <= cap; ++j) s.set(i, j, u(rng));
    auto dp = optimal_segmentation(s);
    EXPECT_TRUE(is_contiguous_cover(dp, n));
    EXPECT_DOUBLE_EQ(dp.score, segmentation_score(s, dp));
    EXPECT_NEAR(dp.score, oracle_best(s, 1), 1e-12);
    EXPECT_EQ(dp, brute_force_segmentation(s));
  }
}

TEST(RandomSegmentation, ClampsAndIsDeterministic) {
  auto whole = random_segmentation(6, 100.0, 0.0, 3);
  EXPECT_EQ(whole.spans, (std::vector<Span>{{1, 6}}));
  auto singles = random_segmentation(6, 1.0, 0.0, 3);
  EXPECT_EQ(singles.spans.size(), 6u);
  auto a = random_segmentation(20, 3.0, 2.0, 9);
  EXPECT_TRUE(is_contiguous_cover(a, 20));
  EXPECT_EQ(a, random_segmentation(20, 3.0, 2.0, 9));
  EXPECT_THROW(random_segmentation(5, 0.5, 1.0, 1), std::invalid_argument);
}

TEST(RandomSegmentation, MomentsFollowTarget) {
  std::vector<Segmentation> all;
  for (std::uint64_t seed = 0; seed < 400; ++seed)
    all.push_back(random_segmentation(200, 4.0, 1.0, seed));
  auto m = segment_length_moments(all);
  EXPECT_NEAR(m.mean, 4.0, 0.1);
  EXPECT_NEAR(m.variance, 1.0 + 1.0 / 12.0, 0.15);  // rounding adds ~1/12
}

TEST(RandomConfidence, ReachesEveryCover) {
  std::set<std::size_t> seen_counts;
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto seg = random_confidence_segmentation(3, seed);
    ASSERT_TRUE(is_contiguous_cover(seg, 3));
    std::vector<int> starts;
    for (const auto& sp : seg.spans) starts.push_back(sp.begin);
    seen.insert(starts);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Format, BracketedTrace) {
  Segmentation seg;
  seg.spans = {{1, 2}, {3, 5}};
  EXPECT_EQ(format_segmentation(seg, {"a", "b", "c", "d", "e"}),
            "[[ a b ] [ c d e ]]");
}

TEST(Moments, Population) {
  Segmentation a, b;
  a.spans = {{1, 1}, {2, 4}};
  b.spans = {{1, 2}};
  auto m = segment_length_moments({a, b});
  EXPECT_EQ(m.count, 3u);
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_DOUBLE_EQ(m.variance, 2.0 / 3.0);
}
