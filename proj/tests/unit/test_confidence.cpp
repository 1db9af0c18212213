#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "segnmt/confidence.hpp"
#include "test_util.hpp"

using namespace segnmt;

TEST(PairConfidence, HandExamples) {
  EXPECT_NEAR(pair_confidence(-2.0, -3.0, 3, ScoreMode::BidirectionalPenalized),
              -5.0 / (2.0 * std::log(3.0)), 1e-15);
  EXPECT_NEAR(pair_confidence(-2.0, -3.0, 3, ScoreMode::BidirectionalPenalized), -2.2756, 1e-4);
  EXPECT_DOUBLE_EQ(pair_confidence(-2.0, -3.0, 3, ScoreMode::Bidirectional), -2.5);
  EXPECT_DOUBLE_EQ(pair_confidence(-2.0, -3.0, 3, ScoreMode::Direct), -2.0);
}

TEST(PairConfidence, ZeroIsZero) {
  for (auto mode : {ScoreMode::Direct, ScoreMode::Bidirectional,
                    ScoreMode::BidirectionalPenalized})
    for (std::size_t len : {1u, 2u, 7u}) EXPECT_EQ(pair_confidence(0, 0, len, mode), 0.0);
}

TEST(PairConfidence, SingleWordDenominatorClamped) {
  EXPECT_DOUBLE_EQ(pair_confidence(-1.0, -1.0, 1, ScoreMode::BidirectionalPenalized),
                   pair_confidence(-1.0, -1.0, 2, ScoreMode::BidirectionalPenalized));
  EXPECT_TRUE(std::isfinite(pair_confidence(-1.0, -1.0, 1, ScoreMode::BidirectionalPenalized)));
}

TEST(PairConfidence, RejectsBadInput) {
  EXPECT_THROW(pair_confidence(-INFINITY, -1, 2, ScoreMode::Direct), std::invalid_argument);
  EXPECT_THROW(pair_confidence(-1, NAN, 2, ScoreMode::Bidirectional), std::invalid_argument);
  EXPECT_THROW(pair_confidence(-1, -1, 0, ScoreMode::Direct), std::invalid_argument);
  EXPECT_NO_THROW(pair_confidence(-1, NAN, 2, ScoreMode::Direct));
}

TEST(ScoreMode, Names) {
  for (auto mode : {ScoreMode::Direct, ScoreMode::Bidirectional,
                    ScoreMode::BidirectionalPenalized})
    EXPECT_EQ(parse_score_mode(to_string(mode)), mode);
  EXPECT_THROW(parse_score_mode("both"), std::invalid_argument);
}

TEST(SelectBest, PicksMaximum) {
  std::vector<PairScore> c(3);
  c[0].forward_logprob = -3.0;
  c[1].forward_logprob = -2.0;
  c[2].forward_logprob = -4.0;
  for (std::size_t k = 0; k < 3; ++k) {
    c[k].length = 2;
    c[k].candidate = {static_cast<TokenId>(3 + k)};
  }
  auto best = select_best(c, ScoreMode::Direct);
  EXPECT_EQ(best.score, -2.0);
  EXPECT_EQ(best.candidate, (Sentence{4}));
  c.resize(1);
  EXPECT_EQ(select_best(c, ScoreMode::Direct).score, -3.0);
  EXPECT_THROW(select_best(c, ScoreMode::Bidirectional), std::invalid_argument);
}

TEST(SelectBest, ReverseScoresCanOverrideForwardRanking) {
  std::vector<PairScore> c(2);
  c[0] = {{3}, -1.0, -9.0, 2, true};
  c[1] = {{4, 5}, -1.5, -1.0, 2, true};
  EXPECT_EQ(select_best(c, ScoreMode::Direct).candidate, (Sentence{3}));
  EXPECT_EQ(select_best(c, ScoreMode::Bidirectional).candidate, (Sentence{4, 5}));
}

TEST(PhraseConfidence, ReverseScoreIsTeacherForced) {
  auto fwd = test::tiny_model(7, 6, 1);
  auto rev = test::tiny_model(6, 7, 2);
  Sentence phrase{3, 4};
  auto scored = score_candidates(fwd, &rev, phrase, 4);
  ASSERT_FALSE(scored.empty());
  for (const auto& s : scored) {
    ASSERT_TRUE(s.reverse_logprob.has_value());
    EXPECT_DOUBLE_EQ(*s.reverse_logprob, sequence_logprob(rev, s.candidate, phrase));
  }
}

TEST(ConfidenceMatrix, SpanCap) {
  auto fwd = test::tiny_model(7, 6, 1);
  auto rev = test::tiny_model(6, 7, 2);
  MatrixOptions o;
  o.max_segment_length = 2;
  o.width = 3;
  auto m = build_confidence_matrix(fwd, &rev, Sentence{3, 4, 5}, o);
  EXPECT_EQ(m.scores().defined_count(), 5u);
  EXPECT_FALSE(m.scores().defined(1, 3));
  EXPECT_EQ(m.score(1, 3), kAbsentScore);
  EXPECT_EQ(m.entry(1, 3), nullptr);

  auto single = build_confidence_matrix(fwd, &rev, Sentence{3}, o);
  EXPECT_EQ(single.scores().defined_count(), 1u);
  EXPECT_TRUE(single.scores().defined(1, 1));
}

TEST(ConfidenceMatrix, WorkerCountDoesNotMatter) {
  auto fwd = test::tiny_model(8, 7, 3);
  auto rev = test::tiny_model(7, 8, 4);
  Sentence s{3, 4, 5, 6, 7, 3};
  MatrixOptions o;
  o.width = 4;
  auto one = build_confidence_matrix(fwd, &rev, s, o);
  o.workers = 8;
  EXPECT_TRUE(one == build_confidence_matrix(fwd, &rev, s, o));
}

TEST(ConfidenceMatrix, ErrorsAndDirectMode) {
  auto fwd = test::tiny_model(7, 6, 1);
  MatrixOptions o;
  EXPECT_THROW(build_confidence_matrix(fwd, nullptr, Sentence{3}, o), std::invalid_argument);
  EXPECT_THROW(build_confidence_matrix(fwd, nullptr, Sentence{}, o), std::invalid_argument);
  o.mode = ScoreMode::Direct;
  auto m = build_confidence_matrix(fwd, nullptr, Sentence{3, 4}, o);
  EXPECT_FALSE(m.entry(1, 2)->reverse_logprob.has_value());
}

TEST(ConfidenceMatrix, CsvDump) {
  auto fwd = test::tiny_model(7, 6, 1);
  auto rev = test::tiny_model(6, 7, 2);
  MatrixOptions o;
  o.width = 2;
  auto m = build_confidence_matrix(fwd, &rev, Sentence{3, 4}, o);
  std::ostringstream out;
  write_matrix_csv(out, m);
  std::string text = out.str();
  EXPECT_EQ(text.rfind("i,j,c_ij,fwd_logp,rev_logp,candidate\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
