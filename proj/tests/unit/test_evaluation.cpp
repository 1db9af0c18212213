#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "segnmt/evaluation.hpp"

using namespace segnmt;

TEST(Bleu, IdenticalIsOne) {
  auto r = bleu({tokenize("the cat sat on the mat")}, {tokenize("the cat sat on the mat")});
  EXPECT_DOUBLE_EQ(r.bleu, 1.0);
  EXPECT_FALSE(r.smoothed);
}

TEST(Bleu, ClippedUnigrams) {
  auto r = bleu({tokenize("the the the the the the the")}, {tokenize("the cat is on the mat")}, 1);
  EXPECT_EQ(r.matched[0], 2u);
  EXPECT_EQ(r.totals[0], 7u);
  EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
  EXPECT_DOUBLE_EQ(r.bleu, 2.0 / 7.0);
}

TEST(Bleu, BrevityPenalty) {
  auto r = bleu({tokenize("a b")}, {tokenize("a b c d")}, 1);
  EXPECT_NEAR(r.bleu, std::exp(1.0 - 2.0), 1e-15);
}

TEST(Bleu, CorpusLevelPooling) {
  // Pooled counts, not the mean of sentence scores.
  auto r = bleu({tokenize("a b"), tokenize("x y")}, {tokenize("a b"), tokenize("c d")}, 1);
  EXPECT_DOUBLE_EQ(r.precisions[0], 0.5);
}

TEST(Bleu, EmptyCandidateStaysFinite) {
  auto r = bleu({Tokens{}}, {tokenize("a b c d")});
  EXPECT_TRUE(std::isfinite(r.bleu));
  EXPECT_EQ(r.bleu, 0.0);
  EXPECT_TRUE(r.smoothed);
  auto short_one = bleu({tokenize("a b")}, {tokenize("a b c")});
  EXPECT_TRUE(std::isfinite(short_one.bleu));
  EXPECT_GT(short_one.bleu, 0.0);
}

TEST(Bleu, Errors) {
  EXPECT_THROW(bleu({}, {}), std::invalid_argument);
  EXPECT_THROW(bleu({Tokens{"a"}}, {}), std::invalid_argument);
}

TEST(Buckets, Assignment) {
  auto edges = default_length_edges();
  EXPECT_EQ(bucket_of(edges, 0), 0u);
  EXPECT_EQ(bucket_of(edges, 9), 0u);
  EXPECT_EQ(bucket_of(edges, 10), 1u);
  EXPECT_EQ(bucket_of(edges, 99), 4u);
  EXPECT_FALSE(bucket_of(edges, -1).has_value());
  EXPECT_EQ(bucket_label(edges, 1), "[10,20)");
  EXPECT_EQ(bucket_label(edges, 4), "[40,inf)");
}

TEST(Buckets, EvaluatePerBucket) {
  std::vector<Tokens> refs{tokenize("a b c d"), tokenize("e f g h"), tokenize("i j k l")};
  SystemOutput good{"good", refs};
  SystemOutput half{"half", {refs[0], tokenize("x y z w"), refs[2]}};
  auto out = evaluate_bucketed({good, half}, refs, {1, 5, 1}, {0, 3, 10});
  ASSERT_EQ(out.bucket_sizes, (std::vector<std::size_t>{2, 1, 0}));
  EXPECT_DOUBLE_EQ(out.cells[0][0]->bleu, 1.0);
  EXPECT_DOUBLE_EQ(out.cells[1][0]->bleu, 1.0);
  // No matches: every precision floored at 1/(2 total), totals 4,3,2,1.
  EXPECT_NEAR(out.cells[1][1]->bleu, std::pow(1.0 / (8 * 6 * 4 * 2), 0.25), 1e-15);
  EXPECT_FALSE(out.cells[0][2].has_value());

  auto table = to_table(out, "t");
  EXPECT_DOUBLE_EQ(*table.at("good", "[0,3)"), 100.0);
  EXPECT_FALSE(table.at("half", "[10,inf)").has_value());
  EXPECT_THROW(table.at("none", "[0,3)"), std::out_of_range);
}

TEST(Buckets, UnknownKeys) {
  auto src = Vocabulary::from_tokens({"a", "b"});
  auto tgt = Vocabulary::from_tokens({"x"});
  auto keys = unknown_keys({tokenize("a q r"), tokenize("a b")}, {tokenize("x"), tokenize("y")},
                           src, tgt);
  EXPECT_EQ(keys, (std::vector<std::size_t>{2, 1}));
}

TEST(ReportTable, Output) {
  ReportTable t;
  t.title = "demo";
  t.columns = {"dev", "test"};
  t.add_row("plain", {12.5, std::nullopt});
  EXPECT_THROW(t.add_row("bad", {1.0}), std::invalid_argument);
  std::ostringstream csv, text;
  t.write_csv(csv);
  EXPECT_EQ(csv.str(), "system,dev,test\nplain,12.5,\n");
  t.write_text(text);
  EXPECT_NE(text.str().find("12.50"), std::string::npos);
  EXPECT_NE(text.str().find('-'), std::string::npos);
}
