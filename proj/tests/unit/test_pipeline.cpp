#include <gtest/gtest.h>

#include "segnmt/pipeline.hpp"
#include "segnmt/training.hpp"
#include "test_util.hpp"

using namespace segnmt;

TEST(Pipeline, SingleWordDirectEqualsPlain) {
  auto fwd = test::tiny_model(7, 6, 5);
  SegmentOptions o;
  o.matrix.mode = ScoreMode::Direct;
  o.matrix.width = 4;
  for (TokenId w = 3; w < 7; ++w) {
    auto seg = translate_with_segmentation(fwd, nullptr, Sentence{w}, o);
    EXPECT_EQ(seg.output, translate_plain(fwd, Sentence{w}, 4));
    EXPECT_EQ(seg.segmentation.spans, (std::vector<Span>{{1, 1}}));
  }
}

TEST(Pipeline, ConcatenatesInOrder) {
  auto v = Vocabulary::from_tokens({"x", "y", "z"});
  auto joined = concatenate({v.encode("x"), v.encode("y z"), Sentence{}});
  EXPECT_EQ(v.decode(joined), "x y z");
}

TEST(Pipeline, OutputJoinsSegmentOutputs) {
  auto fwd = test::tiny_model(8, 7, 6);
  auto rev = test::tiny_model(7, 8, 7);
  SegmentOptions o;
  o.matrix.width = 3;
  o.matrix.max_segment_length = 2;
  Sentence src{3, 4, 5, 6, 7};
  auto t = translate_with_segmentation(fwd, &rev, src, o);
  EXPECT_TRUE(is_contiguous_cover(t.segmentation, 5));
  EXPECT_EQ(t.segment_outputs.size(), t.segmentation.spans.size());
  EXPECT_EQ(t.output, concatenate(t.segment_outputs));
  for (const auto& sp : t.segmentation.spans) EXPECT_LE(sp.length(), 2);

  auto matrix = build_confidence_matrix(fwd, &rev, src, o.matrix);
  for (std::size_t k = 0; k < t.segmentation.spans.size(); ++k) {
    const auto& sp = t.segmentation.spans[k];
    EXPECT_EQ(t.segment_outputs[k], matrix.entry(sp.begin, sp.end)->candidate);
  }
}

TEST(Pipeline, FixedSegmentsUsePlainDecoder) {
  auto fwd = test::tiny_model(8, 7, 6);
  Segmentation seg;
  seg.spans = {{1, 2}, {3, 3}};
  Sentence src{3, 4, 5};
  auto t = translate_segments(fwd, src, seg, 3);
  EXPECT_EQ(t.segment_outputs[0], translate_plain(fwd, Sentence{3, 4}, 3));
  EXPECT_EQ(t.segment_outputs[1], translate_plain(fwd, Sentence{5}, 3));
}

TEST(Pipeline, MemorizedPairTranslates) {
  TrainConfig c;
  c.epochs = 300;
  std::vector<SentencePair> data{{{3, 4, 5}, {5, 3, 4, 6}}};
  auto fwd = train(initial_params(c, 6, 7), data, c).params;
  EXPECT_EQ(translate_plain(fwd, data[0].source), data[0].target);
}

TEST(Pipeline, DegenerateSources) {
  auto fwd = test::tiny_model(6, 6, 8);
  auto rev = test::tiny_model(6, 6, 9);
  EXPECT_NO_THROW(translate_plain(fwd, Sentence{}));
  SegmentOptions o;
  o.matrix.width = 2;
  Sentence unks(4, Vocabulary::kUnk);
  auto t = translate_with_segmentation(fwd, &rev, unks, o);
  EXPECT_TRUE(is_contiguous_cover(t.segmentation, 4));
}
