#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "segnmt/confidence.hpp"
#include "segnmt/corpus.hpp"
#include "segnmt/rnnenc.hpp"
#include "segnmt/segmentation.hpp"

namespace segnmt {

/// Top beam candidate for the whole sentence. Never throws on an empty or
/// all-UNK source; may return an unfinished hypothesis.
Sentence translate_plain(const GruEncDecParams& forward, const Sentence& source,
                         std::size_t width = kDefaultBeamWidth);

struct SegmentOptions {
  MatrixOptions matrix;
  /// Re-score each chosen span from scratch instead of reusing the candidate
  /// stored in the confidence matrix.
  bool redecode = false;
};

struct SegmentedTranslation {
  Sentence output;
  Segmentation segmentation;
  std::vector<Sentence> segment_outputs;
};

/// Builds the confidence matrix, picks the optimal segmentation, and joins
/// the per-segment translations left to right. Each segment's translation
/// is the candidate that attained its confidence score.
SegmentedTranslation translate_with_segmentation(const GruEncDecParams& forward,
                                                 const GruEncDecParams* reverse,
                                                 const Sentence& source,
                                                 const SegmentOptions& options);

/// Same as above for an already computed matrix.
SegmentedTranslation translate_with_matrix(const GruEncDecParams& forward,
                                           const GruEncDecParams* reverse,
                                           const Sentence& source,
                                           const ConfidenceMatrix& matrix,
                                           const SegmentOptions& options);

/// Translates each span of a fixed segmentation with translate_plain.
SegmentedTranslation translate_segments(const GruEncDecParams& forward,
                                        const Sentence& source,
                                        const Segmentation& segmentation,
                                        std::size_t width = kDefaultBeamWidth);

/// Concatenation of per-segment outputs.
Sentence concatenate(const std::vector<Sentence>& parts);

}  // namespace segnmt
