#include "segnmt/pipeline.hpp"

#include <stdexcept>

#include "segnmt/decoding.hpp"

namespace segnmt {

namespace {

Sentence slice(const Sentence& source, const Span& s) {
  return Sentence(source.begin() + (s.begin - 1), source.begin() + s.end);
}

}  // namespace

Sentence translate_plain(const GruEncDecParams& forward, const Sentence& source,
                         std::size_t width) {
  return beam_search(forward, source, width).front().tokens;
}

Sentence concatenate(const std::vector<Sentence>& parts) {
  Sentence out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

SegmentedTranslation translate_with_matrix(const GruEncDecParams& forward,
                                           const GruEncDecParams* reverse,
                                           const Sentence& source,
                                           const ConfidenceMatrix& matrix,
                                           const SegmentOptions& options) {
  if (matrix.size() != static_cast<int>(source.size()))
    throw std::invalid_argument("confidence matrix does not match the source length");
  SegmentedTranslation out;
  out.segmentation = optimal_segmentation(matrix.scores());
  for (const Span& s : out.segmentation.spans) {
    if (options.redecode) {
      Sentence phrase = slice(source, s);
      out.segment_outputs.push_back(phrase_confidence(forward, reverse, phrase,
                                                      options.matrix.width,
                                                      options.matrix.mode)
                                        .candidate);
    } else {
      const PhraseScore* e = matrix.entry(s.begin, s.end);
      if (!e) throw std::logic_error("segmentation chose a span without a candidate");
      out.segment_outputs.push_back(e->candidate);
    }
  }
  out.output = concatenate(out.segment_outputs);
  return out;
}

SegmentedTranslation translate_with_segmentation(const GruEncDecParams& forward,
                                                 const GruEncDecParams* reverse,
                                                 const Sentence& source,
                                                 const SegmentOptions& options) {
  if (source.empty()) throw std::invalid_argument("cannot segment an empty sentence");
  auto matrix = build_confidence_matrix(forward, reverse, source, options.matrix);
  return translate_with_matrix(forward, reverse, source, matrix, options);
}

SegmentedTranslation translate_segments(const GruEncDecParams& forward,
                                        const Sentence& source,
                                        const Segmentation& segmentation,
                                        std::size_t width) {
  if (!is_contiguous_cover(segmentation, static_cast<int>(source.size())))
    throw std::invalid_argument("segmentation does not cover the source");
  SegmentedTranslation out;
  out.segmentation = segmentation;
  for (const Span& s : segmentation.spans)
    out.segment_outputs.push_back(translate_plain(forward, slice(source, s), width));
  out.output = concatenate(out.segment_outputs);
  return out;
}

}  // namespace segnmt
