#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segnmt/corpus.hpp"
#include "segnmt/decoding.hpp"
#include "segnmt/rnnenc.hpp"
#include "segnmt/segmentation.hpp"

namespace segnmt {

enum class ScoreMode {
  Direct,                  // log p(f|e)
  Bidirectional,           // (log p(f|e) + log q(e|f)) / 2
  BidirectionalPenalized,  // (log p + log q) / (2 max(ln L, ln 2))
};

/// "direct", "bidir", "bidir-pen".
std::string to_string(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& name);
bool uses_reverse_model(ScoreMode mode);

/// Confidence of one (phrase, candidate) pair from its forward and reverse
/// log-probabilities (nats) and the phrase length in words. For single-word
/// phrases the length penalty's denominator is clamped at 2 ln 2.
/// Throws std::invalid_argument on non-finite input or zero length.
double pair_confidence(double forward_logprob, double reverse_logprob,
                       std::size_t length, ScoreMode mode);

/// One beam candidate for a phrase with its model scores.
struct PairScore {
  Sentence candidate;
  double forward_logprob = 0;
  std::optional<double> reverse_logprob;  // absent without a reverse model
  std::size_t length = 0;
  bool finished = true;
};

/// c_ij and the candidate that attains it.
struct PhraseScore {
  double score = kAbsentScore;
  Sentence candidate;
  double forward_logprob = 0;
  std::optional<double> reverse_logprob;
  /// The beam produced no finished candidate; the best unfinished one was used.
  bool fallback = false;
};

/// Runs the forward beam on `phrase` and, when `reverse` is given, scores the
/// phrase under the reverse model conditioned on each candidate.
std::vector<PairScore> score_candidates(const GruEncDecParams& forward,
                                        const GruEncDecParams* reverse,
                                        std::span<const TokenId> phrase,
                                        std::size_t width = kDefaultBeamWidth);

/// Max of pair_confidence over the candidates; the earliest (highest
/// forward log-probability) wins ties.
PhraseScore select_best(const std::vector<PairScore>& candidates, ScoreMode mode);

/// c_ij = max_k c(e_ij, f^k). `reverse` may be null in Direct mode.
PhraseScore phrase_confidence(const GruEncDecParams& forward,
                              const GruEncDecParams* reverse,
                              std::span<const TokenId> phrase,
                              std::size_t width, ScoreMode mode);

struct MatrixOptions {
  ScoreMode mode = ScoreMode::BidirectionalPenalized;
  std::size_t width = kDefaultBeamWidth;
  std::size_t max_segment_length = 8;
  std::size_t workers = 1;
};

/// Scored candidates for every span up to the length cap. Independent of the
/// score mode, so one table serves all modes.
class CandidateTable {
 public:
  CandidateTable() = default;
  CandidateTable(int n, std::size_t max_segment_length);

  int size() const { return n_; }
  std::size_t max_segment_length() const { return max_len_; }
  bool has(int i, int j) const;
  const std::vector<PairScore>& at(int i, int j) const;
  std::vector<PairScore>& at(int i, int j);
  bool has_reverse_scores() const { return has_reverse_; }
  void set_has_reverse_scores(bool v) { has_reverse_ = v; }

  /// Spans in row-major order (i ascending, then j).
  std::vector<Span> spans() const;

 private:
  std::size_t index(int i, int j) const;

  int n_ = 0;
  std::size_t max_len_ = 0;
  bool has_reverse_ = false;
  std::vector<std::vector<PairScore>> cells_;
};

/// Scores every span of `sentence` with at most `max_segment_length` words.
/// Spans are independent tasks spread over `workers` threads; the result is
/// identical for any worker count.
CandidateTable build_candidate_table(const GruEncDecParams& forward,
                                     const GruEncDecParams* reverse,
                                     const Sentence& sentence, std::size_t width,
                                     std::size_t max_segment_length,
                                     std::size_t workers);

class ConfidenceMatrix {
 public:
  ConfidenceMatrix() = default;
  ConfidenceMatrix(int n, std::size_t max_segment_length);

  int size() const { return scores_.size(); }
  std::size_t max_segment_length() const { return max_len_; }
  const SpanScores& scores() const { return scores_; }
  double score(int i, int j) const { return scores_(i, j); }
  /// Null for spans beyond the length cap.
  const PhraseScore* entry(int i, int j) const;
  void set(int i, int j, PhraseScore phrase);

  friend bool operator==(const ConfidenceMatrix& a, const ConfidenceMatrix& b);

 private:
  SpanScores scores_;
  std::size_t max_len_ = 0;
  std::vector<std::optional<PhraseScore>> entries_;
};

ConfidenceMatrix to_confidence_matrix(const CandidateTable& table, ScoreMode mode);

/// Throws std::invalid_argument for an empty sentence, or when the mode
/// needs a reverse model and none is given.
ConfidenceMatrix build_confidence_matrix(const GruEncDecParams& forward,
                                         const GruEncDecParams* reverse,
                                         const Sentence& sentence,
                                         const MatrixOptions& options);

/// Diagnostic dump: `i,j,c_ij,fwd_logp,rev_logp,candidate`, one row per
/// defined span. Candidates print as target tokens when `target_vocab` is
/// given, else as ids.
void write_matrix_csv(std::ostream& out, const ConfidenceMatrix& matrix,
                      const Vocabulary* target_vocab = nullptr);

}  // namespace segnmt
