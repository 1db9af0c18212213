#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "segnmt/corpus.hpp"

namespace segnmt {

inline constexpr double kAbsentScore = -std::numeric_limits<double>::infinity();

/// Upper-triangular table of phrase scores c_ij, 1-based, with absent
/// entries held as -infinity.
class SpanScores {
 public:
  SpanScores() = default;
  explicit SpanScores(int n);

  int size() const { return n_; }
  double operator()(int i, int j) const { return scores_[index(i, j)]; }
  void set(int i, int j, double score) { scores_[index(i, j)] = score; }
  bool defined(int i, int j) const { return (*this)(i, j) != kAbsentScore; }
  std::size_t defined_count() const;

  friend bool operator==(const SpanScores&, const SpanScores&) = default;

 private:
  std::size_t index(int i, int j) const;

  int n_ = 0;
  std::vector<double> scores_;
};

/// Ordered contiguous spans covering words 1..n exactly once.
struct Segmentation {
  std::vector<Span> spans;
  double score = 0;

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

/// best[j] is the best score over segmentations of words 1..j (best[0] = 0);
/// start[j] is the first word of the last segment in that segmentation.
struct DpTable {
  std::vector<double> best;
  std::vector<int> start;
};

/// Raised when some word lies in no defined span, or no chain of defined
/// spans reaches it.
class UncoverableWordError : public std::runtime_error {
 public:
  explicit UncoverableWordError(int word);
  int word() const { return word_; }

 private:
  int word_;
};

/// best[j] = max_i (c_ij + best[i-1]). Among equal maxima the smallest i
/// wins, i.e. the longest final segment.
DpTable fill_dp_table(const SpanScores& scores);

/// Maximum-score segmentation by dynamic programming and right-to-left
/// traceback; O(n^2) score lookups.
Segmentation optimal_segmentation(const SpanScores& scores);

inline constexpr int kBruteForceMaxWords = 20;

/// Enumerates all 2^(n-1) contiguous covers (the integer program's feasible
/// set) and returns the best. Totals are accumulated left to right exactly
/// as the DP does, and ties go to the cover whose segment starts, read from
/// the last segment backwards, are smallest. `enumerated` receives the
/// number of covers visited.
Segmentation brute_force_segmentation(const SpanScores& scores,
                                      std::size_t* enumerated = nullptr);

/// Segment lengths drawn left to right from a Gaussian with the given mean
/// and variance, rounded and clamped to [1, words remaining].
Segmentation random_segmentation(int n, double target_mean, double target_variance,
                                 std::uint64_t seed);

/// Optimal segmentation under i.i.d. Uniform(0,1) span scores.
Segmentation random_confidence_segmentation(int n, std::uint64_t seed);

bool is_contiguous_cover(const Segmentation& segmentation, int n);

/// Sum of c_ij over the chosen spans, in segmentation order.
double segmentation_score(const SpanScores& scores, const Segmentation& segmentation);

/// Bracketed trace, e.g. "[[ a b ] [ c d e ]]".
std::string format_segmentation(const Segmentation& segmentation,
                                const Tokens& source);

struct LengthMoments {
  double mean = 0;
  double variance = 0;
  std::size_t count = 0;
};

/// Mean and population variance of segment lengths over all segmentations.
LengthMoments segment_length_moments(const std::vector<Segmentation>& segmentations);

}  // namespace segnmt
