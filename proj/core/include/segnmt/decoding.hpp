#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segnmt/corpus.hpp"
#include "segnmt/rnnenc.hpp"

namespace segnmt {

inline constexpr std::size_t kDefaultBeamWidth = 10;

/// Decoding step budget for a source of `source_length` words: 2n + 5.
std::size_t default_max_len(std::size_t source_length);

/// One beam-search result. `tokens` excludes EOS; `log_prob` includes the
/// EOS step when `finished`.
struct Hypothesis {
  Sentence tokens;
  double log_prob = 0;
  bool finished = false;
};

/// Beam search without length normalisation.
///
/// At each step the `width` best unfinished hypotheses are extended over the
/// whole target vocabulary and the `width` best extensions survive; those
/// that emit EOS move to the finished pool. Stops once `width` hypotheses
/// have finished or after `max_len` steps (EOS counts as a step). Returns the
/// finished pool sorted by log-probability, or, if nothing finished, the
/// surviving unfinished hypotheses. Ties break toward the lexicographically
/// smaller token sequence. Never empty. `max_len` 0 means default_max_len.
std::vector<Hypothesis> beam_search(const GruEncDecParams& params,
                                    std::span<const TokenId> source,
                                    std::size_t width = kDefaultBeamWidth,
                                    std::size_t max_len = 0);

/// Argmax at every step (lowest id on ties) until EOS or `max_len` steps.
Hypothesis greedy_decode(const GruEncDecParams& params,
                         std::span<const TokenId> source, std::size_t max_len = 0);

}  // namespace segnmt
