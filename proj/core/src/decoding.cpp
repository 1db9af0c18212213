#include "segnmt/decoding.hpp"

#include <algorithm>
#include <stdexcept>

namespace segnmt {

namespace {

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

}  // namespace

std::size_t default_max_len(std::size_t source_length) {
  return 2 * source_length + 5;
}

std::vector<Hypothesis> beam_search(const GruEncDecParams& params,
                                    std::span<const TokenId> source,
                                    std::size_t width, std::size_t max_len) {
  if (width == 0) throw std::invalid_argument("beam width must be >= 1");
  if (max_len == 0) max_len = default_max_len(source.size());

  const DecoderContext ctx = prepare_context(params, encode(params, source));
  const auto vocab = static_cast<Eigen::Index>(params.dims.target_vocab);

  std::vector<Hypothesis> beam{Hypothesis{}};
  Matrix hidden = ctx.initial_hidden;
  std::vector<Hypothesis> finished;

  struct Extension {
    std::size_t parent;
    TokenId token;
    double score;
  };
  std::vector<Extension> ext;

  for (std::size_t step = 0; step < max_len && !beam.empty(); ++step) {
    std::vector<TokenId> prev(beam.size());
    for (std::size_t b = 0; b < beam.size(); ++b)
      prev[b] = beam[b].tokens.empty() ? Vocabulary::kBos : beam[b].tokens.back();
    Matrix logp = decoder_step_batch(params, prev, hidden, ctx);

    ext.clear();
    for (std::size_t b = 0; b < beam.size(); ++b)
      for (Eigen::Index j = 0; j < vocab; ++j)
        ext.push_back({b, static_cast<TokenId>(j),
                       beam[b].log_prob + logp(j, static_cast<Eigen::Index>(b))});

    // Every live hypothesis has the same length, so comparing the parent
    // prefix and then the new token is the lexicographic order.
    auto order = [&](const Extension& a, const Extension& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return beam[a.parent].tokens < beam[b.parent].tokens;
      return a.token < b.token;
    };
    std::size_t keep = std::min(width, ext.size());
    std::partial_sort(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(keep),
                      ext.end(), order);

    std::vector<Hypothesis> next;
    std::vector<Eigen::Index> columns;
    for (std::size_t k = 0; k < keep; ++k) {
      const auto& e = ext[k];
      Hypothesis h{beam[e.parent].tokens, e.score, false};
      if (e.token == Vocabulary::kEos) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        h.tokens.push_back(e.token);
        next.push_back(std::move(h));
        columns.push_back(static_cast<Eigen::Index>(e.parent));
      }
    }
    Matrix next_hidden(hidden.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
      next_hidden.col(static_cast<Eigen::Index>(c)) = hidden.col(columns[c]);
    hidden = std::move(next_hidden);
    beam = std::move(next);
    if (finished.size() >= width) break;
  }

  std::vector<Hypothesis>& pool = finished.empty() ? beam : finished;
  std::sort(pool.begin(), pool.end(), better);
  if (pool.size() > width) pool.resize(width);
  return pool;
}

Hypothesis greedy_decode(const GruEncDecParams& params,
                         std::span<const TokenId> source, std::size_t max_len) {
  if (max_len == 0) max_len = default_max_len(source.size());
  const DecoderContext ctx = prepare_context(params, encode(params, source));
  Matrix hidden = ctx.initial_hidden;
  Hypothesis h;
  for (std::size_t step = 0; step < max_len; ++step) {
    TokenId prev[1] = {h.tokens.empty() ? Vocabulary::kBos : h.tokens.back()};
    Matrix logp = decoder_step_batch(params, prev, hidden, ctx);
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logp.rows(); ++j)
      if (logp(j, 0) > logp(best, 0)) best = j;
    h.log_prob += logp(best, 0);
    if (best == Vocabulary::kEos) {
      h.finished = true;
      break;
    }
    h.tokens.push_back(static_cast<TokenId>(best));
  }
  return h;
}

}  // namespace segnmt
