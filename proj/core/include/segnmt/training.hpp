#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "segnmt/config.hpp"
#include "segnmt/corpus.hpp"
#include "segnmt/rnnenc.hpp"

namespace segnmt {

/// Source and target word ids; EOS is added by the model code.
struct SentencePair {
  Sentence source;
  Sentence target;
};

std::vector<SentencePair> encode_pairs(const ParallelCorpus& corpus,
                                       const Vocabulary& source_vocab,
                                       const Vocabulary& target_vocab);

struct TrainConfig {
  double learning_rate = 0.2;
  std::size_t epochs = 10;
  std::size_t batch_size = 1;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  /// Pairs with more words than this on either side are dropped.
  std::size_t max_length = 8;
  double init_scale = 0.08;
  std::size_t embedding = 32;
  std::size_t hidden = 64;

  void validate() const;
  static TrainConfig from_config(const KeyValueConfig& config);
  KeyValueConfig to_config() const;
};

/// Summed negative log-likelihood (nats) of target + EOS given source.
/// When `grad` is non-null the exact BPTT gradient of that sum is added to it;
/// `grad` must have the shapes of `params`.
double pair_loss(const GruEncDecParams& params, const SentencePair& pair,
                 GruEncDecParams* grad = nullptr);

/// Mean negative log-likelihood per target token (EOS included).
double mean_token_loss(const GruEncDecParams& params,
                       const std::vector<SentencePair>& pairs);

struct TrainResult {
  GruEncDecParams params;
  /// Mean nats per target token over each epoch, measured before each update.
  std::vector<double> loss_trace;
  std::size_t pairs_used = 0;
  std::size_t pairs_dropped = 0;
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Plain SGD with global-norm gradient clipping. Each pair's gradient is
/// averaged over its target tokens. Deterministic for a fixed config.seed.
/// Throws std::invalid_argument when no pair survives the length filter.
TrainResult train(GruEncDecParams params, const std::vector<SentencePair>& corpus,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Fresh uniform initialization sized for the given vocabularies.
GruEncDecParams initial_params(const TrainConfig& config, std::size_t source_vocab,
                               std::size_t target_vocab);

/// Scales `grad` so its global L2 norm is at most `max_norm`; returns the
/// norm before clipping.
double clip_global_norm(GruEncDecParams& grad, double max_norm);

struct GradientCheckResult {
  double max_relative_error = 0;
  std::string worst_tensor;
  Eigen::Index worst_index = 0;
  double analytic = 0;
  double numeric = 0;
  std::size_t parameters_checked = 0;
};

/// Floor on the relative-error denominator. Below it the comparison is
/// effectively absolute, since central differences cannot resolve smaller
/// gradients.
inline constexpr double kGradientCheckFloor = 1e-6;

/// Compares the BPTT gradient of pair_loss with central finite differences
/// over every parameter. Relative error is |a - n| / max(|a|, |n|, floor).
GradientCheckResult gradient_check(const GruEncDecParams& params,
                                   const SentencePair& pair, double epsilon = 1e-4);

}  // namespace segnmt
