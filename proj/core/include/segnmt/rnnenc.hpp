#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "segnmt/corpus.hpp"

namespace segnmt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct ModelDims {
  std::size_t embedding = 32;
  std::size_t hidden = 64;
  std::size_t source_vocab = 0;
  std::size_t target_vocab = 0;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Weights of one gated recurrent layer, without biases. Input matrices are
/// hidden x embedding, recurrent matrices hidden x hidden.
struct GruWeights {
  Matrix input;             // candidate, from x
  Matrix recurrent;         // candidate, from h (scaled by the reset gate)
  Matrix update_input;
  Matrix update_recurrent;
  Matrix reset_input;
  Matrix reset_recurrent;
};

/// All parameters of one translation direction.
///
/// The decoder sees the context vector c through three additive terms (one
/// per gate and one for the candidate) and starts from tanh(context_init c).
/// Embedding matrices store one column per token id.
struct GruEncDecParams {
  ModelDims dims;
  Matrix source_embedding;  // embedding x source_vocab
  Matrix target_embedding;  // embedding x target_vocab
  GruWeights encoder;
  GruWeights decoder;
  Matrix context_candidate;  // hidden x hidden
  Matrix context_update;
  Matrix context_reset;
  Matrix context_init;
  Matrix output;  // target_vocab x hidden; row j scores target word j

  static GruEncDecParams zeros(const ModelDims& dims);
  /// Every entry i.i.d. uniform in [-scale, scale].
  static GruEncDecParams uniform(const ModelDims& dims, double scale,
                                 std::uint64_t seed);

  /// Calls f(name, matrix) for every tensor in a fixed order. The names are
  /// the checkpoint tensor names.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  /// Throws std::invalid_argument on inconsistent shapes or non-finite entries.
  void validate() const;
  std::size_t parameter_count() const;
  double squared_norm() const;

  friend bool operator==(const GruEncDecParams& a, const GruEncDecParams& b);

 private:
  template <class Self, class F>
  static void visit(Self& p, F& f) {
    f("src.emb", p.source_embedding);
    f("tgt.emb", p.target_embedding);
    f("enc.W", p.encoder.input);
    f("enc.U", p.encoder.recurrent);
    f("enc.Wz", p.encoder.update_input);
    f("enc.Uz", p.encoder.update_recurrent);
    f("enc.Wr", p.encoder.reset_input);
    f("enc.Ur", p.encoder.reset_recurrent);
    f("dec.W", p.decoder.input);
    f("dec.U", p.decoder.recurrent);
    f("dec.Wz", p.decoder.update_input);
    f("dec.Uz", p.decoder.update_recurrent);
    f("dec.Wr", p.decoder.reset_input);
    f("dec.Ur", p.decoder.reset_recurrent);
    f("dec.C", p.context_candidate);
    f("dec.Cz", p.context_update);
    f("dec.Cr", p.context_reset);
    f("dec.init", p.context_init);
    f("dec.out", p.output);
  }
};

/// Logistic function, kept strictly inside (0, 1) for every finite input.
double sigmoid(double x);

/// Intermediate values of one gated step, kept for backpropagation.
struct GruStep {
  Vector update;     // z
  Vector reset;      // r
  Vector recurrent;  // U h_prev, before the reset gate
  Vector candidate;  // tanh(...)
  Vector hidden;
};

/// Context terms added to the update, reset and candidate pre-activations.
struct GateBias {
  const Vector* update = nullptr;
  const Vector* reset = nullptr;
  const Vector* candidate = nullptr;
};

GruStep gru_step_detailed(const GruWeights& w, const Vector& x,
                          const Vector& h_prev, const GateBias& bias = {});

/// h = z * h_prev + (1 - z) * tanh(W x + r * (U h_prev)).
Vector gru_step(const GruWeights& w, const Vector& x, const Vector& h_prev);

/// Runs the encoder over the source ids followed by EOS, from h = 0, and
/// returns the final hidden state.
Vector encode(const GruEncDecParams& params, std::span<const TokenId> source);

/// Per-sentence decoder inputs derived from the context vector.
struct DecoderContext {
  Vector context;
  Vector candidate;
  Vector update;
  Vector reset;
  Vector initial_hidden;
};

DecoderContext prepare_context(const GruEncDecParams& params,
                               const Vector& context);

struct DecoderStep {
  Vector hidden;
  Vector probabilities;
};

/// One decoder step: feed `prev_target` (BOS at the first step), update the
/// hidden state and return the distribution over the next target word.
DecoderStep decoder_step(const GruEncDecParams& params, TokenId prev_target,
                         const Vector& h_prev, const Vector& context);
DecoderStep decoder_step(const GruEncDecParams& params, TokenId prev_target,
                         const Vector& h_prev, const DecoderContext& context);

/// Column-batched decoder step used by beam search. `hidden` is
/// hidden x batch and is updated in place; returns target_vocab x batch
/// log-probabilities.
Matrix decoder_step_batch(const GruEncDecParams& params,
                          std::span<const TokenId> prev_targets, Matrix& hidden,
                          const DecoderContext& context);

Vector softmax(const Vector& logits);
Vector log_softmax(const Vector& logits);

/// Teacher-forced log p(target | source) in nats. With `terminated`, an EOS
/// step is scored after the words unless the target already ends in EOS.
double sequence_logprob(const GruEncDecParams& params,
                        std::span<const TokenId> source,
                        std::span<const TokenId> target, bool terminated = true);

}  // namespace segnmt
