#include "segnmt/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace segnmt {

namespace {

struct GruGrad {
  Matrix* input;
  Matrix* recurrent;
  Matrix* update_input;
  Matrix* update_recurrent;
  Matrix* reset_input;
  Matrix* reset_recurrent;
};

GruGrad grads_of(GruWeights& w) {
  return {&w.input,       &w.recurrent,        &w.update_input,
          &w.update_recurrent, &w.reset_input, &w.reset_recurrent};
}

struct StepBackward {
  Vector h_prev;  // d loss / d h_prev
  Vector x;       // d loss / d x
  Vector update_bias;
  Vector reset_bias;
  Vector candidate_bias;
};

// Backward through one gated step given d loss / d h.
StepBackward gru_backward(const GruWeights& w, GruGrad g, const Vector& x,
                          const Vector& h_prev, const GruStep& s, const Vector& dh) {
  StepBackward out;
  Vector dz = dh.cwiseProduct(h_prev - s.candidate);
  Vector dn = dh.cwiseProduct((1.0 - s.update.array()).matrix());
  out.h_prev = dh.cwiseProduct(s.update);

  Vector dnpre = dn.cwiseProduct((1.0 - s.candidate.array().square()).matrix());
  *g.input += dnpre * x.transpose();
  out.x = w.input.transpose() * dnpre;
  Vector dr = dnpre.cwiseProduct(s.recurrent);
  Vector dq = dnpre.cwiseProduct(s.reset);
  *g.recurrent += dq * h_prev.transpose();
  out.h_prev += w.recurrent.transpose() * dq;

  Vector dzpre = dz.cwiseProduct(s.update.cwiseProduct((1.0 - s.update.array()).matrix()));
  *g.update_input += dzpre * x.transpose();
  *g.update_recurrent += dzpre * h_prev.transpose();
  out.x += w.update_input.transpose() * dzpre;
  out.h_prev += w.update_recurrent.transpose() * dzpre;

  Vector drpre = dr.cwiseProduct(s.reset.cwiseProduct((1.0 - s.reset.array()).matrix()));
  *g.reset_input += drpre * x.transpose();
  *g.reset_recurrent += drpre * h_prev.transpose();
  out.x += w.reset_input.transpose() * drpre;
  out.h_prev += w.reset_recurrent.transpose() * drpre;

  out.update_bias = std::move(dzpre);
  out.reset_bias = std::move(drpre);
  out.candidate_bias = std::move(dnpre);
  return out;
}

void axpy(GruEncDecParams& y, double a, const GruEncDecParams& x) {
  std::vector<const Matrix*> xs;
  x.for_each([&](const std::string&, const Matrix& m) { xs.push_back(&m); });
  std::size_t k = 0;
  y.for_each([&](const std::string&, Matrix& m) { m += a * *xs[k++]; });
}

void scale(GruEncDecParams& y, double a) {
  y.for_each([&](const std::string&, Matrix& m) { m *= a; });
}

}  // namespace

std::vector<SentencePair> encode_pairs(const ParallelCorpus& corpus,
                                       const Vocabulary& source_vocab,
                                       const Vocabulary& target_vocab) {
  std::vector<SentencePair> out;
  out.reserve(corpus.size());
  for (std::size_t k = 0; k < corpus.size(); ++k)
    out.push_back({source_vocab.encode(corpus.source[k]),
                   target_vocab.encode(corpus.target[k])});
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0)) throw std::invalid_argument("learning rate must be >= 0");
  if (!(clip_norm > 0)) throw std::invalid_argument("clip threshold must be > 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (embedding == 0 || hidden == 0)
    throw std::invalid_argument("model dimensions must be positive");
  if (!(init_scale >= 0)) throw std::invalid_argument("init scale must be >= 0");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& c) {
  TrainConfig t;
  t.learning_rate = c.get_double("learning_rate", t.learning_rate);
  t.epochs = static_cast<std::size_t>(c.get_uint("epochs", t.epochs));
  t.batch_size = static_cast<std::size_t>(c.get_uint("batch_size", t.batch_size));
  t.clip_norm = c.get_double("clip_norm", t.clip_norm);
  t.seed = c.get_uint("seed", t.seed);
  t.max_length = static_cast<std::size_t>(c.get_uint("max_length", t.max_length));
  t.init_scale = c.get_double("init_scale", t.init_scale);
  t.embedding = static_cast<std::size_t>(c.get_uint("embedding", t.embedding));
  t.hidden = static_cast<std::size_t>(c.get_uint("hidden", t.hidden));
  t.validate();
  return t;
}

KeyValueConfig TrainConfig::to_config() const {
  KeyValueConfig c;
  auto num = [](double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  c.set("learning_rate", num(learning_rate));
  c.set("epochs", std::to_string(epochs));
  c.set("batch_size", std::to_string(batch_size));
  c.set("clip_norm", num(clip_norm));
  c.set("seed", std::to_string(seed));
  c.set("max_length", std::to_string(max_length));
  c.set("init_scale", num(init_scale));
  c.set("embedding", std::to_string(embedding));
  c.set("hidden", std::to_string(hidden));
  return c;
}

double pair_loss(const GruEncDecParams& params, const SentencePair& pair,
                 GruEncDecParams* grad) {
  const auto hsize = static_cast<Eigen::Index>(params.dims.hidden);
  Sentence src = pair.source;
  src.push_back(Vocabulary::kEos);
  Sentence tgt = pair.target;
  tgt.push_back(Vocabulary::kEos);
  for (TokenId id : src)
    if (id < 0 || static_cast<std::size_t>(id) >= params.dims.source_vocab)
      throw std::out_of_range("source token id out of range");
  for (TokenId id : tgt)
    if (id < 0 || static_cast<std::size_t>(id) >= params.dims.target_vocab)
      throw std::out_of_range("target token id out of range");

  // Forward, keeping every intermediate.
  std::vector<Vector> enc_h{Vector::Zero(hsize)};
  std::vector<GruStep> enc_steps;
  for (TokenId id : src) {
    enc_steps.push_back(gru_step_detailed(params.encoder,
                                          params.source_embedding.col(id), enc_h.back()));
    enc_h.push_back(enc_steps.back().hidden);
  }
  const Vector& context = enc_h.back();
  DecoderContext ctx = prepare_context(params, context);
  GateBias bias{&ctx.update, &ctx.reset, &ctx.candidate};

  std::vector<Vector> dec_h{ctx.initial_hidden};
  std::vector<GruStep> dec_steps;
  std::vector<Vector> probs;
  double loss = 0;
  TokenId prev = Vocabulary::kBos;
  for (TokenId next : tgt) {
    dec_steps.push_back(gru_step_detailed(
        params.decoder, params.target_embedding.col(prev), dec_h.back(), bias));
    dec_h.push_back(dec_steps.back().hidden);
    Vector logits = params.output * dec_h.back();
    Vector logp = log_softmax(logits);
    loss -= logp(next);
    if (grad) probs.push_back(logp.array().exp().matrix());
    prev = next;
  }
  if (!grad) return loss;

  // Backward through the decoder.
  Vector dh = Vector::Zero(hsize);
  Vector d_update = Vector::Zero(hsize), d_reset = Vector::Zero(hsize),
         d_candidate = Vector::Zero(hsize);
  GruGrad dec_grad = grads_of(grad->decoder);
  for (std::size_t t = tgt.size(); t-- > 0;) {
    Vector dlogits = probs[t];
    dlogits(tgt[t]) -= 1.0;
    grad->output += dlogits * dec_h[t + 1].transpose();
    dh += params.output.transpose() * dlogits;

    TokenId input = t == 0 ? Vocabulary::kBos : tgt[t - 1];
    auto back = gru_backward(params.decoder, dec_grad,
                             params.target_embedding.col(input), dec_h[t],
                             dec_steps[t], dh);
    grad->target_embedding.col(input) += back.x;
    d_update += back.update_bias;
    d_reset += back.reset_bias;
    d_candidate += back.candidate_bias;
    dh = std::move(back.h_prev);
  }

  // Context enters through three additive terms and the initial state.
  grad->context_update += d_update * context.transpose();
  grad->context_reset += d_reset * context.transpose();
  grad->context_candidate += d_candidate * context.transpose();
  Vector dinit = dh.cwiseProduct((1.0 - ctx.initial_hidden.array().square()).matrix());
  grad->context_init += dinit * context.transpose();
  Vector dc = params.context_update.transpose() * d_update +
              params.context_reset.transpose() * d_reset +
              params.context_candidate.transpose() * d_candidate +
              params.context_init.transpose() * dinit;

  // Backward through the encoder.
  GruGrad enc_grad = grads_of(grad->encoder);
  for (std::size_t t = src.size(); t-- > 0;) {
    auto back = gru_backward(params.encoder, enc_grad,
                             params.source_embedding.col(src[t]), enc_h[t],
                             enc_steps[t], dc);
    grad->source_embedding.col(src[t]) += back.x;
    dc = std::move(back.h_prev);
  }
  return loss;
}

double mean_token_loss(const GruEncDecParams& params,
                       const std::vector<SentencePair>& pairs) {
  double total = 0;
  std::size_t tokens = 0;
  for (const auto& p : pairs) {
    total += pair_loss(params, p);
    tokens += p.target.size() + 1;
  }
  return tokens ? total / static_cast<double>(tokens) : 0.0;
}

double clip_global_norm(GruEncDecParams& grad, double max_norm) {
  double norm = std::sqrt(grad.squared_norm());
  if (norm > max_norm) scale(grad, max_norm / norm);
  return norm;
}

GruEncDecParams initial_params(const TrainConfig& config, std::size_t source_vocab,
                               std::size_t target_vocab) {
  ModelDims dims{config.embedding, config.hidden, source_vocab, target_vocab};
  return GruEncDecParams::uniform(dims, config.init_scale, config.seed);
}

TrainResult train(GruEncDecParams params, const std::vector<SentencePair>& corpus,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  params.validate();
  std::vector<const SentencePair*> kept;
  for (const auto& p : corpus)
    if (p.source.size() <= config.max_length && p.target.size() <= config.max_length)
      kept.push_back(&p);
  if (kept.empty())
    throw std::invalid_argument("no training pairs left after length filtering");

  TrainResult result;
  result.pairs_used = kept.size();
  result.pairs_dropped = corpus.size() - kept.size();

  // Stream 0 of the seed initialises parameters; shuffling uses its own stream.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(kept.size());
  GruEncDecParams grad = GruEncDecParams::zeros(params.dims);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::size_t stop = std::min(order.size(), start + config.batch_size);
      scale(grad, 0.0);
      std::size_t tokens = 0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto& pair = *kept[order[k]];
        epoch_loss += pair_loss(params, pair, &grad);
        tokens += pair.target.size() + 1;
      }
      epoch_tokens += tokens;
      scale(grad, 1.0 / static_cast<double>(tokens));
      clip_global_norm(grad, config.clip_norm);
      axpy(params, -config.learning_rate, grad);
    }
    double mean = epoch_loss / static_cast<double>(epoch_tokens);
    result.loss_trace.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  result.params = std::move(params);
  return result;
}

GradientCheckResult gradient_check(const GruEncDecParams& params,
                                   const SentencePair& pair, double epsilon) {
  GruEncDecParams analytic = GruEncDecParams::zeros(params.dims);
  pair_loss(params, pair, &analytic);

  std::vector<const Matrix*> analytic_tensors;
  analytic.for_each(
      [&](const std::string&, const Matrix& m) { analytic_tensors.push_back(&m); });

  GradientCheckResult result;
  GruEncDecParams probe = params;
  std::size_t tensor = 0;
  probe.for_each([&](const std::string& name, Matrix& m) {
    const Matrix& a = *analytic_tensors[tensor++];
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      double saved = m.data()[k];
      m.data()[k] = saved + epsilon;
      double plus = pair_loss(probe, pair);
      m.data()[k] = saved - epsilon;
      double minus = pair_loss(probe, pair);
      m.data()[k] = saved;
      double numeric = (plus - minus) / (2 * epsilon);
      double an = a.data()[k];
      double denom = std::max({std::abs(an), std::abs(numeric), kGradientCheckFloor});
      double rel = std::abs(an - numeric) / denom;
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      ++result.parameters_checked;
      if (rel > result.max_relative_error || result.worst_tensor.empty()) {
        result.max_relative_error = rel;
        result.worst_tensor = name;
        result.worst_index = k;
        result.analytic = an;
        result.numeric = numeric;
      }
    }
  });
  return result;
}

}  // namespace segnmt
