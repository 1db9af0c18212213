#include "segnmt/rnnenc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace segnmt {

namespace {

constexpr double kSigmoidFloor = std::numeric_limits<double>::min();
constexpr double kSigmoidCeil = 1.0 - std::numeric_limits<double>::epsilon() / 2;

struct Shape {
  std::size_t rows;
  std::size_t cols;
};

Shape expected_shape(const std::string& name, const ModelDims& d) {
  const std::size_t e = d.embedding, h = d.hidden;
  if (name == "src.emb") return {e, d.source_vocab};
  if (name == "tgt.emb") return {e, d.target_vocab};
  if (name == "dec.out") return {d.target_vocab, h};
  if (name.ends_with(".W") || name.ends_with(".Wz") || name.ends_with(".Wr"))
    return {h, e};
  return {h, h};
}

void check_id(TokenId id, std::size_t vocab, const char* side) {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab)
    throw std::out_of_range(std::string(side) + " token id " +
                            std::to_string(id) + " outside vocabulary of " +
                            std::to_string(vocab));
}

Matrix sigmoid_matrix(const Matrix& m) {
  return m.unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace

double sigmoid(double x) {
  double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(s, kSigmoidFloor, kSigmoidCeil);
}

GruEncDecParams GruEncDecParams::zeros(const ModelDims& dims) {
  GruEncDecParams p;
  p.dims = dims;
  p.for_each([&](const std::string& name, Matrix& m) {
    auto s = expected_shape(name, dims);
    m = Matrix::Zero(static_cast<Eigen::Index>(s.rows),
                     static_cast<Eigen::Index>(s.cols));
  });
  return p;
}

GruEncDecParams GruEncDecParams::uniform(const ModelDims& dims, double scale,
                                         std::uint64_t seed) {
  GruEncDecParams p = zeros(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-scale, scale);
  p.for_each([&](const std::string&, Matrix& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = dist(rng);
  });
  return p;
}

void GruEncDecParams::validate() const {
  if (dims.embedding == 0 || dims.hidden == 0)
    throw std::invalid_argument("model dimensions must be positive");
  for_each([&](const std::string& name, const Matrix& m) {
    auto s = expected_shape(name, dims);
    if (static_cast<std::size_t>(m.rows()) != s.rows ||
        static_cast<std::size_t>(m.cols()) != s.cols)
      throw std::invalid_argument("tensor " + name + " has shape " +
                                  std::to_string(m.rows()) + "x" +
                                  std::to_string(m.cols()) + ", expected " +
                                  std::to_string(s.rows) + "x" +
                                  std::to_string(s.cols));
    if (!m.allFinite())
      throw std::invalid_argument("tensor " + name + " has non-finite entries");
  });
}

std::size_t GruEncDecParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](const std::string&, const Matrix& m) {
    n += static_cast<std::size_t>(m.size());
  });
  return n;
}

double GruEncDecParams::squared_norm() const {
  double s = 0;
  for_each([&](const std::string&, const Matrix& m) { s += m.squaredNorm(); });
  return s;
}

bool operator==(const GruEncDecParams& a, const GruEncDecParams& b) {
  if (!(a.dims == b.dims)) return false;
  bool same = true;
  std::vector<const Matrix*> rhs;
  b.for_each([&](const std::string&, const Matrix& m) { rhs.push_back(&m); });
  std::size_t k = 0;
  a.for_each([&](const std::string&, const Matrix& m) {
    const Matrix& o = *rhs[k++];
    if (m.rows() != o.rows() || m.cols() != o.cols() || !(m.array() == o.array()).all())
      same = false;
  });
  return same;
}

GruStep gru_step_detailed(const GruWeights& w, const Vector& x,
                          const Vector& h_prev, const GateBias& bias) {
  if (x.size() != w.input.cols() || h_prev.size() != w.recurrent.cols())
    throw std::invalid_argument("gru_step: dimension mismatch");
  GruStep s;
  Vector zpre = w.update_input * x + w.update_recurrent * h_prev;
  Vector rpre = w.reset_input * x + w.reset_recurrent * h_prev;
  if (bias.update) zpre += *bias.update;
  if (bias.reset) rpre += *bias.reset;
  s.update = zpre.unaryExpr([](double v) { return sigmoid(v); });
  s.reset = rpre.unaryExpr([](double v) { return sigmoid(v); });
  s.recurrent = w.recurrent * h_prev;
  Vector cpre = w.input * x + s.reset.cwiseProduct(s.recurrent);
  if (bias.candidate) cpre += *bias.candidate;
  s.candidate = cpre.array().tanh().matrix();
  s.hidden = s.update.cwiseProduct(h_prev) +
             (Vector::Ones(s.update.size()) - s.update).cwiseProduct(s.candidate);
  return s;
}

Vector gru_step(const GruWeights& w, const Vector& x, const Vector& h_prev) {
  return gru_step_detailed(w, x, h_prev).hidden;
}

Vector encode(const GruEncDecParams& params, std::span<const TokenId> source) {
  Vector h = Vector::Zero(static_cast<Eigen::Index>(params.dims.hidden));
  for (TokenId id : source) {
    check_id(id, params.dims.source_vocab, "source");
    h = gru_step(params.encoder, params.source_embedding.col(id), h);
  }
  return gru_step(params.encoder, params.source_embedding.col(Vocabulary::kEos), h);
}

DecoderContext prepare_context(const GruEncDecParams& params,
                               const Vector& context) {
  if (static_cast<std::size_t>(context.size()) != params.dims.hidden)
    throw std::invalid_argument("context vector has wrong dimension");
  DecoderContext c;
  c.context = context;
  c.candidate = params.context_candidate * context;
  c.update = params.context_update * context;
  c.reset = params.context_reset * context;
  c.initial_hidden = (params.context_init * context).array().tanh().matrix();
  return c;
}

Vector softmax(const Vector& logits) {
  double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Vector log_softmax(const Vector& logits) {
  double m = logits.maxCoeff();
  double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

DecoderStep decoder_step(const GruEncDecParams& params, TokenId prev_target,
                         const Vector& h_prev, const DecoderContext& context) {
  check_id(prev_target, params.dims.target_vocab, "target");
  if (static_cast<std::size_t>(h_prev.size()) != params.dims.hidden)
    throw std::invalid_argument("decoder_step: hidden state has wrong dimension");
  GateBias bias{&context.update, &context.reset, &context.candidate};
  DecoderStep out;
  out.hidden = gru_step_detailed(params.decoder,
                                 params.target_embedding.col(prev_target),
                                 h_prev, bias)
                   .hidden;
  out.probabilities = softmax(params.output * out.hidden);
  return out;
}

DecoderStep decoder_step(const GruEncDecParams& params, TokenId prev_target,
                         const Vector& h_prev, const Vector& context) {
  return decoder_step(params, prev_target, h_prev, prepare_context(params, context));
}

Matrix decoder_step_batch(const GruEncDecParams& params,
                          std::span<const TokenId> prev_targets, Matrix& hidden,
                          const DecoderContext& context) {
  const auto batch = static_cast<Eigen::Index>(prev_targets.size());
  if (hidden.cols() != batch ||
      static_cast<std::size_t>(hidden.rows()) != params.dims.hidden)
    throw std::invalid_argument("decoder_step_batch: dimension mismatch");
  Matrix x(static_cast<Eigen::Index>(params.dims.embedding), batch);
  for (Eigen::Index b = 0; b < batch; ++b) {
    check_id(prev_targets[static_cast<std::size_t>(b)], params.dims.target_vocab,
             "target");
    x.col(b) = params.target_embedding.col(prev_targets[static_cast<std::size_t>(b)]);
  }
  const auto& w = params.decoder;
  Matrix zpre = w.update_input * x + w.update_recurrent * hidden;
  zpre.colwise() += context.update;
  Matrix rpre = w.reset_input * x + w.reset_recurrent * hidden;
  rpre.colwise() += context.reset;
  Matrix z = sigmoid_matrix(zpre);
  Matrix r = sigmoid_matrix(rpre);
  Matrix cpre = w.input * x + r.cwiseProduct(w.recurrent * hidden);
  cpre.colwise() += context.candidate;
  Matrix cand = cpre.array().tanh().matrix();
  hidden = z.cwiseProduct(hidden) + (1.0 - z.array()).matrix().cwiseProduct(cand);

  Matrix logits = params.output * hidden;
  for (Eigen::Index b = 0; b < batch; ++b) {
    double m = logits.col(b).maxCoeff();
    double lse = m + std::log((logits.col(b).array() - m).exp().sum());
    logits.col(b).array() -= lse;
  }
  return logits;
}

double sequence_logprob(const GruEncDecParams& params,
                        std::span<const TokenId> source,
                        std::span<const TokenId> target, bool terminated) {
  for (TokenId id : target) check_id(id, params.dims.target_vocab, "target");
  auto ctx = prepare_context(params, encode(params, source));
  Vector h = ctx.initial_hidden;
  TokenId prev = Vocabulary::kBos;
  double total = 0;
  auto score = [&](TokenId next) {
    GateBias bias{&ctx.update, &ctx.reset, &ctx.candidate};
    h = gru_step_detailed(params.decoder, params.target_embedding.col(prev), h, bias)
            .hidden;
    total += log_softmax(params.output * h)(next);
    prev = next;
  };
  for (TokenId id : target) score(id);
  if (terminated && (target.empty() || target.back() != Vocabulary::kEos))
    score(Vocabulary::kEos);
  return total;
}

}  // namespace segnmt
