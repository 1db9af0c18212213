// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "segnmt/checkpoint.hpp"
#include "segnmt/confidence.hpp"
#include "segnmt/decoding.hpp"
#include "segnmt/evaluation.hpp"
#include "segnmt/harness.hpp"
#include "segnmt/segmentation.hpp"
#include "segnmt/training.hpp"

using namespace segnmt;

namespace {

// Tolerances and budgets.
constexpr int kDpMatrices = 1000;
constexpr int kDpMaxWords = 12;
constexpr double kDpBudgetSeconds = 60.0;
constexpr int kGradModels = 20;
constexpr double kGradTolerance = 1e-4;
constexpr int kSoftmaxSteps = 10000;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr int kBeamModels = 100;
constexpr double kBeamTolerance = 1e-6;
constexpr double kMinGap = 5.0;
constexpr double kToyBudgetSeconds = 30 * 60.0;
constexpr double kLoudRate = 0.2;
constexpr double kPlainMinDrop = 0.30;
constexpr std::uint64_t kToySeeds[] = {1, 2, 3};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail
            << std::endl;
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string sci(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::scientific << v;
  return ss.str();
}

void criterion_dp() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-6.0, 0.0);
  int mismatches = 0;
  auto t0 = Clock::now();
  for (int m = 0; m < kDpMatrices; ++m) {
    const int n = 1 + static_cast<int>(rng() % kDpMaxWords);
    const int cap = 1 + static_cast<int>(rng() % n);
    // Every fourth matrix uses coarse values so that ties occur.
    const bool coarse = m % 4 == 0;
    SpanScores s(n);
    for (int i = 1; i <= n; ++i)
      for (int j = i; j <= n && j - i + 1 <= cap; ++j)
        s.set(i, j, coarse ? -static_cast<double>(rng() % 4) / 2.0 : u(rng));
    auto dp = optimal_segmentation(s);
    auto bf = brute_force_segmentation(s);
    if (dp.score != bf.score || dp.spans != bf.spans) ++mismatches;
  }
  const double secs = seconds_since(t0);
  report(1, "DP equals brute force", mismatches == 0 && secs < kDpBudgetSeconds,
         std::to_string(kDpMatrices) + " matrices n<=" + std::to_string(kDpMaxWords) + ", " +
             std::to_string(mismatches) + " mismatches, " + fmt(secs, 3) + " s (budget " +
             fmt(kDpBudgetSeconds, 0) + " s)");
}

void criterion_gradient() {
  std::mt19937_64 rng(77);
  double worst = 0;
  std::string where;
  for (int m = 0; m < kGradModels; ++m) {
    const std::size_t hidden = 2 + rng() % 7;     // <= 8
    const std::size_t emb = 2 + rng() % 4;
    const std::size_t ks = 4 + rng() % 9;         // <= 12
    const std::size_t kt = 4 + rng() % 9;
    auto p = GruEncDecParams::uniform({emb, hidden, ks, kt}, 0.5, 1000 + m);
    SentencePair pair;
    const std::size_t ls = 1 + rng() % 6, lt = 1 + rng() % 6;
    for (std::size_t k = 0; k < ls; ++k) pair.source.push_back(static_cast<TokenId>(3 + rng() % (ks - 3)));
    for (std::size_t k = 0; k < lt; ++k) pair.target.push_back(static_cast<TokenId>(3 + rng() % (kt - 3)));
    auto r = gradient_check(p, pair);
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      where = "model " + std::to_string(m) + " " + r.worst_tensor;
    }
  }
  report(2, "BPTT gradient matches finite differences", worst <= kGradTolerance,
         std::to_string(kGradModels) + " models, max relative error " + sci(worst) + " (" +
             where + "), tolerance " + sci(kGradTolerance));
}

void criterion_softmax() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_sum = 0;
  double min_gate = 1, max_gate = 0;
  bool inside = true;
  for (int step = 0; step < kSoftmaxSteps; ++step) {
    const std::size_t hidden = 2 + rng() % 8;
    const std::size_t kt = 3 + rng() % 20;
    // Scales up to 20 drive gates into saturation.
    const double scale = (step % 10 == 0) ? 20.0 : 1.0 + static_cast<double>(rng() % 4);
    auto p = GruEncDecParams::uniform({3, hidden, 5, kt}, scale, static_cast<std::uint64_t>(step));
    Vector c(static_cast<Eigen::Index>(hidden)), h(static_cast<Eigen::Index>(hidden));
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      c[k] = scale * g(rng);
      h[k] = std::tanh(scale * g(rng));
    }
    const auto prev = static_cast<TokenId>(rng() % kt);
    auto ctx = prepare_context(p, c);
    auto detail = gru_step_detailed(p.decoder, p.target_embedding.col(prev), h,
                                    {&ctx.update, &ctx.reset, &ctx.candidate});
    auto out = decoder_step(p, prev, h, ctx);
    worst_sum = std::max(worst_sum, std::abs(out.probabilities.sum() - 1.0));
    for (const Vector* gate : {&detail.update, &detail.reset}) {
      min_gate = std::min(min_gate, gate->minCoeff());
      max_gate = std::max(max_gate, gate->maxCoeff());
      if (!((gate->array() > 0.0).all() && (gate->array() < 1.0).all())) inside = false;
    }
  }
  report(3, "softmax sums to one, gates inside (0,1)",
         worst_sum <= kSoftmaxTolerance && inside,
         std::to_string(kSoftmaxSteps) + " steps, max |sum-1| " + sci(worst_sum) +
             ", gate range [" + sci(min_gate) + ", " + sci(1.0 - max_gate) +
             " below 1], tolerance " + sci(kSoftmaxTolerance));
}

// Exhaustive argmax over EOS-terminated outputs of at most max_len steps.
Hypothesis exhaustive_best(const GruEncDecParams& p, const Sentence& src,
                           std::size_t max_len) {
  const auto k = static_cast<TokenId>(p.dims.target_vocab);
  Hypothesis best;
  best.log_prob = -std::numeric_limits<double>::infinity();
  std::vector<Sentence> frontier{{}};
  for (std::size_t len = 0; len < max_len; ++len) {
    std::vector<Sentence> next;
    for (const auto& prefix : frontier) {
      const double lp = sequence_logprob(p, src, prefix);
      if (lp > best.log_prob || (lp == best.log_prob && prefix < best.tokens)) {
        best = {prefix, lp, true};
      }
      for (TokenId t = 0; t < k; ++t)
        if (t != Vocabulary::kEos) {
          next.push_back(prefix);
          next.back().push_back(t);
        }
    }
    frontier = std::move(next);
  }
  return best;
}

void criterion_beam() {
  std::mt19937_64 rng(31);
  int wrong_argmax = 0, wrong_greedy = 0;
  double worst_score = 0;
  for (int m = 0; m < kBeamModels; ++m) {
    auto p = GruEncDecParams::uniform({3, 5, 6, 3}, 2.0, 500 + m);
    Sentence src;
    for (std::size_t k = 0, n = 1 + rng() % 4; k < n; ++k)
      src.push_back(static_cast<TokenId>(rng() % 6));
    auto beam = beam_search(p, src, 27, 3);
    auto oracle = exhaustive_best(p, src, 3);
    if (beam.front().tokens != oracle.tokens) ++wrong_argmax;
    for (const auto& h : beam)
      worst_score = std::max(
          worst_score, std::abs(h.log_prob - sequence_logprob(p, src, h.tokens, h.finished)));
    auto narrow = beam_search(p, src, 1, 3);
    auto greedy = greedy_decode(p, src, 3);
    if (narrow.front().tokens != greedy.tokens || narrow.front().finished != greedy.finished)
      ++wrong_greedy;
  }
  report(4, "beam search exactness",
         wrong_argmax == 0 && wrong_greedy == 0 && worst_score <= kBeamTolerance,
         std::to_string(kBeamModels) + " models K_t=3 max_len=3 width 27: " +
             std::to_string(wrong_argmax) + " argmax mismatches, " +
             std::to_string(wrong_greedy) + " width-1/greedy mismatches, max |score diff| " +
             sci(worst_score));
}

struct SeedRun {
  std::uint64_t seed;
  double train_seconds = 0;
  double control_seconds = 0;
  ReportTable control, ablation, length, unk_loss;
};

SeedRun run_toy_seed(std::uint64_t seed) {
  SeedRun r{seed};
  ToyGrammarSpec grammar;
  grammar.seed = seed;
  TrainConfig training;
  training.seed = seed;
  auto t0 = Clock::now();
  auto study = build_toy_study(grammar, training);
  r.train_seconds = seconds_since(t0);

  ExperimentOptions options;
  options.seeds = {seed};
  t0 = Clock::now();
  r.control = run_control_experiment(study.models(), study.corpus.test, options).table("control");
  r.control_seconds = seconds_since(t0);
  r.ablation = run_ablation(study.models(), study.corpus.dev, study.corpus.test, options)
                   .table("ablation");
  auto robust = run_robustness_curves(study.models(), study.corpus.sweep, options);
  r.length = robust.table("length");
  r.unk_loss = robust.table("unk_loss");
  std::cout << "  seed " << seed << ": trained in " << fmt(r.train_seconds, 1)
            << " s, final losses fwd " << fmt(study.forward.loss_trace.back(), 4) << " rev "
            << fmt(study.reverse.loss_trace.back(), 4) << std::endl;
  return r;
}

double cell(const ReportTable& t, const std::string& row, const std::string& col) {
  auto v = t.at(row, col);
  if (!v) throw std::runtime_error("empty cell " + row + "/" + col + " in " + t.title);
  return *v;
}

void criterion_control(const std::vector<SeedRun>& runs) {
  bool pass = true;
  double worst_seconds = 0;
  std::string detail;
  for (const auto& r : runs) {
    const std::string col = "seed=" + std::to_string(r.seed);
    const double none = cell(r.control, "none", col);
    const double rseg = cell(r.control, "random-seg", col);
    const double rconf = cell(r.control, "random-conf", col);
    const double prop = cell(r.control, "proposed", col);
    const bool ok = prop - none >= kMinGap && prop >= rconf && prop >= rseg &&
                    rseg >= none && rconf >= none;
    pass = pass && ok;
    worst_seconds = std::max(worst_seconds, r.train_seconds + r.control_seconds);
    detail += "seed " + std::to_string(r.seed) + " none/rseg/rconf/prop " + fmt(none) + "/" +
              fmt(rseg) + "/" + fmt(rconf) + "/" + fmt(prop) + (ok ? "" : " (violated)") +
              "; ";
  }
  pass = pass && worst_seconds <= kToyBudgetSeconds;
  report(5, "segmentation beats plain decoding, control ordering", pass,
         detail + "gap >= " + fmt(kMinGap, 1) + ", slowest train+control " +
             fmt(worst_seconds, 1) + " s");
}

void criterion_ablation(const std::vector<SeedRun>& runs) {
  bool ordered = true;
  double md = 0, mb = 0, mp = 0;
  std::string detail;
  for (const auto& r : runs) {
    const double d = cell(r.ablation, "all/direct", "test");
    const double b = cell(r.ablation, "all/bidir", "test");
    const double p = cell(r.ablation, "all/bidir-pen", "test");
    const bool ok = p >= b && b >= d;
    ordered = ordered && ok;
    md += d / runs.size();
    mb += b / runs.size();
    mp += p / runs.size();
    detail += "seed " + std::to_string(r.seed) + " direct/bidir/pen " + fmt(d) + "/" + fmt(b) +
              "/" + fmt(p) + (ok ? "" : " (violated)") + "; ";
  }
  const bool strict = mp > mb && mp > md;
  report(6, "ablation ordering bidir-pen >= bidir >= direct", ordered && strict,
         detail + "mean " + fmt(md) + "/" + fmt(mb) + "/" + fmt(mp));
}

void criterion_robustness(const std::vector<SeedRun>& runs) {
  const std::string col = "rate=" + [] {
    std::ostringstream ss;
    ss << kLoudRate;
    return ss.str();
  }();
  double plain = 0, seg = 0;
  for (const auto& r : runs) {
    plain += cell(r.unk_loss, "plain", col) / runs.size();
    seg += cell(r.unk_loss, "segmented", col) / runs.size();
  }
  report(7, "segmented loses less BLEU under injected unknowns", seg < plain,
         "seed-averaged BLEU loss at " + col + ": segmented " + fmt(seg) + ", plain " +
             fmt(plain));
}

void criterion_length(const std::vector<SeedRun>& runs) {
  const auto& cols = runs.front().length.columns;
  std::vector<std::string> usable;
  for (const auto& c : cols) {
    bool all = true;
    for (const auto& r : runs) all = all && r.length.at("plain", c).has_value();
    if (all) usable.push_back(c);
  }
  if (usable.size() < 2) {
    report(8, "length flatness", false, "fewer than two populated length buckets");
    return;
  }
  auto avg = [&](const std::string& row, const std::string& c) {
    double s = 0;
    for (const auto& r : runs) s += cell(r.length, row, c) / runs.size();
    return s;
  };
  const auto &lo = usable.front(), &hi = usable.back();
  const double p0 = avg("plain", lo), p1 = avg("plain", hi);
  const double s0 = avg("segmented", lo), s1 = avg("segmented", hi);
  const double pdrop = (p0 - p1) / p0, sdrop = (s0 - s1) / s0;
  report(8, "length flatness", pdrop > kPlainMinDrop && sdrop < pdrop / 2,
         "plain " + lo + " " + fmt(p0) + " -> " + hi + " " + fmt(p1) + " (drop " +
             fmt(100 * pdrop, 1) + "%), segmented " + fmt(s0) + " -> " + fmt(s1) + " (drop " +
             fmt(100 * sdrop, 1) + "%)");
}

std::string checkpoint_bytes(const GruEncDecParams& p) {
  std::ostringstream out;
  write_checkpoint(out, p);
  return out.str();
}

void criterion_determinism() {
  ToyGrammarSpec grammar;
  grammar.train_pairs = 300;
  grammar.test_pairs = 8;
  grammar.dev_pairs = 4;
  grammar.sweep_pairs = 4;
  TrainConfig training;
  training.epochs = 2;
  training.hidden = 16;
  training.embedding = 8;
  ExperimentOptions options;
  options.width = 3;
  options.seeds = {1};

  auto a = build_toy_study(grammar, training);
  auto b = build_toy_study(grammar, training);
  const bool ckpt = checkpoint_bytes(a.forward.params) == checkpoint_bytes(b.forward.params) &&
                    checkpoint_bytes(a.reverse.params) == checkpoint_bytes(b.reverse.params);

  auto analyzed_a = analyze_corpus(a.models(), a.corpus.test, options);
  auto analyzed_b = analyze_corpus(b.models(), b.corpus.test, options);
  bool translations =
      plain_translations(a.models(), analyzed_a, options) ==
      plain_translations(b.models(), analyzed_b, options);
  auto sa = segmented_translations(analyzed_a, options.mode);
  auto sb = segmented_translations(analyzed_b, options.mode);
  for (std::size_t k = 0; k < sa.size(); ++k)
    translations = translations && sa[k].output == sb[k].output &&
                   sa[k].segmentation == sb[k].segmentation;

  const bool reports =
      run_control_experiment(a.models(), a.corpus.test, options).csv() ==
          run_control_experiment(b.models(), b.corpus.test, options).csv() &&
      run_ablation(a.models(), a.corpus.dev, a.corpus.test, options).text() ==
          run_ablation(b.models(), b.corpus.dev, b.corpus.test, options).text();

  bool workers = true;
  for (std::size_t k = 0; k < a.corpus.test.size(); ++k) {
    auto src = a.source_vocab.encode(a.corpus.test.source[k]);
    MatrixOptions m;
    m.width = options.width;
    auto one = build_confidence_matrix(a.forward.params, &a.reverse.params, src, m);
    m.workers = 8;
    workers = workers && one == build_confidence_matrix(a.forward.params, &a.reverse.params, src, m);
  }
  auto yn = [](bool v) { return std::string(v ? "identical" : "DIFFER"); };
  report(9, "determinism", ckpt && translations && reports && workers,
         "checkpoints " + yn(ckpt) + ", translations " + yn(translations) + ", reports " +
             yn(reports) + ", matrices workers 1 vs 8 " + yn(workers));
}

void criterion_bleu() {
  const auto same = bleu({tokenize("the cat sat on the mat")}, {tokenize("the cat sat on the mat")});
  const auto clipped =
      bleu({tokenize("the the the the the the the")}, {tokenize("the cat is on the mat")}, 1);
  report(10, "BLEU oracle", same.bleu == 1.0 && clipped.bleu == 2.0 / 7.0,
         "identical " + fmt(same.bleu, 6) + ", clipped unigram " + fmt(clipped.bleu, 6) +
             " (expected " + fmt(2.0 / 7.0, 6) + ")");
}

}  // namespace

int main() {
  try {
    criterion_dp();
    criterion_gradient();
    criterion_softmax();
    criterion_beam();

    std::cout << "training toy models for criteria 5-8" << std::endl;
    std::vector<SeedRun> runs;
    for (auto seed : kToySeeds) runs.push_back(run_toy_seed(seed));
    criterion_control(runs);
    criterion_ablation(runs);
    criterion_robustness(runs);
    criterion_length(runs);

    criterion_determinism();
    criterion_bleu();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 100;
  }
  std::cout << failures << " criteria failed" << std::endl;
  return failures;
}
