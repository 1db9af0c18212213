#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "segnmt/confidence.hpp"
#include "segnmt/config.hpp"
#include "segnmt/corpus.hpp"
#include "segnmt/evaluation.hpp"
#include "segnmt/pipeline.hpp"
#include "segnmt/rnnenc.hpp"
#include "segnmt/segmentation.hpp"
#include "segnmt/toy_corpus.hpp"
#include "segnmt/training.hpp"

namespace segnmt {

/// Forward (source -> target) and reverse (target -> source) models with
/// their vocabularies. Non-owning.
struct ModelPair {
  const GruEncDecParams* forward = nullptr;
  const GruEncDecParams* reverse = nullptr;
  const Vocabulary* source_vocab = nullptr;
  const Vocabulary* target_vocab = nullptr;

  /// Throws std::invalid_argument if any member is missing or the model
  /// shapes disagree with the vocabularies.
  void validate() const;
};

struct ExperimentOptions {
  std::size_t width = kDefaultBeamWidth;
  std::size_t max_segment_length = 8;
  std::size_t workers = 1;
  ScoreMode mode = ScoreMode::BidirectionalPenalized;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<double> unk_rates = {0.0, 0.05, 0.10, 0.20};
  std::vector<double> length_edges = default_length_edges();
  std::vector<double> unknown_edges = default_unknown_edges();

  static ExperimentOptions from_config(const KeyValueConfig& config);
  KeyValueConfig to_config() const;
};

/// A corpus with every sentence's span candidates scored once, so that all
/// score modes and baselines share one pass of beam searches.
struct AnalyzedCorpus {
  std::vector<Tokens> sources;
  std::vector<Tokens> references;
  std::vector<Sentence> encoded;
  std::vector<CandidateTable> tables;
};

AnalyzedCorpus analyze_corpus(const ModelPair& models, const ParallelCorpus& corpus,
                              const ExperimentOptions& options);

/// Plain translation of every sentence (reusing scored spans when the whole
/// sentence fits under the span cap).
std::vector<Sentence> plain_translations(const ModelPair& models,
                                         const AnalyzedCorpus& corpus,
                                         const ExperimentOptions& options);

/// Optimal segmentation and its cached per-span translations, per sentence.
std::vector<SegmentedTranslation> segmented_translations(const AnalyzedCorpus& corpus,
                                                         ScoreMode mode);

/// Translates fixed segmentations span by span with the plain decoder.
std::vector<Sentence> translate_fixed_segmentations(
    const ModelPair& models, const AnalyzedCorpus& corpus,
    const std::vector<Segmentation>& segmentations, const ExperimentOptions& options);

/// Replaces each source token by the UNK token with probability `rate`.
/// References are left as they are.
ParallelCorpus inject_unknowns(const ParallelCorpus& corpus, double rate,
                               std::uint64_t seed);

/// Tables plus the configuration that produced them.
struct ExperimentReport {
  std::string name;
  KeyValueConfig config;
  std::vector<ReportTable> tables;
  /// Labelled published values for orientation; never used as expectations.
  std::vector<std::pair<std::string, std::string>> reference_values;
  std::vector<std::string> notes;

  const ReportTable& table(const std::string& title) const;
  std::string text() const;
  std::string csv() const;
  /// Writes report.txt, report.csv (all tables, separated by a title line),
  /// one CSV per table, and config.txt into `dir`.
  void write(const std::filesystem::path& dir) const;
};

/// Four systems on long sentences: no segmentation, random segmentation with
/// matched segment-length moments, random confidence scores, and the
/// proposed segmentation. Table "control" has one column per seed and a
/// "mean" column; rows in that fixed order.
ExperimentReport run_control_experiment(const ModelPair& models,
                                        const ParallelCorpus& test,
                                        const ExperimentOptions& options);

/// Plain decoding and the three score modes, on dev and test, for all
/// sentences and for the subset without unknown words. Table "ablation".
ExperimentReport run_ablation(const ModelPair& models, const ParallelCorpus& dev,
                              const ParallelCorpus& test,
                              const ExperimentOptions& options);

/// BLEU per source-length bucket for the plain and segmented systems, and
/// BLEU loss under injected unknown words (per rate, and bucketed by the
/// maximum unknown count over source and reference).
ExperimentReport run_robustness_curves(const ModelPair& models,
                                       const ParallelCorpus& test,
                                       const ExperimentOptions& options);

/// Everything needed for an end-to-end toy study.
struct ToyStudy {
  ToyCorpus corpus;
  Vocabulary source_vocab;
  Vocabulary target_vocab;
  TrainResult forward;
  TrainResult reverse;

  ModelPair models() const {
    return {&forward.params, &reverse.params, &source_vocab, &target_vocab};
  }
};

using TrainingLog = std::function<void(const std::string& direction, std::size_t epoch,
                                       double loss)>;

/// Generates the toy corpus and trains both directions on its train split.
ToyStudy build_toy_study(const ToyGrammarSpec& grammar, const TrainConfig& training,
                         const TrainingLog& log = {});

/// Trains one direction; `reverse` swaps the roles of source and target.
TrainResult train_direction(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                            const Vocabulary& target_vocab, bool reverse,
                            const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Vocabulary files stored next to a checkpoint: `<ckpt>.src.vocab` and
/// `<ckpt>.tgt.vocab`, from the model's own input/output perspective.
std::filesystem::path source_vocab_path(const std::filesystem::path& checkpoint);
std::filesystem::path target_vocab_path(const std::filesystem::path& checkpoint);

}  // namespace segnmt
