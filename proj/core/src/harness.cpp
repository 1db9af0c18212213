#include "segnmt/harness.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "segnmt/decoding.hpp"
#include "segnmt/parallel.hpp"

namespace segnmt {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  // splitmix64 over the combined inputs
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string join_numbers(const std::vector<double>& v) {
  std::ostringstream ss;
  for (std::size_t k = 0; k < v.size(); ++k) ss << (k ? "," : "") << v[k];
  return ss.str();
}

std::string join_numbers(const std::vector<std::uint64_t>& v) {
  std::ostringstream ss;
  for (std::size_t k = 0; k < v.size(); ++k) ss << (k ? "," : "") << v[k];
  return ss.str();
}

std::vector<Tokens> decode_all(const Vocabulary& vocab, const std::vector<Sentence>& s) {
  std::vector<Tokens> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(vocab.decode_tokens(x));
  return out;
}

double bleu100(const std::vector<Tokens>& cand, const std::vector<Tokens>& refs) {
  return 100.0 * bleu(cand, refs).bleu;
}

double bleu100_subset(const std::vector<Tokens>& cand, const std::vector<Tokens>& refs,
                      const std::vector<std::size_t>& subset, bool* empty) {
  *empty = subset.empty();
  if (subset.empty()) return 0;
  std::vector<Tokens> c, r;
  for (std::size_t k : subset) {
    c.push_back(cand[k]);
    r.push_back(refs[k]);
  }
  return bleu100(c, r);
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string rate_label(double rate) {
  std::ostringstream ss;
  ss << "rate=" << rate;
  return ss.str();
}

KeyValueConfig base_config(const ExperimentOptions& options, const std::string& experiment) {
  KeyValueConfig c = options.to_config();
  c.set("experiment", experiment);
  return c;
}

}  // namespace

void ModelPair::validate() const {
  if (!forward || !reverse) throw std::invalid_argument("missing translation model");
  if (!source_vocab || !target_vocab) throw std::invalid_argument("missing vocabulary");
  if (forward->dims.source_vocab != source_vocab->size() ||
      forward->dims.target_vocab != target_vocab->size())
    throw std::invalid_argument("forward model does not match the vocabularies");
  if (reverse->dims.source_vocab != target_vocab->size() ||
      reverse->dims.target_vocab != source_vocab->size())
    throw std::invalid_argument("reverse model does not match the vocabularies");
}

ExperimentOptions ExperimentOptions::from_config(const KeyValueConfig& c) {
  ExperimentOptions o;
  o.width = static_cast<std::size_t>(c.get_uint("width", o.width));
  o.max_segment_length =
      static_cast<std::size_t>(c.get_uint("max_segment_length", o.max_segment_length));
  o.workers = static_cast<std::size_t>(c.get_uint("workers", o.workers));
  o.mode = parse_score_mode(c.get("mode", to_string(o.mode)));
  o.seeds = c.get_uints("seeds", o.seeds);
  o.unk_rates = c.get_doubles("unk_rates", o.unk_rates);
  o.length_edges = c.get_doubles("length_edges", o.length_edges);
  o.unknown_edges = c.get_doubles("unknown_edges", o.unknown_edges);
  if (o.width == 0) throw std::invalid_argument("width must be >= 1");
  if (o.max_segment_length == 0) throw std::invalid_argument("max_segment_length must be >= 1");
  if (o.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  for (double r : o.unk_rates)
    if (!(r >= 0 && r <= 1)) throw std::invalid_argument("unk rates must lie in [0, 1]");
  return o;
}

KeyValueConfig ExperimentOptions::to_config() const {
  KeyValueConfig c;
  c.set("width", std::to_string(width));
  c.set("max_segment_length", std::to_string(max_segment_length));
  c.set("workers", std::to_string(workers));
  c.set("mode", to_string(mode));
  c.set("seeds", join_numbers(seeds));
  c.set("unk_rates", join_numbers(unk_rates));
  c.set("length_edges", join_numbers(length_edges));
  c.set("unknown_edges", join_numbers(unknown_edges));
  return c;
}

AnalyzedCorpus analyze_corpus(const ModelPair& models, const ParallelCorpus& corpus,
                              const ExperimentOptions& options) {
  models.validate();
  AnalyzedCorpus out;
  out.sources = corpus.source;
  out.references = corpus.target;
  for (const auto& s : corpus.source) {
    if (s.empty()) throw std::invalid_argument("corpus contains an empty source sentence");
    out.encoded.push_back(models.source_vocab->encode(s));
  }
  out.tables.resize(out.encoded.size());
  // Parallel over sentences; each table is built single-threaded.
  parallel_for(out.encoded.size(), options.workers, [&](std::size_t k) {
    out.tables[k] = build_candidate_table(*models.forward, models.reverse, out.encoded[k],
                                          options.width, options.max_segment_length, 1);
  });
  return out;
}

std::vector<Sentence> plain_translations(const ModelPair& models,
                                         const AnalyzedCorpus& corpus,
                                         const ExperimentOptions& options) {
  std::vector<Sentence> out(corpus.encoded.size());
  parallel_for(out.size(), options.workers, [&](std::size_t k) {
    const auto& table = corpus.tables[k];
    const int n = static_cast<int>(corpus.encoded[k].size());
    if (table.has(1, n) && table.at(1, n).size() > 0)
      out[k] = table.at(1, n).front().candidate;
    else
      out[k] = translate_plain(*models.forward, corpus.encoded[k], options.width);
  });
  return out;
}

std::vector<SegmentedTranslation> segmented_translations(const AnalyzedCorpus& corpus,
                                                         ScoreMode mode) {
  std::vector<SegmentedTranslation> out;
  for (std::size_t k = 0; k < corpus.encoded.size(); ++k) {
    auto matrix = to_confidence_matrix(corpus.tables[k], mode);
    SegmentedTranslation t;
    t.segmentation = optimal_segmentation(matrix.scores());
    for (const Span& s : t.segmentation.spans)
      t.segment_outputs.push_back(matrix.entry(s.begin, s.end)->candidate);
    t.output = concatenate(t.segment_outputs);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Sentence> translate_fixed_segmentations(
    const ModelPair& models, const AnalyzedCorpus& corpus,
    const std::vector<Segmentation>& segmentations, const ExperimentOptions& options) {
  if (segmentations.size() != corpus.encoded.size())
    throw std::invalid_argument("one segmentation per sentence required");
  std::vector<Sentence> out(segmentations.size());
  parallel_for(out.size(), options.workers, [&](std::size_t k) {
    const auto& source = corpus.encoded[k];
    const auto& table = corpus.tables[k];
    std::vector<Sentence> parts;
    for (const Span& s : segmentations[k].spans) {
      if (table.has(s.begin, s.end) && !table.at(s.begin, s.end).empty()) {
        parts.push_back(table.at(s.begin, s.end).front().candidate);
      } else {
        Sentence phrase(source.begin() + (s.begin - 1), source.begin() + s.end);
        parts.push_back(translate_plain(*models.forward, phrase, options.width));
      }
    }
    out[k] = concatenate(parts);
  });
  return out;
}

ParallelCorpus inject_unknowns(const ParallelCorpus& corpus, double rate,
                               std::uint64_t seed) {
  if (!(rate >= 0 && rate <= 1)) throw std::invalid_argument("rate must lie in [0, 1]");
  ParallelCorpus out = corpus;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution replace(rate);
  for (auto& sentence : out.source)
    for (auto& token : sentence)
      if (replace(rng)) token = Vocabulary::kUnkToken;
  return out;
}

const ReportTable& ExperimentReport::table(const std::string& title) const {
  for (const auto& t : tables)
    if (t.title == title) return t;
  throw std::out_of_range("report " + name + " has no table '" + title + "'");
}

std::string ExperimentReport::text() const {
  std::ostringstream out;
  out << "experiment: " << name << "\n\n";
  for (const auto& t : tables) {
    t.write_text(out);
    out << '\n';
  }
  if (!reference_values.empty()) {
    out << "published reference values (WMT'14 En->Fr scale, not expected at toy scale)\n";
    for (const auto& [k, v] : reference_values) out << "  " << k << ": " << v << '\n';
    out << '\n';
  }
  for (const auto& n : notes) out << "note: " << n << '\n';
  out << "\nconfig:\n" << config.str();
  return out.str();
}

std::string ExperimentReport::csv() const {
  std::ostringstream out;
  for (const auto& t : tables) {
    out << "# " << t.title << '\n';
    t.write_csv(out);
  }
  return out.str();
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
  };
  put(dir / "report.txt", text());
  put(dir / "report.csv", csv());
  put(dir / "config.txt", config.str());
  for (const auto& t : tables) {
    std::ostringstream ss;
    t.write_csv(ss);
    put(dir / (name + "_" + t.title + ".csv"), ss.str());
  }
}

ExperimentReport run_control_experiment(const ModelPair& models, const ParallelCorpus& test,
                                        const ExperimentOptions& options) {
  models.validate();
  if (test.empty()) throw std::invalid_argument("empty test corpus");
  const auto analyzed = analyze_corpus(models, test, options);
  const auto& refs = analyzed.references;
  const auto& tv = *models.target_vocab;

  const auto plain = decode_all(tv, plain_translations(models, analyzed, options));
  const auto proposed_full = segmented_translations(analyzed, options.mode);
  std::vector<Sentence> proposed_ids;
  std::vector<Segmentation> proposed_segs;
  for (const auto& t : proposed_full) {
    proposed_ids.push_back(t.output);
    proposed_segs.push_back(t.segmentation);
  }
  const auto proposed = decode_all(tv, proposed_ids);
  const LengthMoments moments = segment_length_moments(proposed_segs);

  ExperimentReport report;
  report.name = "control";
  report.config = base_config(options, "control");
  report.config.set("test_sentences", std::to_string(test.size()));
  {
    std::ostringstream ss;
    ss.precision(17);
    ss << moments.mean;
    report.config.set("random_segment_mean", ss.str());
    ss.str("");
    ss << moments.variance;
    report.config.set("random_segment_variance", ss.str());
  }

  ReportTable table;
  table.title = "control";
  for (auto s : options.seeds) table.columns.push_back("seed=" + std::to_string(s));
  table.columns.push_back("mean");

  std::vector<double> none_row, rseg_row, rconf_row, prop_row;
  const double none_bleu = bleu100(plain, refs);
  const double prop_bleu = bleu100(proposed, refs);
  for (auto seed : options.seeds) {
    std::vector<Segmentation> rseg, rconf;
    for (std::size_t k = 0; k < analyzed.encoded.size(); ++k) {
      const int n = static_cast<int>(analyzed.encoded[k].size());
      rseg.push_back(random_segmentation(n, std::max(1.0, moments.mean), moments.variance,
                                         mix_seed(seed, k, 1)));
      rconf.push_back(random_confidence_segmentation(n, mix_seed(seed, k, 2)));
    }
    none_row.push_back(none_bleu);
    rseg_row.push_back(bleu100(
        decode_all(tv, translate_fixed_segmentations(models, analyzed, rseg, options)), refs));
    rconf_row.push_back(bleu100(
        decode_all(tv, translate_fixed_segmentations(models, analyzed, rconf, options)), refs));
    prop_row.push_back(prop_bleu);
  }
  auto with_mean = [](std::vector<double> row) {
    std::vector<std::optional<double>> out(row.begin(), row.end());
    out.push_back(mean(row));
    return out;
  };
  table.add_row("none", with_mean(none_row));
  table.add_row("random-seg", with_mean(rseg_row));
  table.add_row("random-conf", with_mean(rconf_row));
  table.add_row("proposed", with_mean(prop_row));
  report.tables.push_back(std::move(table));

  report.reference_values = {{"none", "13.15"},
                             {"random-seg", "16.60"},
                             {"random-conf", "16.76"},
                             {"proposed", "20.86"}};
  report.notes.push_back("BLEU x 100; proposed uses score mode " + to_string(options.mode));
  return report;
}

ExperimentReport run_ablation(const ModelPair& models, const ParallelCorpus& dev,
                              const ParallelCorpus& test, const ExperimentOptions& options) {
  models.validate();
  if (dev.empty() || test.empty()) throw std::invalid_argument("empty dev or test corpus");

  const std::vector<std::string> systems = {"RNNenc", "direct", "bidir", "bidir-pen"};
  const std::vector<ScoreMode> modes = {ScoreMode::Direct, ScoreMode::Bidirectional,
                                        ScoreMode::BidirectionalPenalized};
  // result[split][system] -> translations
  std::vector<std::vector<std::vector<Tokens>>> outputs;
  std::vector<std::vector<std::size_t>> no_unk_subsets;
  std::vector<const AnalyzedCorpus*> corpora;
  std::vector<AnalyzedCorpus> storage;
  storage.push_back(analyze_corpus(models, dev, options));
  storage.push_back(analyze_corpus(models, test, options));
  for (const auto& a : storage) {
    std::vector<std::vector<Tokens>> per_system;
    per_system.push_back(decode_all(*models.target_vocab, plain_translations(models, a, options)));
    for (auto mode : modes) {
      std::vector<Sentence> ids;
      for (auto& t : segmented_translations(a, mode)) ids.push_back(std::move(t.output));
      per_system.push_back(decode_all(*models.target_vocab, ids));
    }
    outputs.push_back(std::move(per_system));
    std::vector<std::size_t> subset;
    auto keys = unknown_keys(a.sources, a.references, *models.source_vocab, *models.target_vocab);
    for (std::size_t k = 0; k < keys.size(); ++k)
      if (keys[k] == 0) subset.push_back(k);
    no_unk_subsets.push_back(std::move(subset));
  }

  ReportTable table;
  table.title = "ablation";
  table.columns = {"dev", "test"};
  for (const std::string block : {"all", "no-unk"}) {
    for (std::size_t s = 0; s < systems.size(); ++s) {
      std::vector<std::optional<double>> row;
      for (std::size_t split = 0; split < 2; ++split) {
        const auto& refs = storage[split].references;
        if (block == "all") {
          row.push_back(bleu100(outputs[split][s], refs));
        } else {
          bool empty = false;
          double v = bleu100_subset(outputs[split][s], refs, no_unk_subsets[split], &empty);
          row.push_back(empty ? std::nullopt : std::optional<double>(v));
        }
      }
      table.add_row(block + "/" + systems[s], std::move(row));
    }
  }

  ExperimentReport report;
  report.name = "ablation";
  report.config = base_config(options, "ablation");
  report.config.set("dev_sentences", std::to_string(dev.size()));
  report.config.set("test_sentences", std::to_string(test.size()));
  report.tables.push_back(std::move(table));
  report.reference_values = {
      {"all/RNNenc (dev/test)", "13.15/13.92"},   {"all/direct", "12.49/13.57"},
      {"all/bidir", "18.82/20.10"},               {"all/bidir-pen", "19.39/20.86"},
      {"no-unk/RNNenc", "21.01/23.45"},           {"no-unk/direct", "20.94/22.62"},
      {"no-unk/bidir", "23.05/24.63"},            {"no-unk/bidir-pen", "23.93/26.46"}};
  report.notes.push_back("BLEU x 100; no-unk keeps sentences with no unknown words in "
                         "source or reference");
  return report;
}

ExperimentReport run_robustness_curves(const ModelPair& models, const ParallelCorpus& test,
                                       const ExperimentOptions& options) {
  models.validate();
  if (test.empty()) throw std::invalid_argument("empty test corpus");
  const auto& tv = *models.target_vocab;

  struct Outputs {
    std::vector<Tokens> plain;
    std::vector<Tokens> segmented;
  };
  auto run = [&](const AnalyzedCorpus& a) {
    Outputs o;
    o.plain = decode_all(tv, plain_translations(models, a, options));
    std::vector<Sentence> ids;
    for (auto& t : segmented_translations(a, options.mode)) ids.push_back(std::move(t.output));
    o.segmented = decode_all(tv, ids);
    return o;
  };

  ExperimentReport report;
  report.name = "robustness";
  report.config = base_config(options, "robustness");
  report.config.set("test_sentences", std::to_string(test.size()));

  const auto clean = analyze_corpus(models, test, options);
  const Outputs clean_out = run(clean);

  // BLEU by source length.
  {
    auto bucketed = evaluate_bucketed(
        {{"plain", clean_out.plain}, {"segmented", clean_out.segmented}}, clean.references,
        length_keys(clean.sources), options.length_edges);
    ReportTable t = to_table(bucketed, "length");
    std::vector<std::optional<double>> sizes;
    for (auto n : bucketed.bucket_sizes) sizes.push_back(static_cast<double>(n));
    t.add_row("sentences", std::move(sizes));
    report.tables.push_back(std::move(t));
  }

  // Injected unknown words. Each rate > 0 is averaged over the seeds.
  ReportTable bleu_t, loss_t, rel_t;
  bleu_t.title = "unk_bleu";
  loss_t.title = "unk_loss";
  rel_t.title = "unk_relative_loss";
  for (double r : options.unk_rates) {
    bleu_t.columns.push_back(rate_label(r));
    loss_t.columns.push_back(rate_label(r));
    rel_t.columns.push_back(rate_label(r));
  }
  const double plain0 = bleu100(clean_out.plain, clean.references);
  const double seg0 = bleu100(clean_out.segmented, clean.references);

  std::vector<Tokens> pooled_src, pooled_ref, pooled_plain, pooled_seg;
  auto pool = [&](const AnalyzedCorpus& a, const Outputs& o) {
    pooled_src.insert(pooled_src.end(), a.sources.begin(), a.sources.end());
    pooled_ref.insert(pooled_ref.end(), a.references.begin(), a.references.end());
    pooled_plain.insert(pooled_plain.end(), o.plain.begin(), o.plain.end());
    pooled_seg.insert(pooled_seg.end(), o.segmented.begin(), o.segmented.end());
  };
  pool(clean, clean_out);

  std::vector<std::optional<double>> pb, sb, pl, sl, pr, sr;
  for (std::size_t ri = 0; ri < options.unk_rates.size(); ++ri) {
    const double rate = options.unk_rates[ri];
    double p = plain0, s = seg0;
    if (rate > 0) {
      std::vector<double> ps, ss;
      for (auto seed : options.seeds) {
        auto corrupted = inject_unknowns(test, rate, mix_seed(seed, ri, 3));
        auto a = analyze_corpus(models, corrupted, options);
        auto o = run(a);
        ps.push_back(bleu100(o.plain, a.references));
        ss.push_back(bleu100(o.segmented, a.references));
        pool(a, o);
      }
      p = mean(ps);
      s = mean(ss);
    }
    pb.push_back(p);
    sb.push_back(s);
    pl.push_back(plain0 - p);
    sl.push_back(seg0 - s);
    pr.push_back(plain0 > 0 ? std::optional<double>((plain0 - p) / plain0) : std::nullopt);
    sr.push_back(seg0 > 0 ? std::optional<double>((seg0 - s) / seg0) : std::nullopt);
  }
  bleu_t.add_row("plain", pb);
  bleu_t.add_row("segmented", sb);
  loss_t.add_row("plain", pl);
  loss_t.add_row("segmented", sl);
  rel_t.add_row("plain", pr);
  rel_t.add_row("segmented", sr);
  report.tables.push_back(std::move(bleu_t));
  report.tables.push_back(std::move(loss_t));
  report.tables.push_back(std::move(rel_t));

  // Pooled over all rates, bucketed by max(unknowns in source, reference).
  {
    auto keys = unknown_keys(pooled_src, pooled_ref, *models.source_vocab, tv);
    auto bucketed = evaluate_bucketed({{"plain", pooled_plain}, {"segmented", pooled_seg}},
                                      pooled_ref, keys, options.unknown_edges);
    ReportTable t = to_table(bucketed, "unknown_count");
    ReportTable loss;
    loss.title = "unknown_count_loss";
    loss.columns = t.columns;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::vector<std::optional<double>> row;
      auto base = t.values[r].empty() ? std::nullopt : t.values[r][0];
      for (const auto& v : t.values[r])
        row.push_back(base && v ? std::optional<double>(*base - *v) : std::nullopt);
      loss.add_row(t.rows[r], std::move(row));
    }
    std::vector<std::optional<double>> sizes;
    for (auto n : bucketed.bucket_sizes) sizes.push_back(static_cast<double>(n));
    t.add_row("sentences", std::move(sizes));
    report.tables.push_back(std::move(t));
    report.tables.push_back(std::move(loss));
  }
  report.notes.push_back("BLEU x 100; loss = BLEU at rate 0 minus BLEU at the given rate");
  report.notes.push_back("segmented uses score mode " + to_string(options.mode));
  return report;
}

TrainResult train_direction(const ParallelCorpus& corpus, const Vocabulary& source_vocab,
                            const Vocabulary& target_vocab, bool reverse,
                            const TrainConfig& config, const EpochCallback& on_epoch) {
  const Vocabulary& in = reverse ? target_vocab : source_vocab;
  const Vocabulary& out = reverse ? source_vocab : target_vocab;
  ParallelCorpus oriented = corpus;
  if (reverse) std::swap(oriented.source, oriented.target);
  auto pairs = encode_pairs(oriented, in, out);
  return train(initial_params(config, in.size(), out.size()), pairs, config, on_epoch);
}

ToyStudy build_toy_study(const ToyGrammarSpec& grammar, const TrainConfig& training,
                         const TrainingLog& log) {
  ToyStudy study;
  study.corpus = generate_toy_corpus(grammar);
  study.source_vocab = Vocabulary::build(study.corpus.train.source);
  study.target_vocab = Vocabulary::build(study.corpus.train.target);
  auto cb = [&](const std::string& dir) -> EpochCallback {
    if (!log) return {};
    return [&log, dir](std::size_t epoch, double loss) { log(dir, epoch, loss); };
  };
  study.forward = train_direction(study.corpus.train, study.source_vocab, study.target_vocab,
                                  false, training, cb("fwd"));
  study.reverse = train_direction(study.corpus.train, study.source_vocab, study.target_vocab,
                                  true, training, cb("rev"));
  return study;
}

std::filesystem::path source_vocab_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".src.vocab");
}

std::filesystem::path target_vocab_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".tgt.vocab");
}

}  // namespace segnmt
