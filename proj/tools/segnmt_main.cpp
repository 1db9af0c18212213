#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "segnmt/checkpoint.hpp"
#include "segnmt/confidence.hpp"
#include "segnmt/config.hpp"
#include "segnmt/corpus.hpp"
#include "segnmt/evaluation.hpp"
#include "segnmt/harness.hpp"
#include "segnmt/pipeline.hpp"
#include "segnmt/segmentation.hpp"
#include "segnmt/toy_corpus.hpp"
#include "segnmt/training.hpp"

namespace fs = std::filesystem;
using namespace segnmt;

namespace {

struct LoadedModel {
  GruEncDecParams params;
  Vocabulary input;
  Vocabulary output;
};

LoadedModel load_model(const fs::path& path) {
  LoadedModel m{load_checkpoint(path), Vocabulary::load(source_vocab_path(path)),
                Vocabulary::load(target_vocab_path(path))};
  if (m.params.dims.source_vocab != m.input.size() ||
      m.params.dims.target_vocab != m.output.size())
    throw std::runtime_error("checkpoint " + path.string() +
                             " does not match its vocabulary files");
  return m;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<double> parse_edges(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

KeyValueConfig load_config_or_empty(const std::string& path) {
  return path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
}

int make_corpus(const std::string& spec_path, const fs::path& out_dir, std::uint64_t seed) {
  ToyGrammarSpec spec = ToyGrammarSpec::from_config(load_config_or_empty(spec_path));
  spec.seed = seed;
  ToyCorpus corpus = generate_toy_corpus(spec);
  fs::create_directories(out_dir);
  auto dump = [&](const std::string& name, const ParallelCorpus& c) {
    write_corpus(out_dir / (name + ".src"), c.source);
    write_corpus(out_dir / (name + ".tgt"), c.target);
  };
  dump("train", corpus.train);
  dump("dev", corpus.dev);
  dump("test", corpus.test);
  dump("sweep", corpus.sweep);
  open_out(out_dir / "spec.txt") << spec.to_config().str();
  std::cerr << "wrote " << corpus.train.size() << "/" << corpus.dev.size() << "/"
            << corpus.test.size() << "/" << corpus.sweep.size()
            << " train/dev/test/sweep pairs to " << out_dir << '\n';
  return 0;
}

int train_cmd(const fs::path& src, const fs::path& tgt, const std::string& dir,
              const std::string& config_path, const fs::path& out, std::size_t vocab_cap) {
  if (dir != "fwd" && dir != "rev") throw std::invalid_argument("--dir must be fwd or rev");
  TrainConfig config = TrainConfig::from_config(load_config_or_empty(config_path));
  ParallelCorpus corpus = read_parallel_corpus(src, tgt);
  if (dir == "rev") std::swap(corpus.source, corpus.target);
  Vocabulary in = Vocabulary::build(corpus.source, vocab_cap);
  Vocabulary outv = Vocabulary::build(corpus.target, vocab_cap);

  fs::path loss_path = out.string() + ".loss.csv";
  auto loss_out = open_out(loss_path);
  loss_out.precision(17);
  loss_out << "epoch,mean_nats_per_token\n";
  auto result = train_direction(corpus, in, outv, false, config,
                                [&](std::size_t epoch, double loss) {
                                  loss_out << epoch << ',' << loss << '\n';
                                  std::cerr << dir << " epoch " << epoch << " loss " << loss
                                            << '\n';
                                });
  save_checkpoint(out, result.params);
  in.save(source_vocab_path(out));
  outv.save(target_vocab_path(out));
  std::cerr << "trained on " << result.pairs_used << " pairs (" << result.pairs_dropped
            << " dropped by length)\n";
  return 0;
}

// Returns the reverse model after checking it mirrors the forward one.
std::optional<LoadedModel> load_reverse(const std::string& path, const LoadedModel& fwd) {
  if (path.empty()) return std::nullopt;
  LoadedModel rev = load_model(path);
  if (!(rev.input == fwd.output) || !(rev.output == fwd.input))
    throw std::runtime_error("reverse model vocabularies do not mirror the forward model");
  return rev;
}

int translate_cmd(const fs::path& model_path, const std::string& reverse_path, bool segment,
                  const std::string& mode_name, std::size_t width, std::size_t max_seg,
                  const fs::path& in_path, const fs::path& out_path,
                  const std::string& trace_path) {
  LoadedModel fwd = load_model(model_path);
  auto rev = load_reverse(reverse_path, fwd);
  const ScoreMode mode = parse_score_mode(mode_name);
  if (segment && uses_reverse_model(mode) && !rev)
    throw std::invalid_argument("--mode " + mode_name + " needs --reverse-model");
  if (!segment && !trace_path.empty())
    throw std::invalid_argument("--trace requires --segment");

  auto lines = read_corpus(in_path);
  auto out = open_out(out_path);
  std::optional<std::ofstream> trace;
  if (!trace_path.empty()) trace = open_out(trace_path);

  SegmentOptions opts;
  opts.matrix.mode = mode;
  opts.matrix.width = width;
  opts.matrix.max_segment_length = max_seg;
  for (const auto& tokens : lines) {
    if (tokens.empty()) {
      out << '\n';
      if (trace) *trace << "[]\n";
      continue;
    }
    Sentence src = fwd.input.encode(tokens);
    if (!segment) {
      out << fwd.output.decode(translate_plain(fwd.params, src, width)) << '\n';
      continue;
    }
    auto t = translate_with_segmentation(fwd.params, rev ? &rev->params : nullptr, src, opts);
    out << fwd.output.decode(t.output) << '\n';
    if (trace) *trace << format_segmentation(t.segmentation, tokens) << '\n';
  }
  return 0;
}

int segment_cmd(const fs::path& model_path, const std::string& reverse_path,
                const std::string& mode_name, std::size_t width, std::size_t max_seg,
                const fs::path& in_path, const fs::path& out_path,
                const std::string& matrix_dir) {
  LoadedModel fwd = load_model(model_path);
  auto rev = load_reverse(reverse_path, fwd);
  MatrixOptions opts;
  opts.mode = parse_score_mode(mode_name);
  opts.width = width;
  opts.max_segment_length = max_seg;
  if (uses_reverse_model(opts.mode) && !rev)
    throw std::invalid_argument("--mode " + mode_name + " needs --reverse-model");

  auto lines = read_corpus(in_path);
  auto out = open_out(out_path);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    if (lines[k].empty()) {
      out << "[]\n";
      continue;
    }
    Sentence src = fwd.input.encode(lines[k]);
    auto matrix = build_confidence_matrix(fwd.params, rev ? &rev->params : nullptr, src, opts);
    out << format_segmentation(optimal_segmentation(matrix.scores()), lines[k]) << '\n';
    if (!matrix_dir.empty()) {
      auto m = open_out(fs::path(matrix_dir) / ("matrix_" + std::to_string(k + 1) + ".csv"));
      write_matrix_csv(m, matrix, &fwd.output);
    }
  }
  return 0;
}

std::size_t literal_unknowns(const Tokens& t) {
  return static_cast<std::size_t>(
      std::count(t.begin(), t.end(), std::string(Vocabulary::kUnkToken)));
}

int evaluate_cmd(const fs::path& cand_path, const fs::path& ref_path,
                 const std::string& buckets, const std::string& edges_list,
                 const std::string& src_path, const std::string& model_path) {
  auto cands = read_corpus(cand_path);
  auto refs = read_corpus(ref_path);
  auto report = bleu(cands, refs);
  std::cout.precision(6);
  std::cout << "BLEU = " << 100.0 * report.bleu << " (BP " << report.brevity_penalty
            << ", hyp " << report.candidate_length << ", ref " << report.reference_length
            << ", p =";
  for (double p : report.precisions) std::cout << ' ' << p;
  std::cout << (report.smoothed ? ", smoothed" : "") << ")\n";
  if (buckets.empty()) return 0;

  std::vector<Tokens> sources = src_path.empty() ? refs : read_corpus(src_path);
  if (sources.size() != refs.size())
    throw std::invalid_argument("--src line count differs from --ref");
  std::vector<std::size_t> keys;
  std::vector<double> edges;
  if (buckets == "length") {
    keys = length_keys(sources);
    edges = default_length_edges();
  } else if (buckets == "unk") {
    if (!model_path.empty()) {
      LoadedModel m = load_model(model_path);
      keys = unknown_keys(sources, refs, m.input, m.output);
    } else {
      for (std::size_t k = 0; k < refs.size(); ++k)
        keys.push_back(std::max(literal_unknowns(sources[k]), literal_unknowns(refs[k])));
    }
    edges = default_unknown_edges();
  } else {
    throw std::invalid_argument("--buckets must be length or unk");
  }
  if (!edges_list.empty()) edges = parse_edges(edges_list);
  auto bucketed = evaluate_bucketed({{"bleu", cands}}, refs, keys, edges);
  ReportTable table = to_table(bucketed, buckets);
  std::vector<std::optional<double>> sizes;
  for (auto n : bucketed.bucket_sizes) sizes.push_back(static_cast<double>(n));
  table.add_row("sentences", std::move(sizes));
  table.write_text(std::cout);
  return 0;
}

int experiment_cmd(const std::string& which, const std::string& config_path,
                   const fs::path& out_dir) {
  KeyValueConfig config = load_config_or_empty(config_path);
  ToyGrammarSpec grammar = ToyGrammarSpec::from_config(config);
  TrainConfig training = TrainConfig::from_config(config);
  ExperimentOptions options = ExperimentOptions::from_config(config);

  ToyStudy study = build_toy_study(grammar, training,
                                   [](const std::string& d, std::size_t e, double loss) {
                                     std::cerr << d << " epoch " << e << " loss " << loss
                                               << '\n';
                                   });
  ExperimentReport report;
  if (which == "control")
    report = run_control_experiment(study.models(), study.corpus.test, options);
  else if (which == "ablation")
    report = run_ablation(study.models(), study.corpus.dev, study.corpus.test, options);
  else if (which == "robustness")
    report = run_robustness_curves(study.models(), study.corpus.sweep, options);
  else
    throw std::invalid_argument("unknown experiment '" + which + "'");

  const KeyValueConfig grammar_config = grammar.to_config();
  const KeyValueConfig training_config = training.to_config();
  for (const auto& [k, v] : grammar_config.entries()) report.config.set("grammar." + k, v);
  for (const auto& [k, v] : training_config.entries()) report.config.set("train." + k, v);
  report.write(out_dir);
  std::cout << report.text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmentation-based neural machine translation toolkit"};
  app.require_subcommand(1);

  auto* mk = app.add_subcommand("make-corpus", "generate the toy parallel corpus");
  std::string spec_path;
  std::string corpus_out;
  std::uint64_t corpus_seed = 1;
  mk->add_option("--spec", spec_path, "grammar spec (key = value)");
  mk->add_option("--out", corpus_out, "output directory")->required();
  mk->add_option("--seed", corpus_seed, "generator seed");

  auto* tr = app.add_subcommand("train", "train one direction");
  std::string tr_src, tr_tgt, tr_dir = "fwd", tr_config, tr_out;
  std::size_t vocab_cap = Vocabulary::kDefaultCap;
  tr->add_option("--src", tr_src)->required()->check(CLI::ExistingFile);
  tr->add_option("--tgt", tr_tgt)->required()->check(CLI::ExistingFile);
  tr->add_option("--dir", tr_dir, "fwd or rev")->check(CLI::IsMember({"fwd", "rev"}));
  tr->add_option("--config", tr_config, "training config (key = value)");
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr->add_option("--vocab-cap", vocab_cap, "vocabulary size cap");

  auto* tl = app.add_subcommand("translate", "translate a file");
  std::string tl_model, tl_rev, tl_mode = "bidir-pen", tl_in, tl_out, tl_trace;
  bool tl_segment = false;
  std::size_t width = kDefaultBeamWidth, max_seg = 8;
  tl->add_option("--model", tl_model)->required()->check(CLI::ExistingFile);
  tl->add_option("--reverse-model", tl_rev)->check(CLI::ExistingFile);
  tl->add_flag("--segment", tl_segment, "translate segment by segment");
  tl->add_option("--mode", tl_mode)->check(CLI::IsMember({"direct", "bidir", "bidir-pen"}));
  tl->add_option("--width", width, "beam width")->check(CLI::PositiveNumber);
  tl->add_option("--max-segment-length", max_seg)->check(CLI::PositiveNumber);
  tl->add_option("--in", tl_in)->required()->check(CLI::ExistingFile);
  tl->add_option("--out", tl_out)->required();
  tl->add_option("--trace", tl_trace, "write one segmentation per line");

  auto* sg = app.add_subcommand("segment", "segment a file without translating");
  std::string sg_model, sg_rev, sg_mode = "bidir-pen", sg_in, sg_out, sg_matrix;
  sg->add_option("--model", sg_model)->required()->check(CLI::ExistingFile);
  sg->add_option("--reverse-model", sg_rev)->check(CLI::ExistingFile);
  sg->add_option("--mode", sg_mode)->check(CLI::IsMember({"direct", "bidir", "bidir-pen"}));
  sg->add_option("--width", width)->check(CLI::PositiveNumber);
  sg->add_option("--max-segment-length", max_seg)->check(CLI::PositiveNumber);
  sg->add_option("--in", sg_in)->required()->check(CLI::ExistingFile);
  sg->add_option("--out", sg_out, "segmentation trace")->required();
  sg->add_option("--matrix-dir", sg_matrix, "dump each confidence matrix as CSV");

  auto* ev = app.add_subcommand("evaluate", "corpus BLEU, optionally bucketed");
  std::string ev_cand, ev_ref, ev_buckets, ev_edges, ev_src, ev_model;
  ev->add_option("--cand", ev_cand)->required()->check(CLI::ExistingFile);
  ev->add_option("--ref", ev_ref)->required()->check(CLI::ExistingFile);
  ev->add_option("--buckets", ev_buckets)->check(CLI::IsMember({"length", "unk"}));
  ev->add_option("--edges", ev_edges, "comma-separated bucket lower edges");
  ev->add_option("--src", ev_src, "source file for bucket keys (default: reference)")
      ->check(CLI::ExistingFile);
  ev->add_option("--model", ev_model, "checkpoint whose vocabularies define unknown words")
      ->check(CLI::ExistingFile);

  auto* ex = app.add_subcommand("experiment", "run an experiment on the toy corpus");
  std::string ex_which, ex_config, ex_out;
  ex->add_option("kind", ex_which, "control, ablation or robustness")
      ->required()
      ->check(CLI::IsMember({"control", "ablation", "robustness"}));
  ex->add_option("--config", ex_config, "grammar, training and experiment keys");
  ex->add_option("--out", ex_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mk) return make_corpus(spec_path, corpus_out, corpus_seed);
    if (*tr) return train_cmd(tr_src, tr_tgt, tr_dir, tr_config, tr_out, vocab_cap);
    if (*tl)
      return translate_cmd(tl_model, tl_rev, tl_segment, tl_mode, width, max_seg, tl_in,
                           tl_out, tl_trace);
    if (*sg)
      return segment_cmd(sg_model, sg_rev, sg_mode, width, max_seg, sg_in, sg_out, sg_matrix);
    if (*ev) return evaluate_cmd(ev_cand, ev_ref, ev_buckets, ev_edges, ev_src, ev_model);
    if (*ex) return experiment_cmd(ex_which, ex_config, ex_out);
  } catch (const std::exception& e) {
    std::cerr << "segnmt: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
