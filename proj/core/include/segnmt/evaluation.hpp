#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "segnmt/corpus.hpp"

namespace segnmt {

/// Clipped n-gram match counts accumulated over a corpus.
struct BleuStats {
  explicit BleuStats(std::size_t max_n = 4);

  void add(const Tokens& candidate, const Tokens& reference);

  std::size_t max_n;
  std::vector<std::size_t> matched;  // index n-1
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

struct BleuReport {
  double bleu = 0;  // in [0, 1]
  std::vector<double> precisions;
  std::vector<std::size_t> matched;
  std::vector<std::size_t> totals;
  double brevity_penalty = 0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  /// Some precision was zero and got floored at 1 / (2 * n-gram count).
  bool smoothed = false;
};

BleuReport bleu_from_stats(const BleuStats& stats);

/// Corpus BLEU with one reference per candidate: BP * exp(mean ln p_n).
/// Case-sensitive on the given tokens. Throws std::invalid_argument for an
/// empty corpus or mismatched list lengths.
BleuReport bleu(const std::vector<Tokens>& candidates,
                const std::vector<Tokens>& references, std::size_t max_n = 4);

/// Bucket lower edges; bucket k is [edges[k], edges[k+1]), the last is open.
std::vector<double> default_length_edges();
std::vector<double> default_unknown_edges();
std::string bucket_label(const std::vector<double>& edges, std::size_t k);

/// Bucket index of `key`, or nullopt when it lies below the first edge.
std::optional<std::size_t> bucket_of(const std::vector<double>& edges, double key);

/// Source word count per sentence.
std::vector<std::size_t> length_keys(const std::vector<Tokens>& sources);

/// max(unknowns in source, unknowns in reference) per sentence pair.
std::vector<std::size_t> unknown_keys(const std::vector<Tokens>& sources,
                                      const std::vector<Tokens>& references,
                                      const Vocabulary& source_vocab,
                                      const Vocabulary& target_vocab);

struct SystemOutput {
  std::string name;
  std::vector<Tokens> translations;
};

/// Rows are systems, columns buckets. An empty bucket holds nullopt.
struct BucketedBleu {
  std::vector<std::string> systems;
  std::vector<std::string> buckets;
  std::vector<std::size_t> bucket_sizes;
  std::vector<std::vector<std::optional<BleuReport>>> cells;
};

BucketedBleu evaluate_bucketed(const std::vector<SystemOutput>& systems,
                               const std::vector<Tokens>& references,
                               const std::vector<std::size_t>& keys,
                               const std::vector<double>& edges);

/// Named rows of optional numbers, printed as CSV or an aligned text table.
struct ReportTable {
  std::string title;
  std::string row_header = "system";
  std::vector<std::string> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> values;

  void add_row(std::string label, std::vector<std::optional<double>> row);
  std::optional<double> at(const std::string& row, const std::string& column) const;
  void write_csv(std::ostream& out) const;
  void write_text(std::ostream& out) const;
};

/// BLEU x 100 per cell.
ReportTable to_table(const BucketedBleu& bucketed, std::string title);

}  // namespace segnmt
