#include "segnmt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace segnmt {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t k = 0; k + n <= tokens.size(); ++k)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(k),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(k + n))];
  return counts;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << v;
  return ss.str();
}

}  // namespace

BleuStats::BleuStats(std::size_t n) : max_n(n), matched(n, 0), totals(n, 0) {
  if (n == 0) throw std::invalid_argument("BLEU order must be >= 1");
}

void BleuStats::add(const Tokens& candidate, const Tokens& reference) {
  candidate_length += candidate.size();
  reference_length += reference.size();
  for (std::size_t n = 1; n <= max_n; ++n) {
    auto cand = count_ngrams(candidate, n);
    auto ref = count_ngrams(reference, n);
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) matched[n - 1] += std::min(count, it->second);
      totals[n - 1] += count;
    }
  }
}

BleuReport bleu_from_stats(const BleuStats& stats) {
  BleuReport r;
  r.matched = stats.matched;
  r.totals = stats.totals;
  r.candidate_length = stats.candidate_length;
  r.reference_length = stats.reference_length;
  double log_sum = 0;
  for (std::size_t n = 0; n < stats.max_n; ++n) {
    double p;
    if (stats.matched[n] == 0) {
      p = 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(stats.totals[n], 1)));
      r.smoothed = true;
    } else {
      p = static_cast<double>(stats.matched[n]) / static_cast<double>(stats.totals[n]);
    }
    r.precisions.push_back(p);
    log_sum += std::log(p);
  }
  const double c = static_cast<double>(stats.candidate_length);
  const double ref = static_cast<double>(stats.reference_length);
  if (c == 0)
    r.brevity_penalty = 0;
  else
    r.brevity_penalty = c > ref ? 1.0 : std::exp(1.0 - ref / c);
  r.bleu = r.brevity_penalty * std::exp(log_sum / static_cast<double>(stats.max_n));
  return r;
}

BleuReport bleu(const std::vector<Tokens>& candidates,
                const std::vector<Tokens>& references, std::size_t max_n) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("BLEU: " + std::to_string(candidates.size()) +
                                " candidates but " + std::to_string(references.size()) +
                                " references");
  if (candidates.empty()) throw std::invalid_argument("BLEU: empty corpus");
  BleuStats stats(max_n);
  for (std::size_t k = 0; k < candidates.size(); ++k) stats.add(candidates[k], references[k]);
  return bleu_from_stats(stats);
}

std::vector<double> default_length_edges() { return {0, 10, 20, 30, 40}; }

std::vector<double> default_unknown_edges() { return {0, 1, 2, 3, 4, 5}; }

std::string bucket_label(const std::vector<double>& edges, std::size_t k) {
  auto num = [](double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
  };
  std::string hi = k + 1 < edges.size() ? num(edges[k + 1]) : "inf";
  return "[" + num(edges.at(k)) + "," + hi + ")";
}

std::optional<std::size_t> bucket_of(const std::vector<double>& edges, double key) {
  if (edges.empty() || key < edges.front()) return std::nullopt;
  auto it = std::upper_bound(edges.begin(), edges.end(), key);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::vector<std::size_t> length_keys(const std::vector<Tokens>& sources) {
  std::vector<std::size_t> out;
  for (const auto& s : sources) out.push_back(s.size());
  return out;
}

std::vector<std::size_t> unknown_keys(const std::vector<Tokens>& sources,
                                      const std::vector<Tokens>& references,
                                      const Vocabulary& source_vocab,
                                      const Vocabulary& target_vocab) {
  if (sources.size() != references.size())
    throw std::invalid_argument("unknown_keys: list lengths differ");
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < sources.size(); ++k)
    out.push_back(std::max(source_vocab.unknown_count(sources[k]),
                           target_vocab.unknown_count(references[k])));
  return out;
}

BucketedBleu evaluate_bucketed(const std::vector<SystemOutput>& systems,
                               const std::vector<Tokens>& references,
                               const std::vector<std::size_t>& keys,
                               const std::vector<double>& edges) {
  if (keys.size() != references.size())
    throw std::invalid_argument("evaluate_bucketed: one key per reference required");
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()))
    throw std::invalid_argument("evaluate_bucketed: edges must be non-empty and sorted");
  for (const auto& s : systems)
    if (s.translations.size() != references.size())
      throw std::invalid_argument("system '" + s.name + "' translates " +
                                  std::to_string(s.translations.size()) +
                                  " sentences, expected " +
                                  std::to_string(references.size()));

  std::vector<std::vector<std::size_t>> members(edges.size());
  for (std::size_t k = 0; k < keys.size(); ++k)
    if (auto b = bucket_of(edges, static_cast<double>(keys[k]))) members[*b].push_back(k);

  BucketedBleu out;
  for (std::size_t b = 0; b < edges.size(); ++b) {
    out.buckets.push_back(bucket_label(edges, b));
    out.bucket_sizes.push_back(members[b].size());
  }
  for (const auto& s : systems) {
    out.systems.push_back(s.name);
    std::vector<std::optional<BleuReport>> row;
    for (const auto& idx : members) {
      if (idx.empty()) {
        row.push_back(std::nullopt);
        continue;
      }
      BleuStats stats;
      for (std::size_t k : idx) stats.add(s.translations[k], references[k]);
      row.push_back(bleu_from_stats(stats));
    }
    out.cells.push_back(std::move(row));
  }
  return out;
}

void ReportTable::add_row(std::string label, std::vector<std::optional<double>> row) {
  if (row.size() != columns.size())
    throw std::invalid_argument("report row '" + label + "' has wrong width");
  rows.push_back(std::move(label));
  values.push_back(std::move(row));
}

std::optional<double> ReportTable::at(const std::string& row,
                                      const std::string& column) const {
  auto r = std::find(rows.begin(), rows.end(), row);
  auto c = std::find(columns.begin(), columns.end(), column);
  if (r == rows.end() || c == columns.end())
    throw std::out_of_range("no cell (" + row + ", " + column + ") in " + title);
  return values[static_cast<std::size_t>(r - rows.begin())]
               [static_cast<std::size_t>(c - columns.begin())];
}

void ReportTable::write_csv(std::ostream& out) const {
  out << row_header;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  auto old = out.precision(10);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << rows[r];
    for (const auto& v : values[r]) {
      out << ',';
      if (v) out << *v;
    }
    out << '\n';
  }
  out.precision(old);
}

void ReportTable::write_text(std::ostream& out) const {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({row_header});
  for (const auto& c : columns) cells.back().push_back(c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    cells.push_back({rows[r]});
    for (const auto& v : values[r]) cells.back().push_back(v ? format_number(*v) : "-");
  }
  std::vector<std::size_t> width(columns.size() + 1, 0);
  for (const auto& line : cells)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  if (!title.empty()) out << title << '\n';
  for (std::size_t l = 0; l < cells.size(); ++l) {
    for (std::size_t c = 0; c < cells[l].size(); ++c) {
      if (c == 0)
        out << std::left << std::setw(static_cast<int>(width[c])) << cells[l][c];
      else
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << cells[l][c];
    }
    out << std::left << '\n';
    if (l == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < width.size(); ++c) total += 2 + width[c];
      out << std::string(total, '-') << '\n';
    }
  }
}

ReportTable to_table(const BucketedBleu& bucketed, std::string title) {
  ReportTable t;
  t.title = std::move(title);
  t.columns = bucketed.buckets;
  for (std::size_t s = 0; s < bucketed.systems.size(); ++s) {
    std::vector<std::optional<double>> row;
    for (const auto& cell : bucketed.cells[s])
      row.push_back(cell ? std::optional<double>(100.0 * cell->bleu) : std::nullopt);
    t.add_row(bucketed.systems[s], std::move(row));
  }
  return t;
}

}  // namespace segnmt
