#include "segnmt/confidence.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "segnmt/parallel.hpp"

namespace segnmt {

std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::Direct: return "direct";
    case ScoreMode::Bidirectional: return "bidir";
    case ScoreMode::BidirectionalPenalized: return "bidir-pen";
  }
  return "bidir-pen";
}

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "direct") return ScoreMode::Direct;
  if (name == "bidir") return ScoreMode::Bidirectional;
  if (name == "bidir-pen") return ScoreMode::BidirectionalPenalized;
  throw std::invalid_argument("unknown score mode '" + name +
                              "' (expected direct, bidir or bidir-pen)");
}

bool uses_reverse_model(ScoreMode mode) { return mode != ScoreMode::Direct; }

double pair_confidence(double forward_logprob, double reverse_logprob,
                       std::size_t length, ScoreMode mode) {
  if (length == 0) throw std::invalid_argument("phrase length must be >= 1");
  if (!std::isfinite(forward_logprob))
    throw std::invalid_argument("non-finite forward log-probability");
  if (mode == ScoreMode::Direct) return forward_logprob;
  if (!std::isfinite(reverse_logprob))
    throw std::invalid_argument("non-finite reverse log-probability");
  const double sum = forward_logprob + reverse_logprob;
  if (mode == ScoreMode::Bidirectional) return sum / 2.0;
  const double log_len = std::max(std::log(static_cast<double>(length)), std::log(2.0));
  return sum / (2.0 * std::abs(log_len));
}

std::vector<PairScore> score_candidates(const GruEncDecParams& forward,
                                        const GruEncDecParams* reverse,
                                        std::span<const TokenId> phrase,
                                        std::size_t width) {
  if (phrase.empty()) throw std::invalid_argument("cannot score an empty phrase");
  auto beam = beam_search(forward, phrase, width);
  std::vector<PairScore> out;
  out.reserve(beam.size());
  for (auto& h : beam) {
    PairScore p;
    p.forward_logprob = h.log_prob;
    p.length = phrase.size();
    p.finished = h.finished;
    if (reverse) p.reverse_logprob = sequence_logprob(*reverse, h.tokens, phrase);
    p.candidate = std::move(h.tokens);
    out.push_back(std::move(p));
  }
  return out;
}

PhraseScore select_best(const std::vector<PairScore>& candidates, ScoreMode mode) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to select from");
  if (uses_reverse_model(mode) && !candidates.front().reverse_logprob)
    throw std::invalid_argument("score mode " + to_string(mode) +
                                " needs reverse-model scores");
  PhraseScore best;
  bool have = false;
  for (const auto& c : candidates) {
    double rev = c.reverse_logprob.value_or(0.0);
    double s = pair_confidence(c.forward_logprob, rev, c.length, mode);
    if (!have || s > best.score) {
      have = true;
      best.score = s;
      best.candidate = c.candidate;
      best.forward_logprob = c.forward_logprob;
      best.reverse_logprob = c.reverse_logprob;
      best.fallback = !c.finished;
    }
  }
  return best;
}

PhraseScore phrase_confidence(const GruEncDecParams& forward,
                              const GruEncDecParams* reverse,
                              std::span<const TokenId> phrase, std::size_t width,
                              ScoreMode mode) {
  if (uses_reverse_model(mode) && !reverse)
    throw std::invalid_argument("score mode " + to_string(mode) + " needs a reverse model");
  return select_best(
      score_candidates(forward, uses_reverse_model(mode) ? reverse : nullptr, phrase, width),
      mode);
}

CandidateTable::CandidateTable(int n, std::size_t max_segment_length)
    : n_(n),
      max_len_(max_segment_length),
      cells_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
  if (n < 1) throw std::invalid_argument("candidate table needs at least one word");
}

bool CandidateTable::has(int i, int j) const {
  return i >= 1 && j >= i && j <= n_ && static_cast<std::size_t>(j - i + 1) <= max_len_;
}

std::size_t CandidateTable::index(int i, int j) const {
  if (!has(i, j))
    throw std::out_of_range("span (" + std::to_string(i) + "," + std::to_string(j) +
                            ") not in candidate table");
  return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_) +
         static_cast<std::size_t>(j - 1);
}

const std::vector<PairScore>& CandidateTable::at(int i, int j) const {
  return cells_[index(i, j)];
}

std::vector<PairScore>& CandidateTable::at(int i, int j) { return cells_[index(i, j)]; }

std::vector<Span> CandidateTable::spans() const {
  std::vector<Span> out;
  for (int i = 1; i <= n_; ++i)
    for (int j = i; j <= n_ && has(i, j); ++j) out.push_back({i, j});
  return out;
}

CandidateTable build_candidate_table(const GruEncDecParams& forward,
                                     const GruEncDecParams* reverse,
                                     const Sentence& sentence, std::size_t width,
                                     std::size_t max_segment_length,
                                     std::size_t workers) {
  if (sentence.empty()) throw std::invalid_argument("cannot score an empty sentence");
  if (max_segment_length == 0) throw std::invalid_argument("max segment length must be >= 1");
  CandidateTable table(static_cast<int>(sentence.size()), max_segment_length);
  table.set_has_reverse_scores(reverse != nullptr);
  const auto spans = table.spans();
  parallel_for(spans.size(), workers, [&](std::size_t k) {
    const Span s = spans[k];
    std::span<const TokenId> phrase(sentence.data() + (s.begin - 1),
                                    static_cast<std::size_t>(s.length()));
    table.at(s.begin, s.end) = score_candidates(forward, reverse, phrase, width);
  });
  return table;
}

ConfidenceMatrix::ConfidenceMatrix(int n, std::size_t max_segment_length)
    : scores_(n),
      max_len_(max_segment_length),
      entries_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {}

const PhraseScore* ConfidenceMatrix::entry(int i, int j) const {
  if (i < 1 || j < i || j > size()) throw std::out_of_range("span outside sentence");
  const auto& e = entries_[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(size()) +
                           static_cast<std::size_t>(j - 1)];
  return e ? &*e : nullptr;
}

void ConfidenceMatrix::set(int i, int j, PhraseScore phrase) {
  scores_.set(i, j, phrase.score);
  entries_[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(size()) +
           static_cast<std::size_t>(j - 1)] = std::move(phrase);
}

bool operator==(const ConfidenceMatrix& a, const ConfidenceMatrix& b) {
  if (!(a.scores_ == b.scores_) || a.max_len_ != b.max_len_) return false;
  for (std::size_t k = 0; k < a.entries_.size(); ++k) {
    const auto& x = a.entries_[k];
    const auto& y = b.entries_[k];
    if (x.has_value() != y.has_value()) return false;
    if (!x) continue;
    if (x->score != y->score || x->candidate != y->candidate ||
        x->forward_logprob != y->forward_logprob ||
        x->reverse_logprob != y->reverse_logprob || x->fallback != y->fallback)
      return false;
  }
  return true;
}

ConfidenceMatrix to_confidence_matrix(const CandidateTable& table, ScoreMode mode) {
  ConfidenceMatrix m(table.size(), table.max_segment_length());
  for (const Span& s : table.spans()) m.set(s.begin, s.end, select_best(table.at(s.begin, s.end), mode));
  return m;
}

ConfidenceMatrix build_confidence_matrix(const GruEncDecParams& forward,
                                         const GruEncDecParams* reverse,
                                         const Sentence& sentence,
                                         const MatrixOptions& options) {
  if (uses_reverse_model(options.mode) && !reverse)
    throw std::invalid_argument("score mode " + to_string(options.mode) +
                                " needs a reverse model");
  const GruEncDecParams* rev = uses_reverse_model(options.mode) ? reverse : nullptr;
  auto table = build_candidate_table(forward, rev, sentence, options.width,
                                     options.max_segment_length, options.workers);
  return to_confidence_matrix(table, options.mode);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_matrix_csv(std::ostream& out, const ConfidenceMatrix& matrix,
                      const Vocabulary* target_vocab) {
  auto old_precision = out.precision(17);
  out << "i,j,c_ij,fwd_logp,rev_logp,candidate\n";
  for (int i = 1; i <= matrix.size(); ++i) {
    for (int j = i; j <= matrix.size(); ++j) {
      const PhraseScore* e = matrix.entry(i, j);
      if (!e) continue;
      std::string cand;
      if (target_vocab) {
        cand = target_vocab->decode(e->candidate);
      } else {
        for (std::size_t k = 0; k < e->candidate.size(); ++k)
          cand += (k ? " " : "") + std::to_string(e->candidate[k]);
      }
      out << i << ',' << j << ',' << e->score << ',' << e->forward_logprob << ',';
      if (e->reverse_logprob) out << *e->reverse_logprob;
      out << ',' << csv_field(cand) << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace segnmt
