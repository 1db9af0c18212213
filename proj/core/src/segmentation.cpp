#include "segnmt/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace segnmt {

SpanScores::SpanScores(int n)
    : n_(n),
      scores_(static_cast<std::size_t>(n > 0 ? n : 0) * static_cast<std::size_t>(n > 0 ? n : 0),
              kAbsentScore) {
  if (n < 0) throw std::invalid_argument("negative sentence length");
}

std::size_t SpanScores::index(int i, int j) const {
  if (i < 1 || j < i || j > n_)
    throw std::out_of_range("span (" + std::to_string(i) + "," + std::to_string(j) +
                            ") outside sentence of " + std::to_string(n_) + " words");
  return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_) +
         static_cast<std::size_t>(j - 1);
}

std::size_t SpanScores::defined_count() const {
  std::size_t count = 0;
  for (int i = 1; i <= n_; ++i)
    for (int j = i; j <= n_; ++j)
      if (defined(i, j)) ++count;
  return count;
}

UncoverableWordError::UncoverableWordError(int word)
    : std::runtime_error("word " + std::to_string(word) +
                         " cannot be covered by any defined span"),
      word_(word) {}

namespace {

void check_coverable(const SpanScores& scores) {
  const int n = scores.size();
  for (int k = 1; k <= n; ++k) {
    bool covered = false;
    for (int i = 1; i <= k && !covered; ++i)
      for (int j = k; j <= n && !covered; ++j) covered = scores.defined(i, j);
    if (!covered) throw UncoverableWordError(k);
  }
}

}  // namespace

DpTable fill_dp_table(const SpanScores& scores) {
  const int n = scores.size();
  DpTable t;
  t.best.assign(static_cast<std::size_t>(n) + 1, kAbsentScore);
  t.start.assign(static_cast<std::size_t>(n) + 1, 0);
  t.best[0] = 0.0;
  for (int j = 1; j <= n; ++j) {
    double best = kAbsentScore;
    int arg = 0;
    for (int i = 1; i <= j; ++i) {
      double c = scores(i, j);
      double prefix = t.best[static_cast<std::size_t>(i - 1)];
      if (c == kAbsentScore || prefix == kAbsentScore) continue;
      double v = c + prefix;
      if (arg == 0 || v > best) {
        best = v;
        arg = i;
      }
    }
    t.best[static_cast<std::size_t>(j)] = best;
    t.start[static_cast<std::size_t>(j)] = arg;
  }
  return t;
}

Segmentation optimal_segmentation(const SpanScores& scores) {
  const int n = scores.size();
  if (n < 1) throw std::invalid_argument("cannot segment an empty sentence");
  check_coverable(scores);
  DpTable t = fill_dp_table(scores);
  for (int j = 1; j <= n; ++j)
    if (t.start[static_cast<std::size_t>(j)] == 0) throw UncoverableWordError(j);

  Segmentation seg;
  seg.score = t.best[static_cast<std::size_t>(n)];
  for (int j = n; j > 0;) {
    int i = t.start[static_cast<std::size_t>(j)];
    seg.spans.push_back({i, j});
    j = i - 1;
  }
  std::reverse(seg.spans.begin(), seg.spans.end());
  return seg;
}

Segmentation brute_force_segmentation(const SpanScores& scores,
                                      std::size_t* enumerated) {
  const int n = scores.size();
  if (n < 1) throw std::invalid_argument("cannot segment an empty sentence");
  if (n > kBruteForceMaxWords)
    throw std::invalid_argument("brute force limited to " +
                                std::to_string(kBruteForceMaxWords) + " words");
  check_coverable(scores);

  // Segment starts read right to left; smaller wins a tie.
  auto reversed_starts = [](const std::vector<Span>& spans) {
    std::vector<int> out;
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) out.push_back(it->begin);
    return out;
  };

  bool found = false;
  Segmentation best;
  std::vector<int> best_key;
  std::size_t visited = 0;
  const std::uint32_t covers = 1u << (n - 1);
  std::vector<Span> spans;
  for (std::uint32_t mask = 0; mask < covers; ++mask) {
    ++visited;
    spans.clear();
    int begin = 1;
    for (int k = 1; k <= n; ++k) {
      // bit k-1 set: cut after word k
      if (k == n || (mask >> (k - 1)) & 1u) {
        spans.push_back({begin, k});
        begin = k + 1;
      }
    }
    double total = 0.0;
    bool feasible = true;
    for (const auto& s : spans) {
      double c = scores(s.begin, s.end);
      if (c == kAbsentScore) {
        feasible = false;
        break;
      }
      total = c + total;
    }
    if (!feasible) continue;
    auto key = reversed_starts(spans);
    if (!found || total > best.score || (total == best.score && key < best_key)) {
      found = true;
      best.spans = spans;
      best.score = total;
      best_key = std::move(key);
    }
  }
  if (enumerated) *enumerated = visited;
  if (!found) throw UncoverableWordError(n);
  return best;
}

Segmentation random_segmentation(int n, double target_mean, double target_variance,
                                 std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("negative sentence length");
  if (!(target_mean >= 1)) throw std::invalid_argument("target mean must be >= 1");
  if (!(target_variance >= 0)) throw std::invalid_argument("target variance must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(target_mean, std::sqrt(target_variance));
  Segmentation seg;
  int begin = 1;
  while (begin <= n) {
    int remaining = n - begin + 1;
    double draw = target_variance > 0 ? dist(rng) : target_mean;
    long long len = std::llround(draw);
    len = std::clamp<long long>(len, 1, remaining);
    seg.spans.push_back({begin, begin + static_cast<int>(len) - 1});
    begin += static_cast<int>(len);
  }
  return seg;
}

Segmentation random_confidence_segmentation(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("cannot segment an empty sentence");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SpanScores scores(n);
  for (int i = 1; i <= n; ++i)
    for (int j = i; j <= n; ++j) scores.set(i, j, unit(rng));
  return optimal_segmentation(scores);
}

bool is_contiguous_cover(const Segmentation& segmentation, int n) {
  if (n == 0) return segmentation.spans.empty();
  int expected = 1;
  for (const auto& s : segmentation.spans) {
    if (s.begin != expected || s.end < s.begin) return false;
    expected = s.end + 1;
  }
  return expected == n + 1;
}

double segmentation_score(const SpanScores& scores, const Segmentation& segmentation) {
  double total = 0.0;
  for (const auto& s : segmentation.spans) total = scores(s.begin, s.end) + total;
  return total;
}

std::string format_segmentation(const Segmentation& segmentation, const Tokens& source) {
  std::string out = "[";
  for (std::size_t k = 0; k < segmentation.spans.size(); ++k) {
    const auto& s = segmentation.spans[k];
    if (k) out += ' ';
    out += '[';
    for (int w = s.begin; w <= s.end; ++w) {
      out += ' ';
      out += source.at(static_cast<std::size_t>(w - 1));
    }
    out += " ]";
  }
  out += ']';
  return out;
}

LengthMoments segment_length_moments(const std::vector<Segmentation>& segmentations) {
  LengthMoments m;
  double sum = 0, sum_sq = 0;
  for (const auto& seg : segmentations)
    for (const auto& s : seg.spans) {
      double len = s.length();
      sum += len;
      sum_sq += len * len;
      ++m.count;
    }
  if (m.count == 0) return m;
  m.mean = sum / static_cast<double>(m.count);
  m.variance = std::max(0.0, sum_sq / static_cast<double>(m.count) - m.mean * m.mean);
  return m;
}

}  // namespace segnmt
