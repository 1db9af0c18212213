#include "segnmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace segnmt {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_reserved(std::string_view token) {
  return token == Vocabulary::kUnkToken || token == Vocabulary::kBosToken ||
         token == Vocabulary::kEosToken;
}

}  // namespace

Tokens tokenize(std::string_view line) {
  Tokens out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_space(line[pos])) ++pos;
    std::size_t start = pos;
    while (pos < line.size() && !is_space(line[pos])) ++pos;
    if (pos > start) out.emplace_back(line.substr(start, pos - start));
  }
  return out;
}

std::string join(const Tokens& tokens) {
  std::string out;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) out += ' ';
    out += tokens[k];
  }
  return out;
}

Vocabulary::Vocabulary() {
  add(std::string(kUnkToken));
  add(std::string(kBosToken));
  add(std::string(kEosToken));
}

void Vocabulary::add(const std::string& token) {
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<Tokens>& corpus,
                             std::size_t cap) {
  struct Entry {
    std::string token;
    std::size_t count = 0;
  };
  std::vector<Entry> entries;  // first-occurrence order
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) {
      if (is_reserved(token)) continue;
      auto [it, inserted] = index.emplace(token, entries.size());
      if (inserted) entries.push_back({token, 0});
      ++entries[it->second].count;
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.count > b.count; });
  if (entries.size() > cap) entries.resize(cap);

  Vocabulary vocab;
  for (const auto& e : entries) vocab.add(e.token);
  return vocab;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  for (const auto& t : tokens) {
    if (is_reserved(t))
      throw std::invalid_argument("reserved token in vocabulary list: " + t);
    if (vocab.contains(t))
      throw std::invalid_argument("duplicate vocabulary token: " + t);
    vocab.add(t);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(tokens);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  for (std::size_t k = kReservedCount; k < id_to_token_.size(); ++k)
    out << id_to_token_[k] << '\n';
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.find(std::string(token)) != token_to_id_.end();
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
    throw std::out_of_range("token id out of range: " + std::to_string(id));
  return id_to_token_[static_cast<std::size_t>(id)];
}

Sentence Vocabulary::encode(const Tokens& tokens) const {
  Sentence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Sentence Vocabulary::encode(std::string_view text) const {
  return encode(tokenize(text));
}

Tokens Vocabulary::decode_tokens(const Sentence& sentence) const {
  Tokens out;
  out.reserve(sentence.size());
  for (TokenId id : sentence) out.push_back(token(id));
  return out;
}

std::string Vocabulary::decode(const Sentence& sentence) const {
  return join(decode_tokens(sentence));
}

std::size_t Vocabulary::unknown_count(const Tokens& tokens) const {
  return static_cast<std::size_t>(std::count_if(
      tokens.begin(), tokens.end(),
      [this](const std::string& t) { return id(t) == kUnk; }));
}

std::vector<Tokens> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus " + path.string());
  std::vector<Tokens> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(tokenize(line));
  return out;
}

void write_corpus(const std::filesystem::path& path,
                  const std::vector<Tokens>& sentences) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus " + path.string());
  for (const auto& s : sentences) out << join(s) << '\n';
}

ParallelCorpus read_parallel_corpus(const std::filesystem::path& source,
                                    const std::filesystem::path& target) {
  ParallelCorpus corpus{read_corpus(source), read_corpus(target)};
  if (corpus.source.size() != corpus.target.size())
    throw std::runtime_error("parallel corpus line counts differ: " +
                             std::to_string(corpus.source.size()) + " vs " +
                             std::to_string(corpus.target.size()));
  return corpus;
}

}  // namespace segnmt
