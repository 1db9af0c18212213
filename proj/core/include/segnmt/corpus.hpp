#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace segnmt {

using TokenId = std::int32_t;

/// Token ids of one sentence. BOS/EOS are never stored here; the model code
/// adds them when it runs.
using Sentence = std::vector<TokenId>;

/// Whitespace-tokenized sentence text.
using Tokens = std::vector<std::string>;

/// Contiguous phrase e_i..e_j of a sentence, 1-based and inclusive.
struct Span {
  int begin = 1;
  int end = 1;

  int length() const { return end - begin + 1; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// Splits on any run of ASCII whitespace.
Tokens tokenize(std::string_view line);
std::string join(const Tokens& tokens);

/// Bijective token <-> id map with a fixed reserved block [UNK, BOS, EOS]
/// at ids 0, 1, 2. Immutable once built.
class Vocabulary {
 public:
  static constexpr TokenId kUnk = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr std::size_t kReservedCount = 3;
  static constexpr std::size_t kDefaultCap = 30000;

  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";

  /// Reserved-only vocabulary.
  Vocabulary();

  /// Keeps the `cap` most frequent tokens; ties go to the token seen first.
  static Vocabulary build(const std::vector<Tokens>& corpus,
                          std::size_t cap = kDefaultCap);

  /// Exactly these tokens, in order, after the reserved block.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  /// File holds one non-reserved token per line; line k has id k + 3.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return id_to_token_.size(); }
  bool contains(std::string_view token) const;
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;

  Sentence encode(const Tokens& tokens) const;
  Sentence encode(std::string_view text) const;
  Tokens decode_tokens(const Sentence& sentence) const;
  std::string decode(const Sentence& sentence) const;

  /// Number of tokens that would map to UNK.
  std::size_t unknown_count(const Tokens& tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  void add(const std::string& token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Two aligned token streams of equal length.
struct ParallelCorpus {
  std::vector<Tokens> source;
  std::vector<Tokens> target;
  /// Optional word alignment: target position of each source word. Empty
  /// when unknown; not stored in corpus files.
  std::vector<std::vector<std::size_t>> alignment;

  std::size_t size() const { return source.size(); }
  bool empty() const { return source.empty(); }
};

std::vector<Tokens> read_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path,
                  const std::vector<Tokens>& sentences);

/// Throws std::runtime_error when the two files differ in line count.
ParallelCorpus read_parallel_corpus(const std::filesystem::path& source,
                                    const std::filesystem::path& target);

}  // namespace segnmt
