#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "segnmt/config.hpp"
#include "segnmt/corpus.hpp"

namespace segnmt {

/// How a clause's words are reordered when it is translated.
enum class ReorderRule {
  None,
  AdjectiveNoun,  // "det adj noun" -> "det noun adj"
  VerbFinal,      // the verb moves to the end of the clause
};

std::string to_string(ReorderRule rule);
ReorderRule parse_reorder_rule(const std::string& name);

/// Parameters of the synthetic clause language. Sources are concatenations
/// of clauses from a fixed inventory; each clause translates word by word
/// with reordering confined to the clause.
struct ToyGrammarSpec {
  std::size_t inventory_size = 300;
  std::size_t min_clause_length = 3;
  std::size_t max_clause_length = 8;
  /// Longest sentence the models are trained on.
  std::size_t length_cap = 8;
  ReorderRule reorder = ReorderRule::AdjectiveNoun;

  std::size_t determiners = 3;
  std::size_t pronouns = 4;
  std::size_t nouns = 24;
  std::size_t adjectives = 10;
  std::size_t verbs = 16;
  std::size_t adverbs = 6;
  std::size_t prepositions = 5;

  /// Clauses per dev/test sentence.
  std::size_t min_eval_clauses = 3;
  std::size_t max_eval_clauses = 5;

  std::size_t train_pairs = 3000;
  std::size_t dev_pairs = 40;
  std::size_t test_pairs = 100;
  /// Sentences of 1 to max_eval_clauses clauses, for per-length curves.
  std::size_t sweep_pairs = 60;
  /// Probability that an aligned word pair is replaced by <unk> on both
  /// sides, standing in for rare words cut by a vocabulary cap. Applies to
  /// every split.
  double unk_rate = 0.1;
  /// Fraction of training pairs that are short clause fragments (1 to
  /// max_fragment_length words) with their aligned target words.
  double fragment_rate = 0.2;
  std::size_t max_fragment_length = 2;

  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on an inconsistent spec.
  void validate() const;

  static ToyGrammarSpec from_config(const KeyValueConfig& config);
  KeyValueConfig to_config() const;
};

struct ToyCorpus {
  ParallelCorpus train;
  ParallelCorpus dev;
  ParallelCorpus test;
  ParallelCorpus sweep;
};

/// Lexicon and clause inventory derived deterministically from a spec.
class ToyGrammar {
 public:
  explicit ToyGrammar(const ToyGrammarSpec& spec);

  const ToyGrammarSpec& spec() const { return spec_; }
  std::size_t inventory_size() const { return inventory_.size(); }
  const Tokens& clause_source(std::size_t k) const { return inventory_[k].source; }
  const Tokens& clause_target(std::size_t k) const { return inventory_[k].target; }
  const std::vector<std::size_t>& clause_alignment(std::size_t k) const {
    return inventory_[k].alignment;
  }

  /// `pairs` sentences of [min_clauses, max_clauses] inventory clauses each.
  /// `stream` selects an independent random stream under the spec's seed.
  ParallelCorpus sample(std::size_t min_clauses, std::size_t max_clauses,
                        std::size_t pairs, std::uint64_t stream) const;

  /// Single-clause pairs cycling through reshuffled copies of the inventory.
  ParallelCorpus training_pairs(std::size_t pairs) const;

 private:
  struct Clause {
    Tokens source;
    Tokens target;
    std::vector<std::size_t> alignment;
  };

  ToyGrammarSpec spec_;
  std::vector<Clause> inventory_;
};

/// Train split of single clauses; dev and test of multi-clause sentences;
/// sweep of 1 to max_eval_clauses clauses. All splits carry alignments and
/// have word pairs masked at the spec's unk_rate.
ToyCorpus generate_toy_corpus(const ToyGrammarSpec& spec);

}  // namespace segnmt
