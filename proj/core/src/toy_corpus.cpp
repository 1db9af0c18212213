#include "segnmt/toy_corpus.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace segnmt {

namespace {

enum class Category { Det, Pron, Noun, Adj, Verb, Adv, Prep };
constexpr std::size_t kCategories = 7;

struct Word {
  Category cat;
  std::size_t index;
};

// Source-side clause shapes. Every adjective directly precedes its noun.
const std::vector<std::string_view> kTemplates = {
    "D N V",          "P V D N",        "D A N V",        "D N V R",
    "D A N V R",      "D N V D N",      "D N V D A N",    "D A N V D N",
    "D N V I D N",    "D A N V D A N",  "D N V I D A N",  "P V D A N I D N",
    "D A N V D N R",  "D A N V I D A N",
};

Category category_of(char c) {
  switch (c) {
    case 'D': return Category::Det;
    case 'P': return Category::Pron;
    case 'N': return Category::Noun;
    case 'A': return Category::Adj;
    case 'V': return Category::Verb;
    case 'R': return Category::Adv;
    case 'I': return Category::Prep;
  }
  throw std::logic_error("bad template symbol");
}

std::vector<Category> parse_template(std::string_view t) {
  std::vector<Category> out;
  for (char c : t)
    if (c != ' ') out.push_back(category_of(c));
  return out;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Pronounceable pseudo-words; the two languages use disjoint letter sets.
class WordMaker {
 public:
  WordMaker(std::string consonants, std::string vowels)
      : consonants_(std::move(consonants)), vowels_(std::move(vowels)) {}

  std::string make(std::mt19937_64& rng, std::size_t syllables) {
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w += consonants_[uniform_index(rng, consonants_.size())];
        w += vowels_[uniform_index(rng, vowels_.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::string consonants_;
  std::string vowels_;
  std::set<std::string> used_;
};

}  // namespace

std::string to_string(ReorderRule rule) {
  switch (rule) {
    case ReorderRule::None: return "none";
    case ReorderRule::AdjectiveNoun: return "adj-noun";
    case ReorderRule::VerbFinal: return "verb-final";
  }
  return "none";
}

ReorderRule parse_reorder_rule(const std::string& name) {
  if (name == "none") return ReorderRule::None;
  if (name == "adj-noun") return ReorderRule::AdjectiveNoun;
  if (name == "verb-final") return ReorderRule::VerbFinal;
  throw std::invalid_argument("unknown reorder rule '" + name + "'");
}

void ToyGrammarSpec::validate() const {
  if (min_clause_length < 1 || min_clause_length > max_clause_length)
    throw std::invalid_argument("clause length range is empty");
  if (max_clause_length > length_cap)
    throw std::invalid_argument("max clause length " +
                                std::to_string(max_clause_length) +
                                " exceeds training length cap " +
                                std::to_string(length_cap));
  if (!(unk_rate >= 0 && unk_rate < 1))
    throw std::invalid_argument("unk_rate must lie in [0, 1)");
  if (!(fragment_rate >= 0 && fragment_rate <= 1))
    throw std::invalid_argument("fragment_rate must lie in [0, 1]");
  if (fragment_rate > 0 && max_fragment_length < 1)
    throw std::invalid_argument("max_fragment_length must be >= 1");
  if (inventory_size < 1) throw std::invalid_argument("empty clause inventory");
  if (min_eval_clauses < 1 || min_eval_clauses > max_eval_clauses)
    throw std::invalid_argument("eval clause count range is empty");
  if (determiners == 0 || pronouns == 0 || nouns == 0 || adjectives == 0 ||
      verbs == 0 || adverbs == 0 || prepositions == 0)
    throw std::invalid_argument("every word category needs at least one word");
  bool any = std::any_of(kTemplates.begin(), kTemplates.end(), [&](auto t) {
    auto len = parse_template(t).size();
    return len >= min_clause_length && len <= max_clause_length;
  });
  if (!any)
    throw std::invalid_argument("no clause template fits the length range");
}

ToyGrammarSpec ToyGrammarSpec::from_config(const KeyValueConfig& c) {
  ToyGrammarSpec s;
  auto sz = [&](const char* key, std::size_t fallback) {
    return static_cast<std::size_t>(c.get_uint(key, fallback));
  };
  s.inventory_size = sz("inventory_size", s.inventory_size);
  s.min_clause_length = sz("min_clause_length", s.min_clause_length);
  s.max_clause_length = sz("max_clause_length", s.max_clause_length);
  s.length_cap = sz("length_cap", s.length_cap);
  s.reorder = parse_reorder_rule(c.get("reorder", to_string(s.reorder)));
  s.determiners = sz("determiners", s.determiners);
  s.pronouns = sz("pronouns", s.pronouns);
  s.nouns = sz("nouns", s.nouns);
  s.adjectives = sz("adjectives", s.adjectives);
  s.verbs = sz("verbs", s.verbs);
  s.adverbs = sz("adverbs", s.adverbs);
  s.prepositions = sz("prepositions", s.prepositions);
  s.min_eval_clauses = sz("min_eval_clauses", s.min_eval_clauses);
  s.max_eval_clauses = sz("max_eval_clauses", s.max_eval_clauses);
  s.train_pairs = sz("train_pairs", s.train_pairs);
  s.dev_pairs = sz("dev_pairs", s.dev_pairs);
  s.test_pairs = sz("test_pairs", s.test_pairs);
  s.sweep_pairs = sz("sweep_pairs", s.sweep_pairs);
  s.unk_rate = c.get_double("unk_rate", s.unk_rate);
  s.fragment_rate = c.get_double("fragment_rate", s.fragment_rate);
  s.max_fragment_length = sz("max_fragment_length", s.max_fragment_length);
  s.seed = c.get_uint("seed", s.seed);
  s.validate();
  return s;
}

KeyValueConfig ToyGrammarSpec::to_config() const {
  KeyValueConfig c;
  auto put = [&](const char* key, std::uint64_t v) { c.set(key, std::to_string(v)); };
  put("inventory_size", inventory_size);
  put("min_clause_length", min_clause_length);
  put("max_clause_length", max_clause_length);
  put("length_cap", length_cap);
  c.set("reorder", to_string(reorder));
  put("determiners", determiners);
  put("pronouns", pronouns);
  put("nouns", nouns);
  put("adjectives", adjectives);
  put("verbs", verbs);
  put("adverbs", adverbs);
  put("prepositions", prepositions);
  put("min_eval_clauses", min_eval_clauses);
  put("max_eval_clauses", max_eval_clauses);
  put("train_pairs", train_pairs);
  put("dev_pairs", dev_pairs);
  put("test_pairs", test_pairs);
  put("sweep_pairs", sweep_pairs);
  {
    std::ostringstream ss;
    ss << unk_rate;
    c.set("unk_rate", ss.str());
    ss.str("");
    ss << fragment_rate;
    c.set("fragment_rate", ss.str());
  }
  put("max_fragment_length", max_fragment_length);
  put("seed", seed);
  return c;
}

ToyGrammar::ToyGrammar(const ToyGrammarSpec& spec) : spec_(spec) {
  spec_.validate();
  auto rng = make_rng(spec_.seed, 0);

  const std::array<std::size_t, kCategories> counts = {
      spec_.determiners, spec_.pronouns, spec_.nouns,       spec_.adjectives,
      spec_.verbs,       spec_.adverbs,  spec_.prepositions};
  // Function words are one syllable, content words two.
  const std::array<std::size_t, kCategories> syllables = {1, 1, 2, 2, 2, 2, 1};

  WordMaker src_maker("bdgklmnprst", "aeiou");
  WordMaker tgt_maker("cfhjqvwxz", "aeiouy");
  std::array<std::vector<std::string>, kCategories> src_lex, tgt_lex;
  for (std::size_t c = 0; c < kCategories; ++c) {
    for (std::size_t k = 0; k < counts[c]; ++k) {
      src_lex[c].push_back(src_maker.make(rng, syllables[c]));
      tgt_lex[c].push_back(tgt_maker.make(rng, syllables[c]));
    }
  }

  std::vector<std::vector<Category>> templates;
  for (auto t : kTemplates) {
    auto cats = parse_template(t);
    if (cats.size() >= spec_.min_clause_length &&
        cats.size() <= spec_.max_clause_length)
      templates.push_back(std::move(cats));
  }

  std::set<Tokens> seen;
  const std::size_t max_attempts = 200 * spec_.inventory_size;
  for (std::size_t attempt = 0;
       attempt < max_attempts && inventory_.size() < spec_.inventory_size;
       ++attempt) {
    const auto& cats = templates[uniform_index(rng, templates.size())];
    std::vector<Word> words;
    for (Category c : cats) {
      auto ci = static_cast<std::size_t>(c);
      words.push_back({c, uniform_index(rng, counts[ci])});
    }
    Clause clause;
    for (const auto& w : words)
      clause.source.push_back(src_lex[static_cast<std::size_t>(w.cat)][w.index]);
    if (!seen.insert(clause.source).second) continue;

    // order[t] = source position of target word t
    std::vector<std::size_t> order(words.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    auto cat = [&](std::size_t k) { return words[order[k]].cat; };
    if (spec_.reorder == ReorderRule::AdjectiveNoun) {
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        if (cat(k) == Category::Adj && cat(k + 1) == Category::Noun) {
          std::swap(order[k], order[k + 1]);
          ++k;
        }
      }
    } else if (spec_.reorder == ReorderRule::VerbFinal) {
      std::stable_partition(order.begin(), order.end(), [&](std::size_t k) {
        return words[k].cat != Category::Verb;
      });
    }
    clause.alignment.resize(words.size());
    for (std::size_t t = 0; t < order.size(); ++t) {
      const Word& w = words[order[t]];
      clause.target.push_back(tgt_lex[static_cast<std::size_t>(w.cat)][w.index]);
      clause.alignment[order[t]] = t;
    }
    inventory_.push_back(std::move(clause));
  }
}

ParallelCorpus ToyGrammar::sample(std::size_t min_clauses,
                                  std::size_t max_clauses, std::size_t pairs,
                                  std::uint64_t stream) const {
  if (min_clauses < 1 || min_clauses > max_clauses)
    throw std::invalid_argument("clause count range is empty");
  auto rng = make_rng(spec_.seed, stream);
  ParallelCorpus out;
  for (std::size_t p = 0; p < pairs; ++p) {
    std::size_t k = std::uniform_int_distribution<std::size_t>(
        min_clauses, max_clauses)(rng);
    Tokens src, tgt;
    std::vector<std::size_t> align;
    for (std::size_t c = 0; c < k; ++c) {
      const auto& clause = inventory_[uniform_index(rng, inventory_.size())];
      for (std::size_t a : clause.alignment) align.push_back(tgt.size() + a);
      src.insert(src.end(), clause.source.begin(), clause.source.end());
      tgt.insert(tgt.end(), clause.target.begin(), clause.target.end());
    }
    out.source.push_back(std::move(src));
    out.target.push_back(std::move(tgt));
    out.alignment.push_back(std::move(align));
  }
  return out;
}

ParallelCorpus ToyGrammar::training_pairs(std::size_t pairs) const {
  auto rng = make_rng(spec_.seed, 1);
  auto frag_rng = make_rng(spec_.seed, 9);
  std::bernoulli_distribution fragment(spec_.fragment_rate);
  std::vector<std::size_t> order(inventory_.size());
  ParallelCorpus out;
  std::size_t pos = order.size();
  for (std::size_t p = 0; p < pairs; ++p) {
    if (pos == order.size()) {
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::shuffle(order.begin(), order.end(), rng);
      pos = 0;
    }
    const auto& clause = inventory_[order[pos++]];
    if (fragment(frag_rng)) {
      // Contiguous source words with their target words in target order.
      const std::size_t n = clause.source.size();
      const std::size_t len = 1 + uniform_index(frag_rng, std::min(spec_.max_fragment_length, n));
      const std::size_t begin = uniform_index(frag_rng, n - len + 1);
      std::vector<std::size_t> targets(clause.alignment.begin() + begin,
                                       clause.alignment.begin() + begin + len);
      std::sort(targets.begin(), targets.end());
      Tokens src(clause.source.begin() + begin, clause.source.begin() + begin + len), tgt;
      std::vector<std::size_t> align;
      for (std::size_t k = begin; k < begin + len; ++k)
        align.push_back(static_cast<std::size_t>(
            std::find(targets.begin(), targets.end(), clause.alignment[k]) - targets.begin()));
      for (std::size_t t : targets) tgt.push_back(clause.target[t]);
      out.source.push_back(std::move(src));
      out.target.push_back(std::move(tgt));
      out.alignment.push_back(std::move(align));
      continue;
    }
    out.source.push_back(clause.source);
    out.target.push_back(clause.target);
    out.alignment.push_back(clause.alignment);
  }
  return out;
}

namespace {

void mask_rare_words(ParallelCorpus& corpus, double rate, std::mt19937_64 rng) {
  std::bernoulli_distribution mask(rate);
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (std::size_t k = 0; k < corpus.source[s].size(); ++k) {
      if (!mask(rng)) continue;
      corpus.source[s][k] = Vocabulary::kUnkToken;
      corpus.target[s][corpus.alignment[s][k]] = Vocabulary::kUnkToken;
    }
  }
}

}  // namespace

ToyCorpus generate_toy_corpus(const ToyGrammarSpec& spec) {
  ToyGrammar grammar(spec);
  ToyCorpus corpus;
  corpus.train = grammar.training_pairs(spec.train_pairs);
  corpus.dev = grammar.sample(spec.min_eval_clauses, spec.max_eval_clauses,
                              spec.dev_pairs, 2);
  corpus.test = grammar.sample(spec.min_eval_clauses, spec.max_eval_clauses,
                               spec.test_pairs, 3);
  corpus.sweep = grammar.sample(1, spec.max_eval_clauses, spec.sweep_pairs, 4);
  if (spec.unk_rate > 0) {
    std::uint64_t stream = 5;
    for (ParallelCorpus* split : {&corpus.train, &corpus.dev, &corpus.test, &corpus.sweep})
      mask_rare_words(*split, spec.unk_rate, make_rng(spec.seed, stream++));
  }
  return corpus;
}

}  // namespace segnmt
