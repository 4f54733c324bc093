#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "charembed/rng.hpp"

namespace charembed {

enum class Pos { kNoun, kVerb, kAdj, kAdv, kOther };

std::string_view pos_name(Pos pos);
// Accepts noun/verb/adj/adv/other and the WordNet letters n/v/a/s/r.
std::optional<Pos> parse_pos(std::string_view text);

// Word -> ordered synonym lists with coarse POS tags, plus a stopword set.
// Headwords and synonyms are stored lowercased. Within an entry, synonyms are
// unique and never equal to the headword; index 0 is the preferred synonym.
class SynonymLexicon {
 public:
  struct Entry {
    Pos pos = Pos::kOther;
    std::vector<std::string> synonyms;
  };

  // Starts with the built-in English stopword list.
  SynonymLexicon();

  // TSV: word<TAB>pos<TAB>syn1,syn2,...  Lines starting with '#' and blank
  // lines are skipped. Throws IoError naming the path (and line) on failure.
  static SynonymLexicon load(const std::string& path);
  static SynonymLexicon parse(std::istream& in, const std::string& source);

  void add(std::string_view word, Pos pos, const std::vector<std::string>& synonyms);
  void add_stopword(std::string_view word);

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view word) const;
  bool is_stopword(std::string_view word) const;

  // POS of the word's first headword entry.
  std::optional<Pos> primary_pos(std::string_view word) const;
  // Tags a word can carry: its own headword entries when it has any,
  // otherwise the tags of every entry that lists it as a synonym.
  std::set<Pos> pos_tags(std::string_view word) const;
  // Synonyms admissible as replacements: listed under the word's entries with
  // its primary POS, and themselves able to carry that POS. Preference order.
  std::vector<std::string> candidates(std::string_view word) const;

 private:
  std::map<std::string, std::vector<Entry>, std::less<>> entries_;
  std::map<std::string, std::set<Pos>, std::less<>> listed_as_;
  std::set<std::string, std::less<>> stopwords_;
};

struct AugmentationConfig {
  double count_param = 0.5;    // geometric parameter for how many words to replace
  double synonym_param = 0.5;  // geometric parameter for which synonym to use
  std::uint64_t seed = 0;

  void validate() const;
};

struct Replacement {
  std::size_t token = 0;  // index among whitespace tokens
  std::string original;   // lowercased lookup form
  std::string synonym;
};

struct AugmentedPair {
  std::string input;   // fed to the encoder
  std::string target;  // decoder reconstruction target
  std::vector<Replacement> replacements;
};

// Whitespace-delimited token spans [begin, end) in byte offsets.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};
std::vector<TokenSpan> whitespace_tokens(std::string_view text);

// Lookup form of a token: lowercased with leading/trailing ASCII punctuation
// removed. Empty for all-punctuation tokens.
std::string token_core(std::string_view token);

// Indices (into whitespace_tokens) of words eligible for replacement. Skips
// stopwords, @mentions, #hashtags, URLs ("://"), and words without an
// admissible synonym.
std::vector<std::size_t> replaceable_tokens(std::string_view tweet, const SynonymLexicon& lexicon);

// Draw k in [1, max] with P(k) proportional to param^k.
// Throws ContractError unless 0 < param < 1 and max >= 1.
std::size_t sample_geometric_truncated(double param, std::size_t max, Rng& rng);

// Replaces a geometrically sampled number of distinct replaceable words (at
// most the number available; none when there are none), each with a
// geometrically sampled synonym of the same coarse POS. Punctuation attached
// to a replaced word is kept; all other bytes are copied unchanged.
AugmentedPair augment(std::string_view tweet, const SynonymLexicon& lexicon, const AugmentationConfig& config,
                      Rng& rng);

// Same, with the replacement count fixed (clamped to the available words).
AugmentedPair augment_n(std::string_view tweet, const SynonymLexicon& lexicon, std::size_t count,
                        double synonym_param, Rng& rng);

}  // namespace charembed
