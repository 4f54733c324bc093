#include "charembed/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "charembed/charset.hpp"
#include "charembed/errors.hpp"

namespace charembed {
namespace {

constexpr const char* kDefaultStopwords[] = {
    "a",      "about",  "above", "after", "again", "against", "all",    "am",    "an",    "and",     "any",
    "are",    "as",     "at",    "be",    "because", "been",  "before", "being", "below", "between", "both",
    "but",    "by",     "can",   "could", "did",   "do",      "does",   "doing", "down",  "during",  "each",
    "few",    "for",    "from",  "further", "had", "has",     "have",   "having", "he",   "her",     "here",
    "hers",   "herself", "him",  "himself", "his", "how",     "i",      "if",    "in",    "into",    "is",
    "it",     "its",    "itself", "just", "me",    "more",    "most",   "my",    "myself", "no",     "nor",
    "not",    "now",    "of",    "off",   "on",    "once",    "only",   "or",    "other", "our",     "ours",
    "ourselves", "out", "over",  "own",   "rt",    "same",    "she",    "should", "so",   "some",    "such",
    "than",   "that",   "the",   "their", "theirs", "them",   "themselves", "then", "there", "these", "they",
    "this",   "those",  "through", "to",  "too",   "under",   "until",  "up",    "very",  "was",     "we",
    "were",   "what",   "when",  "where", "which", "while",   "who",    "whom",  "why",   "will",    "with",
    "would",  "you",    "your",  "yours", "yourself", "yourselves", "im", "u",   "ur"};

bool is_ascii_punct(char ch) { return std::ispunct(static_cast<unsigned char>(ch)) != 0; }

bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v';
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// Core of a token as [begin, end) within the token.
std::pair<std::size_t, std::size_t> core_range(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && is_ascii_punct(token[b])) ++b;
  while (e > b && is_ascii_punct(token[e - 1])) --e;
  return {b, e};
}

bool excluded_token(std::string_view token) {
  if (token.empty()) return true;
  if (token.front() == '@' || token.front() == '#') return true;
  return token.find("://") != std::string_view::npos;
}

}  // namespace

std::string_view pos_name(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return "noun";
    case Pos::kVerb: return "verb";
    case Pos::kAdj: return "adj";
    case Pos::kAdv: return "adv";
    case Pos::kOther: return "other";
  }
  return "other";
}

std::optional<Pos> parse_pos(std::string_view text) {
  const std::string t = to_lower_ascii(text);
  if (t == "noun" || t == "n") return Pos::kNoun;
  if (t == "verb" || t == "v") return Pos::kVerb;
  if (t == "adj" || t == "a" || t == "s") return Pos::kAdj;
  if (t == "adv" || t == "r") return Pos::kAdv;
  if (t == "other") return Pos::kOther;
  return std::nullopt;
}

SynonymLexicon::SynonymLexicon() {
  for (const char* w : kDefaultStopwords) stopwords_.insert(w);
}

void SynonymLexicon::add_stopword(std::string_view word) { stopwords_.insert(to_lower_ascii(word)); }

void SynonymLexicon::add(std::string_view word, Pos pos, const std::vector<std::string>& synonyms) {
  const std::string head = to_lower_ascii(trim(word));
  if (head.empty()) throw ContractError("lexicon headword is empty");
  Entry entry{pos, {}};
  for (const std::string& raw : synonyms) {
    const std::string syn = to_lower_ascii(trim(raw));
    if (syn.empty() || syn == head) continue;
    if (std::any_of(syn.begin(), syn.end(), is_space)) {
      throw ContractError("synonym '" + syn + "' for '" + head + "' contains whitespace");
    }
    if (std::find(entry.synonyms.begin(), entry.synonyms.end(), syn) != entry.synonyms.end()) continue;
    entry.synonyms.push_back(syn);
  }
  for (const std::string& syn : entry.synonyms) listed_as_[syn].insert(pos);
  entries_[head].push_back(std::move(entry));
}

SynonymLexicon SynonymLexicon::parse(std::istream& in, const std::string& source) {
  SynonymLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::istringstream fields(line);
    std::string col;
    while (std::getline(fields, col, '\t')) cols.push_back(col);
    const std::string where = source + ":" + std::to_string(line_no);
    if (cols.size() != 3) throw IoError(where + ": expected word<TAB>pos<TAB>synonyms");
    const auto pos = parse_pos(trim(cols[1]));
    if (!pos) throw IoError(where + ": unknown POS tag '" + cols[1] + "'");
    std::vector<std::string> syns;
    std::istringstream list(cols[2]);
    std::string syn;
    while (std::getline(list, syn, ',')) syns.push_back(syn);
    try {
      lexicon.add(cols[0], *pos, syns);
    } catch (const ContractError& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return lexicon;
}

SynonymLexicon SynonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon '" + path + "'");
  return parse(in, path);
}

bool SynonymLexicon::contains(std::string_view word) const { return entries_.find(word) != entries_.end(); }

bool SynonymLexicon::is_stopword(std::string_view word) const { return stopwords_.find(word) != stopwords_.end(); }

std::optional<Pos> SynonymLexicon::primary_pos(std::string_view word) const {
  auto it = entries_.find(word);
  if (it == entries_.end()) return std::nullopt;
  return it->second.front().pos;
}

std::set<Pos> SynonymLexicon::pos_tags(std::string_view word) const {
  std::set<Pos> tags;
  if (auto it = entries_.find(word); it != entries_.end()) {
    for (const Entry& e : it->second) tags.insert(e.pos);
    return tags;
  }
  if (auto it = listed_as_.find(word); it != listed_as_.end()) tags = it->second;
  return tags;
}

std::vector<std::string> SynonymLexicon::candidates(std::string_view word) const {
  std::vector<std::string> out;
  auto it = entries_.find(word);
  if (it == entries_.end()) return out;
  const Pos pos = it->second.front().pos;
  for (const Entry& e : it->second) {
    if (e.pos != pos) continue;
    for (const std::string& syn : e.synonyms) {
      if (!pos_tags(syn).count(pos)) continue;
      if (std::find(out.begin(), out.end(), syn) == out.end()) out.push_back(syn);
    }
  }
  return out;
}

void AugmentationConfig::validate() const {
  if (!(count_param > 0.0 && count_param < 1.0)) throw ConfigError("count parameter must lie in (0, 1)");
  if (!(synonym_param > 0.0 && synonym_param < 1.0)) throw ConfigError("synonym parameter must lie in (0, 1)");
}

std::vector<TokenSpan> whitespace_tokens(std::string_view text) {
  std::vector<TokenSpan> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i == text.size()) break;
    const std::size_t begin = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    tokens.push_back({begin, i});
  }
  return tokens;
}

std::string token_core(std::string_view token) {
  const auto [b, e] = core_range(token);
  return to_lower_ascii(token.substr(b, e - b));
}

std::vector<std::size_t> replaceable_tokens(std::string_view tweet, const SynonymLexicon& lexicon) {
  std::vector<std::size_t> out;
  const auto tokens = whitespace_tokens(tweet);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string_view token = tweet.substr(tokens[i].begin, tokens[i].end - tokens[i].begin);
    if (excluded_token(token)) continue;
    const std::string core = token_core(token);
    if (core.empty() || lexicon.is_stopword(core)) continue;
    if (lexicon.candidates(core).empty()) continue;
    out.push_back(i);
  }
  return out;
}

std::size_t sample_geometric_truncated(double param, std::size_t max, Rng& rng) {
  if (!(param > 0.0 && param < 1.0)) throw ContractError("geometric parameter must lie in (0, 1)");
  if (max < 1) throw ContractError("geometric support must contain at least one value");
  // Inverse CDF over the normalized weights param^1 .. param^max.
  std::vector<double> weights(max);
  double w = param, total = 0.0;
  for (std::size_t k = 0; k < max; ++k) {
    weights[k] = w;
    total += w;
    w *= param;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < max; ++k) {
    acc += weights[k];
    if (u < acc) return k + 1;
  }
  return max;
}

AugmentedPair augment_n(std::string_view tweet, const SynonymLexicon& lexicon, std::size_t count,
                        double synonym_param, Rng& rng) {
  AugmentedPair pair{std::string(tweet), std::string(tweet), {}};
  std::vector<std::size_t> positions = replaceable_tokens(tweet, lexicon);
  count = std::min(count, positions.size());
  if (count == 0) return pair;

  // Partial Fisher-Yates: first `count` entries become a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(positions.size() - i));
    std::swap(positions[i], positions[j]);
  }
  positions.resize(count);
  std::sort(positions.begin(), positions.end());

  const auto tokens = whitespace_tokens(tweet);
  std::string target;
  std::size_t cursor = 0;
  for (std::size_t pos : positions) {
    const TokenSpan span = tokens[pos];
    const std::string_view token = tweet.substr(span.begin, span.end - span.begin);
    const auto [cb, ce] = core_range(token);
    const std::string core = to_lower_ascii(token.substr(cb, ce - cb));
    const std::vector<std::string> options = lexicon.candidates(core);
    const std::size_t m = sample_geometric_truncated(synonym_param, options.size(), rng);
    target.append(tweet.substr(cursor, span.begin + cb - cursor));
    target.append(options[m - 1]);
    cursor = span.begin + ce;
    pair.replacements.push_back({pos, core, options[m - 1]});
  }
  target.append(tweet.substr(cursor));
  pair.target = std::move(target);
  return pair;
}

AugmentedPair augment(std::string_view tweet, const SynonymLexicon& lexicon, const AugmentationConfig& config,
                      Rng& rng) {
  config.validate();
  const std::size_t available = replaceable_tokens(tweet, lexicon).size();
  if (available == 0) return AugmentedPair{std::string(tweet), std::string(tweet), {}};
  const std::size_t n = sample_geometric_truncated(config.count_param, available, rng);
  return augment_n(tweet, lexicon, n, config.synonym_param, rng);
}

}  // namespace charembed
