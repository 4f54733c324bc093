#include <doctest.h>

#include <array>
#include <sstream>

#include "charembed/augment.hpp"
#include "charembed/errors.hpp"

using namespace charembed;

namespace {

std::vector<std::string> tokens_of(const std::string& text) {
  std::vector<std::string> out;
  for (const TokenSpan& s : whitespace_tokens(text)) out.push_back(text.substr(s.begin, s.end - s.begin));
  return out;
}

SynonymLexicon sample_lexicon() { return SynonymLexicon::load(CHAREMBED_DATA_DIR "/lexicon_sample.tsv"); }

}  // namespace

TEST_CASE("replaceable tokens skip mentions, stopwords and unknown words") {
  SynonymLexicon lex;
  lex.add("loves", Pos::kVerb, {"adores"});
  lex.add("weather", Pos::kNoun, {"climate"});
  CHECK(replaceable_tokens("@bob loves the weather", lex) == std::vector<std::size_t>{1, 3});
  CHECK(replaceable_tokens("", lex).empty());
  CHECK(replaceable_tokens("the of and to", lex).empty());
  CHECK(replaceable_tokens("#weather http://weather.example/loves loves", lex) == std::vector<std::size_t>{2});

  lex.add_stopword("Weather");
  CHECK(replaceable_tokens("@bob loves the weather", lex) == std::vector<std::size_t>{1});
}

TEST_CASE("token core strips punctuation and lowercases") {
  CHECK(token_core("Hello,") == "hello");
  CHECK(token_core("(great!)") == "great");
  CHECK(token_core("don't") == "don't");
  CHECK(token_core("!!!").empty());
  CHECK(tokens_of("  a\tb  c\n") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("truncated geometric sampler") {
  Rng rng(17);
  CHECK_THROWS_AS(sample_geometric_truncated(0.5, 0, rng), ContractError);
  CHECK_THROWS_AS(sample_geometric_truncated(0.0, 3, rng), ContractError);
  CHECK_THROWS_AS(sample_geometric_truncated(1.0, 3, rng), ContractError);
  for (int i = 0; i < 100; ++i) CHECK(sample_geometric_truncated(0.3, 1, rng) == 1);

  std::array<int, 3> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_geometric_truncated(0.5, 2, rng) - 1];
  CHECK(counts[2] == 0);
  CHECK(std::abs(counts[0] / double(draws) - 2.0 / 3.0) < 0.01);
  CHECK(std::abs(counts[1] / double(draws) - 1.0 / 3.0) < 0.01);
}

TEST_CASE("empty lexicon leaves the tweet unchanged") {
  Rng rng(1);
  const SynonymLexicon empty;
  const AugmentedPair p = augment("nothing to see here", empty, {}, rng);
  CHECK(p.input == "nothing to see here");
  CHECK(p.target == p.input);
  CHECK(p.replacements.empty());
}

TEST_CASE("single replaceable word keeps its punctuation and everything else") {
  SynonymLexicon lex;
  lex.add("pizza", Pos::kNoun, {"pie"});
  Rng rng(2);
  const AugmentedPair p = augment_n("wow,  @pizza Pizza!  #pizza", lex, 1, 0.5, rng);
  CHECK(p.input == "wow,  @pizza Pizza!  #pizza");
  CHECK(p.target == "wow,  @pizza pie!  #pizza");
  REQUIRE(p.replacements.size() == 1);
  CHECK(p.replacements[0].token == 2);
  CHECK(p.replacements[0].original == "pizza");
}

TEST_CASE("candidates keep only synonyms that can carry the word's POS") {
  SynonymLexicon lex;
  lex.add("run", Pos::kVerb, {"sprint", "race", "run", "sprint"});
  lex.add("race", Pos::kNoun, {"contest"});
  lex.add("fast", Pos::kAdj, {"quick"});
  lex.add("fast", Pos::kAdv, {"quickly"});
  CHECK(lex.candidates("run") == std::vector<std::string>{"sprint"});
  CHECK(lex.primary_pos("fast") == Pos::kAdj);
  CHECK(lex.candidates("fast") == std::vector<std::string>{"quick"});
  CHECK(lex.pos_tags("sprint") == std::set<Pos>{Pos::kVerb});
  CHECK(lex.pos_tags("fast") == std::set<Pos>{Pos::kAdj, Pos::kAdv});
  CHECK_THROWS_AS(lex.add("x", Pos::kNoun, {"two words"}), ContractError);
}

TEST_CASE("lexicon parsing") {
  std::istringstream good("# comment\n\nHappy\tadj\tglad, joyful,happy,glad\nrun\tv\tsprint\n");
  const SynonymLexicon lex = SynonymLexicon::parse(good, "mem");
  CHECK(lex.size() == 2);
  CHECK(lex.candidates("happy") == std::vector<std::string>{"glad", "joyful"});
  CHECK(lex.primary_pos("run") == Pos::kVerb);

  std::istringstream bad_pos("fine\tadj\tgood\nodd\tcolour\tweird\n");
  try {
    SynonymLexicon::parse(bad_pos, "lex.tsv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("lex.tsv:2") != std::string::npos);
  }
  std::istringstream short_line("lonely\n");
  CHECK_THROWS_AS(SynonymLexicon::parse(short_line, "s"), IoError);
  CHECK_THROWS_AS(SynonymLexicon::load("/nonexistent/lexicon.tsv"), IoError);
}

TEST_CASE("shipped lexicon loads and respects its invariants") {
  const SynonymLexicon lex = sample_lexicon();
  CHECK(lex.size() >= 200);
  CHECK(lex.candidates("movie").front() == "film");
}

TEST_CASE("augmentation invariants over many draws") {
  const SynonymLexicon lex = sample_lexicon();
  const std::vector<std::string> tweets = {
      "I love this movie, it is really great!!",
      "@anna the weather is awful today #rain",
      "my boss is angry about the problem at work",
      "happy kid, funny show, big party. quick trip to the city",
      "nothing replaceable here http://x.io",
  };
  Rng rng(4242);
  const AugmentationConfig config;
  std::size_t replacements = 0, same_pos = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string& tweet = tweets[i % tweets.size()];
    const AugmentedPair p = augment(tweet, lex, config, rng);
    CHECK(p.input == tweet);
    const auto in = tokens_of(p.input), out = tokens_of(p.target);
    REQUIRE(in.size() == out.size());
    std::vector<bool> replaced(in.size(), false);
    for (const Replacement& r : p.replacements) {
      replaced[r.token] = true;
      ++replacements;
      const auto pos = lex.primary_pos(r.original);
      if (pos && lex.pos_tags(r.synonym).count(*pos)) ++same_pos;
      CHECK(out[r.token].find(r.synonym) != std::string::npos);
    }
    for (std::size_t t = 0; t < in.size(); ++t) {
      if (!replaced[t]) CHECK(in[t] == out[t]);
    }
  }
  CHECK(replacements > 5000);
  CHECK(same_pos == replacements);
}

TEST_CASE("augmentation is deterministic for a fixed seed") {
  const SynonymLexicon lex = sample_lexicon();
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) {
    const AugmentedPair x = augment("the big fast car made a loud noise", lex, {}, a);
    const AugmentedPair y = augment("the big fast car made a loud noise", lex, {}, b);
    CHECK(x.target == y.target);
  }
}
