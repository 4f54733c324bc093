#pragma once

// Seeded generator of short tweet-like strings for the overfit harness.

#include <set>
#include <string>
#include <vector>

#include "charembed/rng.hpp"

namespace charembed::testing {

inline std::vector<std::string> synthetic_tweets(std::size_t count, std::size_t max_chars, Rng& rng) {
  static const std::vector<std::string> subjects = {"i", "we", "my dog", "the team", "our cat", "you", "she", "mom"};
  static const std::vector<std::string> verbs = {"love", "hate", "miss", "need", "want", "made", "found", "saw"};
  static const std::vector<std::string> objects = {"pizza", "the game", "coffee", "rain", "my phone", "music",
                                                   "the beach", "tacos", "snow", "that show", "a new bike"};
  static const std::vector<std::string> tails = {"!!", " lol", " :)", " #happy", " #fail", "...", " 2day", "?"};
  static const std::vector<std::string> handles = {"@sam ", "@jo ", "@alex ", "", "", ""};

  auto pick = [&rng](const std::vector<std::string>& v) -> const std::string& { return v[rng.below(v.size())]; };
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string t = pick(handles) + pick(subjects) + " " + pick(verbs) + " " + pick(objects);
    if (rng.below(2) == 0) t += " at " + std::to_string(1 + rng.below(12)) + "pm";
    t += pick(tails);
    if (t.size() <= max_chars && seen.insert(t).second) out.push_back(t);
  }
  return out;
}

}  // namespace charembed::testing
