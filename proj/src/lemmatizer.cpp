// Rule lemmatizer: irregular forms come from a fixed dictionary, regular
// inflections are undone by ordered suffix rules. Only ASCII-lowercase
// words are touched by the suffix rules.

#include <string>
#include <unordered_map>

#include "tradrank/textproc.hpp"

namespace tradrank {

namespace {

const std::unordered_map<std::string_view, std::string_view>& exceptions() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // irregular plurals
      {"children", "child"}, {"men", "man"}, {"women", "woman"}, {"mice", "mouse"},
      {"geese", "goose"}, {"feet", "foot"}, {"teeth", "tooth"}, {"people", "person"},
      {"leaves", "leaf"}, {"lives", "life"}, {"wives", "wife"}, {"knives", "knife"},
      {"wolves", "wolf"}, {"halves", "half"}, {"shelves", "shelf"}, {"loaves", "loaf"},
      {"oxen", "ox"}, {"criteria", "criterion"}, {"phenomena", "phenomenon"},
      // irregular verbs
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"},
      {"been", "be"}, {"being", "be"}, {"has", "have"}, {"had", "have"},
      {"having", "have"}, {"does", "do"}, {"did", "do"}, {"done", "do"},
      {"went", "go"}, {"gone", "go"}, {"goes", "go"}, {"going", "go"}, {"doing", "do"},
      {"ran", "run"}, {"ate", "eat"}, {"eaten", "eat"}, {"saw", "see"}, {"seen", "see"}, {"made", "make"},
      {"took", "take"}, {"taken", "take"}, {"gave", "give"}, {"given", "give"},
      {"got", "get"}, {"gotten", "get"}, {"came", "come"}, {"knew", "know"},
      {"known", "know"}, {"thought", "think"}, {"bought", "buy"}, {"brought", "bring"},
      {"found", "find"}, {"told", "tell"}, {"said", "say"}, {"wrote", "write"},
      {"written", "write"}, {"using", "use"}, {"paid", "pay"},
      // comparatives
      {"better", "good"}, {"best", "good"}, {"worse", "bad"}, {"worst", "bad"},
      // words the suffix rules would damage
      {"news", "news"}, {"series", "series"}, {"species", "species"}, {"during", "during"},
      {"nothing", "nothing"}, {"something", "something"}, {"anything", "anything"},
      {"everything", "everything"}, {"morning", "morning"}, {"evening", "evening"},
      {"ceiling", "ceiling"}, {"always", "always"}, {"perhaps", "perhaps"},
      {"various", "various"}, {"previous", "previous"}, {"famous", "famous"},
      {"hundred", "hundred"}, {"indeed", "indeed"}, {"speed", "speed"},
      {"need", "need"}, {"seed", "seed"}, {"feed", "feed"}, {"bed", "bed"},
  };
  return table;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool is_ascii_lower_word(std::string_view w) {
  for (char c : w) {
    if (c < 'a' || c > 'z') {
      return false;
    }
  }
  return true;
}

bool has_vowel(std::string_view w) {
  for (char c : w) {
    if (is_vowel(c) || c == 'y') {
      return true;
    }
  }
  return false;
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

// Trailing doubled consonant (stopp -> stop); l, s and z keep their double.
std::string undouble(std::string stem) {
  const std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

// Three-letter consonant-vowel-consonant stems lost a final e (mak -> make).
std::string restore_e(std::string stem) {
  if (stem.size() == 3 && !is_vowel(stem[0]) && is_vowel(stem[1]) && !is_vowel(stem[2]) &&
      stem[2] != 'w' && stem[2] != 'x' && stem[2] != 'y') {
    stem.push_back('e');
  }
  return stem;
}

std::string strip_verbal(std::string_view word, std::size_t suffix_len) {
  std::string stem(word.substr(0, word.size() - suffix_len));
  if (stem.size() < 3 || !has_vowel(stem)) {
    return std::string(word);
  }
  const std::string undoubled = undouble(stem);
  if (undoubled.size() != stem.size()) {
    return undoubled;
  }
  return restore_e(std::move(stem));
}

}  // namespace

std::string lemmatize_token(std::string_view token) {
  if (auto it = exceptions().find(token); it != exceptions().end()) {
    return std::string(it->second);
  }
  if (token.size() <= 3 || !is_ascii_lower_word(token)) {
    return std::string(token);
  }
  const std::string_view w = token;
  const std::size_t n = w.size();

  if (ends_with(w, "ies") && n > 4) return std::string(w.substr(0, n - 3)) + "y";
  if (ends_with(w, "sses")) return std::string(w.substr(0, n - 2));
  if (ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes") ||
      ends_with(w, "zzes")) {
    return std::string(w.substr(0, n - 2));
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return std::string(w);
  if (ends_with(w, "s")) return std::string(w.substr(0, n - 1));

  if (ends_with(w, "ied") && n > 4) return std::string(w.substr(0, n - 3)) + "y";
  if (ends_with(w, "eed")) return std::string(w.substr(0, n - 1));
  if (ends_with(w, "ed")) {
    if (n - 2 < 3) {
      return std::string(w.substr(0, n - 1));  // used -> use, aged -> age
    }
    return strip_verbal(w, 2);
  }
  if (ends_with(w, "ing")) return strip_verbal(w, 3);
  return std::string(w);
}

Tokens lemmatize(const Tokens& tokens) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    out.push_back(lemmatize_token(token));
  }
  return out;
}

}  // namespace tradrank
