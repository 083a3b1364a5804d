#include <string>
#include <string_view>

#include "authscan/oracles.hpp"

// Suffix-stripping stemmer. A consonant is any letter other than a, e, i, o,
// u, and other than y preceded by a consonant. With a word written as
// [C](VC)^m[V], m is its measure. Rules fire per step on the longest listed
// suffix; a matched suffix whose condition fails still ends the step.

namespace authscan {

namespace {

bool is_consonant(std::string_view w, std::size_t i) {
  char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
  if (c == 'y') return i == 0 ? true : !is_consonant(w, i - 1);
  return true;
}

int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < stem.size(); ++i) {
    bool cons = is_consonant(stem, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i)
    if (!is_consonant(stem, i)) return true;
  return false;
}

bool ends_double_consonant(std::string_view w) {
  return w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] &&
         is_consonant(w, w.size() - 1);
}

// *o: stem ends consonant-vowel-consonant where the final consonant is not
// w, x or y.
bool ends_cvc(std::string_view w) {
  if (w.size() < 3) return false;
  char last = w[w.size() - 1];
  if (last == 'w' || last == 'x' || last == 'y') return false;
  return is_consonant(w, w.size() - 3) && !is_consonant(w, w.size() - 2) &&
         is_consonant(w, w.size() - 1);
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.compare(w.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string_view stem_of(std::string_view w, std::string_view suffix) {
  return w.substr(0, w.size() - suffix.size());
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// First matching suffix decides the step: replace when measure(stem) exceeds
// min_measure, otherwise leave the word as is.
std::string apply_rules(std::string word, std::initializer_list<Rule> rules,
                        int min_measure) {
  for (const Rule& rule : rules) {
    if (!ends_with(word, rule.suffix)) continue;
    std::string_view stem = stem_of(word, rule.suffix);
    if (measure(stem) > min_measure)
      return std::string(stem) + std::string(rule.replacement);
    return word;
  }
  return word;
}

std::string step1a(std::string w) {
  if (ends_with(w, "sses")) return std::string(stem_of(w, "sses")) + "ss";
  if (ends_with(w, "ies")) return std::string(stem_of(w, "ies")) + "i";
  if (ends_with(w, "ss")) return w;
  if (ends_with(w, "s")) return std::string(stem_of(w, "s"));
  return w;
}

std::string step1b(std::string w) {
  if (ends_with(w, "eed")) {
    std::string_view stem = stem_of(w, "eed");
    if (measure(stem) > 0) return std::string(stem) + "ee";
    return w;
  }
  std::string_view removed;
  if (ends_with(w, "ed") && contains_vowel(stem_of(w, "ed")))
    removed = stem_of(w, "ed");
  else if (ends_with(w, "ing") && contains_vowel(stem_of(w, "ing")))
    removed = stem_of(w, "ing");
  else
    return w;

  std::string stem(removed);
  if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz"))
    return stem + "e";
  if (ends_double_consonant(stem)) {
    char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::string step1c(std::string w) {
  if (ends_with(w, "y") && contains_vowel(stem_of(w, "y")))
    return std::string(stem_of(w, "y")) + "i";
  return w;
}

std::string step2(std::string w) {
  return apply_rules(std::move(w),
                     {{"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
                      {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
                      {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
                      {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
                      {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
                      {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
                      {"iviti", "ive"},   {"biliti", "ble"}},
                     0);
}

std::string step3(std::string w) {
  return apply_rules(std::move(w),
                     {{"icate", "ic"},
                      {"ative", ""},
                      {"alize", "al"},
                      {"iciti", "ic"},
                      {"ical", "ic"},
                      {"ful", ""},
                      {"ness", ""}},
                     0);
}

std::string step4(std::string w) {
  static constexpr std::string_view kSuffixes[] = {
      "al",    "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement",
      "ment",  "ent",  "ion",  "ou",  "ism", "ate",  "iti",  "ous", "ive",
      "ize"};
  for (std::string_view suffix : kSuffixes) {
    if (!ends_with(w, suffix)) continue;
    std::string_view stem = stem_of(w, suffix);
    if (measure(stem) <= 1) return w;
    if (suffix == "ion" && !(ends_with(stem, "s") || ends_with(stem, "t")))
      return w;
    return std::string(stem);
  }
  return w;
}

std::string step5a(std::string w) {
  if (!ends_with(w, "e")) return w;
  std::string_view stem = stem_of(w, "e");
  int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return std::string(stem);
  return w;
}

std::string step5b(std::string w) {
  if (ends_with(w, "ll") && measure(w.substr(0, w.size() - 1)) > 1)
    w.pop_back();
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  std::string w(word);
  w = step1a(std::move(w));
  w = step1b(std::move(w));
  w = step1c(std::move(w));
  w = step2(std::move(w));
  w = step3(std::move(w));
  w = step4(std::move(w));
  w = step5a(std::move(w));
  w = step5b(std::move(w));
  return w;
}

}  // namespace authscan
