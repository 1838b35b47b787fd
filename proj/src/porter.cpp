#include "claimmatch/porter.hpp"

#include <array>
#include <span>

namespace claimmatch {
namespace {

bool is_cons(std::string_view w, std::size_t i) {
  char c = w[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return false;
  if (c == 'y') return i == 0 ? true : !is_cons(w, i - 1);
  return true;
}

// Number of VC sequences in the C?(VC){m}V? decomposition of the stem.
int measure(std::string_view w) {
  std::size_t i = 0;
  const std::size_t n = w.size();
  int m = 0;
  while (i < n && is_cons(w, i)) ++i;
  while (true) {
    if (i == n) return m;
    while (i < n && !is_cons(w, i)) ++i;
    if (i == n) return m;
    ++m;
    while (i < n && is_cons(w, i)) ++i;
  }
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!is_cons(w, i)) return true;
  }
  return false;
}

bool ends_double_cons(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_cons(w, n - 1);
}

// *o condition: stem ends cvc where the final c is not w, x or y.
bool ends_cvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (!is_cons(w, n - 3) || is_cons(w, n - 2) || !is_cons(w, n - 1)) {
    return false;
  }
  char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         w.substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

// First matching suffix wins; the replacement fires only if measure(stem)
// exceeds the threshold, otherwise the rule list stops without change.
std::string apply_rules(std::string_view w, std::span<const Rule> rules,
                        int min_measure) {
  for (const Rule& r : rules) {
    if (ends_with(w, r.suffix)) {
      std::string_view stem = w.substr(0, w.size() - r.suffix.size());
      if (measure(stem) > min_measure) {
        return std::string(stem) + std::string(r.replacement);
      }
      return std::string(w);
    }
  }
  return std::string(w);
}

std::string step1a(std::string w) {
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ies")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ss")) return w;
  if (ends_with(w, "s")) return w.substr(0, w.size() - 1);
  return w;
}

std::string step1b(std::string w) {
  if (ends_with(w, "eed")) {
    if (measure(std::string_view(w).substr(0, w.size() - 3)) > 0) {
      return w.substr(0, w.size() - 1);
    }
    return w;
  }
  bool stripped = false;
  if (ends_with(w, "ed")) {
    std::string_view stem = std::string_view(w).substr(0, w.size() - 2);
    if (has_vowel(stem)) {
      w = std::string(stem);
      stripped = true;
    }
  } else if (ends_with(w, "ing")) {
    std::string_view stem = std::string_view(w).substr(0, w.size() - 3);
    if (has_vowel(stem)) {
      w = std::string(stem);
      stripped = true;
    }
  }
  if (stripped) {
    if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
      return w + "e";
    }
    if (ends_double_cons(w)) {
      char c = w.back();
      if (c != 'l' && c != 's' && c != 'z') return w.substr(0, w.size() - 1);
      return w;
    }
    if (measure(w) == 1 && ends_cvc(w)) return w + "e";
  }
  return w;
}

std::string step1c(std::string w) {
  if (ends_with(w, "y") &&
      has_vowel(std::string_view(w).substr(0, w.size() - 1))) {
    w.back() = 'i';
  }
  return w;
}

constexpr std::array<Rule, 21> kStep2 = {{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
    {"anci", "ance"},   {"izer", "ize"},    {"bli", "ble"},
    {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
    {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
    {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
    {"iviti", "ive"},   {"biliti", "ble"},  {"logi", "log"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
}};

constexpr std::array<std::string_view, 19> kStep4 = {
    "al",  "ance", "ence", "er",    "ic",   "able", "ible",
    "ant", "ement", "ment", "ent",  "ion",  "ou",   "ism",
    "ate", "iti",  "ous",  "ive",  "ize",
};

std::string step4(std::string w) {
  for (std::string_view suffix : kStep4) {
    if (ends_with(w, suffix)) {
      std::string_view stem = std::string_view(w).substr(0, w.size() - suffix.size());
      if (suffix == "ion" && !(ends_with(stem, "s") || ends_with(stem, "t"))) {
        return w;
      }
      if (measure(stem) > 1) return std::string(stem);
      return w;
    }
  }
  return w;
}

std::string step5a(std::string w) {
  if (ends_with(w, "e")) {
    std::string_view stem = std::string_view(w).substr(0, w.size() - 1);
    int m = measure(stem);
    if (m > 1 || (m == 1 && !ends_cvc(stem))) return std::string(stem);
  }
  return w;
}

std::string step5b(std::string w) {
  if (measure(w) > 1 && ends_double_cons(w) && w.back() == 'l') {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 2) return w;
  w = step1a(std::move(w));
  w = step1b(std::move(w));
  w = step1c(std::move(w));
  w = apply_rules(w, kStep2, 0);
  w = apply_rules(w, kStep3, 0);
  w = step4(std::move(w));
  w = step5a(std::move(w));
  w = step5b(std::move(w));
  return w;
}

}  // namespace claimmatch
