// Porter stemmer, original 1980 rule set. Operates on lowercased ASCII;
// words containing other bytes pass through the same rules unchanged where
// no suffix applies.

#include <functional>
#include <initializer_list>

#include "parafuse/lexical.hpp"

namespace parafuse::lexical {
namespace {

bool is_consonant(std::string_view w, size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 ? true : !is_consonant(w, i - 1);
    default:
      return true;
  }
}

// m in [C](VC)^m[V].
int measure(std::string_view stem) {
  int m = 0;
  bool prev_vowel = false;
  for (size_t i = 0; i < stem.size(); ++i) {
    const bool cons = is_consonant(stem, i);
    if (cons && prev_vowel) ++m;
    prev_vowel = !cons;
  }
  return m;
}

bool contains_vowel(std::string_view stem) {
  for (size_t i = 0; i < stem.size(); ++i) {
    if (!is_consonant(stem, i)) return true;
  }
  return false;
}

bool ends_double_consonant(std::string_view w) {
  const size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends consonant-vowel-consonant, last consonant not w, x or y.
bool ends_cvc(std::string_view w) {
  const size_t n = w.size();
  return n >= 3 && is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) &&
         w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y';
}

using Condition = std::function<bool(std::string_view)>;

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  Condition condition;
};

// The first rule whose suffix matches decides: applied if its condition
// holds, otherwise the word is left alone.
std::string apply_rules(const std::string& word, std::initializer_list<Rule> rules) {
  for (const auto& rule : rules) {
    if (!word.ends_with(rule.suffix)) continue;
    const std::string_view stem = std::string_view(word).substr(0, word.size() - rule.suffix.size());
    if (!rule.condition || rule.condition(stem)) return std::string(stem) + std::string(rule.replacement);
    return word;
  }
  return word;
}

bool m_gt0(std::string_view s) { return measure(s) > 0; }
bool m_gt1(std::string_view s) { return measure(s) > 1; }

std::string step1a(const std::string& w) {
  return apply_rules(w, {{"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}}});
}

std::string step1b(const std::string& w) {
  if (w.ends_with("eed")) {
    const std::string stem = w.substr(0, w.size() - 3);
    return measure(stem) > 0 ? stem + "ee" : w;
  }
  std::string stem;
  bool removed = false;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (w.ends_with(suffix)) {
      stem = w.substr(0, w.size() - suffix.size());
      if (contains_vowel(stem)) {
        removed = true;
        break;
      }
    }
  }
  if (!removed) return w;
  if (stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz")) return stem + "e";
  if (ends_double_consonant(stem)) {
    const char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::string step1c(const std::string& w) {
  if (w.ends_with('y') && contains_vowel(std::string_view(w).substr(0, w.size() - 1))) {
    return w.substr(0, w.size() - 1) + "i";
  }
  return w;
}

std::string step2(const std::string& w) {
  return apply_rules(w, {{"ational", "ate", m_gt0}, {"tional", "tion", m_gt0},
                         {"enci", "ence", m_gt0},    {"anci", "ance", m_gt0},
                         {"izer", "ize", m_gt0},     {"abli", "able", m_gt0},
                         {"alli", "al", m_gt0},      {"entli", "ent", m_gt0},
                         {"eli", "e", m_gt0},        {"ousli", "ous", m_gt0},
                         {"ization", "ize", m_gt0},  {"ation", "ate", m_gt0},
                         {"ator", "ate", m_gt0},     {"alism", "al", m_gt0},
                         {"iveness", "ive", m_gt0},  {"fulness", "ful", m_gt0},
                         {"ousness", "ous", m_gt0},  {"aliti", "al", m_gt0},
                         {"iviti", "ive", m_gt0},    {"biliti", "ble", m_gt0}});
}

std::string step3(const std::string& w) {
  return apply_rules(w, {{"icate", "ic", m_gt0}, {"ative", "", m_gt0}, {"alize", "al", m_gt0},
                         {"iciti", "ic", m_gt0}, {"ical", "ic", m_gt0}, {"ful", "", m_gt0},
                         {"ness", "", m_gt0}});
}

std::string step4(const std::string& w) {
  const Condition ion = [](std::string_view s) {
    return measure(s) > 1 && !s.empty() && (s.back() == 's' || s.back() == 't');
  };
  return apply_rules(w, {{"al", "", m_gt1},   {"ance", "", m_gt1}, {"ence", "", m_gt1},
                         {"er", "", m_gt1},   {"ic", "", m_gt1},   {"able", "", m_gt1},
                         {"ible", "", m_gt1}, {"ant", "", m_gt1},  {"ement", "", m_gt1},
                         {"ment", "", m_gt1}, {"ent", "", m_gt1},  {"ion", "", ion},
                         {"ou", "", m_gt1},   {"ism", "", m_gt1},  {"ate", "", m_gt1},
                         {"iti", "", m_gt1},  {"ous", "", m_gt1},  {"ive", "", m_gt1},
                         {"ize", "", m_gt1}});
}

std::string step5a(const std::string& w) {
  if (!w.ends_with('e')) return w;
  const std::string stem = w.substr(0, w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return stem;
  return w;
}

std::string step5b(const std::string& w) {
  if (w.ends_with("ll") && measure(std::string_view(w).substr(0, w.size() - 1)) > 1) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  for (char& c : w) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  if (w.empty()) return w;
  w = step1a(w);
  w = step1b(w);
  w = step1c(w);
  w = step2(w);
  w = step3(w);
  w = step4(w);
  w = step5a(w);
  w = step5b(w);
  return w;
}

}  // namespace parafuse::lexical
