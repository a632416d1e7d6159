#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "parafuse/corpus.hpp"

namespace parafuse::lexical {

// Lowercased word/punctuation tokens. Only tokenize() and from_tokens()
// create one, so tokens are never empty and never contain whitespace.
class TokenSeq {
 public:
  TokenSeq() = default;

  // Validates pre-split tokens. Throws InputError on an empty token or one
  // containing whitespace.
  static TokenSeq from_tokens(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  bool operator==(const TokenSeq&) const = default;

 private:
  friend TokenSeq tokenize(std::string_view text);
  std::vector<std::string> tokens_;
};

// Lowercases, splits on Unicode whitespace and gives every punctuation
// character its own token.
TokenSeq tokenize(std::string_view text);

// Lowercased text with whitespace runs collapsed; the character stream cer() sees.
std::string normalize_text(std::string_view text);

// 1 - |multiset intersection| / max(|src|, |par|).
double bow_overlap(const TokenSeq& src, const TokenSeq& par);

// 1 - |set intersection| / |set union|.
double token_jaccard(const TokenSeq& src, const TokenSeq& par);

enum class Smoothing { none, method1 };

// Clipped n-gram statistics for n = 1..4. Sums are associative and
// commutative, so partial counts from any partition merge to the same total.
struct BleuStats {
  std::array<std::int64_t, 4> matches{};
  std::array<std::int64_t, 4> totals{};
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
  bool operator==(const BleuStats&) const = default;

  // BLEU in [0,1]: brevity penalty times the geometric mean of the four
  // precisions. Zero when there are no matches at all or the hypothesis has
  // no n-grams of some order. With Smoothing::none any zero precision gives
  // zero; method1 substitutes 0.1 for a zero match count.
  double bleu(Smoothing smoothing) const;
};

BleuStats bleu_stats(const TokenSeq& ref, const TokenSeq& hyp);

// 1 - BLEU.
double sentence_bleu(const TokenSeq& ref, const TokenSeq& hyp, Smoothing smoothing);

// 1 - BLEU over counts summed across all pairs (ref first).
double corpus_bleu(std::span<const std::pair<TokenSeq, TokenSeq>> pairs, Smoothing smoothing);

// 1 - min(precision, recall) of 1..4-gram matches.
double google_bleu(const TokenSeq& ref, const TokenSeq& hyp);

// Word groups treated as synonyms by METEOR's third matching stage.
// File format: one group per line, whitespace separated, '#' comments.
class SynonymLexicon {
 public:
  static SynonymLexicon load(const std::filesystem::path& path);
  void add_group(const std::vector<std::string>& words);
  bool synonyms(const std::string& a, const std::string& b) const;
  bool empty() const { return groups_.empty(); }

 private:
  std::unordered_map<std::string, std::vector<int>> groups_;
  int next_group_ = 0;
};

// Porter stemmer (original 1980 rules).
std::string porter_stem(std::string_view word);

// 1 - METEOR with exact, Porter-stem and (when a lexicon is given) synonym
// matching stages; alpha 0.9, beta 3, gamma 0.5.
double meteor(const TokenSeq& ref, const TokenSeq& hyp, const SynonymLexicon* synonyms = nullptr);

enum class RougeVariant { r1, r2, rL };

// 1 - F1.
double rouge(const TokenSeq& ref, const TokenSeq& hyp, RougeVariant variant);

// Word-level Levenshtein distance / |ref|.
double wer(const TokenSeq& ref, const TokenSeq& hyp);

// (block shifts + remaining word edits) / |ref| with greedy shift selection.
double ter(const TokenSeq& ref, const TokenSeq& hyp);

// Code-point Levenshtein distance / |ref| code points.
double cer(std::string_view ref, std::string_view hyp);

struct LexicalScores {
  double bow_overlap = 0;
  double corpus_bleu = 0;
  double corpus_bleu2 = 0;
  double sentence_bleu = 0;
  double meteor = 0;
  double rouge1 = 0;
  double rouge2 = 0;
  double rougeL = 0;
  double token_jaccard = 0;
  double ter = 0;
  double wer = 0;
  double cer = 0;
  double google_bleu = 0;
};

// All lexical metrics for one pair, source as reference. Per pair,
// corpus_bleu/corpus_bleu2 equal the sentence-level values with no smoothing
// and method1 smoothing. Errors carry the pair id.
LexicalScores lexical_profile(const SentencePair& pair, const SynonymLexicon* synonyms = nullptr);

}  // namespace parafuse::lexical
