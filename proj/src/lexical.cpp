#include "parafuse/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "parafuse/error.hpp"
#include "parafuse/utf8.hpp"

namespace parafuse::lexical {
namespace {

void require_non_empty(const TokenSeq& a, const TokenSeq& b, const char* metric) {
  if (a.empty() || b.empty()) throw InputError(std::string(metric) + ": empty token sequence");
}

using NgramCounts = std::map<std::vector<std::string>, std::int64_t>;

NgramCounts ngrams(const TokenSeq& seq, size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (size_t i = 0; i + n <= seq.size(); ++i) {
    ++counts[std::vector<std::string>(seq.begin() + i, seq.begin() + i + n)];
  }
  return counts;
}

std::int64_t clipped_overlap(const NgramCounts& hyp, const NgramCounts& ref) {
  std::int64_t overlap = 0;
  for (const auto& [gram, count] : hyp) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

std::int64_t total(const NgramCounts& counts) {
  std::int64_t t = 0;
  for (const auto& [gram, count] : counts) t += count;
  return t;
}

double f1(double precision, double recall) {
  return precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
}

template <typename Seq>
size_t levenshtein(const Seq& a, const Seq& b) {
  std::vector<size_t> prev(b.size() + 1);
  std::vector<size_t> cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  std::vector<size_t> prev(b.size() + 1, 0);
  std::vector<size_t> cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// METEOR alignment: (position, word) lists that shrink as stages match.
using Enumerated = std::vector<std::pair<size_t, std::string>>;
using Alignment = std::vector<std::pair<size_t, size_t>>;  // (hyp pos, ref pos)

// Walks hypothesis words from the end; each takes the last still-unmatched
// reference word it matches.
template <typename Match>
void match_stage(Enumerated& hyp, Enumerated& ref, Alignment& out, Match&& matches) {
  for (size_t i = hyp.size(); i-- > 0;) {
    for (size_t j = ref.size(); j-- > 0;) {
      if (matches(hyp[i].second, ref[j].second)) {
        out.emplace_back(hyp[i].first, ref[j].first);
        hyp.erase(hyp.begin() + static_cast<std::ptrdiff_t>(i));
        ref.erase(ref.begin() + static_cast<std::ptrdiff_t>(j));
        break;
      }
    }
  }
}

Enumerated enumerate(const TokenSeq& seq) {
  Enumerated out;
  for (size_t i = 0; i < seq.size(); ++i) out.emplace_back(i, seq[i]);
  return out;
}

size_t count_chunks(const Alignment& sorted) {
  size_t chunks = 1;
  for (size_t i = 0; i + 1 < sorted.size(); ++i) {
    const bool adjacent =
        sorted[i + 1].first == sorted[i].first + 1 && sorted[i + 1].second == sorted[i].second + 1;
    if (!adjacent) ++chunks;
  }
  return chunks;
}

}  // namespace

double bow_overlap(const TokenSeq& src, const TokenSeq& par) {
  require_non_empty(src, par, "bow_overlap");
  std::map<std::string, std::int64_t> counts;
  for (const auto& t : src) ++counts[t];
  std::int64_t common = 0;
  for (const auto& t : par) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 1.0 - static_cast<double>(common) / static_cast<double>(std::max(src.size(), par.size()));
}

double token_jaccard(const TokenSeq& src, const TokenSeq& par) {
  require_non_empty(src, par, "token_jaccard");
  const std::set<std::string> a(src.begin(), src.end());
  const std::set<std::string> b(par.begin(), par.end());
  size_t common = 0;
  for (const auto& t : a) common += b.count(t);
  const size_t uni = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

double BleuStats::bleu(Smoothing smoothing) const {
  if (hyp_len == 0) return 0.0;
  if (std::all_of(matches.begin(), matches.end(), [](std::int64_t m) { return m == 0; })) return 0.0;
  double log_sum = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    if (totals[n] == 0) return 0.0;
    double precision;
    if (matches[n] > 0) {
      precision = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    } else if (smoothing == Smoothing::method1) {
      precision = 0.1 / static_cast<double>(totals[n]);
    } else {
      return 0.0;
    }
    log_sum += std::log(precision);
  }
  const double bp =
      hyp_len < ref_len ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len))
                        : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

BleuStats bleu_stats(const TokenSeq& ref, const TokenSeq& hyp) {
  BleuStats stats;
  for (size_t n = 1; n <= 4; ++n) {
    const NgramCounts h = ngrams(hyp, n);
    stats.matches[n - 1] = clipped_overlap(h, ngrams(ref, n));
    stats.totals[n - 1] = total(h);
  }
  stats.hyp_len = static_cast<std::int64_t>(hyp.size());
  stats.ref_len = static_cast<std::int64_t>(ref.size());
  return stats;
}

double sentence_bleu(const TokenSeq& ref, const TokenSeq& hyp, Smoothing smoothing) {
  require_non_empty(ref, hyp, "sentence_bleu");
  return 1.0 - bleu_stats(ref, hyp).bleu(smoothing);
}

double corpus_bleu(std::span<const std::pair<TokenSeq, TokenSeq>> pairs, Smoothing smoothing) {
  if (pairs.empty()) throw InputError("corpus_bleu: empty pair list");
  BleuStats stats;
  for (const auto& [ref, hyp] : pairs) {
    require_non_empty(ref, hyp, "corpus_bleu");
    stats += bleu_stats(ref, hyp);
  }
  return 1.0 - stats.bleu(smoothing);
}

double google_bleu(const TokenSeq& ref, const TokenSeq& hyp) {
  require_non_empty(ref, hyp, "google_bleu");
  std::int64_t matches = 0;
  std::int64_t hyp_total = 0;
  std::int64_t ref_total = 0;
  for (size_t n = 1; n <= 4; ++n) {
    const NgramCounts h = ngrams(hyp, n);
    const NgramCounts r = ngrams(ref, n);
    matches += clipped_overlap(h, r);
    hyp_total += total(h);
    ref_total += total(r);
  }
  const std::int64_t denom = std::max(hyp_total, ref_total);
  return 1.0 - static_cast<double>(matches) / static_cast<double>(denom);
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synonym lexicon " + path.string());
  SynonymLexicon lexicon;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> group;
    for (std::string w; words >> w;) group.push_back(normalize_text(w));
    if (group.size() >= 2) lexicon.add_group(group);
  }
  return lexicon;
}

void SynonymLexicon::add_group(const std::vector<std::string>& words) {
  const int id = next_group_++;
  for (const auto& w : words) {
    // Matching runs on stems, so register both forms.
    for (const std::string& form : {w, porter_stem(w)}) {
      auto& ids = groups_[form];
      if (ids.empty() || ids.back() != id) ids.push_back(id);
    }
  }
}

bool SynonymLexicon::synonyms(const std::string& a, const std::string& b) const {
  auto ia = groups_.find(a);
  auto ib = groups_.find(b);
  if (ia == groups_.end() || ib == groups_.end()) return false;
  for (int g : ia->second) {
    if (std::find(ib->second.begin(), ib->second.end(), g) != ib->second.end()) return true;
  }
  return false;
}

double meteor(const TokenSeq& ref, const TokenSeq& hyp, const SynonymLexicon* synonyms) {
  require_non_empty(ref, hyp, "meteor");
  Enumerated h = enumerate(hyp);
  Enumerated r = enumerate(ref);
  Alignment alignment;
  const auto equal = [](const std::string& a, const std::string& b) { return a == b; };
  match_stage(h, r, alignment, equal);
  for (auto& [pos, word] : h) word = porter_stem(word);
  for (auto& [pos, word] : r) word = porter_stem(word);
  match_stage(h, r, alignment, equal);
  if (synonyms && !synonyms->empty()) {
    match_stage(h, r, alignment, [&](const std::string& a, const std::string& b) {
      return a == b || synonyms->synonyms(a, b);
    });
  }
  if (alignment.empty()) return 1.0;
  std::sort(alignment.begin(), alignment.end());

  const double m = static_cast<double>(alignment.size());
  const double precision = m / static_cast<double>(hyp.size());
  const double recall = m / static_cast<double>(ref.size());
  const double fmean = precision * recall / (0.9 * precision + 0.1 * recall);
  const double fragmentation = static_cast<double>(count_chunks(alignment)) / m;
  const double penalty = 0.5 * fragmentation * fragmentation * fragmentation;
  return 1.0 - (1.0 - penalty) * fmean;
}

double rouge(const TokenSeq& ref, const TokenSeq& hyp, RougeVariant variant) {
  require_non_empty(ref, hyp, "rouge");
  double precision;
  double recall;
  if (variant == RougeVariant::rL) {
    const double lcs = static_cast<double>(lcs_length(ref, hyp));
    precision = lcs / static_cast<double>(hyp.size());
    recall = lcs / static_cast<double>(ref.size());
  } else {
    const size_t n = variant == RougeVariant::r1 ? 1 : 2;
    const NgramCounts h = ngrams(hyp, n);
    const NgramCounts r = ngrams(ref, n);
    const double overlap = static_cast<double>(clipped_overlap(h, r));
    precision = overlap / static_cast<double>(std::max<std::int64_t>(total(h), 1));
    recall = overlap / static_cast<double>(std::max<std::int64_t>(total(r), 1));
  }
  return 1.0 - f1(precision, recall);
}

double wer(const TokenSeq& ref, const TokenSeq& hyp) {
  if (ref.empty()) throw InputError("wer: empty reference");
  return static_cast<double>(levenshtein(ref.tokens(), hyp.tokens())) / static_cast<double>(ref.size());
}

double cer(std::string_view ref, std::string_view hyp) {
  const std::u32string r = utf8::decode(ref);
  const std::u32string h = utf8::decode(hyp);
  if (r.empty()) throw InputError("cer: empty reference");
  return static_cast<double>(levenshtein(r, h)) / static_cast<double>(r.size());
}

LexicalScores lexical_profile(const SentencePair& pair, const SynonymLexicon* synonyms) {
  try {
    const TokenSeq src = tokenize(pair.source);
    const TokenSeq par = tokenize(pair.paraphrase);
    if (src.empty() || par.empty()) throw InputError("text has no tokens");
    const BleuStats stats = bleu_stats(src, par);
    LexicalScores s;
    s.bow_overlap = bow_overlap(src, par);
    s.corpus_bleu = 1.0 - stats.bleu(Smoothing::none);
    s.corpus_bleu2 = 1.0 - stats.bleu(Smoothing::method1);
    s.sentence_bleu = s.corpus_bleu2;
    s.meteor = meteor(src, par, synonyms);
    s.rouge1 = rouge(src, par, RougeVariant::r1);
    s.rouge2 = rouge(src, par, RougeVariant::r2);
    s.rougeL = rouge(src, par, RougeVariant::rL);
    s.token_jaccard = token_jaccard(src, par);
    s.ter = ter(src, par);
    s.wer = wer(src, par);
    s.cer = cer(normalize_text(pair.source), normalize_text(pair.paraphrase));
    s.google_bleu = google_bleu(src, par);
    return s;
  } catch (const InputError& e) {
    throw InputError("pair \"" + pair.id + "\": " + e.what());
  }
}

}  // namespace parafuse::lexical
