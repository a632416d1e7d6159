#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parafuse/corpus.hpp"
#include "parafuse/lexical.hpp"
#include "parafuse/semantic.hpp"

namespace parafuse::report {

// Fixed columns in table order. Semantic columns ("semantic:<model>", one
// per provider) come before all of these.
enum class Metric {
  ted_f,
  ted_3,
  st_kernel,
  np_kernel,
  bow_overlap,
  corpus_bleu,
  corpus_bleu2,
  sentence_bleu,
  meteor,
  rouge1,
  rouge2,
  rougeL,
  token_jaccard,
  ter,
  wer,
  cer,
  google_bleu,
};

inline constexpr size_t kMetricCount = 17;

std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);
bool is_syntactic(Metric m);
const std::array<Metric, kMetricCount>& all_metrics();

// Comma-separated selectors: "semantic", "syntactic", "lexical", "all" or
// individual metric names. Returns the fixed metrics in canonical order and
// sets *semantic when semantic columns were requested.
std::vector<Metric> parse_metric_selection(std::string_view text, bool* semantic);

enum class OutputFormat { csv, json, markdown };
OutputFormat parse_output_format(std::string_view name);

enum class GroupBy { origin, none };

struct EvalConfig {
  std::vector<Metric> metrics;
  bool semantic = false;
  OutputFormat format = OutputFormat::json;
  GroupBy group_by = GroupBy::origin;
  // Subset names reported even when no pair falls in them.
  std::vector<std::string> subsets;
  int parallelism = 1;
  // Abort on the first missing prerequisite or remote failure instead of
  // skipping the pair for that metric.
  bool strict = false;
};

// Non-owning inputs the metrics draw on.
struct Sidecars {
  const TreeSidecar* trees = nullptr;
  std::vector<semantic::EmbeddingProvider*> providers;
  const lexical::SynonymLexicon* synonyms = nullptr;
};

// Throws InputError when syntactic metrics lack trees or semantic metrics
// lack providers.
void validate_config(const EvalConfig& config, const Sidecars& sidecars);

struct MetricCell {
  std::string name;
  std::optional<double> value;  // empty when no pair was scored
  size_t skipped = 0;
  std::map<std::string, size_t> skip_reasons;

  bool operator==(const MetricCell&) const = default;
};

struct SubsetReport {
  std::string subset;
  size_t count = 0;
  std::vector<MetricCell> metrics;  // every enabled column, canonical order

  const MetricCell* find(std::string_view name) const;
  bool operator==(const SubsetReport&) const = default;
};

// Per-pair values for the debug dump. corpus_bleu/corpus_bleu2 are not
// per-pair quantities; their inputs appear as `bleu` counts instead.
struct PairScores {
  std::string id;
  std::string subset;
  std::vector<std::pair<std::string, double>> values;  // scored columns only
  std::vector<std::pair<std::string, std::string>> skipped;  // column, reason
  lexical::BleuStats bleu;
};

// Groups pairs, scores every enabled metric and averages per group.
// corpus_bleu and corpus_bleu2 are corpus-level scores over each group's
// summed n-gram counts. Subsets come out sorted by name.
std::vector<SubsetReport> evaluate_corpus(const Corpus& corpus, const Sidecars& sidecars, const EvalConfig& config,
                                          std::vector<PairScores>* per_pair = nullptr);

// One cell as rendered in csv/markdown: ted_f/ted_3 as plain 2-decimal
// numbers, ter/wer as 2-decimal values times 100, everything else as a
// 2-decimal percentage.
std::string format_cell(std::string_view metric, double value);

std::string render_report(const std::vector<SubsetReport>& reports, OutputFormat format);

// {"id", "subset", "metrics": {...}, "skipped": {...}, "bleu": {...}} per line.
void write_pair_dump(const std::vector<PairScores>& scores, std::ostream& out);

}  // namespace parafuse::report
