#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "parafuse/corpus.hpp"
#include "parafuse/error.hpp"
#include "parafuse/remote.hpp"

namespace parafuse::pipeline {

// ---------------------------------------------------------------------------
// Moderation

inline constexpr std::array<std::string_view, 11> kModerationCategories = {
    "sexual",          "hate",
    "harassment",      "self-harm",
    "sexual/minors",   "hate/threatening",
    "violence/graphic", "self-harm/instructions",
    "self-harm/intent", "harassment/threatening",
    "violence"};

class ModerationVerdict {
 public:
  ModerationVerdict() = default;

  // Reads {"results":[{"categories":{...}}]}. Every one of the eleven
  // categories must be present as a boolean; extra keys are ignored.
  static ModerationVerdict from_response(const nlohmann::json& response);

  bool flag(std::string_view category) const;
  void set(std::string_view category, bool value);
  bool flagged() const;
  // Names of the true flags in kModerationCategories order.
  std::vector<std::string> categories() const;

  bool operator==(const ModerationVerdict&) const = default;

 private:
  std::array<bool, kModerationCategories.size()> flags_{};
};

// ---------------------------------------------------------------------------
// LLM client

// Chat and moderation calls against an OpenAI-compatible API.
class LlmClient {
 public:
  explicit LlmClient(remote::ClientConfig config);

  // POST /moderations {"input": text}.
  ModerationVerdict moderate(std::string_view text);

  // POST /chat/completions {"model", "temperature", "messages":[{"role":"user",...}]};
  // returns choices[0].message.content.
  std::string chat(std::string_view model, double temperature, std::string_view prompt);

  const remote::ClientConfig& config() const { return client_.config(); }

 private:
  remote::JsonClient client_;
};

inline ModerationVerdict moderate(std::string_view text, LlmClient& client) {
  return client.moderate(text);
}

enum class FailurePolicy { skip_and_log, fail_run };

struct DroppedPair {
  std::string id;
  std::vector<std::string> categories;
};

struct FilterFailure {
  std::string id;
  std::string error;
};

struct FilterResult {
  Corpus kept;
  std::vector<DroppedPair> dropped;
  // Pairs whose moderation call failed under skip_and_log. They are
  // excluded from `kept` because their safety is unknown.
  std::vector<FilterFailure> failures;
};

struct FilterOptions {
  FailurePolicy policy = FailurePolicy::skip_and_log;
  int parallelism = 4;
};

// Drops every pair whose source text has at least one moderation flag.
FilterResult filter_offensive(const Corpus& corpus, LlmClient& client, const FilterOptions& options = {});

// ---------------------------------------------------------------------------
// Prompts

enum class PromptVariant { plain, english_guard };

// Placeholder replaced by the source sentence in generation templates.
inline constexpr std::string_view kSourcePlaceholder = "$Source Sentence";

std::string_view prompt_template(PromptVariant variant);
std::string_view prompt_template_name(PromptVariant variant);
PromptVariant parse_prompt_variant(std::string_view name);

std::string build_prompt(std::string_view source, PromptVariant variant);
// Uses a caller-supplied template containing kSourcePlaceholder.
std::string build_prompt_from_template(std::string_view source, std::string_view templ);

// ---------------------------------------------------------------------------
// Response parsing

class ListParseError : public InputError {
 public:
  enum class Kind { no_items, non_english };
  ListParseError(Kind kind, const std::string& what) : InputError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Extracts items of a numbered list ("1. foo" or "1) foo"), skipping any
// other lines. A response that is exactly "Error" (trimmed,
// case-insensitive) raises ListParseError::Kind::non_english.
std::vector<std::string> parse_numbered_list(std::string_view raw);

// "1. a\n2. b" rendering; parse_numbered_list inverts it.
std::string render_numbered_list(std::span<const std::string> items);

// ---------------------------------------------------------------------------
// Generation

enum class GenerationStatus { ok, non_english, parse_failed, moderation_blocked, request_failed };

std::string_view status_name(GenerationStatus status);
GenerationStatus parse_status(std::string_view name);

struct GenerationRecord {
  std::string source_id;
  std::string source_text;
  OriginTag origin;
  std::string prompt_text;
  std::string raw_response;
  std::vector<std::string> parsed_paraphrases;  // 0..5 items
  GenerationStatus status = GenerationStatus::parse_failed;
  std::string error;  // set for request_failed / moderation_blocked

  bool operator==(const GenerationRecord&) const = default;
};

nlohmann::json to_json(const GenerationRecord& record);
GenerationRecord generation_record_from_json(const nlohmann::json& j);

// Audit log: one GenerationRecord per JSONL line.
void write_audit_log(std::span<const GenerationRecord> records, std::ostream& out);
std::vector<GenerationRecord> read_audit_log(std::istream& in, std::string_view name = "<input>");
std::vector<GenerationRecord> load_audit_log(const std::filesystem::path& path);

struct GenerationOptions {
  std::string model;
  double temperature = 0.0;
  PromptVariant variant = PromptVariant::plain;
  // Overrides `variant` when set; must contain kSourcePlaceholder.
  std::optional<std::string> prompt_template;
  // Run moderation on each source first and mark flagged ones
  // moderation_blocked without generating.
  bool moderate_first = false;
  int parallelism = 4;
  // Throw on the first request failure instead of recording it.
  bool fail_fast = false;
};

// One record per source, in input order regardless of completion order.
std::vector<GenerationRecord> generate(std::span<const SourceSentence> sources, LlmClient& client,
                                       const GenerationOptions& options);

// ---------------------------------------------------------------------------
// Pooling and dedup

// Trimmed, whitespace-collapsed, case preserved.
std::string normalize_sentence(std::string_view text);

// All unordered pairs of distinct members of {source} + paraphrases, each
// lexicographically ordered, the list sorted. Throws InputError when fewer
// than two distinct sentences remain.
std::vector<std::pair<std::string, std::string>> pool_pairs(std::string_view source,
                                                            std::span<const std::string> paraphrases);

struct PoolSummary {
  size_t records_used = 0;
  size_t records_skipped = 0;  // status != ok or degenerate pool
};

// Pools every ok record. Pair ids are "<source_id>-<k>" with k counting
// from 1 within the record; origin comes from the record.
Corpus pool_records(std::span<const GenerationRecord> records, PoolSummary* summary = nullptr);

// Drops identical-sided pairs and later repeats of an unordered text pair.
Corpus dedupe_corpus(const Corpus& corpus);

// ---------------------------------------------------------------------------
// LLM judge

struct JudgeRatings {
  int semantic_similarity = 0;
  int lexical_diversity = 0;
  int syntactic_diversity = 0;
  int grammatical_correctness = 0;

  bool operator==(const JudgeRatings&) const = default;
};

inline constexpr std::array<std::string_view, 4> kJudgeAspects = {
    "Semantic Similarity", "Lexical Diversity", "Syntactic Diversity", "Grammatical Correctness"};

std::string_view judge_template();
std::string build_judge_prompt(std::string_view source, std::string_view paraphrase);

class JudgeParseError : public InputError {
 public:
  using InputError::InputError;
};

// Reads the first JSON object in the text; all four aspects must be integers
// in [1, 5].
JudgeRatings parse_judge_response(std::string_view raw);

struct JudgeResult {
  std::string id;
  std::optional<JudgeRatings> ratings;
  std::string raw_response;
  std::string error;
};

struct JudgeOptions {
  std::string model;
  double temperature = 0.0;
  int parallelism = 4;
  bool fail_fast = false;
};

std::vector<JudgeResult> judge(const Corpus& corpus, LlmClient& client, const JudgeOptions& options);

}  // namespace parafuse::pipeline
