#include "parafuse/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <regex>
#include <set>

#include "parafuse/parallel.hpp"
#include "parafuse/utf8.hpp"

namespace parafuse::pipeline {
namespace {

using nlohmann::json;

size_t category_index(std::string_view category) {
  for (size_t i = 0; i < kModerationCategories.size(); ++i) {
    if (kModerationCategories[i] == category) return i;
  }
  throw InputError("unknown moderation category \"" + std::string(category) + "\"");
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const auto lower = [](char c) { return c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c; };
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

// Strips whitespace and one or more layers of matching quote characters.
std::string strip_item(std::string_view text) {
  static const std::pair<std::string_view, std::string_view> kQuotes[] = {
      {"\"", "\""}, {"'", "'"}, {"“", "”"}, {"‘", "’"}, {"`", "`"}};
  std::string_view s = utf8::trim(text);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [open, close] : kQuotes) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = utf8::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        changed = true;
      }
    }
  }
  return std::string(s);
}

}  // namespace

// ---------------------------------------------------------------------------
// Moderation

ModerationVerdict ModerationVerdict::from_response(const json& response) {
  const auto results = response.find("results");
  if (results == response.end() || !results->is_array() || results->empty()) {
    throw RemoteError("moderation response lacks a \"results\" array");
  }
  const auto& first = (*results)[0];
  const auto cats = first.find("categories");
  if (cats == first.end() || !cats->is_object()) {
    throw RemoteError("moderation response lacks \"categories\"");
  }
  ModerationVerdict verdict;
  for (size_t i = 0; i < kModerationCategories.size(); ++i) {
    const auto it = cats->find(std::string(kModerationCategories[i]));
    if (it == cats->end() || !it->is_boolean()) {
      throw RemoteError("moderation response: missing or non-boolean category \"" +
                        std::string(kModerationCategories[i]) + "\"");
    }
    verdict.flags_[i] = it->get<bool>();
  }
  return verdict;
}

bool ModerationVerdict::flag(std::string_view category) const { return flags_[category_index(category)]; }

void ModerationVerdict::set(std::string_view category, bool value) { flags_[category_index(category)] = value; }

bool ModerationVerdict::flagged() const {
  return std::any_of(flags_.begin(), flags_.end(), [](bool b) { return b; });
}

std::vector<std::string> ModerationVerdict::categories() const {
  std::vector<std::string> out;
  for (size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.emplace_back(kModerationCategories[i]);
  }
  return out;
}

LlmClient::LlmClient(remote::ClientConfig config) : client_(std::move(config)) {}

ModerationVerdict LlmClient::moderate(std::string_view text) {
  return ModerationVerdict::from_response(client_.post("/moderations", json{{"input", text}}));
}

std::string LlmClient::chat(std::string_view model, double temperature, std::string_view prompt) {
  const json body = {{"model", model},
                     {"temperature", temperature},
                     {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  const json response = client_.post("/chat/completions", body);
  try {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw RemoteError("chat response lacks choices[0].message.content");
  }
}

FilterResult filter_offensive(const Corpus& corpus, LlmClient& client, const FilterOptions& options) {
  // Pooled corpora repeat sources many times; each distinct text is checked once.
  std::vector<std::string> texts;
  std::map<std::string, size_t, std::less<>> slot;
  for (const auto& p : corpus) {
    if (slot.try_emplace(p.source, texts.size()).second) texts.push_back(p.source);
  }
  std::vector<std::optional<ModerationVerdict>> verdicts(texts.size());
  std::vector<std::string> errors(texts.size());
  parallel_for(texts.size(), options.parallelism, [&](size_t i) {
    try {
      verdicts[i] = client.moderate(texts[i]);
    } catch (const RemoteError& e) {
      if (options.policy == FailurePolicy::fail_run) throw;
      errors[i] = e.what();
    }
  });

  FilterResult result;
  for (const auto& p : corpus) {
    const size_t i = slot.find(p.source)->second;
    if (!verdicts[i]) {
      result.failures.push_back({p.id, errors[i]});
    } else if (verdicts[i]->flagged()) {
      result.dropped.push_back({p.id, verdicts[i]->categories()});
    } else {
      result.kept.add(p);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Response parsing

std::vector<std::string> parse_numbered_list(std::string_view raw) {
  if (iequals_ascii(utf8::trim(raw), "error")) {
    throw ListParseError(ListParseError::Kind::non_english, "model answered \"Error\" (non-English source)");
  }
  static const std::regex kItem(R"(^[ \t]*\d+[.)][ \t]+(.*)$)");
  std::vector<std::string> items;
  size_t start = 0;
  while (start <= raw.size()) {
    size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string line(raw.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kItem)) {
      std::string item = strip_item(m[1].str());
      if (!item.empty()) items.push_back(std::move(item));
    }
    start = end + 1;
  }
  if (items.empty()) throw ListParseError(ListParseError::Kind::no_items, "no numbered list items in response");
  return items;
}

std::string render_numbered_list(std::span<const std::string> items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

std::string_view status_name(GenerationStatus status) {
  switch (status) {
    case GenerationStatus::ok:
      return "ok";
    case GenerationStatus::non_english:
      return "non_english";
    case GenerationStatus::parse_failed:
      return "parse_failed";
    case GenerationStatus::moderation_blocked:
      return "moderation_blocked";
    case GenerationStatus::request_failed:
      return "request_failed";
  }
  return "parse_failed";
}

GenerationStatus parse_status(std::string_view name) {
  for (auto s : {GenerationStatus::ok, GenerationStatus::non_english, GenerationStatus::parse_failed,
                 GenerationStatus::moderation_blocked, GenerationStatus::request_failed}) {
    if (status_name(s) == name) return s;
  }
  throw InputError("unknown generation status \"" + std::string(name) + "\"");
}

json to_json(const GenerationRecord& r) {
  json j = {{"source_id", r.source_id},
            {"source_text", r.source_text},
            {"origin", r.origin.str()},
            {"prompt_text", r.prompt_text},
            {"raw_response", r.raw_response},
            {"parsed_paraphrases", r.parsed_paraphrases},
            {"status", status_name(r.status)}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

GenerationRecord generation_record_from_json(const json& j) {
  GenerationRecord r;
  try {
    r.source_id = j.at("source_id").get<std::string>();
    r.source_text = j.at("source_text").get<std::string>();
    r.origin = OriginTag::parse(j.at("origin").get<std::string>());
    r.prompt_text = j.at("prompt_text").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.parsed_paraphrases = j.at("parsed_paraphrases").get<std::vector<std::string>>();
    r.status = parse_status(j.at("status").get<std::string>());
    if (auto it = j.find("error"); it != j.end()) r.error = it->get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed generation record: ") + e.what());
  }
  if (r.parsed_paraphrases.size() > 5) throw InputError("generation record holds more than 5 paraphrases");
  if (r.status == GenerationStatus::ok && r.parsed_paraphrases.empty()) {
    throw InputError("generation record with status ok has no paraphrases");
  }
  if (r.status == GenerationStatus::non_english && !r.parsed_paraphrases.empty()) {
    throw InputError("non_english generation record has paraphrases");
  }
  return r;
}

void write_audit_log(std::span<const GenerationRecord> records, std::ostream& out) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<GenerationRecord> read_audit_log(std::istream& in, std::string_view name) {
  std::vector<GenerationRecord> out;
  std::string line;
  for (size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (utf8::trim(line).empty()) continue;
    const std::string where = std::string(name) + ":" + std::to_string(lineno) + ": ";
    try {
      if (!utf8::is_valid(line)) throw InputError("invalid UTF-8");
      out.push_back(generation_record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw InputError(where + "malformed record: " + e.what());
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
  return out;
}

std::vector<GenerationRecord> load_audit_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_audit_log(in, path.string());
}

std::vector<GenerationRecord> generate(std::span<const SourceSentence> sources, LlmClient& client,
                                       const GenerationOptions& options) {
  if (options.model.empty()) throw InputError("generation needs a model name");
  // Build every prompt up front so bad input fails before any request is sent.
  std::vector<GenerationRecord> records(sources.size());
  for (size_t i = 0; i < sources.size(); ++i) {
    auto& r = records[i];
    r.source_id = sources[i].id;
    r.source_text = sources[i].text;
    r.origin = sources[i].origin;
    try {
      r.prompt_text = options.prompt_template ? build_prompt_from_template(r.source_text, *options.prompt_template)
                                              : build_prompt(r.source_text, options.variant);
    } catch (const InputError& e) {
      throw InputError("source \"" + r.source_id + "\": " + e.what());
    }
  }

  parallel_for(records.size(), options.parallelism, [&](size_t i) {
    auto& r = records[i];
    try {
      if (options.moderate_first) {
        const ModerationVerdict verdict = client.moderate(r.source_text);
        if (verdict.flagged()) {
          r.status = GenerationStatus::moderation_blocked;
          r.error = "flagged: " + join(verdict.categories(), ",");
          return;
        }
      }
      r.raw_response = client.chat(options.model, options.temperature, r.prompt_text);
    } catch (const RemoteError& e) {
      if (options.fail_fast) throw RemoteError("source \"" + r.source_id + "\": " + e.what(), e.status());
      r.status = GenerationStatus::request_failed;
      r.error = e.what();
      return;
    }
    try {
      auto items = parse_numbered_list(r.raw_response);
      if (items.size() > 5) {
        r.error = "kept the first 5 of " + std::to_string(items.size()) + " items";
        items.resize(5);
      }
      r.parsed_paraphrases = std::move(items);
      r.status = GenerationStatus::ok;
    } catch (const ListParseError& e) {
      r.status = e.kind() == ListParseError::Kind::non_english ? GenerationStatus::non_english
                                                               : GenerationStatus::parse_failed;
    }
  });
  return records;
}

// ---------------------------------------------------------------------------
// Pooling and dedup

std::string normalize_sentence(std::string_view text) { return utf8::normalize_space(text); }

std::vector<std::pair<std::string, std::string>> pool_pairs(std::string_view source,
                                                            std::span<const std::string> paraphrases) {
  if (paraphrases.empty()) throw InputError("pool needs at least one paraphrase");
  std::set<std::string> pool;
  if (auto n = normalize_sentence(source); !n.empty()) pool.insert(std::move(n));
  for (const auto& p : paraphrases) {
    if (auto n = normalize_sentence(p); !n.empty()) pool.insert(std::move(n));
  }
  if (pool.size() < 2) {
    throw InputError("degenerate pool: " + std::to_string(pool.size()) + " distinct sentence(s)");
  }
  // std::set iterates in lexicographic order, so (a, b) with a < b comes out
  // already sorted both within and across pairs.
  const std::vector<std::string> members(pool.begin(), pool.end());
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(members.size() * (members.size() - 1) / 2);
  for (size_t i = 0; i < members.size(); ++i) {
    for (size_t j = i + 1; j < members.size(); ++j) out.emplace_back(members[i], members[j]);
  }
  return out;
}

Corpus pool_records(std::span<const GenerationRecord> records, PoolSummary* summary) {
  Corpus out;
  PoolSummary local;
  for (const auto& r : records) {
    if (r.status != GenerationStatus::ok) {
      ++local.records_skipped;
      continue;
    }
    std::vector<std::pair<std::string, std::string>> pairs;
    try {
      pairs = pool_pairs(r.source_text, r.parsed_paraphrases);
    } catch (const InputError&) {
      ++local.records_skipped;
      continue;
    }
    ++local.records_used;
    for (size_t k = 0; k < pairs.size(); ++k) {
      out.add({r.source_id + "-" + std::to_string(k + 1), std::move(pairs[k].first), std::move(pairs[k].second),
               r.origin});
    }
  }
  if (summary) *summary = local;
  return out;
}

Corpus dedupe_corpus(const Corpus& corpus) {
  Corpus out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : corpus) {
    std::string a = normalize_sentence(p.source);
    std::string b = normalize_sentence(p.paraphrase);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    if (seen.emplace(std::move(a), std::move(b)).second) out.add(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Judge

JudgeRatings parse_judge_response(std::string_view raw) {
  // Try each '{' in turn, scanning to its balanced '}' while skipping string
  // literals, and take the first span that parses as an object.
  std::optional<json> object;
  for (size_t open = raw.find('{'); open != std::string_view::npos && !object; open = raw.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = open; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        json parsed = json::parse(raw.substr(open, i - open + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) object = std::move(parsed);
        break;
      }
    }
  }
  if (!object) throw JudgeParseError("judge response holds no JSON object");

  int values[4];
  for (size_t k = 0; k < kJudgeAspects.size(); ++k) {
    const std::string key(kJudgeAspects[k]);
    const auto it = object->find(key);
    if (it == object->end()) throw JudgeParseError("judge response lacks \"" + key + "\"");
    if (!it->is_number_integer()) throw JudgeParseError("judge rating \"" + key + "\" is not an integer");
    const auto v = it->get<long long>();
    if (v < 1 || v > 5) {
      throw JudgeParseError("judge rating \"" + key + "\" = " + std::to_string(v) + " is outside 1..5");
    }
    values[k] = static_cast<int>(v);
  }
  return {values[0], values[1], values[2], values[3]};
}

std::vector<JudgeResult> judge(const Corpus& corpus, LlmClient& client, const JudgeOptions& options) {
  if (options.model.empty()) throw InputError("judging needs a model name");
  std::vector<std::string> prompts;
  prompts.reserve(corpus.size());
  for (const auto& p : corpus) {
    try {
      prompts.push_back(build_judge_prompt(p.source, p.paraphrase));
    } catch (const InputError& e) {
      throw InputError("pair \"" + p.id + "\": " + e.what());
    }
  }
  std::vector<JudgeResult> results(corpus.size());
  parallel_for(corpus.size(), options.parallelism, [&](size_t i) {
    auto& r = results[i];
    r.id = corpus[i].id;
    try {
      r.raw_response = client.chat(options.model, options.temperature, prompts[i]);
    } catch (const RemoteError& e) {
      if (options.fail_fast) throw RemoteError("pair \"" + r.id + "\": " + e.what(), e.status());
      r.error = e.what();
      return;
    }
    try {
      r.ratings = parse_judge_response(r.raw_response);
    } catch (const JudgeParseError& e) {
      r.error = e.what();
    }
  });
  return results;
}

}  // namespace parafuse::pipeline
