#include "parafuse/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "parafuse/error.hpp"
#include "parafuse/utf8.hpp"

namespace parafuse {

using nlohmann::json;

namespace {

bool is_identifier(std::string_view name) {
  if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) return false;
  for (char c : name) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) return false;
  }
  return true;
}

std::string where(std::string_view name, size_t line) {
  return std::string(name) + ":" + std::to_string(line) + ": ";
}

// Calls fn(line_text, line_number) for every non-blank line.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::trim(line).empty()) continue;
    fn(line, number);
  }
}

json parse_json_line(const std::string& line, std::string_view name, size_t number) {
  try {
    json record = json::parse(line);
    if (!record.is_object()) throw InputError(where(name, number) + "record is not a JSON object");
    return record;
  } catch (const json::parse_error& e) {
    throw InputError(where(name, number) + "malformed JSON: " + e.what());
  }
}

const std::string& string_field(const json& record, const char* field, std::string_view name,
                                size_t number) {
  auto it = record.find(field);
  if (it == record.end()) {
    throw InputError(where(name, number) + "malformed record: missing field \"" + field + "\"");
  }
  if (!it->is_string()) {
    throw InputError(where(name, number) + "malformed record: field \"" + field +
                     "\" is not a string");
  }
  return it->get_ref<const std::string&>();
}

std::vector<double> vector_field(const json& record, const char* field, std::string_view name,
                                 size_t number) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_array()) {
    throw InputError(where(name, number) + "malformed record: field \"" + field +
                     "\" missing or not an array");
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) {
      throw InputError(where(name, number) + "malformed record: non-numeric component in \"" +
                       field + "\"");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::string tsv_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string tsv_unescape(std::string_view text, std::string_view name, size_t number) {
  std::string out;
  out.reserve(text.size());
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i == text.size()) throw InputError(where(name, number) + "dangling escape");
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default:
        throw InputError(where(name, number) + "unknown escape \\" + std::string(1, text[i]));
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  for (;;) {
    size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

OriginTag::OriginTag(Origin kind) : kind_(kind) {
  if (kind == Origin::custom) throw InputError("custom origin requires a name");
}

OriginTag OriginTag::custom(std::string name) {
  if (!is_identifier(name)) {
    throw InputError("custom origin name must be a lowercase ASCII identifier: \"" + name + "\"");
  }
  OriginTag tag;
  tag.kind_ = Origin::custom;
  tag.name_ = std::move(name);
  return tag;
}

OriginTag OriginTag::parse(std::string_view text) {
  if (text == "mrpc") return OriginTag(Origin::mrpc);
  if (text == "qqp") return OriginTag(Origin::qqp);
  if (text == "paws") return OriginTag(Origin::paws);
  if (text == "para_common") return OriginTag(Origin::para_common);
  constexpr std::string_view kCustom = "custom:";
  if (text.starts_with(kCustom)) return custom(std::string(text.substr(kCustom.size())));
  throw InputError("unknown origin tag \"" + std::string(text) + "\"");
}

std::string OriginTag::str() const {
  switch (kind_) {
    case Origin::mrpc: return "mrpc";
    case Origin::qqp: return "qqp";
    case Origin::paws: return "paws";
    case Origin::para_common: return "para_common";
    case Origin::custom: return "custom:" + name_;
  }
  return {};
}

Corpus::Corpus(std::vector<SentencePair> pairs) {
  pairs_.reserve(pairs.size());
  for (auto& p : pairs) add(std::move(p));
}

void Corpus::add(SentencePair pair) {
  if (pair.id.empty()) throw InputError("pair id must be non-empty");
  if (utf8::trim(pair.source).empty()) throw InputError("pair \"" + pair.id + "\": empty source");
  if (utf8::trim(pair.paraphrase).empty()) {
    throw InputError("pair \"" + pair.id + "\": empty paraphrase");
  }
  if (index_.contains(pair.id)) throw InputError("duplicate pair id \"" + pair.id + "\"");
  index_.emplace(pair.id, pairs_.size());
  pairs_.push_back(std::move(pair));
}

const SentencePair* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &pairs_[it->second];
}

PairFormat parse_pair_format(std::string_view name) {
  if (name == "jsonl") return PairFormat::jsonl;
  if (name == "tsv") return PairFormat::tsv;
  throw InputError("unknown pair format \"" + std::string(name) + "\" (expected jsonl or tsv)");
}

PairFormat pair_format_for(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? PairFormat::tsv : PairFormat::jsonl;
}

Corpus read_corpus(std::istream& in, PairFormat format, std::string_view name) {
  Corpus corpus;
  for_each_line(in, [&](const std::string& line, size_t number) {
    SentencePair pair;
    if (format == PairFormat::jsonl) {
      const json record = parse_json_line(line, name, number);
      pair.id = string_field(record, "id", name, number);
      pair.source = string_field(record, "source", name, number);
      pair.paraphrase = string_field(record, "paraphrase", name, number);
      const std::string& origin = string_field(record, "origin", name, number);
      try {
        pair.origin = OriginTag::parse(origin);
      } catch (const InputError& e) {
        throw InputError(where(name, number) + e.what());
      }
    } else {
      if (!utf8::is_valid(line)) throw InputError(where(name, number) + "invalid UTF-8");
      const auto fields = split_tabs(line);
      if (fields.size() != 4) {
        throw InputError(where(name, number) + "malformed record: expected 4 tab-separated fields, got " +
                         std::to_string(fields.size()));
      }
      pair.id = tsv_unescape(fields[0], name, number);
      pair.source = tsv_unescape(fields[1], name, number);
      pair.paraphrase = tsv_unescape(fields[2], name, number);
      try {
        pair.origin = OriginTag::parse(fields[3]);
      } catch (const InputError& e) {
        throw InputError(where(name, number) + e.what());
      }
    }
    try {
      corpus.add(std::move(pair));
    } catch (const InputError& e) {
      throw InputError(where(name, number) + e.what());
    }
  });
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, PairFormat format) {
  auto in = open_input(path);
  return read_corpus(in, format, path.string());
}

void write_pairs(const Corpus& corpus, std::ostream& out, PairFormat format) {
  for (const auto& p : corpus) {
    if (format == PairFormat::jsonl) {
      json record = {{"id", p.id}, {"source", p.source}, {"paraphrase", p.paraphrase},
                     {"origin", p.origin.str()}};
      out << record.dump() << '\n';
    } else {
      out << tsv_escape(p.id) << '\t' << tsv_escape(p.source) << '\t' << tsv_escape(p.paraphrase)
          << '\t' << p.origin.str() << '\n';
    }
  }
  if (!out) throw InputError("write failed");
}

void write_pairs(const Corpus& corpus, const std::filesystem::path& path, PairFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_pairs(corpus, out, format);
  out.flush();
  if (!out) throw InputError("write failed: " + path.string());
}

std::vector<SourceSentence> read_sources(std::istream& in, std::string_view name) {
  std::vector<SourceSentence> sources;
  std::unordered_map<std::string, size_t> seen;
  for_each_line(in, [&](const std::string& line, size_t number) {
    const json record = parse_json_line(line, name, number);
    SourceSentence s;
    s.id = string_field(record, "id", name, number);
    s.text = string_field(record, "source", name, number);
    try {
      s.origin = OriginTag::parse(string_field(record, "origin", name, number));
    } catch (const InputError& e) {
      throw InputError(where(name, number) + e.what());
    }
    if (s.id.empty()) throw InputError(where(name, number) + "empty id");
    if (utf8::trim(s.text).empty()) throw InputError(where(name, number) + "empty source");
    if (!seen.emplace(s.id, number).second) {
      throw InputError(where(name, number) + "duplicate id \"" + s.id + "\"");
    }
    sources.push_back(std::move(s));
  });
  return sources;
}

std::vector<SourceSentence> load_sources(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sources(in, path.string());
}

void TreeSidecar::add(std::string id, TreeEntry entry) {
  if (id.empty()) throw InputError("tree sidecar id must be non-empty");
  if (entries_.contains(id)) throw InputError("duplicate tree sidecar id \"" + id + "\"");
  entries_.emplace(std::move(id), std::move(entry));
}

const TreeEntry* TreeSidecar::find(std::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

TreeSidecar read_tree_sidecar(std::istream& in, std::string_view name) {
  TreeSidecar sidecar;
  for_each_line(in, [&](const std::string& line, size_t number) {
    const json record = parse_json_line(line, name, number);
    TreeEntry entry{string_field(record, "source_tree", name, number),
                    string_field(record, "paraphrase_tree", name, number)};
    try {
      sidecar.add(string_field(record, "id", name, number), std::move(entry));
    } catch (const InputError& e) {
      throw InputError(where(name, number) + e.what());
    }
  });
  return sidecar;
}

TreeSidecar load_tree_sidecar(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_tree_sidecar(in, path.string());
}

void validate_embedding(const EmbeddingRecord& record) {
  const std::string prefix = "embedding \"" + record.id + "\": ";
  if (record.source_vec.empty()) throw InputError(prefix + "empty vector");
  if (record.source_vec.size() != record.paraphrase_vec.size()) {
    throw InputError(prefix + "dimension mismatch (source " +
                     std::to_string(record.source_vec.size()) + ", paraphrase " +
                     std::to_string(record.paraphrase_vec.size()) + ")");
  }
  for (const auto* vec : {&record.source_vec, &record.paraphrase_vec}) {
    double norm2 = 0.0;
    for (double x : *vec) {
      if (!std::isfinite(x)) throw InputError(prefix + "non-finite component");
      norm2 += x * x;
    }
    if (norm2 == 0.0) {
      throw InputError(prefix + "zero-norm " +
                       std::string(vec == &record.source_vec ? "source" : "paraphrase") + " vector");
    }
  }
}

std::vector<EmbeddingRecord> read_embeddings(std::istream& in, std::string_view name) {
  std::vector<EmbeddingRecord> records;
  for_each_line(in, [&](const std::string& line, size_t number) {
    const json record = parse_json_line(line, name, number);
    EmbeddingRecord r;
    r.id = string_field(record, "id", name, number);
    r.source_vec = vector_field(record, "source_vec", name, number);
    r.paraphrase_vec = vector_field(record, "paraphrase_vec", name, number);
    r.model = string_field(record, "model", name, number);
    try {
      validate_embedding(r);
    } catch (const InputError& e) {
      throw InputError(where(name, number) + e.what());
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in, path.string());
}

bool JoinReport::complete() const {
  if (!missing_trees.empty()) return false;
  for (const auto& [model, ids] : missing_embeddings) {
    if (!ids.empty()) return false;
  }
  return true;
}

JoinReport join_check(const Corpus& corpus, const TreeSidecar* trees,
                      const std::vector<EmbeddingRecord>* embeddings) {
  JoinReport report;
  if (trees) {
    for (const auto& p : corpus) {
      if (!trees->find(p.id)) report.missing_trees.push_back(p.id);
    }
    for (const auto& [id, entry] : trees->entries()) {
      if (!corpus.contains(id)) report.orphan_trees.push_back(id);
    }
  }
  if (embeddings) {
    std::map<std::string, std::unordered_map<std::string, bool>> by_model;
    for (const auto& r : *embeddings) {
      by_model[r.model][r.id] = true;
      if (!corpus.contains(r.id)) report.orphan_embeddings.push_back(r.id);
    }
    for (const auto& [model, ids] : by_model) {
      auto& missing = report.missing_embeddings[model];
      for (const auto& p : corpus) {
        if (!ids.contains(p.id)) missing.push_back(p.id);
      }
    }
  }
  return report;
}

}  // namespace parafuse
