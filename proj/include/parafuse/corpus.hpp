#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace parafuse {

enum class Origin { mrpc, qqp, paws, para_common, custom };

// Which source collection a pair came from. Custom origins carry a
// lowercase ASCII identifier and are written as "custom:<name>".
class OriginTag {
 public:
  OriginTag() = default;
  explicit OriginTag(Origin kind);
  static OriginTag custom(std::string name);

  // Accepts "mrpc", "qqp", "paws", "para_common" and "custom:<name>".
  static OriginTag parse(std::string_view text);

  Origin kind() const { return kind_; }
  const std::string& custom_name() const { return name_; }
  std::string str() const;

  auto operator<=>(const OriginTag&) const = default;

 private:
  Origin kind_ = Origin::custom;
  std::string name_;
};

struct SentencePair {
  std::string id;
  std::string source;
  std::string paraphrase;
  OriginTag origin;

  bool operator==(const SentencePair&) const = default;
};

// Ordered pair collection with unique ids. Immutable once loaded.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<SentencePair> pairs);

  // Validates the pair and appends it. Throws InputError on a duplicate id or
  // empty text.
  void add(SentencePair pair);

  const SentencePair* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  const std::vector<SentencePair>& pairs() const { return pairs_; }
  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }
  const SentencePair& operator[](size_t i) const { return pairs_[i]; }

  bool operator==(const Corpus& other) const { return pairs_ == other.pairs_; }

 private:
  std::vector<SentencePair> pairs_;
  std::unordered_map<std::string, size_t> index_;
};

enum class PairFormat { jsonl, tsv };

PairFormat parse_pair_format(std::string_view name);
// Picks TSV for ".tsv" paths and JSONL otherwise.
PairFormat pair_format_for(const std::filesystem::path& path);

// Errors carry "<name>:<line>: " prefixes so bad records can be located.
Corpus read_corpus(std::istream& in, PairFormat format, std::string_view name = "<input>");
Corpus load_corpus(const std::filesystem::path& path, PairFormat format);

void write_pairs(const Corpus& corpus, std::ostream& out, PairFormat format);
void write_pairs(const Corpus& corpus, const std::filesystem::path& path, PairFormat format);

// A sentence awaiting paraphrase generation: {"id", "source", "origin"} per
// JSONL line. Any other fields (e.g. an existing paraphrase) are ignored.
struct SourceSentence {
  std::string id;
  std::string text;
  OriginTag origin;
};

std::vector<SourceSentence> read_sources(std::istream& in, std::string_view name = "<input>");
std::vector<SourceSentence> load_sources(const std::filesystem::path& path);

struct TreeEntry {
  std::string source_tree;
  std::string paraphrase_tree;
};

// Bracket strings keyed by pair id. Stored verbatim; parsed at scoring time.
class TreeSidecar {
 public:
  void add(std::string id, TreeEntry entry);
  const TreeEntry* find(std::string_view id) const;
  size_t size() const { return entries_.size(); }
  const std::map<std::string, TreeEntry, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, TreeEntry, std::less<>> entries_;
};

TreeSidecar read_tree_sidecar(std::istream& in, std::string_view name = "<input>");
TreeSidecar load_tree_sidecar(const std::filesystem::path& path);

struct EmbeddingRecord {
  std::string id;
  std::vector<double> source_vec;
  std::vector<double> paraphrase_vec;
  std::string model;

  size_t dim() const { return source_vec.size(); }
};

// Throws InputError on dimension mismatch, non-finite component or a
// zero-norm vector.
void validate_embedding(const EmbeddingRecord& record);

std::vector<EmbeddingRecord> read_embeddings(std::istream& in, std::string_view name = "<input>");
std::vector<EmbeddingRecord> load_embeddings(const std::filesystem::path& path);

// Ids present in the corpus but absent from each sidecar, in corpus order.
struct JoinReport {
  std::vector<std::string> missing_trees;
  std::map<std::string, std::vector<std::string>> missing_embeddings;  // by model
  std::vector<std::string> orphan_trees;                               // not in corpus
  std::vector<std::string> orphan_embeddings;

  bool complete() const;
};

JoinReport join_check(const Corpus& corpus, const TreeSidecar* trees,
                      const std::vector<EmbeddingRecord>* embeddings);

}  // namespace parafuse
