#pragma once

#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "parafuse/corpus.hpp"
#include "parafuse/remote.hpp"

namespace parafuse::semantic {

using Vector = std::vector<double>;

// u.v / (|u||v|), clamped to [-1, 1]. Throws InputError on a dimension
// mismatch or a zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

// Supplies source and paraphrase embeddings for a pair. Implementations are
// deterministic for a fixed configuration and safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const std::string& model_name() const = 0;

  // Returns (source vector, paraphrase vector).
  virtual std::pair<Vector, Vector> embed_pair(const SentencePair& pair) = 0;

  // Optional hint so remote providers can batch ahead of per-pair calls.
  virtual void prefetch(std::span<const SentencePair> /*pairs*/) {}
};

// Serves vectors from an embeddings sidecar, keyed by pair id.
class FileEmbeddingProvider : public EmbeddingProvider {
 public:
  // All records must share one model name and one dimension.
  explicit FileEmbeddingProvider(std::vector<EmbeddingRecord> records);

  const std::string& model_name() const override { return model_; }
  std::pair<Vector, Vector> embed_pair(const SentencePair& pair) override;
  bool has(const std::string& id) const { return records_.contains(id); }
  size_t dim() const { return dim_; }

 private:
  std::string model_;
  size_t dim_ = 0;
  std::unordered_map<std::string, EmbeddingRecord> records_;
};

// Groups sidecar records by model and builds one provider per model, in
// first-appearance order.
std::vector<std::unique_ptr<FileEmbeddingProvider>> file_providers(std::vector<EmbeddingRecord> records);

struct HttpProviderConfig {
  remote::ClientConfig client;  // base_url such as "http://localhost:8080/v1"
  std::string model;
  size_t batch_size = 32;
};

// OpenAI-compatible /embeddings client:
//   request  {"model": str, "input": [str...]}
//   response {"data": [{"index": int, "embedding": [num...]}...]}
// Vectors are cached per text, so pooled sentences shared by many pairs are
// requested once.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpProviderConfig config);

  const std::string& model_name() const override { return config_.model; }
  std::pair<Vector, Vector> embed_pair(const SentencePair& pair) override;
  void prefetch(std::span<const SentencePair> pairs) override;

  // Vectors in input order. Batches are sent concurrently up to the client's
  // in-flight bound.
  std::vector<Vector> embed(std::span<const std::string> texts);

  size_t cache_size() const;

 private:
  std::vector<Vector> request_batch(std::span<const std::string> texts);
  std::vector<std::string> uncached(std::span<const std::string> texts) const;

  HttpProviderConfig config_;
  remote::JsonClient client_;
  mutable std::shared_mutex cache_mutex_;
  std::unordered_map<std::string, Vector> cache_;
  size_t dim_ = 0;
};

struct SemanticScore {
  std::string model_name;
  double value = 0.0;
};

// Cosine of the pair's source and paraphrase embeddings. Errors carry the
// pair id.
SemanticScore semantic_score(const SentencePair& pair, EmbeddingProvider& provider);

}  // namespace parafuse::semantic
