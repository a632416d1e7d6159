#include "parafuse/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <thread>
#include <set>

#include "parafuse/error.hpp"

namespace parafuse::semantic {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw InputError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()) + ")");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw InputError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

FileEmbeddingProvider::FileEmbeddingProvider(std::vector<EmbeddingRecord> records) {
  for (auto& r : records) {
    validate_embedding(r);
    if (records_.empty()) {
      model_ = r.model;
      dim_ = r.dim();
    } else if (r.model != model_) {
      throw InputError("embedding records mix models \"" + model_ + "\" and \"" + r.model + "\"");
    } else if (r.dim() != dim_) {
      throw InputError("embedding records mix dimensions " + std::to_string(dim_) + " and " +
                       std::to_string(r.dim()) + " (id \"" + r.id + "\")");
    }
    if (records_.contains(r.id)) throw InputError("duplicate embedding record for id \"" + r.id + "\"");
    std::string id = r.id;
    records_.emplace(std::move(id), std::move(r));
  }
  if (records_.empty()) throw InputError("no embedding records");
}

std::pair<Vector, Vector> FileEmbeddingProvider::embed_pair(const SentencePair& pair) {
  auto it = records_.find(pair.id);
  if (it == records_.end()) {
    throw InputError("missing embedding for pair \"" + pair.id + "\" (model " + model_ + ")");
  }
  return {it->second.source_vec, it->second.paraphrase_vec};
}

std::vector<std::unique_ptr<FileEmbeddingProvider>> file_providers(std::vector<EmbeddingRecord> records) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<EmbeddingRecord>> by_model;
  for (auto& r : records) {
    auto [it, inserted] = by_model.try_emplace(r.model);
    if (inserted) order.push_back(r.model);
    it->second.push_back(std::move(r));
  }
  std::vector<std::unique_ptr<FileEmbeddingProvider>> out;
  for (const auto& model : order) {
    out.push_back(std::make_unique<FileEmbeddingProvider>(std::move(by_model[model])));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpProviderConfig config)
    : config_(std::move(config)), client_(config_.client) {
  if (config_.model.empty()) throw InputError("embedding provider needs a model name");
  if (config_.batch_size == 0) throw InputError("embedding batch size must be >= 1");
}

std::vector<Vector> HttpEmbeddingProvider::request_batch(std::span<const std::string> texts) {
  nlohmann::json body = {{"model", config_.model}, {"input", texts}};
  const nlohmann::json response = client_.post("/embeddings", body);
  const auto data = response.find("data");
  if (data == response.end() || !data->is_array()) {
    throw RemoteError("embedding response lacks a \"data\" array");
  }
  if (data->size() != texts.size()) {
    throw RemoteError("embedding response has " + std::to_string(data->size()) + " vectors for " +
                      std::to_string(texts.size()) + " inputs");
  }
  std::vector<Vector> out(texts.size());
  std::vector<bool> filled(texts.size(), false);
  for (size_t k = 0; k < data->size(); ++k) {
    const auto& item = (*data)[k];
    size_t index = k;
    if (auto it = item.find("index"); it != item.end()) {
      if (!it->is_number_integer()) throw RemoteError("embedding response: non-integer index");
      index = it->get<size_t>();
    }
    if (index >= texts.size() || filled[index]) {
      throw RemoteError("embedding response: bad or repeated index " + std::to_string(index));
    }
    const auto emb = item.find("embedding");
    if (emb == item.end() || !emb->is_array() || emb->empty()) {
      throw RemoteError("embedding response: missing embedding at index " + std::to_string(index));
    }
    Vector v;
    v.reserve(emb->size());
    double norm2 = 0.0;
    for (const auto& x : *emb) {
      if (!x.is_number()) throw RemoteError("embedding response: non-numeric component");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw RemoteError("embedding response: non-finite component");
      norm2 += d * d;
      v.push_back(d);
    }
    if (norm2 == 0.0) throw RemoteError("embedding response: zero-norm vector");
    out[index] = std::move(v);
    filled[index] = true;
  }
  return out;
}

std::vector<std::string> HttpEmbeddingProvider::uncached(std::span<const std::string> texts) const {
  std::shared_lock lock(cache_mutex_);
  std::vector<std::string> missing;
  std::set<std::string_view> seen;
  for (const auto& t : texts) {
    if (!cache_.contains(t) && seen.insert(t).second) missing.push_back(t);
  }
  return missing;
}

std::vector<Vector> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  const std::vector<std::string> missing = uncached(texts);
  const size_t batch_count = (missing.size() + config_.batch_size - 1) / config_.batch_size;
  std::vector<std::vector<Vector>> results(batch_count);
  std::vector<std::exception_ptr> errors(batch_count);
  std::atomic<size_t> next{0};
  const auto worker = [&] {
    for (size_t b; (b = next.fetch_add(1)) < batch_count;) {
      const size_t start = b * config_.batch_size;
      const size_t len = std::min(config_.batch_size, missing.size() - start);
      try {
        results[b] = request_batch(std::span<const std::string>(missing.data() + start, len));
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  {
    const size_t workers = std::min<size_t>(batch_count, std::max(1, client_.config().max_in_flight));
    std::vector<std::jthread> pool;
    for (size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
    if (workers > 0) worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  {
    std::unique_lock lock(cache_mutex_);
    size_t k = 0;
    for (auto& batch : results) {
      for (auto& v : batch) {
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_) {
          throw RemoteError("embedding dimension changed from " + std::to_string(dim_) + " to " +
                            std::to_string(v.size()));
        }
        cache_.try_emplace(missing[k++], std::move(v));
      }
    }
  }

  std::shared_lock lock(cache_mutex_);
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(cache_.at(t));
  return out;
}

std::pair<Vector, Vector> HttpEmbeddingProvider::embed_pair(const SentencePair& pair) {
  const std::string texts[] = {pair.source, pair.paraphrase};
  auto vectors = embed(texts);
  return {std::move(vectors[0]), std::move(vectors[1])};
}

void HttpEmbeddingProvider::prefetch(std::span<const SentencePair> pairs) {
  std::vector<std::string> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.source);
    texts.push_back(p.paraphrase);
  }
  embed(texts);
}

size_t HttpEmbeddingProvider::cache_size() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

SemanticScore semantic_score(const SentencePair& pair, EmbeddingProvider& provider) {
  try {
    const auto [src, par] = provider.embed_pair(pair);
    return {provider.model_name(), cosine(src, par)};
  } catch (const InputError& e) {
    throw InputError("pair \"" + pair.id + "\": " + e.what());
  } catch (const RemoteError& e) {
    throw RemoteError("pair \"" + pair.id + "\": " + e.what(), e.status());
  }
}

}  // namespace parafuse::semantic
