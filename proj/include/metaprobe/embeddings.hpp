#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metaprobe/geometry.hpp"

namespace metaprobe::emb {

// Batch embedding interface. Inputs are already-normalized texts.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<geom::Vec> embed(const std::vector<std::string>& texts) = 0;
    virtual const std::string& model_id() const = 0;
    virtual bool is_live() const = 0;
};

struct HttpEmbeddingConfig {
    std::string endpoint;             // e.g. https://api.openai.com/v1/embeddings
    std::string model;
    std::string auth_env;
    int max_retries = 4;
    double backoff_seconds = 0.5;
    double requests_per_minute = 0.0;
    int batch_size = 64;
};

class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig cfg);
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override;
    const std::string& model_id() const override { return cfg_.model; }
    bool is_live() const override { return true; }

private:
    std::vector<geom::Vec> embed_batch_once(const std::vector<std::string>& texts);
    HttpEmbeddingConfig cfg_;
    std::mutex pace_mutex_;
    double last_call_monotonic_ = 0.0;
};

// Replay from a JSONL fixture: {"text_sha256": ..., "vector_b64": ...}.
class FixtureEmbeddingProvider : public EmbeddingProvider {
public:
    FixtureEmbeddingProvider(const std::string& path, std::string model_id);
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override;
    const std::string& model_id() const override { return model_id_; }
    bool is_live() const override { return false; }
    size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, geom::Vec> entries_;
    std::string model_id_;
};

class RecordingEmbeddingProvider : public EmbeddingProvider {
public:
    RecordingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, const std::string& path);
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override;
    const std::string& model_id() const override { return inner_->model_id(); }
    bool is_live() const override { return inner_->is_live(); }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::string path_;
    std::mutex write_mutex_;
};

// Deterministic pseudo-embeddings derived from the text hash. Offline runs
// and fixture generation use this when real vectors aren't needed.
class HashedEmbeddingProvider : public EmbeddingProvider {
public:
    HashedEmbeddingProvider(int dim, std::string model_id);
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override;
    const std::string& model_id() const override { return model_id_; }
    bool is_live() const override { return false; }

private:
    int dim_;
    std::string model_id_;
};

class CallbackEmbeddingProvider : public EmbeddingProvider {
public:
    CallbackEmbeddingProvider(std::function<geom::Vec(const std::string&)> fn, std::string model_id)
        : fn_(std::move(fn)), model_id_(std::move(model_id)) {}
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override {
        std::vector<geom::Vec> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(fn_(t));
        return out;
    }
    const std::string& model_id() const override { return model_id_; }
    bool is_live() const override { return false; }

private:
    std::function<geom::Vec(const std::string&)> fn_;
    std::string model_id_;
};

// Append-only on-disk cache. One line per vector:
//   sha256_hex \t model_id \t base64(float32le...)
// Unreadable lines are counted and skipped, never fatal.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::string path);

    std::optional<geom::Vec> get(const std::string& text_hash,
                                 const std::string& model_id) const;
    // vec must already be float32-quantized (the Embedder guarantees this).
    void put(const std::string& text_hash, const std::string& model_id, const geom::Vec& vec);
    size_t size() const { return entries_.size(); }
    size_t corrupt_lines() const { return corrupt_lines_; }

private:
    std::string path_;
    std::map<std::pair<std::string, std::string>, geom::Vec> entries_;
    size_t corrupt_lines_ = 0;
    std::mutex mutex_;
};

// Normalizes, caches, batches, and quantizes. All vectors pass through a
// float32 round trip so cold and warm runs produce identical numbers.
class Embedder {
public:
    Embedder(std::shared_ptr<EmbeddingProvider> provider, EmbeddingCache* cache);

    // Order-preserving; duplicate texts hit the provider once.
    // Throws EmptyTextError when any input normalizes to "".
    std::vector<geom::Vec> embed_batch(const std::vector<std::string>& texts);
    geom::Vec embed_one(const std::string& text);

    const std::string& model_id() const { return provider_->model_id(); }
    std::uint64_t live_calls() const { return live_calls_.load(); }

private:
    std::shared_ptr<EmbeddingProvider> provider_;
    EmbeddingCache* cache_;  // may be null
    std::atomic<std::uint64_t> live_calls_{0};
};

// Word-vector table in the classic text format: one word per line,
// "word v1 v2 ... vd". Keys are lowercased. Used as the representation for
// imagination overlap when two word sets share no surface form.
class WordVectorTable {
public:
    static WordVectorTable load(const std::string& path, int expected_dim);

    std::optional<geom::Vec> lookup(const std::string& word) const;
    bool contains(const std::string& word) const { return vectors_.count(word) > 0; }
    size_t size() const { return vectors_.size(); }
    size_t skipped_lines() const { return skipped_lines_; }
    int dim() const { return dim_; }

private:
    std::unordered_map<std::string, geom::Vec> vectors_;
    int dim_ = 0;
    size_t skipped_lines_ = 0;
};

}  // namespace metaprobe::emb
