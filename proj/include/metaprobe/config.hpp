#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/transforms.hpp"

namespace metaprobe::config {

struct ChatProviderConfig {
    std::string mode = "fixture";  // live | fixture
    std::string endpoint;
    std::string model;
    std::string auth_env;
    std::string fixture_path;
    int max_retries = 4;
    double backoff_seconds = 0.5;
    double requests_per_minute = 0.0;
    double temperature = 0.0;
};

struct EmbeddingProviderConfig {
    std::string mode = "hashed";  // live | fixture | hashed
    std::string endpoint;
    std::string model;
    std::string auth_env;
    std::string fixture_path;
    int dim = 64;  // hashed mode only
    int batch_size = 64;
    int max_retries = 4;
    double backoff_seconds = 0.5;
    double requests_per_minute = 0.0;
};

struct WordVectorConfig {
    std::string path;
    int dim = 300;
};

struct RunConfig {
    std::string figqa_csv;
    std::string munch_csv;
    std::string templates_dir;
    std::string lexicon_path;
    WordVectorConfig word_vectors;
    ChatProviderConfig chat;
    EmbeddingProviderConfig embedding;
    std::string embedding_cache;  // empty = no cache file

    std::uint64_t global_seed = 1;
    std::map<std::string, std::uint64_t> seed_overrides;  // per experiment

    geometry::GeometryOptions geometry;
    double novelty_threshold = 0.3;
    std::string out_dir = "out";
    int word_list_n = 20;
    std::vector<transforms::VariantKind> detect_kinds;  // default: all six

    // Relative paths in the file are resolved against its directory.
    // Validation failures throw ConfigError before any provider is built.
    static RunConfig load(const std::string& path);

    void validate() const;

    // Effective per-experiment seed: explicit override, else derived from the
    // global seed and the experiment name.
    std::uint64_t seed_for(const std::string& experiment) const;

    // Full echo of the resolved configuration (defaults applied), used for
    // the manifest and the config hash.
    nlohmann::json resolved() const;
    std::string config_hash() const;

    std::shared_ptr<llm::ChatProvider> make_chat_provider() const;
    std::shared_ptr<emb::EmbeddingProvider> make_embedding_provider() const;
};

}  // namespace metaprobe::config
