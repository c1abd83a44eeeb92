#include "metaprobe/config.hpp"

#include <filesystem>
#include <set>

#include "metaprobe/errors.hpp"
#include "metaprobe/rng.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::config {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

std::string resolve_path(const fs::path& base, const std::string& p) {
    if (p.empty()) return p;
    fs::path fp(p);
    if (fp.is_absolute()) return fp.lexically_normal().string();
    return (base / fp).lexically_normal().string();
}

ChatProviderConfig parse_chat(const json& j, const fs::path& base) {
    reject_unknown_keys(j,
                        {"mode", "endpoint", "model", "auth_env", "fixture_path", "max_retries",
                         "backoff_seconds", "requests_per_minute", "temperature"},
                        "chat");
    ChatProviderConfig c;
    c.mode = j.value("mode", c.mode);
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.auth_env = j.value("auth_env", "");
    c.fixture_path = resolve_path(base, j.value("fixture_path", ""));
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
    c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
    c.temperature = j.value("temperature", c.temperature);
    return c;
}

EmbeddingProviderConfig parse_embedding(const json& j, const fs::path& base) {
    reject_unknown_keys(j,
                        {"mode", "endpoint", "model", "auth_env", "fixture_path", "dim",
                         "batch_size", "max_retries", "backoff_seconds", "requests_per_minute"},
                        "embedding");
    EmbeddingProviderConfig c;
    c.mode = j.value("mode", c.mode);
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.auth_env = j.value("auth_env", "");
    c.fixture_path = resolve_path(base, j.value("fixture_path", ""));
    c.dim = j.value("dim", c.dim);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_seconds = j.value("backoff_seconds", c.backoff_seconds);
    c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
    return c;
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
    json j = json::parse(util::read_file(path), nullptr, true, /*ignore_comments=*/true);
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(j,
                        {"datasets", "templates_dir", "lexicon", "word_vectors", "chat",
                         "embedding", "embedding_cache", "seeds", "geometry", "novelty_threshold",
                         "out_dir", "word_list_n", "detect_kinds"},
                        "config");

    const fs::path base = fs::path(path).parent_path();
    RunConfig c;

    if (j.contains("datasets")) {
        const json& d = j["datasets"];
        reject_unknown_keys(d, {"figqa", "munch"}, "datasets");
        c.figqa_csv = resolve_path(base, d.value("figqa", ""));
        c.munch_csv = resolve_path(base, d.value("munch", ""));
    }
    c.templates_dir = resolve_path(base, j.value("templates_dir", ""));
    c.lexicon_path = resolve_path(base, j.value("lexicon", ""));

    if (j.contains("word_vectors")) {
        const json& w = j["word_vectors"];
        reject_unknown_keys(w, {"path", "dim"}, "word_vectors");
        c.word_vectors.path = resolve_path(base, w.value("path", ""));
        c.word_vectors.dim = w.value("dim", c.word_vectors.dim);
    }

    if (j.contains("chat")) c.chat = parse_chat(j["chat"], base);
    if (j.contains("embedding")) c.embedding = parse_embedding(j["embedding"], base);
    c.embedding_cache = resolve_path(base, j.value("embedding_cache", ""));

    if (j.contains("seeds")) {
        for (const auto& [key, value] : j["seeds"].items()) {
            if (!value.is_number_unsigned())
                throw ConfigError("seed '" + key + "' must be a nonnegative integer");
            if (key == "global") c.global_seed = value.get<std::uint64_t>();
            else c.seed_overrides[key] = value.get<std::uint64_t>();
        }
    }

    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        reject_unknown_keys(g, {"mode", "angle"}, "geometry");
        if (g.contains("mode"))
            c.geometry.mode = geometry::plane_mode_from_string(g["mode"].get<std::string>());
        if (g.contains("angle"))
            c.geometry.angle = geometry::angle_method_from_string(g["angle"].get<std::string>());
    }

    c.novelty_threshold = j.value("novelty_threshold", c.novelty_threshold);
    if (j.contains("out_dir")) c.out_dir = resolve_path(base, j["out_dir"].get<std::string>());
    c.word_list_n = j.value("word_list_n", c.word_list_n);

    if (j.contains("detect_kinds")) {
        for (const auto& k : j["detect_kinds"])
            c.detect_kinds.push_back(transforms::variant_kind_from_string(k.get<std::string>()));
    } else {
        c.detect_kinds = transforms::all_variant_kinds();
    }

    c.validate();
    return c;
}

void RunConfig::validate() const {
    if (chat.mode == "live") {
        if (chat.endpoint.empty() || chat.model.empty())
            throw ConfigError("chat: live mode needs endpoint and model");
        if (!chat.fixture_path.empty())
            throw ConfigError("chat: live mode and fixture_path are mutually exclusive");
    } else if (chat.mode == "fixture") {
        if (chat.fixture_path.empty() || chat.model.empty())
            throw ConfigError("chat: fixture mode needs fixture_path and model");
        if (!chat.endpoint.empty())
            throw ConfigError("chat: fixture mode and endpoint are mutually exclusive");
    } else {
        throw ConfigError("chat: unknown mode '" + chat.mode + "'");
    }

    if (embedding.mode == "live") {
        if (embedding.endpoint.empty() || embedding.model.empty())
            throw ConfigError("embedding: live mode needs endpoint and model");
        if (!embedding.fixture_path.empty())
            throw ConfigError("embedding: live mode and fixture_path are mutually exclusive");
    } else if (embedding.mode == "fixture") {
        if (embedding.fixture_path.empty() || embedding.model.empty())
            throw ConfigError("embedding: fixture mode needs fixture_path and model");
        if (!embedding.endpoint.empty())
            throw ConfigError("embedding: fixture mode and endpoint are mutually exclusive");
    } else if (embedding.mode == "hashed") {
        if (embedding.dim < 2) throw ConfigError("embedding: hashed mode needs dim >= 2");
        if (!embedding.endpoint.empty() || !embedding.fixture_path.empty())
            throw ConfigError("embedding: hashed mode takes neither endpoint nor fixture_path");
    } else {
        throw ConfigError("embedding: unknown mode '" + embedding.mode + "'");
    }

    if (novelty_threshold < 0.0 || novelty_threshold > 1.0)
        throw ConfigError("novelty_threshold must be in [0,1]");
    if (word_list_n < 1) throw ConfigError("word_list_n must be positive");
    if (detect_kinds.empty()) throw ConfigError("detect_kinds must not be empty");
}

std::uint64_t RunConfig::seed_for(const std::string& experiment) const {
    auto it = seed_overrides.find(experiment);
    if (it != seed_overrides.end()) return it->second;
    return derive_seed(global_seed, experiment);
}

nlohmann::json RunConfig::resolved() const {
    json seeds = {{"global", global_seed}};
    for (const auto& [k, v] : seed_overrides) seeds[k] = v;

    json kinds = json::array();
    for (auto k : detect_kinds) kinds.push_back(transforms::to_string(k));

    return json{
        {"datasets", {{"figqa", figqa_csv}, {"munch", munch_csv}}},
        {"templates_dir", templates_dir},
        {"lexicon", lexicon_path},
        {"word_vectors", {{"path", word_vectors.path}, {"dim", word_vectors.dim}}},
        {"chat",
         {{"mode", chat.mode},
          {"endpoint", chat.endpoint},
          {"model", chat.model},
          {"auth_env", chat.auth_env},
          {"fixture_path", chat.fixture_path},
          {"max_retries", chat.max_retries},
          {"backoff_seconds", chat.backoff_seconds},
          {"requests_per_minute", chat.requests_per_minute},
          {"temperature", chat.temperature}}},
        {"embedding",
         {{"mode", embedding.mode},
          {"endpoint", embedding.endpoint},
          {"model", embedding.model},
          {"auth_env", embedding.auth_env},
          {"fixture_path", embedding.fixture_path},
          {"dim", embedding.dim},
          {"batch_size", embedding.batch_size},
          {"max_retries", embedding.max_retries},
          {"backoff_seconds", embedding.backoff_seconds},
          {"requests_per_minute", embedding.requests_per_minute}}},
        {"embedding_cache", embedding_cache},
        {"seeds", seeds},
        {"geometry",
         {{"mode", geometry::to_string(geometry.mode)},
          {"angle", geometry::to_string(geometry.angle)}}},
        {"novelty_threshold", novelty_threshold},
        {"out_dir", out_dir},
        {"word_list_n", word_list_n},
        {"detect_kinds", kinds},
    };
}

std::string RunConfig::config_hash() const { return util::sha256_hex(resolved().dump()); }

std::shared_ptr<llm::ChatProvider> RunConfig::make_chat_provider() const {
    if (chat.mode == "fixture")
        return std::make_shared<llm::FixtureChatProvider>(chat.fixture_path, chat.model);
    llm::HttpChatConfig hc;
    hc.endpoint = chat.endpoint;
    hc.model = chat.model;
    hc.auth_env = chat.auth_env;
    hc.max_retries = chat.max_retries;
    hc.backoff_seconds = chat.backoff_seconds;
    hc.requests_per_minute = chat.requests_per_minute;
    hc.temperature = chat.temperature;
    return std::make_shared<llm::HttpChatProvider>(hc);
}

std::shared_ptr<emb::EmbeddingProvider> RunConfig::make_embedding_provider() const {
    if (embedding.mode == "fixture")
        return std::make_shared<emb::FixtureEmbeddingProvider>(embedding.fixture_path,
                                                               embedding.model);
    if (embedding.mode == "hashed") {
        std::string id = embedding.model.empty()
                             ? "hashed-dim" + std::to_string(embedding.dim)
                             : embedding.model;
        return std::make_shared<emb::HashedEmbeddingProvider>(embedding.dim, id);
    }
    emb::HttpEmbeddingConfig ec;
    ec.endpoint = embedding.endpoint;
    ec.model = embedding.model;
    ec.auth_env = embedding.auth_env;
    ec.max_retries = embedding.max_retries;
    ec.backoff_seconds = embedding.backoff_seconds;
    ec.requests_per_minute = embedding.requests_per_minute;
    ec.batch_size = embedding.batch_size;
    return std::make_shared<emb::HttpEmbeddingProvider>(ec);
}

}  // namespace metaprobe::config
