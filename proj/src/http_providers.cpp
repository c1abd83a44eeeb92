#include "metaprobe/embeddings.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/llm.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "json.hpp"

namespace metaprobe {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

double monotonic_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void add_auth_header(httplib::Headers& headers, const std::string& auth_env) {
    if (auth_env.empty()) return;
    const char* token = std::getenv(auth_env.c_str());
    if (!token || !*token) throw ProviderError("auth env var not set: " + auth_env);
    headers.emplace("Authorization", std::string("Bearer ") + token);
}

}  // namespace

namespace llm {

HttpChatProvider::HttpChatProvider(HttpChatConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ConfigError("chat provider endpoint is empty");
    if (cfg_.model.empty()) throw ConfigError("chat provider model is empty");
}

ChatResult HttpChatProvider::complete(const std::string& prompt) {
    if (cfg_.requests_per_minute > 0.0) {
        std::lock_guard<std::mutex> lock(pace_mutex_);
        double gap = 60.0 / cfg_.requests_per_minute;
        double now = monotonic_seconds();
        double wait = last_call_monotonic_ + gap - now;
        if (wait > 0.0)
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        last_call_monotonic_ = monotonic_seconds();
    }

    SplitUrl url = split_url(cfg_.endpoint);
    httplib::Client client(url.base);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    httplib::Headers headers;
    add_auth_header(headers, cfg_.auth_env);

    json body = {
        {"model", cfg_.model},
        {"temperature", cfg_.temperature},
        {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
    };
    std::string payload = body.dump();

    std::string last_error;
    double backoff = cfg_.backoff_seconds;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "http " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderError("chat request failed with http " + std::to_string(res->status) +
                                ": " + res->body.substr(0, 200));
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded())
            throw ProviderError("chat response is not valid JSON");
        try {
            const json& choice = reply.at("choices").at(0);
            ChatResult out;
            if (choice.contains("finish_reason") &&
                choice["finish_reason"].get<std::string>() == "content_filter") {
                out.refused = true;
                return out;
            }
            out.text = choice.at("message").at("content").get<std::string>();
            return out;
        } catch (const json::exception& e) {
            throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
        }
    }
    throw ProviderError("chat request failed after " + std::to_string(cfg_.max_retries + 1) +
                        " attempts (" + last_error + ")");
}

}  // namespace llm

namespace emb {

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ConfigError("embedding provider endpoint is empty");
    if (cfg_.model.empty()) throw ConfigError("embedding provider model is empty");
    if (cfg_.batch_size < 1) throw ConfigError("embedding batch_size must be positive");
}

std::vector<geom::Vec> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<geom::Vec> out;
    out.reserve(texts.size());
    for (size_t start = 0; start < texts.size(); start += static_cast<size_t>(cfg_.batch_size)) {
        size_t end = std::min(texts.size(), start + static_cast<size_t>(cfg_.batch_size));
        std::vector<std::string> chunk(texts.begin() + static_cast<long>(start),
                                       texts.begin() + static_cast<long>(end));
        auto vecs = embed_batch_once(chunk);
        for (auto& v : vecs) out.push_back(std::move(v));
    }
    return out;
}

std::vector<geom::Vec> HttpEmbeddingProvider::embed_batch_once(
    const std::vector<std::string>& texts) {
    if (cfg_.requests_per_minute > 0.0) {
        std::lock_guard<std::mutex> lock(pace_mutex_);
        double gap = 60.0 / cfg_.requests_per_minute;
        double now = monotonic_seconds();
        double wait = last_call_monotonic_ + gap - now;
        if (wait > 0.0)
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        last_call_monotonic_ = monotonic_seconds();
    }

    SplitUrl url = split_url(cfg_.endpoint);
    httplib::Client client(url.base);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);

    httplib::Headers headers;
    add_auth_header(headers, cfg_.auth_env);

    json body = {{"model", cfg_.model}, {"input", texts}};
    std::string payload = body.dump();

    std::string last_error;
    double backoff = cfg_.backoff_seconds;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "http " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw ProviderError("embedding request failed with http " +
                                std::to_string(res->status) + ": " + res->body.substr(0, 200));
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded())
            throw ProviderError("embedding response is not valid JSON");
        try {
            const json& data = reply.at("data");
            if (data.size() != texts.size())
                throw ProviderError("embedding response has " + std::to_string(data.size()) +
                                    " rows for " + std::to_string(texts.size()) + " inputs");
            // rows carry an "index" field; order by it rather than trusting
            // the array order
            std::vector<geom::Vec> out(texts.size());
            std::vector<bool> filled(texts.size(), false);
            for (const auto& row : data) {
                size_t idx = row.at("index").get<size_t>();
                if (idx >= texts.size() || filled[idx])
                    throw ProviderError("embedding response has a bad index field");
                const json& nums = row.at("embedding");
                geom::Vec v(static_cast<Eigen::Index>(nums.size()));
                for (size_t i = 0; i < nums.size(); ++i)
                    v[static_cast<Eigen::Index>(i)] = nums[i].get<double>();
                out[idx] = std::move(v);
                filled[idx] = true;
            }
            return out;
        } catch (const json::exception& e) {
            throw ProviderError(std::string("unexpected embedding response shape: ") + e.what());
        }
    }
    throw ProviderError("embedding request failed after " + std::to_string(cfg_.max_retries + 1) +
                        " attempts (" + last_error + ")");
}

}  // namespace emb
}  // namespace metaprobe
