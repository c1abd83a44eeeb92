#include "metaprobe/embeddings.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/rng.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::emb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Fixture / recording

FixtureEmbeddingProvider::FixtureEmbeddingProvider(const std::string& path, std::string model_id)
    : model_id_(std::move(model_id)) {
    for (const auto& line : util::read_lines(path)) {
        if (util::trim(line).empty()) continue;
        json j = json::parse(line);
        entries_[j.at("text_sha256").get<std::string>()] =
            util::decode_vector_f32(j.at("vector_b64").get<std::string>());
    }
}

std::vector<geom::Vec> FixtureEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<geom::Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = entries_.find(util::sha256_hex(t));
        if (it == entries_.end())
            throw ProviderError("embedding fixture has no entry for text hash " +
                                util::sha256_hex(t));
        out.push_back(it->second);
    }
    return out;
}

RecordingEmbeddingProvider::RecordingEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                                       const std::string& path)
    : inner_(std::move(inner)), path_(path) {}

std::vector<geom::Vec> RecordingEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    auto vecs = inner_->embed(texts);
    std::lock_guard<std::mutex> lock(write_mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to fixture file: " + path_);
    for (size_t i = 0; i < texts.size(); ++i) {
        json j = {{"text_sha256", util::sha256_hex(texts[i])},
                  {"vector_b64", util::encode_vector_f32(vecs[i])}};
        out << j.dump() << "\n";
    }
    return vecs;
}

// ---------------------------------------------------------------------------
// Hash-seeded pseudo-embeddings

HashedEmbeddingProvider::HashedEmbeddingProvider(int dim, std::string model_id)
    : dim_(dim), model_id_(std::move(model_id)) {
    if (dim_ < 1) throw InvalidArgument("embedding dim must be positive");
}

std::vector<geom::Vec> HashedEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<geom::Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::string hash = util::sha256_hex(t);
        std::uint64_t seed = std::strtoull(hash.substr(0, 16).c_str(), nullptr, 16);
        DetRng rng(seed);
        geom::Vec v(dim_);
        // Box-Muller over the deterministic engine; unit-normalized after.
        for (int i = 0; i < dim_; i += 2) {
            double u1 = (static_cast<double>(rng.next() >> 11) + 1.0) / 9007199254740993.0;
            double u2 = static_cast<double>(rng.next() >> 11) / 9007199254740992.0;
            double r = std::sqrt(-2.0 * std::log(u1));
            v[i] = r * std::cos(2.0 * M_PI * u2);
            if (i + 1 < dim_) v[i + 1] = r * std::sin(2.0 * M_PI * u2);
        }
        double norm = v.norm();
        if (norm > 0.0) v /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cache

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // first run: file appears on the first put
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            ++corrupt_lines_;
            continue;
        }
        try {
            geom::Vec vec = util::decode_vector_f32(line.substr(t2 + 1));
            if (vec.size() == 0) {
                ++corrupt_lines_;
                continue;
            }
            entries_[{line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1)}] = std::move(vec);
        } catch (const Error&) {
            ++corrupt_lines_;
        }
    }
}

std::optional<geom::Vec> EmbeddingCache::get(const std::string& text_hash,
                                             const std::string& model_id) const {
    auto it = entries_.find({text_hash, model_id});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::put(const std::string& text_hash, const std::string& model_id,
                         const geom::Vec& vec) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(text_hash, model_id);
    if (entries_.count(key)) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw ProviderError("cannot append to embedding cache: " + path_);
    out << text_hash << '\t' << model_id << '\t' << util::encode_vector_f32(vec) << '\n';
    entries_[key] = vec;
}

// ---------------------------------------------------------------------------
// Embedder

Embedder::Embedder(std::shared_ptr<EmbeddingProvider> provider, EmbeddingCache* cache)
    : provider_(std::move(provider)), cache_(cache) {}

std::vector<geom::Vec> Embedder::embed_batch(const std::vector<std::string>& texts) {
    const std::string& model = provider_->model_id();

    struct Slot {
        std::string hash;
        std::optional<geom::Vec> vec;
    };
    std::vector<Slot> slots(texts.size());
    std::vector<std::string> miss_texts;
    std::vector<std::string> miss_hashes;
    std::unordered_map<std::string, size_t> miss_index;

    for (size_t i = 0; i < texts.size(); ++i) {
        std::string normalized = util::normalize_text(texts[i]);
        if (normalized.empty())
            throw EmptyTextError("embed_batch: input " + std::to_string(i) +
                                 " normalizes to empty text");
        slots[i].hash = util::sha256_hex(normalized);
        if (cache_) slots[i].vec = cache_->get(slots[i].hash, model);
        if (!slots[i].vec && !miss_index.count(slots[i].hash)) {
            miss_index[slots[i].hash] = miss_texts.size();
            miss_texts.push_back(std::move(normalized));
            miss_hashes.push_back(slots[i].hash);
        }
    }

    std::vector<geom::Vec> fetched(miss_texts.size());
    if (!miss_texts.empty()) {
        if (provider_->is_live()) ++live_calls_;
        auto raw = provider_->embed(miss_texts);
        if (raw.size() != miss_texts.size())
            throw ProviderError("embedding provider returned " + std::to_string(raw.size()) +
                                " vectors for " + std::to_string(miss_texts.size()) + " texts");
        for (size_t i = 0; i < raw.size(); ++i) {
            // round through float32, the cache codec's precision, so cold and
            // warm runs see identical doubles
            fetched[i] = util::quantize_f32(raw[i]);
            if (cache_) cache_->put(miss_hashes[i], model, fetched[i]);
        }
    }

    std::vector<geom::Vec> out;
    out.reserve(texts.size());
    for (auto& slot : slots) {
        if (slot.vec) {
            out.push_back(std::move(*slot.vec));
        } else {
            out.push_back(fetched[miss_index.at(slot.hash)]);
        }
    }
    return out;
}

geom::Vec Embedder::embed_one(const std::string& text) {
    return embed_batch({text})[0];
}

// ---------------------------------------------------------------------------
// Word vectors

WordVectorTable WordVectorTable::load(const std::string& path, int expected_dim) {
    if (expected_dim < 1) throw InvalidArgument("word vector dim must be positive");
    WordVectorTable table;
    table.dim_ = expected_dim;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open word vector file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word.empty()) {
            ++table.skipped_lines_;
            continue;
        }
        std::vector<double> nums;
        nums.reserve(static_cast<size_t>(expected_dim));
        double x;
        while (ss >> x) nums.push_back(x);
        if (static_cast<int>(nums.size()) != expected_dim) {
            ++table.skipped_lines_;
            continue;
        }
        geom::Vec v(expected_dim);
        for (int i = 0; i < expected_dim; ++i) v[i] = nums[static_cast<size_t>(i)];
        table.vectors_[util::lowercase(word)] = std::move(v);
    }
    return table;
}

std::optional<geom::Vec> WordVectorTable::lookup(const std::string& word) const {
    auto it = vectors_.find(util::lowercase(word));
    if (it == vectors_.end()) return std::nullopt;
    return it->second;
}

}  // namespace metaprobe::emb
