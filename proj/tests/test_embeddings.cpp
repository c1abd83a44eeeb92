#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/util.hpp"

using namespace metaprobe;

namespace {

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "metaprobe_emb_test";
    std::filesystem::create_directories(p);
    return p;
}

class CountingProvider : public emb::EmbeddingProvider {
public:
    explicit CountingProvider(int dim) : inner_(dim, "counting") {}
    std::vector<geom::Vec> embed(const std::vector<std::string>& texts) override {
        calls += 1;
        vectors += texts.size();
        return inner_.embed(texts);
    }
    const std::string& model_id() const override { return inner_.model_id(); }
    bool is_live() const override { return false; }
    size_t calls = 0;
    size_t vectors = 0;

private:
    emb::HashedEmbeddingProvider inner_;
};

}  // namespace

TEST_CASE("hashed provider is deterministic, unit-norm, and text-sensitive") {
    emb::HashedEmbeddingProvider p(64, "hashed-dim64");
    auto a = p.embed({"some sentence"});
    auto b = p.embed({"some sentence", "another"});
    CHECK(a[0] == b[0]);
    CHECK(a[0].size() == 64);
    CHECK(a[0].norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((b[0] - b[1]).norm() > 0.1);
}

TEST_CASE("embedder normalizes text, quantizes, and dedupes within a batch") {
    auto provider = std::make_shared<CountingProvider>(16);
    emb::Embedder embedder(provider, nullptr);
    auto out = embedder.embed_batch({"Hello  world", "Hello world", "other"});
    REQUIRE(out.size() == 3);
    CHECK(out[0] == out[1]);  // same normalized text, one provider vector
    CHECK(provider->vectors == 2);
    CHECK(provider->calls == 1);
    // quantization: every coordinate survives a float32 round trip unchanged
    CHECK(util::quantize_f32(out[0]) == out[0]);
    CHECK_THROWS_AS(embedder.embed_batch({"   "}), EmptyTextError);
}

TEST_CASE("embedder preserves input order") {
    auto provider = std::make_shared<CountingProvider>(8);
    emb::Embedder embedder(provider, nullptr);
    std::vector<std::string> texts{"c", "a", "b", "a"};
    auto out = embedder.embed_batch(texts);
    emb::HashedEmbeddingProvider direct(8, "counting");
    for (size_t i = 0; i < texts.size(); ++i)
        CHECK(out[i] == util::quantize_f32(direct.embed({texts[i]})[0]));
}

TEST_CASE("cache makes the second run hit the provider zero times") {
    auto dir = temp_dir();
    auto path = (dir / "cache.tsv").string();
    std::filesystem::remove(path);
    {
        emb::EmbeddingCache cache(path);
        auto provider = std::make_shared<CountingProvider>(8);
        emb::Embedder embedder(provider, &cache);
        embedder.embed_batch({"one", "two", "three"});
        CHECK(provider->vectors == 3);
        embedder.embed_batch({"two", "three", "four"});
        CHECK(provider->vectors == 4);  // only the genuinely new text
    }
    {
        emb::EmbeddingCache cache(path);  // reload from disk
        CHECK(cache.size() == 4);
        auto provider = std::make_shared<CountingProvider>(8);
        emb::Embedder embedder(provider, &cache);
        auto warm = embedder.embed_batch({"one", "two", "three", "four"});
        CHECK(provider->vectors == 0);
        emb::HashedEmbeddingProvider direct(8, "counting");
        CHECK(warm[0] == util::quantize_f32(direct.embed({"one"})[0]));
    }
}

TEST_CASE("cache tolerates corrupt lines and distinguishes models") {
    auto dir = temp_dir();
    auto path = (dir / "corrupt.tsv").string();
    {
        std::ofstream out(path);
        out << "nota\tvalid\n";            // wrong arity
        out << "garbage line entirely\n";  // no tabs
        geom::Vec v(2);
        v << 1.0f, 2.0f;
        out << "hash1\tmodel-a\t" << util::encode_vector_f32(v) << "\n";
    }
    emb::EmbeddingCache cache(path);
    CHECK(cache.size() == 1);
    CHECK(cache.corrupt_lines() == 2);
    CHECK(cache.get("hash1", "model-a").has_value());
    CHECK(!cache.get("hash1", "model-b").has_value());
    CHECK(!cache.get("hash2", "model-a").has_value());
}

TEST_CASE("fixture embedding provider replays byte-identical vectors") {
    auto dir = temp_dir();
    auto path = (dir / "emb_fixture.jsonl").string();
    std::filesystem::remove(path);
    auto hashed = std::make_shared<emb::HashedEmbeddingProvider>(12, "hashed-dim12");
    auto rec = std::make_shared<emb::RecordingEmbeddingProvider>(hashed, path);
    emb::Embedder recorder(rec, nullptr);
    auto original = recorder.embed_batch({"alpha", "beta"});

    auto fixture = std::make_shared<emb::FixtureEmbeddingProvider>(path, "hashed-dim12");
    emb::Embedder replay(fixture, nullptr);
    auto replayed = replay.embed_batch({"alpha", "beta"});
    CHECK(original[0] == replayed[0]);
    CHECK(original[1] == replayed[1]);
    CHECK(replay.live_calls() == 0);
    CHECK_THROWS_AS(replay.embed_batch({"never embedded"}), ProviderError);
}

TEST_CASE("three orthonormal mock embeddings give the coordinate plane downstream") {
    auto axes = std::make_shared<emb::CallbackEmbeddingProvider>(
        [](const std::string& text) {
            geom::Vec v = geom::Vec::Zero(3);
            if (text == "r1") v[0] = 1;
            if (text == "r2") v[1] = 1;
            if (text == "s") v[2] = 1;
            return v;
        },
        "axes");
    emb::Embedder embedder(axes, nullptr);
    auto vs = embedder.embed_batch({"r1", "r2", "s"});
    auto plane = geometry::fit_plane(vs[0], vs[1], vs[2], geometry::PlaneMode::Uncentered);
    geom::Vec inplane(3), off(3);
    inplane << 0.5, 0.5, 0.0;
    // uncentered fit of the three axes spans the dominant pair; distance of a
    // vector along the remaining axis equals its length component
    double d = geometry::perpendicular_distance(plane, vs[0] + vs[1]);
    CHECK(d == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("word vector table lookup is lowercase and skips malformed lines") {
    auto dir = temp_dir();
    auto path = (dir / "vecs.txt").string();
    {
        std::ofstream out(path);
        out << "walk 1.0 0.0\n";
        out << "Run 0.0 1.0\n";      // key stored lowercased
        out << "short 1.0\n";        // wrong arity: skipped
        out << "\n";
    }
    auto table = emb::WordVectorTable::load(path, 2);
    CHECK(table.size() == 2);
    CHECK(table.skipped_lines() == 1);
    CHECK(table.contains("walk"));
    CHECK(table.lookup("RUN").has_value());
    CHECK((*table.lookup("Walk") == *table.lookup("walk")));
    CHECK(!table.lookup("zzqx-nonword").has_value());
    CHECK(table.dim() == 2);
}
