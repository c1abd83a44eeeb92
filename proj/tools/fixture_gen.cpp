// Dev tool: regenerate the committed fixture files for the bundled sample
// corpus. A scripted chat provider stands in for a live model; its replies are
// deterministic functions of the rendered prompt, so re-running this tool is
// idempotent. Embeddings come from the hashed provider. Both are wrapped in
// recording providers that write the replay files referenced by the sample
// config. Run from the repo root:
//
//   fixture_gen data/sample_config.json

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "metaprobe/config.hpp"
#include "metaprobe/corpus.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/experiments.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/rng.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/transforms.hpp"
#include "metaprobe/util.hpp"

namespace {

using namespace metaprobe;

const std::vector<std::string> kBank = {
    "absorb",  "anchor",  "ascend",   "balance", "barrier", "blaze",    "bloom",  "breeze",
    "bridge",  "burden",  "carve",    "cascade", "channel", "circle",   "cloud",  "collapse",
    "current", "dawn",    "drift",    "echo",    "ember",   "fade",     "flood",  "flow",
    "forge",   "fountain", "fracture", "glide",   "grip",    "harbor",   "harvest", "hollow",
    "kindle",  "ladder",  "mirror",   "orbit",   "pulse",   "ripple",   "root",   "shadow",
    "shell",   "spark",   "storm",    "surge",   "thread",  "tide",     "weave",  "wander"};

const std::vector<std::string> kInterpretations = {
    "is quite ordinary", "works as expected",  "behaves plainly",
    "stays unremarkable", "does very little",  "performs strongly"};

std::string field(const std::string& prompt, const std::string& label) {
    std::string needle = "\n" + label + ": ";
    auto pos = prompt.find(needle);
    if (pos == std::string::npos) return "";
    pos += needle.size();
    auto end = prompt.find('\n', pos);
    if (end == std::string::npos) end = prompt.size();
    return prompt.substr(pos, end - pos);
}

std::string strip_terminal(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
    return s;
}

std::string decap(std::string s) {
    if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z') s[0] = static_cast<char>(s[0] - 'A' + 'a');
    return s;
}

std::uint64_t prompt_seed(const std::string& prompt) {
    return std::strtoull(util::sha256_hex(prompt).substr(0, 16).c_str(), nullptr, 16);
}

// n distinct picks from bank[lo, hi), order fixed by the seed
std::vector<std::string> pick_words(std::uint64_t seed, size_t n, size_t lo, size_t hi) {
    DetRng rng(seed);
    std::vector<size_t> idx;
    for (size_t i = lo; i < hi; ++i) idx.push_back(i);
    rng.shuffle(idx);
    if (n > idx.size()) n = idx.size();
    std::vector<std::string> out;
    for (size_t i = 0; i < n; ++i) out.push_back(kBank[idx[i]]);
    return out;
}

std::string numbered(const std::vector<std::string>& words) {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i)
        out += std::to_string(i + 1) + ". " + words[i] + "\n";
    return out;
}

std::string comma_joined(const std::vector<std::string>& words) {
    return util::join(words, ", ");
}

llm::ChatResult scripted_reply(const std::string& prompt) {
    // Branch on the distinctive instruction line of each template.
    if (prompt.find("equivalent literal sentence") != std::string::npos) {
        std::string r1 = field(prompt, "Reference 1");
        std::string r2 = field(prompt, "Reference 2");
        return {"Put plainly, " + decap(strip_terminal(r1)) + " and " +
                    decap(strip_terminal(r2)) + ".",
                false};
    }
    if (prompt.find("Only alter the concept-relevant part") != std::string::npos) {
        std::string metaphor = field(prompt, "Metaphor");
        std::string fragment = field(prompt, "Concept-relevant part");
        if (metaphor.find("glacier") != std::string::npos) return {"", true};  // scripted refusal
        std::string out = metaphor;
        auto pos = out.find(fragment);
        if (pos != std::string::npos)
            out.replace(pos, fragment.size(),
                        kInterpretations[prompt_seed(prompt) % kInterpretations.size()]);
        return {out, false};
    }
    if (prompt.find("shortest contiguous fragment") != std::string::npos) {
        auto t = tokenize(field(prompt, "Metaphor"));
        std::vector<std::string> tail(t.tokens.begin() + (t.tokens.size() > 2 ? 2 : t.tokens.size() - 1),
                                      t.tokens.end());
        return {util::join(tail, " "), false};
    }
    if (prompt.find("Imagine 20") != std::string::npos) {
        std::string word = field(prompt, "Word");
        bool with_context = prompt.find("in this context") != std::string::npos;
        // two scripted corner cases: an all-out-of-vocabulary reply and a
        // disjoint in-vocabulary reply; everything else is seeded from the prompt
        if (!with_context && word == "thief") {
            std::vector<std::string> made;
            for (int i = 1; i <= 20; ++i) made.push_back("glimshard" + std::to_string(i));
            return {comma_joined(made), false};
        }
        if (word == "cut") {
            auto words = with_context ? pick_words(1, 20, 0, 20) : pick_words(2, 20, 24, 44);
            return {with_context ? numbered(words) : comma_joined(words), false};
        }
        auto words = pick_words(prompt_seed(prompt), 20, with_context ? 0 : 18,
                                with_context ? 30 : kBank.size());
        return {with_context ? numbered(words) : comma_joined(words), false};
    }
    if (prompt.find("contain a metaphor") != std::string::npos) {
        std::uint64_t h = prompt_seed(prompt);
        if (h % 17 == 0) return {"Hard to say.", false};
        if (h % 5 == 0) return {"No.", false};
        return {"Yes.", false};
    }
    if (prompt.find("Paraphrase the literal sentence") != std::string::npos) {
        return {"In other words, " + decap(strip_terminal(field(prompt, "Reference"))) + ".",
                false};
    }
    if (prompt.find("Rewrite the metaphor") != std::string::npos) {
        return {"Simply put, " + decap(strip_terminal(field(prompt, "Metaphor"))) + ".", false};
    }
    if (prompt.find("letter of the correct option") != std::string::npos) {
        return {std::string(1, static_cast<char>('A' + prompt_seed(prompt) % 4)), false};
    }
    return {"", true};
}

}  // namespace

int main(int argc, char** argv) {
    using namespace metaprobe;
    std::string config_path = argc > 1 ? argv[1] : "data/sample_config.json";
    auto cfg = config::RunConfig::load(config_path);

    std::filesystem::create_directories(
        std::filesystem::path(cfg.chat.fixture_path).parent_path());
    std::filesystem::remove(cfg.chat.fixture_path);
    std::filesystem::remove(cfg.embedding.fixture_path);

    auto scripted = std::make_shared<llm::CallbackChatProvider>(scripted_reply, cfg.chat.model);
    auto chat = std::make_shared<llm::RecordingChatProvider>(scripted, cfg.chat.fixture_path);
    auto registry = llm::TemplateRegistry::load(cfg.templates_dir);
    llm::GatewayOptions gw_opts;
    gw_opts.word_list_n = cfg.word_list_n;
    llm::Gateway gateway(chat, &registry, gw_opts);

    auto hashed = std::make_shared<emb::HashedEmbeddingProvider>(cfg.embedding.dim,
                                                                 cfg.embedding.model);
    auto recorder =
        std::make_shared<emb::RecordingEmbeddingProvider>(hashed, cfg.embedding.fixture_path);
    emb::Embedder embedder(recorder, nullptr);

    auto figqa = corpus::load_figqa(cfg.figqa_csv);
    corpus::annotate_spans(figqa.records, gateway);
    auto spatial = experiments::run_spatial(figqa.records, gateway, embedder, cfg.geometry);
    std::printf("spatial: %zu items, %zu scored\n", spatial.items.size(),
                spatial.summary.items_scored);

    auto multi = experiments::run_multichoice(figqa.records, gateway, cfg.seed_for("multichoice"));
    std::printf("multichoice: %zu items\n", multi.items.size());

    auto munch = corpus::load_munch(cfg.munch_csv);
    auto table = emb::WordVectorTable::load(cfg.word_vectors.path, cfg.word_vectors.dim);
    auto imagination =
        experiments::run_imagination(munch.records, gateway, table, cfg.novelty_threshold);
    std::printf("imagination: %zu items\n", imagination.items.size());

    auto lexicon = transforms::Lexicon::load(cfg.lexicon_path);
    std::vector<transforms::ShuffleVariant> variants;
    std::map<transforms::VariantKind, size_t> skips;
    std::uint64_t shuffle_seed = cfg.seed_for("shuffle");
    for (const auto& rec : munch.records) {
        for (auto& outcome :
             transforms::generate_variants(rec, cfg.detect_kinds, &lexicon, shuffle_seed)) {
            if (auto* v = std::get_if<transforms::ShuffleVariant>(&outcome))
                variants.push_back(std::move(*v));
            else
                ++skips[std::get<transforms::Skip>(outcome).kind];
        }
    }
    auto detection =
        experiments::run_shuffle_detection(variants, skips, cfg.detect_kinds, gateway);
    std::printf("detection: %zu outcomes over %zu variants\n", detection.outcomes.size(),
                variants.size());
    std::printf("chat calls ok/refused/parse_failed: %llu/%llu/%llu\n",
                static_cast<unsigned long long>(gateway.count_ok()),
                static_cast<unsigned long long>(gateway.count_refused()),
                static_cast<unsigned long long>(gateway.count_parse_failed()));
    return 0;
}
