#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "metaprobe/corpus.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/experiments.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/tokenizer.hpp"
#include "metaprobe/transforms.hpp"

using namespace metaprobe;
using experiments::Direction;
using experiments::OverlapBasis;

namespace {

// five-word table with hand-chosen two-dimensional vectors
emb::WordVectorTable five_word_table() {
    auto dir = std::filesystem::temp_directory_path() / "metaprobe_exp_test";
    std::filesystem::create_directories(dir);
    auto p = dir / "five.txt";
    std::ofstream(p) << "north 0.0 1.0\n"
                     << "south 0.0 -1.0\n"
                     << "east 1.0 0.0\n"
                     << "northeast 0.7071067811865476 0.7071067811865476\n"
                     << "west -1.0 0.0\n";
    return emb::WordVectorTable::load(p.string(), 2);
}

llm::TemplateRegistry full_registry() {
    return llm::TemplateRegistry::load(std::string(METAPROBE_SOURCE_DIR) + "/data/templates");
}

std::vector<corpus::FigQaGroup> sample_groups() {
    return corpus::load_figqa(std::string(METAPROBE_SOURCE_DIR) + "/data/figqa_sample.csv")
        .records;
}

std::vector<corpus::MunchRecord> sample_records() {
    return corpus::load_munch(std::string(METAPROBE_SOURCE_DIR) + "/data/munch_sample.csv")
        .records;
}

std::string field(const std::string& prompt, const std::string& label) {
    std::string needle = "\n" + label + ": ";
    auto pos = prompt.find(needle);
    if (pos == std::string::npos) return "";
    pos += needle.size();
    auto end = prompt.find('\n', pos);
    if (end == std::string::npos) end = prompt.size();
    return prompt.substr(pos, end - pos);
}

// answers span prompts with a verbatim fragment; everything else constant
llm::ChatResult span_or(const std::string& prompt, const std::string& general) {
    if (prompt.find("shortest contiguous fragment") != std::string::npos) {
        auto t = tokenize(field(prompt, "Metaphor"));
        std::vector<std::string> tail(t.tokens.end() - 2, t.tokens.end());
        std::string out = tail[0] + " " + tail[1];
        return {out, false};
    }
    return {general, false};
}

}  // namespace

TEST_CASE("overlap ratio: shared word wins regardless of vectors") {
    auto table = five_word_table();
    auto s = experiments::overlap_ratio({"North", "unknownword"}, {"south", "north"}, table);
    CHECK(s.ratio == 1.0);
    CHECK(s.basis == OverlapBasis::SharedWord);
}

TEST_CASE("overlap ratio: disjoint sets match an exhaustive pair scan") {
    auto table = five_word_table();
    std::vector<std::string> a{"north", "east"};
    std::vector<std::string> b{"northeast", "west"};
    auto s = experiments::overlap_ratio(a, b, table);
    CHECK(s.basis == OverlapBasis::MaxCosine);
    double best = -2.0;
    for (const auto& wa : a)
        for (const auto& wb : b) {
            auto va = table.lookup(wa), vb = table.lookup(wb);
            if (va && vb) best = std::max(best, geometry::cosine(*va, *vb));
        }
    CHECK(s.ratio == doctest::Approx(std::max(0.0, best)).epsilon(1e-9));
    // north-northeast is the closest pair at cos 45 degrees
    CHECK(s.ratio == doctest::Approx(0.7071067811865476).epsilon(1e-9));
}

TEST_CASE("overlap ratio: symmetry, range, clamping of negative maxima") {
    auto table = five_word_table();
    std::vector<std::vector<std::string>> sets = {
        {"north"}, {"south"}, {"east", "west"}, {"northeast"}, {"north", "south"}};
    for (const auto& a : sets)
        for (const auto& b : sets) {
            auto ab = experiments::overlap_ratio(a, b, table);
            auto ba = experiments::overlap_ratio(b, a, table);
            CHECK(ab.ratio == ba.ratio);
            CHECK(ab.basis == ba.basis);
            CHECK(ab.ratio >= 0.0);
            CHECK(ab.ratio <= 1.0);
        }
    // north vs south: only cross pair has cosine -1, clamped to 0
    auto opp = experiments::overlap_ratio({"north"}, {"south"}, table);
    CHECK(opp.ratio == 0.0);
    CHECK(opp.basis == OverlapBasis::MaxCosine);
}

TEST_CASE("overlap ratio: all-OOV and empty-set outcomes") {
    auto table = five_word_table();
    auto s = experiments::overlap_ratio({"zzqx", "qqpl"}, {"north"}, table);
    CHECK(s.ratio == 0.0);
    CHECK(s.basis == OverlapBasis::AllOOV);
    CHECK_THROWS_AS(experiments::overlap_ratio({}, {"north"}, table), EmptySetError);
}

TEST_CASE("histogram binning covers the documented ranges") {
    CHECK(experiments::histogram_bin(1.0) == 0);
    CHECK(experiments::histogram_bin(0.9) == 1);
    CHECK(experiments::histogram_bin(0.8) == 1);
    CHECK(experiments::histogram_bin(0.5) == 2);
    CHECK(experiments::histogram_bin(0.2) == 3);
    CHECK(experiments::histogram_bin(0.19) == 4);
    CHECK(experiments::histogram_bin(0.0) == 4);
    CHECK(experiments::kHistogramBinLabels.size() == 5);
}

TEST_CASE("summarize_spatial computes population stats and rank correlations") {
    std::vector<experiments::SpatialItem> items;
    for (int i = 0; i < 4; ++i) {
        experiments::SpatialItem it;
        it.group_id = "g" + std::to_string(i);
        it.scored = true;
        it.d_p = 1.0 + i;          // 1,2,3,4
        it.cos_theta = 0.2 * i;    // 0,.2,.4,.6
        it.ad = 4.0 - i;           // 4,3,2,1: perfectly anti-correlated with d_p
        items.push_back(it);
    }
    experiments::SpatialItem bad;
    bad.group_id = "x";
    bad.scored = false;
    bad.exclude_reason = "interpret_refused";
    items.push_back(bad);

    auto s = experiments::summarize_spatial(items);
    CHECK(s.items_scored == 4);
    CHECK(s.items_excluded == 1);
    CHECK(s.exclusions.at("interpret_refused") == 1);
    CHECK(s.dp_mean == doctest::Approx(2.5));
    CHECK(s.dp_sd == doctest::Approx(std::sqrt(1.25)));  // population SD
    CHECK(s.cos_mean == doctest::Approx(0.3));
    REQUIRE(s.spearman_dp_ad.has_value());
    CHECK(*s.spearman_dp_ad == doctest::Approx(-1.0));
    REQUIRE(s.spearman_cos_dp.has_value());
    CHECK(*s.spearman_cos_dp == doctest::Approx(1.0));
}

TEST_CASE("summarize_spatial omits correlations when undefined") {
    std::vector<experiments::SpatialItem> items(1);
    items[0].scored = true;
    items[0].d_p = 1.0;
    auto s = experiments::summarize_spatial(items);
    CHECK(!s.spearman_dp_ad.has_value());  // single point: no rank correlation
}

TEST_CASE("summarize_imagination emits the fixed twelve-row aggregate grid") {
    std::vector<experiments::OverlapResult> items;
    experiments::OverlapResult a;
    a.record_id = "r1";
    a.direction = Direction::LM;
    a.genre = corpus::Genre::News;
    a.novelty = 0.9;
    a.ratio = 0.5;
    a.scored = true;
    items.push_back(a);
    a.direction = Direction::ML;
    a.ratio = 1.0;
    items.push_back(a);

    auto s = experiments::summarize_imagination(items, 0.3);
    REQUIRE(s.aggregates.size() == 12);
    CHECK(s.aggregates[0].scope == "all");
    CHECK(s.aggregates[0].direction == Direction::LM);
    CHECK(s.aggregates[0].mean_overlap_x100 == doctest::Approx(50.0));
    CHECK(s.aggregates[1].direction == Direction::ML);
    CHECK(s.aggregates[1].mean_overlap_x100 == doctest::Approx(100.0));
    // zero-count scopes still appear, with zero means
    bool fiction_seen = false;
    for (const auto& row : s.aggregates)
        if (row.scope == "genre:fiction") {
            fiction_seen = true;
            CHECK(row.count == 0);
            CHECK(row.mean_overlap_x100 == 0.0);
        }
    CHECK(fiction_seen);
    // histogram: one LM item at 0.5 and one ML item at 1.0
    CHECK(s.histogram.at(Direction::LM)[2] == 1);
    CHECK(s.histogram.at(Direction::ML)[0] == 1);
}

TEST_CASE("summarize_detection keeps the requested kind order") {
    using transforms::VariantKind;
    std::vector<experiments::DetectionOutcome> outcomes;
    experiments::DetectionOutcome o;
    o.kind = VariantKind::Random;
    o.label = experiments::DetectLabel::Metaphor;
    o.correct = true;
    outcomes.push_back(o);
    o.correct = true;
    outcomes.push_back(o);
    o.kind = VariantKind::Original;
    o.label = experiments::DetectLabel::Literal;
    o.correct = false;
    outcomes.push_back(o);
    o.label = experiments::DetectLabel::Unparsed;
    outcomes.push_back(o);

    std::map<VariantKind, size_t> skips{{VariantKind::Pos, 3}};
    std::vector<VariantKind> kinds{VariantKind::Original, VariantKind::Random,
                                   VariantKind::Pos};
    auto s = experiments::summarize_detection(outcomes, skips, kinds);
    REQUIRE(s.kinds.size() == 3);
    CHECK(s.kinds[0].kind == VariantKind::Original);
    CHECK(s.kinds[0].scored == 1);
    CHECK(s.kinds[0].excluded == 1);
    CHECK(s.kinds[0].accuracy_x100 == doctest::Approx(0.0));
    CHECK(s.kinds[1].scored == 2);
    CHECK(s.kinds[1].accuracy_x100 == doctest::Approx(100.0));
    CHECK(s.kinds[2].skipped == 3);
    CHECK(s.kinds[2].scored == 0);
}

TEST_CASE("sanity: interpretation equal to the equivalent sentence zeroes the metrics") {
    auto reg = full_registry();
    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) { return span_or(prompt, "The outcome is plain."); },
        "sanity-model");
    llm::Gateway gw(cb, &reg);
    auto hashed = std::make_shared<emb::HashedEmbeddingProvider>(32, "hashed-dim32");
    emb::Embedder embedder(hashed, nullptr);

    auto groups = sample_groups();
    corpus::annotate_spans(groups, gw);
    auto run = experiments::run_spatial(groups, gw, embedder, {});
    CHECK(run.summary.items_scored == 40);
    CHECK(run.summary.dp_mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(run.summary.cos_mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sanity: identical imagination word lists give aggregate overlap 100") {
    auto reg = full_registry();
    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) {
            return span_or(prompt, "river, stone, cloud, ember, tide");
        },
        "sanity-model");
    llm::Gateway gw(cb, &reg);
    auto table = five_word_table();  // irrelevant: shared words short-circuit
    auto run = experiments::run_imagination(sample_records(), gw, table, 0.3);
    CHECK(run.summary.items_scored == 40);
    for (const auto& row : run.summary.aggregates) {
        if (row.count > 0) CHECK(row.mean_overlap_x100 == doctest::Approx(100.0));
    }
    for (const auto& item : run.items) CHECK(item.basis == OverlapBasis::SharedWord);
}

TEST_CASE("sanity: an always-yes answerer scores 100 on every variant kind") {
    auto reg = full_registry();
    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) { return span_or(prompt, "Yes."); }, "sanity-model");
    llm::Gateway gw(cb, &reg);

    auto records = sample_records();
    auto lex = transforms::Lexicon::load(std::string(METAPROBE_SOURCE_DIR) + "/data/lexicon.tsv");
    auto kinds = transforms::all_variant_kinds();
    std::vector<transforms::ShuffleVariant> variants;
    std::map<transforms::VariantKind, size_t> skips;
    for (const auto& rec : records)
        for (auto& out : transforms::generate_variants(rec, kinds, &lex, 5)) {
            if (auto* v = std::get_if<transforms::ShuffleVariant>(&out))
                variants.push_back(std::move(*v));
            else
                ++skips[std::get<transforms::Skip>(out).kind];
        }
    auto run = experiments::run_shuffle_detection(variants, skips, kinds, gw);
    REQUIRE(run.summary.kinds.size() == 6);
    for (const auto& k : run.summary.kinds) {
        CHECK(k.accuracy_x100 == doctest::Approx(100.0));
        CHECK(k.excluded == 0);
    }
}

TEST_CASE("multichoice shuffles options deterministically and scores the pick") {
    auto reg = full_registry();
    // answer with the letter whose option text starts with "The blanket does not"
    auto cb = std::make_shared<llm::CallbackChatProvider>(
        [](const std::string& prompt) -> llm::ChatResult {
            if (prompt.find("letter of the correct option") == std::string::npos)
                return {"Literal restatement.", false};
            for (char letter : {'A', 'B', 'C', 'D'}) {
                std::string marker = std::string(1, letter) + ". The blanket does not";
                if (prompt.find(marker) != std::string::npos)
                    return {std::string(1, letter), false};
            }
            return {"A", false};
        },
        "picker");
    llm::Gateway gw(cb, &reg);
    std::vector<corpus::FigQaGroup> groups(1);
    groups[0].id = "figqa-002";
    groups[0].m1 = "This blanket is as insulating as a wet tissue.";
    groups[0].m2 = "This blanket is a portable furnace.";
    groups[0].r1 = "The blanket does not keep me warm.";
    groups[0].r2 = "The blanket keeps me very warm.";

    auto run = experiments::run_multichoice(groups, gw, 41);
    REQUIRE(run.items.size() == 1);
    CHECK(run.items[0].scored);
    CHECK(run.items[0].correct);  // the matching reference was picked
    CHECK(run.summary.accuracy_x100 == doctest::Approx(100.0));
    // same seed, same order
    auto again = experiments::run_multichoice(groups, gw, 41);
    CHECK(again.items[0].options == run.items[0].options);
    CHECK(again.items[0].correct_index == run.items[0].correct_index);
    // the correct option sits where the shuffle put the matching reference
    CHECK(run.items[0].options[static_cast<size_t>(run.items[0].correct_index)] ==
          "The blanket does not keep me warm.");
}
