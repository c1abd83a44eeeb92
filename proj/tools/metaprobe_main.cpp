#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "metaprobe/config.hpp"
#include "metaprobe/corpus.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/experiments.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/report.hpp"
#include "metaprobe/transforms.hpp"
#include "metaprobe/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace metaprobe;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_override;
    std::string fixtures_dir;
    std::optional<std::uint64_t> seed;
    std::string geometry_mode;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "run configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_override, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "global seed (overrides config)");
    cmd->add_option("--fixtures", opts.fixtures_dir,
                    "directory with chat.jsonl / embeddings.jsonl; forces fixture mode");
}

config::RunConfig load_config(const CommonOpts& opts) {
    auto cfg = config::RunConfig::load(opts.config_path);
    if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
    if (opts.seed) cfg.global_seed = *opts.seed;
    if (!opts.fixtures_dir.empty()) {
        fs::path dir(opts.fixtures_dir);
        fs::path chat = dir / "chat.jsonl";
        fs::path embeddings = dir / "embeddings.jsonl";
        if (fs::exists(chat)) {
            cfg.chat.mode = "fixture";
            cfg.chat.fixture_path = chat.string();
            cfg.chat.endpoint.clear();
        }
        if (fs::exists(embeddings)) {
            cfg.embedding.mode = "fixture";
            cfg.embedding.fixture_path = embeddings.string();
            cfg.embedding.endpoint.clear();
        }
    }
    if (!opts.geometry_mode.empty())
        cfg.geometry.mode = geometry::plane_mode_from_string(opts.geometry_mode);
    cfg.validate();
    return cfg;
}

struct Session {
    config::RunConfig cfg;
    llm::TemplateRegistry registry;
    std::shared_ptr<llm::ChatProvider> chat;
    std::unique_ptr<llm::Gateway> gateway;
    std::shared_ptr<emb::EmbeddingProvider> embedding_provider;
    std::unique_ptr<emb::EmbeddingCache> cache;
    std::unique_ptr<emb::Embedder> embedder;
};

Session open_session(config::RunConfig cfg, bool needs_chat, bool needs_embeddings) {
    Session s{std::move(cfg), {}, nullptr, nullptr, nullptr, nullptr, nullptr};
    fs::create_directories(s.cfg.out_dir);
    if (needs_chat) {
        if (s.cfg.templates_dir.empty())
            throw ConfigError("templates_dir is required for this command");
        s.registry = llm::TemplateRegistry::load(s.cfg.templates_dir);
        s.chat = s.cfg.make_chat_provider();
        llm::GatewayOptions gopts;
        gopts.word_list_n = s.cfg.word_list_n;
        s.gateway = std::make_unique<llm::Gateway>(s.chat, &s.registry, gopts);
    }
    if (needs_embeddings) {
        s.embedding_provider = s.cfg.make_embedding_provider();
        if (!s.cfg.embedding_cache.empty())
            s.cache = std::make_unique<emb::EmbeddingCache>(s.cfg.embedding_cache);
        s.embedder = std::make_unique<emb::Embedder>(s.embedding_provider, s.cache.get());
    }
    return s;
}

json base_manifest(const std::string& command, const Session& s) {
    json m = {
        {"command", command},
        {"config_hash", s.cfg.config_hash()},
        {"config", s.cfg.resolved()},
    };
    json providers = json::object();
    json counters = json::object();
    if (s.gateway) {
        providers["chat_model"] = s.gateway->model_id();
        counters["chat_live_calls"] = s.gateway->live_calls();
        counters["chat_ok"] = s.gateway->count_ok();
        counters["chat_refused"] = s.gateway->count_refused();
        counters["chat_parse_failed"] = s.gateway->count_parse_failed();
    }
    if (s.embedder) {
        providers["embedding_model"] = s.embedder->model_id();
        counters["embedding_live_calls"] = s.embedder->live_calls();
    }
    m["providers"] = providers;
    m["counters"] = counters;
    return m;
}

json exclusions_json(const std::map<std::string, size_t>& exclusions) {
    json j = json::object();
    for (const auto& [reason, count] : exclusions) j[reason] = count;
    return j;
}

std::string out_path(const Session& s, const std::string& name) {
    return (fs::path(s.cfg.out_dir) / name).string();
}

// ---------------------------------------------------------------------------

int cmd_spatial(const CommonOpts& opts) {
    Session s = open_session(load_config(opts), true, true);
    auto loaded = corpus::load_figqa(s.cfg.figqa_csv);
    report::write_rejects(out_path(s, "figqa_rejects.jsonl"), loaded.rejects);
    auto annotate = corpus::annotate_spans(loaded.records, *s.gateway);
    auto run = experiments::run_spatial(loaded.records, *s.gateway, *s.embedder, s.cfg.geometry);
    report::write_spatial_items(out_path(s, "spatial_items.jsonl"), run.items);
    util::write_file(out_path(s, "spatial_summary.csv"),
                     report::spatial_summary_csv(run.summary));

    json m = base_manifest("spatial", s);
    m["inputs"] = {{"figqa_records", loaded.records.size()},
                   {"figqa_rejects", loaded.rejects.size()},
                   {"spans_filled", annotate.filled},
                   {"spans_already_present", annotate.already_present},
                   {"spans_parse_failed", annotate.parse_failed}};
    m["results"] = {{"items_scored", run.summary.items_scored},
                    {"items_excluded", run.summary.items_excluded},
                    {"exclusions", exclusions_json(run.summary.exclusions)}};
    m["outputs"] = {"figqa_rejects.jsonl", "spatial_items.jsonl", "spatial_summary.csv"};
    report::write_manifest(out_path(s, "spatial_manifest.json"), m);
    return 0;
}

int cmd_multichoice(const CommonOpts& opts) {
    Session s = open_session(load_config(opts), true, false);
    auto loaded = corpus::load_figqa(s.cfg.figqa_csv);
    report::write_rejects(out_path(s, "figqa_rejects.jsonl"), loaded.rejects);
    auto run = experiments::run_multichoice(loaded.records, *s.gateway,
                                            s.cfg.seed_for("multichoice"));
    report::write_multichoice_items(out_path(s, "multichoice_items.jsonl"), run.items);
    util::write_file(out_path(s, "multichoice_summary.csv"),
                     report::multichoice_summary_csv(run.summary));

    json m = base_manifest("multichoice", s);
    m["seeds_used"] = {{"multichoice", s.cfg.seed_for("multichoice")}};
    m["inputs"] = {{"figqa_records", loaded.records.size()},
                   {"figqa_rejects", loaded.rejects.size()}};
    m["results"] = {{"items_scored", run.summary.items_scored},
                    {"items_excluded", run.summary.items_excluded},
                    {"accuracy_x100", run.summary.accuracy_x100},
                    {"exclusions", exclusions_json(run.summary.exclusions)}};
    m["outputs"] = {"figqa_rejects.jsonl", "multichoice_items.jsonl", "multichoice_summary.csv"};
    report::write_manifest(out_path(s, "multichoice_manifest.json"), m);
    return 0;
}

int cmd_imagine(const CommonOpts& opts, const std::vector<std::string>& genres, bool novel_only) {
    Session s = open_session(load_config(opts), true, false);
    auto loaded = corpus::load_munch(s.cfg.munch_csv);
    report::write_rejects(out_path(s, "munch_rejects.jsonl"), loaded.rejects);

    std::vector<corpus::MunchRecord> records = std::move(loaded.records);
    if (!genres.empty()) {
        std::vector<corpus::Genre> wanted;
        for (const auto& g : genres) wanted.push_back(corpus::genre_from_string(g));
        std::vector<corpus::MunchRecord> filtered;
        for (auto& r : records)
            if (std::find(wanted.begin(), wanted.end(), r.genre) != wanted.end())
                filtered.push_back(std::move(r));
        records = std::move(filtered);
    }
    if (novel_only) {
        std::vector<corpus::MunchRecord> filtered;
        for (auto& r : records)
            if (r.novelty > s.cfg.novelty_threshold) filtered.push_back(std::move(r));
        records = std::move(filtered);
    }

    if (s.cfg.word_vectors.path.empty())
        throw ConfigError("word_vectors.path is required for imagine");
    auto table = emb::WordVectorTable::load(s.cfg.word_vectors.path, s.cfg.word_vectors.dim);

    auto run = experiments::run_imagination(records, *s.gateway, table, s.cfg.novelty_threshold);
    report::write_imagination_items(out_path(s, "imagination_items.jsonl"), run.items);
    util::write_file(out_path(s, "imagination_summary.csv"),
                     report::imagination_summary_csv(run.summary));
    util::write_file(out_path(s, "imagination_histogram.csv"),
                     report::imagination_histogram_csv(run.summary));

    json m = base_manifest("imagine", s);
    m["inputs"] = {{"munch_records", records.size()},
                   {"munch_rejects", loaded.rejects.size()},
                   {"genre_filter", genres},
                   {"novel_only", novel_only},
                   {"word_vectors", s.cfg.word_vectors.path},
                   {"word_vector_rows", table.size()},
                   {"word_vector_skipped_lines", table.skipped_lines()}};
    m["results"] = {{"items_scored", run.summary.items_scored},
                    {"items_excluded", run.summary.items_excluded},
                    {"exclusions", exclusions_json(run.summary.exclusions)}};
    m["outputs"] = {"munch_rejects.jsonl", "imagination_items.jsonl", "imagination_summary.csv",
                    "imagination_histogram.csv"};
    report::write_manifest(out_path(s, "imagine_manifest.json"), m);
    return 0;
}

struct GeneratedVariants {
    std::vector<transforms::ShuffleVariant> variants;
    std::vector<transforms::Skip> skips;
    std::map<transforms::VariantKind, size_t> skip_counts;
};

GeneratedVariants generate_all(const std::vector<corpus::MunchRecord>& records,
                               const std::vector<transforms::VariantKind>& kinds,
                               const transforms::Lexicon* lexicon, std::uint64_t seed) {
    GeneratedVariants out;
    for (const auto& rec : records) {
        for (auto& outcome : transforms::generate_variants(rec, kinds, lexicon, seed)) {
            if (std::holds_alternative<transforms::ShuffleVariant>(outcome)) {
                out.variants.push_back(std::get<transforms::ShuffleVariant>(std::move(outcome)));
            } else {
                auto skip = std::get<transforms::Skip>(outcome);
                ++out.skip_counts[skip.kind];
                out.skips.push_back(std::move(skip));
            }
        }
    }
    return out;
}

std::vector<transforms::VariantKind> parse_kinds(const std::vector<std::string>& kind_names,
                                                 const config::RunConfig& cfg) {
    if (kind_names.empty()) return cfg.detect_kinds;
    std::vector<transforms::VariantKind> kinds;
    for (const auto& name : kind_names)
        kinds.push_back(transforms::variant_kind_from_string(name));
    return kinds;
}

bool kinds_need_lexicon(const std::vector<transforms::VariantKind>& kinds) {
    return std::find(kinds.begin(), kinds.end(), transforms::VariantKind::Pos) != kinds.end();
}

int cmd_shuffle_gen(const CommonOpts& opts, const std::vector<std::string>& kind_names) {
    Session s = open_session(load_config(opts), false, false);
    auto kinds = parse_kinds(kind_names, s.cfg);
    auto loaded = corpus::load_munch(s.cfg.munch_csv);
    report::write_rejects(out_path(s, "munch_rejects.jsonl"), loaded.rejects);

    std::optional<transforms::Lexicon> lexicon;
    if (kinds_need_lexicon(kinds)) {
        if (s.cfg.lexicon_path.empty())
            throw ConfigError("lexicon is required for the pos variant");
        lexicon = transforms::Lexicon::load(s.cfg.lexicon_path);
    }

    std::uint64_t seed = s.cfg.seed_for("shuffle");
    auto gen = generate_all(loaded.records, kinds, lexicon ? &*lexicon : nullptr, seed);
    report::write_variants(out_path(s, "variants.jsonl"), gen.variants);
    report::write_variant_skips(out_path(s, "variant_skips.jsonl"), gen.skips);

    json m = base_manifest("shuffle-gen", s);
    json kinds_j = json::array();
    for (auto k : kinds) kinds_j.push_back(transforms::to_string(k));
    m["seeds_used"] = {{"shuffle", seed}};
    m["inputs"] = {{"munch_records", loaded.records.size()},
                   {"munch_rejects", loaded.rejects.size()},
                   {"kinds", kinds_j}};
    m["results"] = {{"variants", gen.variants.size()}, {"skips", gen.skips.size()}};
    m["outputs"] = {"munch_rejects.jsonl", "variants.jsonl", "variant_skips.jsonl"};
    report::write_manifest(out_path(s, "shuffle_gen_manifest.json"), m);
    return 0;
}

int cmd_detect(const CommonOpts& opts, const std::vector<std::string>& kind_names) {
    Session s = open_session(load_config(opts), true, false);
    auto kinds = parse_kinds(kind_names, s.cfg);
    auto loaded = corpus::load_munch(s.cfg.munch_csv);
    report::write_rejects(out_path(s, "munch_rejects.jsonl"), loaded.rejects);

    std::optional<transforms::Lexicon> lexicon;
    if (kinds_need_lexicon(kinds)) {
        if (s.cfg.lexicon_path.empty())
            throw ConfigError("lexicon is required for the pos variant");
        lexicon = transforms::Lexicon::load(s.cfg.lexicon_path);
    }

    std::uint64_t seed = s.cfg.seed_for("shuffle");
    auto gen = generate_all(loaded.records, kinds, lexicon ? &*lexicon : nullptr, seed);
    report::write_variants(out_path(s, "variants.jsonl"), gen.variants);
    report::write_variant_skips(out_path(s, "variant_skips.jsonl"), gen.skips);

    auto run = experiments::run_shuffle_detection(gen.variants, gen.skip_counts, kinds, *s.gateway);
    report::write_detection_items(out_path(s, "detection_items.jsonl"), run.outcomes);
    util::write_file(out_path(s, "detection_summary.csv"),
                     report::detection_summary_csv(run.summary));

    json m = base_manifest("detect", s);
    json kinds_j = json::array();
    for (auto k : kinds) kinds_j.push_back(transforms::to_string(k));
    m["seeds_used"] = {{"shuffle", seed}};
    m["inputs"] = {{"munch_records", loaded.records.size()},
                   {"munch_rejects", loaded.rejects.size()},
                   {"kinds", kinds_j}};
    m["results"] = {{"variants", gen.variants.size()}, {"skips", gen.skips.size()}};
    m["outputs"] = {"munch_rejects.jsonl", "variants.jsonl", "variant_skips.jsonl",
                    "detection_items.jsonl", "detection_summary.csv"};
    report::write_manifest(out_path(s, "detect_manifest.json"), m);
    return 0;
}

int cmd_report(const CommonOpts& opts) {
    // pure re-aggregation over per-item files; no provider is ever built
    auto cfg = load_config(opts);
    fs::path out(cfg.out_dir);
    std::vector<std::string> rebuilt;

    if (fs::exists(out / "spatial_items.jsonl")) {
        auto items = report::read_spatial_items((out / "spatial_items.jsonl").string());
        util::write_file((out / "spatial_summary.csv").string(),
                         report::spatial_summary_csv(experiments::summarize_spatial(items)));
        rebuilt.push_back("spatial_summary.csv");
    }
    if (fs::exists(out / "multichoice_items.jsonl")) {
        auto items = report::read_multichoice_items((out / "multichoice_items.jsonl").string());
        util::write_file(
            (out / "multichoice_summary.csv").string(),
            report::multichoice_summary_csv(experiments::summarize_multichoice(items)));
        rebuilt.push_back("multichoice_summary.csv");
    }
    if (fs::exists(out / "imagination_items.jsonl")) {
        auto items = report::read_imagination_items((out / "imagination_items.jsonl").string());
        auto summary = experiments::summarize_imagination(items, cfg.novelty_threshold);
        util::write_file((out / "imagination_summary.csv").string(),
                         report::imagination_summary_csv(summary));
        util::write_file((out / "imagination_histogram.csv").string(),
                         report::imagination_histogram_csv(summary));
        rebuilt.push_back("imagination_summary.csv");
        rebuilt.push_back("imagination_histogram.csv");
    }
    if (fs::exists(out / "detection_items.jsonl")) {
        auto outcomes = report::read_detection_items((out / "detection_items.jsonl").string());
        std::map<transforms::VariantKind, size_t> skip_counts;
        if (fs::exists(out / "variant_skips.jsonl")) {
            for (const auto& skip :
                 report::read_variant_skips((out / "variant_skips.jsonl").string()))
                ++skip_counts[skip.kind];
        }
        util::write_file((out / "detection_summary.csv").string(),
                         report::detection_summary_csv(experiments::summarize_detection(
                             outcomes, skip_counts, cfg.detect_kinds)));
        rebuilt.push_back("detection_summary.csv");
    }

    json m = {
        {"command", "report"},
        {"config_hash", cfg.config_hash()},
        {"counters", {{"chat_live_calls", 0}, {"embedding_live_calls", 0}}},
        {"outputs", rebuilt},
    };
    report::write_manifest((out / "report_manifest.json").string(), m);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metaphor comprehension probing harness"};
    app.require_subcommand(1);

    CommonOpts spatial_opts, multi_opts, imagine_opts, gen_opts, detect_opts, report_opts;
    std::vector<std::string> imagine_genres, gen_kinds, detect_kinds;
    bool imagine_novel = false;

    auto* spatial = app.add_subcommand("spatial", "interpretation-plane geometry over Fig-QA");
    add_common(spatial, spatial_opts);
    spatial->add_option("--geometry-mode", spatial_opts.geometry_mode,
                        "plane fit: centered|uncentered")
        ->check(CLI::IsMember({"centered", "uncentered"}));

    auto* multi = app.add_subcommand("multichoice", "four-option reference selection over Fig-QA");
    add_common(multi, multi_opts);

    auto* imagine = app.add_subcommand("imagine", "context vs word-only imagination overlap");
    add_common(imagine, imagine_opts);
    imagine->add_option("--genre", imagine_genres, "only these genres (comma separated)")
        ->delimiter(',');
    imagine->add_flag("--novel", imagine_novel, "only records above the novelty threshold");

    auto* gen = app.add_subcommand("shuffle-gen", "materialize syntactic variants of MUNCH");
    add_common(gen, gen_opts);
    gen->add_option("--kinds", gen_kinds, "variant kinds (comma separated)")->delimiter(',');

    auto* detect = app.add_subcommand("detect", "metaphor detection over syntactic variants");
    add_common(detect, detect_opts);
    detect->add_option("--kinds", detect_kinds, "variant kinds (comma separated)")->delimiter(',');

    auto* rep = app.add_subcommand("report", "rebuild summary CSVs from per-item files");
    add_common(rep, report_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (spatial->parsed()) return cmd_spatial(spatial_opts);
        if (multi->parsed()) return cmd_multichoice(multi_opts);
        if (imagine->parsed()) return cmd_imagine(imagine_opts, imagine_genres, imagine_novel);
        if (gen->parsed()) return cmd_shuffle_gen(gen_opts, gen_kinds);
        if (detect->parsed()) return cmd_detect(detect_opts, detect_kinds);
        if (rep->parsed()) return cmd_report(report_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
