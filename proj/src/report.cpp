#include "metaprobe/report.hpp"

#include <fstream>

#include "metaprobe/csv.hpp"
#include "metaprobe/errors.hpp"
#include "metaprobe/util.hpp"

namespace metaprobe::report {

using nlohmann::json;

namespace {

void write_lines(const std::string& path, const std::vector<json>& objects) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    for (const auto& j : objects) out << j.dump() << "\n";
}

std::vector<json> read_objects(const std::string& path) {
    std::vector<json> out;
    for (const auto& line : util::read_lines(path)) {
        if (util::trim(line).empty()) continue;
        out.push_back(json::parse(line));
    }
    return out;
}

std::string opt_double(const std::optional<double>& x) {
    return x ? util::format_double(*x) : std::string();
}

}  // namespace

// ---------------------------------------------------------------------------
// Spatial items

void write_spatial_items(const std::string& path,
                         const std::vector<experiments::SpatialItem>& items) {
    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& it : items) {
        json j = {
            {"group_id", it.group_id},
            {"metaphor_index", it.metaphor_index},
            {"model_id", it.model_id},
            {"s_text", it.s_text},
            {"m_text", it.m_text},
            {"d_p", it.d_p},
            {"cos_theta", it.cos_theta},
            {"ad", it.ad},
            {"d_o", it.d_o ? json(*it.d_o) : json(nullptr)},
            {"degenerate", geometry::to_string(it.degenerate)},
            {"scored", it.scored},
            {"exclude_reason", it.exclude_reason},
        };
        rows.push_back(std::move(j));
    }
    write_lines(path, rows);
}

std::vector<experiments::SpatialItem> read_spatial_items(const std::string& path) {
    std::vector<experiments::SpatialItem> items;
    for (const auto& j : read_objects(path)) {
        experiments::SpatialItem it;
        it.group_id = j.at("group_id").get<std::string>();
        it.metaphor_index = j.at("metaphor_index").get<int>();
        it.model_id = j.at("model_id").get<std::string>();
        it.s_text = j.at("s_text").get<std::string>();
        it.m_text = j.at("m_text").get<std::string>();
        it.d_p = j.at("d_p").get<double>();
        it.cos_theta = j.at("cos_theta").get<double>();
        it.ad = j.at("ad").get<double>();
        if (!j.at("d_o").is_null()) it.d_o = j.at("d_o").get<double>();
        const std::string deg = j.at("degenerate").get<std::string>();
        if (deg == "none") it.degenerate = geometry::Degeneracy::None;
        else if (deg == "m_equals_anchor") it.degenerate = geometry::Degeneracy::MEqualsAnchor;
        else if (deg == "collinear_references")
            it.degenerate = geometry::Degeneracy::CollinearReferences;
        else throw SchemaError("bad degeneracy flag: " + deg);
        it.scored = j.at("scored").get<bool>();
        it.exclude_reason = j.at("exclude_reason").get<std::string>();
        items.push_back(std::move(it));
    }
    return items;
}

// ---------------------------------------------------------------------------
// Multi-choice items

void write_multichoice_items(const std::string& path,
                             const std::vector<experiments::MultichoiceItem>& items) {
    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& it : items) {
        rows.push_back(json{
            {"group_id", it.group_id},
            {"model_id", it.model_id},
            {"options", it.options},
            {"correct_index", it.correct_index},
            {"chosen_index", it.chosen_index ? json(*it.chosen_index) : json(nullptr)},
            {"correct", it.correct},
            {"scored", it.scored},
            {"exclude_reason", it.exclude_reason},
        });
    }
    write_lines(path, rows);
}

std::vector<experiments::MultichoiceItem> read_multichoice_items(const std::string& path) {
    std::vector<experiments::MultichoiceItem> items;
    for (const auto& j : read_objects(path)) {
        experiments::MultichoiceItem it;
        it.group_id = j.at("group_id").get<std::string>();
        it.model_id = j.at("model_id").get<std::string>();
        it.options = j.at("options").get<std::vector<std::string>>();
        it.correct_index = j.at("correct_index").get<int>();
        if (!j.at("chosen_index").is_null()) it.chosen_index = j.at("chosen_index").get<int>();
        it.correct = j.at("correct").get<bool>();
        it.scored = j.at("scored").get<bool>();
        it.exclude_reason = j.at("exclude_reason").get<std::string>();
        items.push_back(std::move(it));
    }
    return items;
}

// ---------------------------------------------------------------------------
// Imagination items

void write_imagination_items(const std::string& path,
                             const std::vector<experiments::OverlapResult>& items) {
    std::vector<json> rows;
    rows.reserve(items.size());
    for (const auto& it : items) {
        rows.push_back(json{
            {"record_id", it.record_id},
            {"model_id", it.model_id},
            {"direction", experiments::to_string(it.direction)},
            {"genre", corpus::to_string(it.genre)},
            {"novelty", it.novelty},
            {"set_context", it.set_context},
            {"set_word_only", it.set_word_only},
            {"ratio", it.ratio},
            {"basis", experiments::to_string(it.basis)},
            {"scored", it.scored},
            {"exclude_reason", it.exclude_reason},
        });
    }
    write_lines(path, rows);
}

std::vector<experiments::OverlapResult> read_imagination_items(const std::string& path) {
    std::vector<experiments::OverlapResult> items;
    for (const auto& j : read_objects(path)) {
        experiments::OverlapResult it;
        it.record_id = j.at("record_id").get<std::string>();
        it.model_id = j.at("model_id").get<std::string>();
        it.direction = experiments::direction_from_string(j.at("direction").get<std::string>());
        it.genre = corpus::genre_from_string(j.at("genre").get<std::string>());
        it.novelty = j.at("novelty").get<double>();
        it.set_context = j.at("set_context").get<std::vector<std::string>>();
        it.set_word_only = j.at("set_word_only").get<std::vector<std::string>>();
        it.ratio = j.at("ratio").get<double>();
        it.basis = experiments::overlap_basis_from_string(j.at("basis").get<std::string>());
        it.scored = j.at("scored").get<bool>();
        it.exclude_reason = j.at("exclude_reason").get<std::string>();
        items.push_back(std::move(it));
    }
    return items;
}

// ---------------------------------------------------------------------------
// Detection items

void write_detection_items(const std::string& path,
                           const std::vector<experiments::DetectionOutcome>& outcomes) {
    std::vector<json> rows;
    rows.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        rows.push_back(json{
            {"record_id", o.record_id},
            {"model_id", o.model_id},
            {"kind", transforms::to_string(o.kind)},
            {"sentence", o.sentence},
            {"label", experiments::to_string(o.label)},
            {"correct", o.correct},
        });
    }
    write_lines(path, rows);
}

std::vector<experiments::DetectionOutcome> read_detection_items(const std::string& path) {
    std::vector<experiments::DetectionOutcome> outcomes;
    for (const auto& j : read_objects(path)) {
        experiments::DetectionOutcome o;
        o.record_id = j.at("record_id").get<std::string>();
        o.model_id = j.at("model_id").get<std::string>();
        o.kind = transforms::variant_kind_from_string(j.at("kind").get<std::string>());
        o.sentence = j.at("sentence").get<std::string>();
        o.label = experiments::detect_label_from_string(j.at("label").get<std::string>());
        o.correct = j.at("correct").get<bool>();
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

// ---------------------------------------------------------------------------
// Variants

void write_variants(const std::string& path,
                    const std::vector<transforms::ShuffleVariant>& variants) {
    std::vector<json> rows;
    rows.reserve(variants.size());
    for (const auto& v : variants) {
        rows.push_back(json{
            {"source_id", v.source_id},
            {"kind", transforms::to_string(v.kind)},
            {"tokens", v.tokens},
            {"terminal", v.terminal},
            {"target_index_after", v.target_index_after},
            {"seed", v.seed ? json(*v.seed) : json(nullptr)},
            {"substituted_word", v.substituted_word ? json(*v.substituted_word) : json(nullptr)},
            {"sentence", v.sentence()},
        });
    }
    write_lines(path, rows);
}

std::vector<transforms::ShuffleVariant> read_variants(const std::string& path) {
    std::vector<transforms::ShuffleVariant> variants;
    for (const auto& j : read_objects(path)) {
        transforms::ShuffleVariant v;
        v.source_id = j.at("source_id").get<std::string>();
        v.kind = transforms::variant_kind_from_string(j.at("kind").get<std::string>());
        v.tokens = j.at("tokens").get<std::vector<std::string>>();
        v.terminal = j.at("terminal").get<std::string>();
        v.target_index_after = j.at("target_index_after").get<int>();
        if (!j.at("seed").is_null()) v.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("substituted_word").is_null())
            v.substituted_word = j.at("substituted_word").get<std::string>();
        variants.push_back(std::move(v));
    }
    return variants;
}

void write_variant_skips(const std::string& path, const std::vector<transforms::Skip>& skips) {
    std::vector<json> rows;
    rows.reserve(skips.size());
    for (const auto& s : skips) {
        rows.push_back(json{
            {"source_id", s.source_id},
            {"kind", transforms::to_string(s.kind)},
            {"reason", transforms::to_string(s.reason)},
        });
    }
    write_lines(path, rows);
}

std::vector<transforms::Skip> read_variant_skips(const std::string& path) {
    std::vector<transforms::Skip> skips;
    for (const auto& j : read_objects(path)) {
        transforms::Skip s;
        s.source_id = j.at("source_id").get<std::string>();
        s.kind = transforms::variant_kind_from_string(j.at("kind").get<std::string>());
        const std::string reason = j.at("reason").get<std::string>();
        if (reason == "lexicon_miss") s.reason = transforms::SkipReason::LexiconMiss;
        else if (reason == "no_cross_pos_form") s.reason = transforms::SkipReason::NoCrossPosForm;
        else if (reason == "no_valid_slot") s.reason = transforms::SkipReason::NoValidSlot;
        else throw SchemaError("bad skip reason: " + reason);
        skips.push_back(std::move(s));
    }
    return skips;
}

void write_rejects(const std::string& path, const std::vector<corpus::Reject>& rejects) {
    std::vector<json> rows;
    rows.reserve(rejects.size());
    for (const auto& r : rejects)
        rows.push_back(json{{"row", r.row}, {"reason", r.reason}});
    write_lines(path, rows);
}

// ---------------------------------------------------------------------------
// Summary CSVs

std::string spatial_summary_csv(const experiments::SpatialSummary& s) {
    std::string out =
        "model,items_scored,items_excluded,dp_mean,dp_sd,cos_theta_mean,cos_theta_sd,"
        "spearman_dp_ad,spearman_cos_dp\n";
    out += csv::write_row({s.model_id, std::to_string(s.items_scored),
                           std::to_string(s.items_excluded), util::format_double(s.dp_mean),
                           util::format_double(s.dp_sd), util::format_double(s.cos_mean),
                           util::format_double(s.cos_sd), opt_double(s.spearman_dp_ad),
                           opt_double(s.spearman_cos_dp)});
    return out;
}

std::string multichoice_summary_csv(const experiments::MultichoiceSummary& s) {
    std::string out = "model,accuracy_x100,items_scored,items_excluded\n";
    out += csv::write_row({s.model_id, util::format_double(s.accuracy_x100),
                           std::to_string(s.items_scored), std::to_string(s.items_excluded)});
    return out;
}

std::string imagination_summary_csv(const experiments::ImaginationSummary& s) {
    std::string out = "model,scope,direction,mean_overlap_x100,count\n";
    for (const auto& agg : s.aggregates) {
        out += csv::write_row({s.model_id, agg.scope, experiments::to_string(agg.direction),
                               util::format_double(agg.mean_overlap_x100),
                               std::to_string(agg.count)});
    }
    return out;
}

std::string imagination_histogram_csv(const experiments::ImaginationSummary& s) {
    std::string out = "model,direction,bin,count\n";
    for (const auto& [direction, bins] : s.histogram) {
        for (size_t b = 0; b < bins.size(); ++b) {
            out += csv::write_row({s.model_id, experiments::to_string(direction),
                                   experiments::kHistogramBinLabels[b], std::to_string(bins[b])});
        }
    }
    return out;
}

std::string detection_summary_csv(const experiments::DetectionSummary& s) {
    std::string out = "model,kind,accuracy_x100,scored,excluded,skipped\n";
    for (const auto& row : s.kinds) {
        out += csv::write_row({s.model_id, transforms::to_string(row.kind),
                               util::format_double(row.accuracy_x100), std::to_string(row.scored),
                               std::to_string(row.excluded), std::to_string(row.skipped)});
    }
    return out;
}

void write_manifest(const std::string& path, const json& manifest) {
    util::write_file(path, manifest.dump(2) + "\n");
}

}  // namespace metaprobe::report
