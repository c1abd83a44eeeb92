#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metaprobe/corpus.hpp"
#include "metaprobe/embeddings.hpp"
#include "metaprobe/geometry.hpp"
#include "metaprobe/llm.hpp"
#include "metaprobe/transforms.hpp"

namespace metaprobe::experiments {

// ---------------------------------------------------------------------------
// Spatial analysis: where does an interpretation sit relative to the plane
// through the two references and the equivalent literal sentence?

struct SpatialItem {
    std::string group_id;
    int metaphor_index = 1;  // 1 or 2
    std::string model_id;
    std::string s_text;      // generated equivalent sentence (shared per group)
    std::string m_text;      // generated interpretation of this metaphor
    double d_p = 0.0;
    double cos_theta = 1.0;
    double ad = 0.0;
    std::optional<double> d_o;
    geometry::Degeneracy degenerate = geometry::Degeneracy::None;
    bool scored = false;
    std::string exclude_reason;  // set when !scored
};

struct SpatialSummary {
    std::string model_id;
    size_t items_scored = 0;
    size_t items_excluded = 0;
    std::map<std::string, size_t> exclusions;
    double dp_mean = 0.0, dp_sd = 0.0;
    double cos_mean = 0.0, cos_sd = 0.0;
    std::optional<double> spearman_dp_ad;   // rank correlation of d_p against Ad
    std::optional<double> spearman_cos_dp;  // rank correlation of cos_theta against d_p
};

struct SpatialRun {
    std::vector<SpatialItem> items;
    SpatialSummary summary;
};

// Pure reduction; `report` re-runs exactly this over the per-item file.
SpatialSummary summarize_spatial(const std::vector<SpatialItem>& items);

SpatialRun run_spatial(const std::vector<corpus::FigQaGroup>& groups, llm::Gateway& gateway,
                       emb::Embedder& embedder, const geometry::GeometryOptions& opts);

// ---------------------------------------------------------------------------
// Multi-choice validation: can the model at least pick the matching
// reference out of four literal candidates?

struct MultichoiceItem {
    std::string group_id;
    std::string model_id;
    std::vector<std::string> options;  // presented order
    int correct_index = -1;            // position of reference_1
    std::optional<int> chosen_index;
    bool correct = false;
    bool scored = false;
    std::string exclude_reason;
};

struct MultichoiceSummary {
    std::string model_id;
    size_t items_scored = 0;
    size_t items_excluded = 0;
    std::map<std::string, size_t> exclusions;
    double accuracy_x100 = 0.0;
};

struct MultichoiceRun {
    std::vector<MultichoiceItem> items;
    MultichoiceSummary summary;
};

MultichoiceSummary summarize_multichoice(const std::vector<MultichoiceItem>& items);

MultichoiceRun run_multichoice(const std::vector<corpus::FigQaGroup>& groups,
                               llm::Gateway& gateway, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Imagination overlap: same word associations with and without context?

enum class Direction { LM, ML };  // LM: literal words for a metaphorical input
                                  // ML: metaphorical words for a literal input
const char* to_string(Direction d);
Direction direction_from_string(const std::string& s);

enum class OverlapBasis { SharedWord, MaxCosine, AllOOV };
const char* to_string(OverlapBasis b);
OverlapBasis overlap_basis_from_string(const std::string& s);

struct OverlapScore {
    double ratio = 0.0;  // in [0,1]
    OverlapBasis basis = OverlapBasis::AllOOV;
};

// 1.0 on any shared lowercase word; otherwise the maximum cosine over all
// cross pairs with both sides in the table, clamped to [0,1]; 0.0 when every
// pair has an out-of-vocabulary side. Throws EmptySetError on an empty side.
OverlapScore overlap_ratio(const std::vector<std::string>& set_a,
                           const std::vector<std::string>& set_b,
                           const emb::WordVectorTable& table);

struct OverlapResult {
    std::string record_id;
    std::string model_id;
    Direction direction = Direction::LM;
    corpus::Genre genre = corpus::Genre::News;
    double novelty = 0.0;
    std::vector<std::string> set_context;    // words imagined with the sentence
    std::vector<std::string> set_word_only;  // words imagined from the bare word
    double ratio = 0.0;
    OverlapBasis basis = OverlapBasis::AllOOV;
    bool scored = false;
    std::string exclude_reason;
};

struct ImaginationAggregate {
    std::string scope;  // "all", "genre:<name>", "novel"
    Direction direction = Direction::LM;
    double mean_overlap_x100 = 0.0;
    size_t count = 0;
};

struct ImaginationSummary {
    std::string model_id;
    size_t items_scored = 0;
    size_t items_excluded = 0;
    std::map<std::string, size_t> exclusions;
    std::vector<ImaginationAggregate> aggregates;
    // direction -> count per bin {1.0}, [0.8,1), [0.5,0.8), [0.2,0.5), [0,0.2)
    std::map<Direction, std::vector<size_t>> histogram;
};

struct ImaginationRun {
    std::vector<OverlapResult> items;
    ImaginationSummary summary;
};

extern const std::vector<std::string> kHistogramBinLabels;
size_t histogram_bin(double ratio);

ImaginationSummary summarize_imagination(const std::vector<OverlapResult>& items,
                                         double novelty_threshold);

ImaginationRun run_imagination(const std::vector<corpus::MunchRecord>& records,
                               llm::Gateway& gateway, const emb::WordVectorTable& table,
                               double novelty_threshold);

// ---------------------------------------------------------------------------
// Shuffle detection: is the (possibly mangled) sentence still recognized as
// a metaphor? Every source record is one, so "Yes" is always correct.

enum class DetectLabel { Metaphor, Literal, Unparsed };
const char* to_string(DetectLabel l);
DetectLabel detect_label_from_string(const std::string& s);

struct DetectionOutcome {
    std::string record_id;
    std::string model_id;
    transforms::VariantKind kind = transforms::VariantKind::Original;
    std::string sentence;
    DetectLabel label = DetectLabel::Unparsed;
    bool correct = false;
};

struct DetectionKindSummary {
    transforms::VariantKind kind = transforms::VariantKind::Original;
    size_t scored = 0;    // parsed responses
    size_t excluded = 0;  // refused or unparsed
    size_t skipped = 0;   // variant generation skips
    double accuracy_x100 = 0.0;
};

struct DetectionSummary {
    std::string model_id;
    std::vector<DetectionKindSummary> kinds;
};

struct DetectionRun {
    std::vector<DetectionOutcome> outcomes;
    DetectionSummary summary;
};

DetectionSummary summarize_detection(const std::vector<DetectionOutcome>& outcomes,
                                     const std::map<transforms::VariantKind, size_t>& skips,
                                     const std::vector<transforms::VariantKind>& kinds);

DetectionRun run_shuffle_detection(const std::vector<transforms::ShuffleVariant>& variants,
                                   const std::map<transforms::VariantKind, size_t>& skips,
                                   const std::vector<transforms::VariantKind>& kinds,
                                   llm::Gateway& gateway);

}  // namespace metaprobe::experiments
