#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "metaprobe/corpus.hpp"
#include "metaprobe/experiments.hpp"
#include "metaprobe/transforms.hpp"

namespace metaprobe::report {

// Per-item records written one JSON object per line. Summaries are pure
// functions of these files, so `report` can rebuild every CSV offline.

void write_spatial_items(const std::string& path,
                         const std::vector<experiments::SpatialItem>& items);
std::vector<experiments::SpatialItem> read_spatial_items(const std::string& path);

void write_multichoice_items(const std::string& path,
                             const std::vector<experiments::MultichoiceItem>& items);
std::vector<experiments::MultichoiceItem> read_multichoice_items(const std::string& path);

void write_imagination_items(const std::string& path,
                             const std::vector<experiments::OverlapResult>& items);
std::vector<experiments::OverlapResult> read_imagination_items(const std::string& path);

void write_detection_items(const std::string& path,
                           const std::vector<experiments::DetectionOutcome>& outcomes);
std::vector<experiments::DetectionOutcome> read_detection_items(const std::string& path);

void write_variants(const std::string& path,
                    const std::vector<transforms::ShuffleVariant>& variants);
std::vector<transforms::ShuffleVariant> read_variants(const std::string& path);

void write_variant_skips(const std::string& path, const std::vector<transforms::Skip>& skips);
std::vector<transforms::Skip> read_variant_skips(const std::string& path);

void write_rejects(const std::string& path, const std::vector<corpus::Reject>& rejects);

// Summary CSV builders shared by the run commands and `report`.
std::string spatial_summary_csv(const experiments::SpatialSummary& s);
std::string multichoice_summary_csv(const experiments::MultichoiceSummary& s);
std::string imagination_summary_csv(const experiments::ImaginationSummary& s);
std::string imagination_histogram_csv(const experiments::ImaginationSummary& s);
std::string detection_summary_csv(const experiments::DetectionSummary& s);

// Manifest: resolved config echo, seeds, provider ids, call counters,
// exclusion counts. Key-sorted JSON, no timestamps, so reruns diff clean.
void write_manifest(const std::string& path, const nlohmann::json& manifest);

}  // namespace metaprobe::report
