#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

namespace hps {

struct ReportOptions {
    std::filesystem::path results_dir;
    // Defaults to <results_dir>/bundle.
    std::filesystem::path bundle_dir;
    // Two attribute names; the dataset comes from the results' plan.json.
    std::optional<std::pair<std::string, std::string>> heatmap;
};

// Prints final per-sampler metrics and pairwise improvements, then writes
// the plot bundle: manifest.json, series.tsv, heatmap.tsv (when requested)
// and one ablation_<axis>.tsv per ablation directory found. Throws
// DataError when the results are missing or corrupt.
void write_report(const ReportOptions& options, std::ostream& out);

// FNV-1a over the bytes, as 16 hex digits.
std::string content_hash(const std::string& bytes);

}  // namespace hps
