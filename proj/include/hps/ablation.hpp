#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/experiment.hpp"

namespace hps {

enum class AblationAxis { PageSize, Attributes, Cardinality, Shuffle };

std::string axis_name(AblationAxis axis);
// Throws ConfigError for an unknown name.
AblationAxis axis_from_name(const std::string& name);

struct AblationPoint {
    double value = 0.0;
    std::string value_label;
    ExperimentResult result;
    // Axis-specific details: subsets used, merged attributes, ...
    nlohmann::json info = nlohmann::json::object();
};

// Recall change between consecutive page sizes.
struct DeltaRow {
    std::string label;
    std::size_t budget = 0;
    std::string from;
    std::string to;
    double recall_from = 0.0;
    double recall_to = 0.0;
    double delta_pct = 0.0;
};

struct AblationResult {
    AblationAxis axis = AblationAxis::PageSize;
    std::vector<AblationPoint> points;
    std::vector<DeltaRow> deltas;
};

inline constexpr std::size_t kDefaultSubsetCap = 20;

// page-size: values are page sizes. attributes: subset sizes; results for a
// size average over every subset, or over `subset_cap` random ones when
// there are more. cardinality: c, merged into every attribute whose
// cardinality exceeds c. shuffle: ratios, with per-replicate seeds.
// Throws ConfigError on invalid values.
AblationResult run_ablation(const ExperimentSpec& spec, const DatasetPtr& dataset, AblationAxis axis,
                            const std::vector<double>& values, std::size_t subset_cap = kDefaultSubsetCap);

// Columns: axis, value, sampler, budget, metric, mean, ci_low, ci_high.
void write_combined_tsv(const AblationResult& result, std::ostream& out);
// Columns: sampler, budget, from, to, recall_from, recall_to, delta_pct.
void write_delta_tsv(const std::vector<DeltaRow>& rows, std::ostream& out);

}  // namespace hps
