#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/dataset.hpp"

namespace hps {

enum class SynthMode {
    // One hot fully-bound cell with precision f + correlation * (1 - f); the
    // remaining targets are spread uniformly so the total is round(f * n).
    Planted,
    // Attribute 0 selects a precision level; cells sit up to `spread` below
    // their level except one planted optimum cell at the top level.
    Clustered,
};

struct SynthParams {
    SynthMode mode = SynthMode::Planted;
    std::vector<std::size_t> cardinalities;
    std::size_t records = 1000;
    double target_fraction = 0.2;
    double correlation = 0.0;
    // Clustered only: one level per value of attribute 0.
    std::vector<double> cluster_levels;
    double spread = 0.05;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

struct SynthOutput {
    Dataset dataset;
    // Generator parameters, the realized target fraction and the planted
    // cell ("hot_cell" or "optimum") as query text.
    nlohmann::json meta;
};

// Attributes are A1..Ar with values v0..v(k-1); the hidden field "label" is
// 1 for targets. Rows fill the cells in lexicographic blocks. Throws
// ConfigError for invalid or infeasible parameters.
SynthOutput generate_synth(const SynthParams& params);

}  // namespace hps
