#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/experiment.hpp"
#include "hps/transform.hpp"

namespace hps {

// Fully resolved experiment file: absolute paths, defaults filled in.
struct ExperimentPlan {
    std::filesystem::path dataset_path;
    std::filesystem::path declaration_path;
    std::vector<TransformSpec> transforms;
    ExperimentSpec spec;
    std::filesystem::path output_dir;

    // Relative paths resolve against `base_dir`. Unknown keys are rejected.
    // Throws ConfigError.
    static ExperimentPlan from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static ExperimentPlan from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // Loads the dataset and applies the transforms in order. Throws DataError.
    DatasetPtr load() const;
};

}  // namespace hps
