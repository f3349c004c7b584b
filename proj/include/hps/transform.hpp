#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/dataset.hpp"

namespace hps {

// Keep the c-1 values with the most target entities, relabel the rest.
struct CardinalityMerge {
    std::string attribute;
    std::size_t c = 2;
    std::string merged_label = "MERGED";
};

// Permute hidden fields among a random ceil(ratio * |records|) subset of rows.
struct Shuffle {
    double ratio = 0.0;
    std::uint64_t seed = 0;
};

// Keep only the listed queryable attributes (in schema order).
struct AttributeSubset {
    std::vector<std::string> attributes;
};

// Add a queryable attribute binning a numeric hidden field.
struct Discretize {
    std::string field;
    std::vector<double> edges;
    // Name of the new attribute; defaults to "<field>_bin".
    std::string name;
};

using TransformSpec = std::variant<CardinalityMerge, Shuffle, AttributeSubset, Discretize>;

// Throws DataError when the transform does not fit the dataset.
Dataset apply_transform(const Dataset& dataset, const TransformSpec& transform);

// Attaches a seeded uniformly random rank to a dataset without one.
Dataset with_random_rank(const Dataset& dataset, std::uint64_t seed);

TransformSpec transform_from_json(const nlohmann::json& j);
nlohmann::json transform_to_json(const TransformSpec& t);

}  // namespace hps
