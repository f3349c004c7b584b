#pragma once

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hps/predicate.hpp"
#include "hps/schema.hpp"

namespace hps {

// Queryable entity population with a hidden target predicate. Immutable once
// constructed; transforms produce new datasets.
class Dataset {
public:
    // Validates ids, value codes, hidden arity and types, the predicate and
    // the optional rank (a permutation of all ids, first = top rank).
    Dataset(AttributeSchema schema, std::vector<HiddenField> hidden_fields,
            std::vector<EntityRecord> records, HiddenPropertySpec target,
            std::optional<std::vector<EntityId>> rank = std::nullopt);

    const AttributeSchema& schema() const { return schema_; }
    const std::vector<HiddenField>& hidden_fields() const { return hidden_fields_; }
    const std::vector<EntityRecord>& records() const { return records_; }
    const EntityRecord& record(RowIndex row) const { return records_[row]; }
    std::size_t size() const { return records_.size(); }
    const HiddenPropertySpec& target_spec() const { return target_; }

    bool is_target(RowIndex row) const { return target_flags_[row] != 0; }
    std::size_t target_count() const { return target_count_; }
    double target_fraction() const;

    std::optional<RowIndex> row_of(EntityId id) const;
    // Throws DataError for an unknown id.
    bool evaluate_target(EntityId id) const;

    bool has_rank() const { return rank_.has_value(); }
    const std::optional<std::vector<EntityId>>& rank() const { return rank_; }
    // Rank order expressed as row indices; empty when no rank is present.
    const std::vector<RowIndex>& rank_rows() const { return rank_rows_; }

    std::optional<std::size_t> hidden_index(std::string_view name) const;

private:
    AttributeSchema schema_;
    std::vector<HiddenField> hidden_fields_;
    std::vector<EntityRecord> records_;
    HiddenPropertySpec target_;
    std::optional<std::vector<EntityId>> rank_;
    std::vector<RowIndex> rank_rows_;
    std::vector<std::uint8_t> target_flags_;
    std::size_t target_count_ = 0;
    std::unordered_map<EntityId, RowIndex> row_by_id_;
};

using DatasetPtr = std::shared_ptr<const Dataset>;

}  // namespace hps
