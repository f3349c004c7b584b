#include "hps/dataset.hpp"

#include <limits>
#include <string>

#include "hps/error.hpp"

namespace hps {

Dataset::Dataset(AttributeSchema schema, std::vector<HiddenField> hidden_fields,
                 std::vector<EntityRecord> records, HiddenPropertySpec target,
                 std::optional<std::vector<EntityId>> rank)
    : schema_(std::move(schema)),
      hidden_fields_(std::move(hidden_fields)),
      records_(std::move(records)),
      target_(std::move(target)),
      rank_(std::move(rank)) {
    if (records_.size() > std::numeric_limits<RowIndex>::max()) {
        throw DataError("dataset too large");
    }
    for (std::size_t i = 0; i < hidden_fields_.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (hidden_fields_[k].name == hidden_fields_[i].name) {
                throw DataError("duplicate hidden field: " + hidden_fields_[i].name);
            }
        }
    }
    target_.validate(hidden_fields_);

    row_by_id_.reserve(records_.size());
    target_flags_.resize(records_.size(), 0);
    for (std::size_t row = 0; row < records_.size(); ++row) {
        const auto& rec = records_[row];
        if (!row_by_id_.emplace(rec.id, static_cast<RowIndex>(row)).second) {
            throw DataError("duplicate entity id " + std::to_string(rec.id));
        }
        if (rec.values.size() != schema_.size()) {
            throw DataError("entity " + std::to_string(rec.id) + " has " +
                            std::to_string(rec.values.size()) + " queryable values, schema has " +
                            std::to_string(schema_.size()));
        }
        for (std::size_t a = 0; a < schema_.size(); ++a) {
            if (rec.values[a] >= schema_[a].cardinality()) {
                throw DataError("entity " + std::to_string(rec.id) + " has an out-of-domain value for '" +
                                schema_[a].name + "'");
            }
        }
        if (rec.hidden.size() != hidden_fields_.size()) {
            throw DataError("entity " + std::to_string(rec.id) + " has the wrong number of hidden fields");
        }
        for (std::size_t h = 0; h < hidden_fields_.size(); ++h) {
            const bool numeric = std::holds_alternative<double>(rec.hidden[h]);
            if (numeric != (hidden_fields_[h].type == FieldType::Number)) {
                throw DataError("entity " + std::to_string(rec.id) + " hidden field '" +
                                hidden_fields_[h].name + "' has the wrong type");
            }
        }
        if (target_.evaluate(hidden_fields_, rec.hidden)) {
            target_flags_[row] = 1;
            ++target_count_;
        }
    }

    if (rank_) {
        if (rank_->size() != records_.size()) throw DataError("rank is not a permutation of the record ids");
        std::vector<std::uint8_t> used(records_.size(), 0);
        rank_rows_.reserve(rank_->size());
        for (EntityId id : *rank_) {
            auto it = row_by_id_.find(id);
            if (it == row_by_id_.end() || used[it->second]) {
                throw DataError("rank is not a permutation of the record ids");
            }
            used[it->second] = 1;
            rank_rows_.push_back(it->second);
        }
    }
}

double Dataset::target_fraction() const {
    return records_.empty() ? 0.0 : static_cast<double>(target_count_) / static_cast<double>(records_.size());
}

std::optional<RowIndex> Dataset::row_of(EntityId id) const {
    auto it = row_by_id_.find(id);
    if (it == row_by_id_.end()) return std::nullopt;
    return it->second;
}

bool Dataset::evaluate_target(EntityId id) const {
    auto row = row_of(id);
    if (!row) throw DataError("unknown entity id " + std::to_string(id));
    return is_target(*row);
}

std::optional<std::size_t> Dataset::hidden_index(std::string_view name) const {
    for (std::size_t i = 0; i < hidden_fields_.size(); ++i) {
        if (hidden_fields_[i].name == name) return i;
    }
    return std::nullopt;
}

}  // namespace hps
