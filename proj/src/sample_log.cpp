#include "hps/sample_log.hpp"

#include <nlohmann/json.hpp>

namespace hps {

SampleLog::SampleLog(const Dataset& dataset) : dataset_(&dataset), seen_(dataset.size(), 0) {}

const std::vector<RowIndex>& SampleLog::record(const Query& q, const ApiResponse& response) {
    CallRecord rec;
    rec.call = calls_.size() + 1;
    rec.query = q;
    rec.rows = response.rows;
    last_new_.clear();
    for (RowIndex row : response.rows) {
        const bool target = dataset_->is_target(row);
        rec.targets += target ? 1 : 0;
        if (seen_[row]) continue;
        seen_[row] = 1;
        sampled_.push_back(row);
        last_new_.push_back(row);
        ++rec.new_entities;
        if (target) {
            ++rec.new_targets;
            ++distinct_targets_;
        }
    }
    calls_.push_back(std::move(rec));
    cumulative_targets_.push_back(distinct_targets_);
    return last_new_;
}

std::vector<bool> SampleLog::target_flags(const CallRecord& call) const {
    std::vector<bool> out;
    out.reserve(call.rows.size());
    for (RowIndex row : call.rows) out.push_back(dataset_->is_target(row));
    return out;
}

void SampleLog::write_jsonl(std::ostream& out) const {
    const auto& schema = dataset_->schema();
    for (std::size_t i = 0; i < calls_.size(); ++i) {
        const auto& c = calls_[i];
        nlohmann::json ids = nlohmann::json::array();
        nlohmann::json flags = nlohmann::json::array();
        for (RowIndex row : c.rows) {
            ids.push_back(dataset_->record(row).id);
            flags.push_back(dataset_->is_target(row));
        }
        nlohmann::json line = {{"call", c.call},
                               {"query", format_query(c.query, schema)},
                               {"ids", ids},
                               {"targets", flags},
                               {"new_targets", c.new_targets},
                               {"distinct_targets", cumulative_targets_[i]}};
        out << line.dump() << '\n';
    }
}

}  // namespace hps
