#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "hps/dataset.hpp"
#include "hps/query.hpp"
#include "hps/sim_api.hpp"

namespace hps {

struct CallRecord {
    std::size_t call = 0;
    Query query;
    std::vector<RowIndex> rows;
    // Target rows in the page, counting repeats.
    std::size_t targets = 0;
    std::size_t new_entities = 0;
    std::size_t new_targets = 0;
};

// Per-call record of a run plus the cumulative distinct sampled set.
class SampleLog {
public:
    explicit SampleLog(const Dataset& dataset);

    // Appends one call; returns the rows seen for the first time, in page order.
    const std::vector<RowIndex>& record(const Query& q, const ApiResponse& response);

    const std::vector<CallRecord>& calls() const { return calls_; }
    std::size_t call_count() const { return calls_.size(); }
    // Distinct sampled rows in first-seen order.
    const std::vector<RowIndex>& sampled_rows() const { return sampled_; }
    bool is_seen(RowIndex row) const { return seen_[row] != 0; }
    std::size_t distinct_entities() const { return sampled_.size(); }
    std::size_t distinct_targets() const { return distinct_targets_; }
    // Distinct targets after each call.
    const std::vector<std::size_t>& cumulative_targets() const { return cumulative_targets_; }
    const std::vector<RowIndex>& last_new_rows() const { return last_new_; }
    std::vector<bool> target_flags(const CallRecord& call) const;

    // One JSON object per call: call, query, ids, target flags, new targets
    // and the running distinct-target count.
    void write_jsonl(std::ostream& out) const;

private:
    const Dataset* dataset_;
    std::vector<CallRecord> calls_;
    std::vector<std::uint8_t> seen_;
    std::vector<RowIndex> sampled_;
    std::size_t distinct_targets_ = 0;
    std::vector<std::size_t> cumulative_targets_;
    std::vector<RowIndex> last_new_;
};

}  // namespace hps
