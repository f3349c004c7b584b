#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hps/query_index.hpp"
#include "hps/random.hpp"

namespace hps {

enum class PagingMode { WithReplacement, WithoutReplacementPerCall, FixedRanking };

std::string paging_mode_name(PagingMode mode);
// Throws ConfigError for an unknown name.
PagingMode paging_mode_from_name(const std::string& name);

struct ApiConfig {
    std::size_t page_size = 10;
    PagingMode paging_mode = PagingMode::WithoutReplacementPerCall;
    bool report_match_count = true;
    std::uint64_t rng_seed = 0;
};

struct ApiResponse {
    // Returned entities as dataset rows; WithReplacement pages may repeat rows.
    std::vector<RowIndex> rows;
    std::optional<std::size_t> match_count;
    std::optional<std::string> next_page_token;
};

class BudgetLedger {
public:
    explicit BudgetLedger(std::size_t budget) : budget_(budget) {}

    std::size_t budget() const { return budget_; }
    std::size_t calls_made() const { return calls_made_; }
    std::size_t remaining() const { return budget_ - calls_made_; }
    bool exhausted() const { return calls_made_ >= budget_; }
    // Throws BudgetExhausted when no call is left.
    void charge(const Query& q);
    std::size_t calls_for(const Query& q) const;
    const std::map<Query, std::size_t>& per_query() const { return per_query_; }

private:
    std::size_t budget_;
    std::size_t calls_made_ = 0;
    std::map<Query, std::size_t> per_query_;
};

// Paginated query API over one dataset. Owns its RNG stream; one instance
// serves one run.
class SimulatedApi {
public:
    // `dataset` supplies target labels for tracing and defaults to the index's
    // dataset. It must share the index's rows and queryable values.
    SimulatedApi(QueryIndexPtr index, ApiConfig config, DatasetPtr dataset = nullptr);

    const ApiConfig& config() const { return config_; }
    const QueryIndex& index() const { return *index_; }
    const Dataset& dataset() const { return *dataset_; }
    const AttributeSchema& schema() const { return index_->schema(); }

    // Charges the ledger once, including for empty pages.
    ApiResponse execute(const Query& q, BudgetLedger& ledger,
                        const std::optional<std::string>& page_token = std::nullopt);

    // JSON-lines trace: call, query, returned, targets.
    void set_trace(std::ostream* out) { trace_ = out; }

private:
    const std::vector<RowIndex>& matches_for(const Query& q);
    const std::vector<RowIndex>& ranked_matches_for(const Query& q);

    QueryIndexPtr index_;
    ApiConfig config_;
    DatasetPtr dataset_;
    Rng rng_;
    std::unordered_map<Query, std::vector<RowIndex>, QueryHash> match_cache_;
    std::unordered_map<Query, std::vector<RowIndex>, QueryHash> ranked_cache_;
    std::vector<std::uint32_t> rank_position_;
    std::ostream* trace_ = nullptr;
    std::size_t call_counter_ = 0;
};

// Expected number of distinct items among m uniform draws with replacement
// from n items.
double expected_distinct(double n, double m);

}  // namespace hps
