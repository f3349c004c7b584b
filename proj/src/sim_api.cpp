#include "hps/sim_api.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hps/error.hpp"

namespace hps {

std::string paging_mode_name(PagingMode mode) {
    switch (mode) {
        case PagingMode::WithReplacement: return "with-replacement";
        case PagingMode::WithoutReplacementPerCall: return "without-replacement";
        case PagingMode::FixedRanking: return "fixed-ranking";
    }
    return "?";
}

PagingMode paging_mode_from_name(const std::string& name) {
    for (auto m : {PagingMode::WithReplacement, PagingMode::WithoutReplacementPerCall, PagingMode::FixedRanking}) {
        if (paging_mode_name(m) == name) return m;
    }
    throw ConfigError("unknown paging mode '" + name + "'");
}

void BudgetLedger::charge(const Query& q) {
    if (calls_made_ >= budget_) throw BudgetExhausted("budget of " + std::to_string(budget_) + " calls exhausted");
    ++calls_made_;
    ++per_query_[q];
}

std::size_t BudgetLedger::calls_for(const Query& q) const {
    auto it = per_query_.find(q);
    return it == per_query_.end() ? 0 : it->second;
}

SimulatedApi::SimulatedApi(QueryIndexPtr index, ApiConfig config, DatasetPtr dataset)
    : index_(std::move(index)), config_(config), dataset_(std::move(dataset)), rng_(config.rng_seed) {
    if (!index_) throw ConfigError("simulated API needs an index");
    if (!dataset_) dataset_ = index_->dataset_ptr();
    if (config_.page_size < 1) throw ConfigError("page size must be at least 1");
    if (dataset_->size() != index_->dataset().size() || !(dataset_->schema() == index_->schema())) {
        throw SchemaMismatch("dataset does not match the index");
    }
    if (config_.paging_mode == PagingMode::FixedRanking) {
        if (!dataset_->has_rank()) throw ConfigError("fixed-ranking paging needs a dataset rank");
        rank_position_.resize(dataset_->size());
        const auto& rr = dataset_->rank_rows();
        for (std::size_t i = 0; i < rr.size(); ++i) rank_position_[rr[i]] = static_cast<std::uint32_t>(i);
    }
}

const std::vector<RowIndex>& SimulatedApi::matches_for(const Query& q) {
    auto it = match_cache_.find(q);
    if (it != match_cache_.end()) return it->second;
    return match_cache_.emplace(q, index_->match_rows(q)).first->second;
}

const std::vector<RowIndex>& SimulatedApi::ranked_matches_for(const Query& q) {
    auto it = ranked_cache_.find(q);
    if (it != ranked_cache_.end()) return it->second;
    auto rows = index_->match_rows(q);
    std::sort(rows.begin(), rows.end(), [&](RowIndex a, RowIndex b) { return rank_position_[a] < rank_position_[b]; });
    return ranked_cache_.emplace(q, std::move(rows)).first->second;
}

namespace {

std::string make_token(const Query& q, std::size_t offset) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zx.%016zx", offset, q.hash());
    return buf;
}

std::size_t parse_token(const std::string& token, const Query& q, std::size_t match_count) {
    const auto dot = token.find('.');
    if (dot == std::string::npos || dot == 0) throw InvalidPageToken("malformed page token '" + token + "'");
    std::size_t offset = 0;
    std::size_t hash = 0;
    try {
        std::size_t used = 0;
        offset = std::stoull(token.substr(0, dot), &used, 16);
        if (used != dot) throw InvalidPageToken("malformed page token '" + token + "'");
        hash = std::stoull(token.substr(dot + 1), &used, 16);
        if (used != token.size() - dot - 1) throw InvalidPageToken("malformed page token '" + token + "'");
    } catch (const std::logic_error&) {
        throw InvalidPageToken("malformed page token '" + token + "'");
    }
    if (hash != q.hash()) throw InvalidPageToken("page token belongs to another query");
    if (offset == 0 || offset >= match_count) throw InvalidPageToken("stale page token '" + token + "'");
    return offset;
}

}  // namespace

ApiResponse SimulatedApi::execute(const Query& q, BudgetLedger& ledger, const std::optional<std::string>& page_token) {
    if (q.size() != schema().size()) throw SchemaMismatch("query arity does not match the API schema");
    if (ledger.exhausted()) throw BudgetExhausted("budget of " + std::to_string(ledger.budget()) + " calls exhausted");
    if (page_token && config_.paging_mode != PagingMode::FixedRanking) {
        throw InvalidPageToken("page tokens are only accepted in fixed-ranking mode");
    }

    ApiResponse resp;
    const std::size_t m = config_.page_size;
    std::size_t n = 0;
    switch (config_.paging_mode) {
        case PagingMode::WithReplacement: {
            const auto& rows = matches_for(q);
            n = rows.size();
            if (n > 0) {
                resp.rows.reserve(m);
                for (std::size_t i = 0; i < m; ++i) resp.rows.push_back(rows[uniform_index(n, rng_)]);
            }
            break;
        }
        case PagingMode::WithoutReplacementPerCall: {
            const auto& rows = matches_for(q);
            n = rows.size();
            if (n <= m) {
                resp.rows = rows;
            } else {
                // Floyd's algorithm: a uniform m-subset in O(m).
                std::unordered_set<std::size_t> chosen;
                chosen.reserve(m * 2);
                for (std::size_t j = n - m; j < n; ++j) {
                    std::size_t t = uniform_index(j + 1, rng_);
                    if (!chosen.insert(t).second) {
                        chosen.insert(j);
                        t = j;
                    }
                    resp.rows.push_back(rows[t]);
                }
            }
            break;
        }
        case PagingMode::FixedRanking: {
            const auto& rows = ranked_matches_for(q);
            n = rows.size();
            const std::size_t offset = page_token ? parse_token(*page_token, q, n) : 0;
            const std::size_t end = std::min(n, offset + m);
            resp.rows.assign(rows.begin() + static_cast<std::ptrdiff_t>(offset), rows.begin() + static_cast<std::ptrdiff_t>(end));
            if (end < n) resp.next_page_token = make_token(q, end);
            break;
        }
    }
    if (config_.report_match_count) resp.match_count = n;
    ledger.charge(q);
    ++call_counter_;

    if (trace_) {
        std::size_t targets = 0;
        for (RowIndex r : resp.rows) targets += dataset_->is_target(r) ? 1 : 0;
        nlohmann::json line = {{"call", call_counter_},
                               {"query", format_query(q, schema())},
                               {"returned", resp.rows.size()},
                               {"targets", targets}};
        *trace_ << line.dump() << '\n';
    }
    return resp;
}

double expected_distinct(double n, double m) {
    if (n <= 0.0 || m <= 0.0) return 0.0;
    if (n == 1.0) return 1.0;
    return n * -std::expm1(m * std::log1p(-1.0 / n));
}

}  // namespace hps
