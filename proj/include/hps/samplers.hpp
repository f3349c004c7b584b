#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/query_index.hpp"
#include "hps/query_pool.hpp"
#include "hps/reward.hpp"
#include "hps/sample_log.hpp"
#include "hps/sim_api.hpp"

namespace hps {

enum class SamplerKind { DtTmp, Tmp, Exp, Uni, Rw, Ls, Cb };

std::string sampler_kind_name(SamplerKind kind);
// Throws ConfigError for an unknown name.
SamplerKind sampler_kind_from_name(const std::string& name);
// Every kind except DT-TMP and UNI needs the non-empty query catalog.
bool needs_catalog(SamplerKind kind);

struct SamplerConfig {
    SamplerKind kind = SamplerKind::DtTmp;
    std::size_t epoch = 10;
    // Defaults from the paging mode when unset; forced to UnknownN when the
    // API does not report match counts.
    std::optional<RewardMode> reward_mode;
    std::uint64_t rng_seed = 0;
    double rw_generalize_prob = 0.5;
    double cb_alpha = 1.0;

    // Keys: kind, epoch, reward_mode, rw_generalize_prob, cb_alpha. Unknown
    // keys are rejected.
    static SamplerConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

RewardMode resolve_reward_mode(const SamplerConfig& config, const ApiConfig& api);

struct SamplerContext {
    const Dataset* dataset = nullptr;
    ApiConfig api;
    // Required by kinds for which needs_catalog() holds.
    QueryCatalogPtr catalog;
};

class Sampler {
public:
    virtual ~Sampler() = default;
    virtual SamplerKind kind() const = 0;
    virtual Query next_query() = 0;
    virtual void observe(const Query& q, const ApiResponse& response, const SampleLog& log) = 0;
    // Called once the ledger shows `calls_made` calls.
    virtual void after_call(std::size_t calls_made) { (void)calls_made; }
};

// Decision-tree Thompson sampler over a growing query pool.
class DtTmpSampler : public Sampler {
public:
    DtTmpSampler(const SamplerConfig& config, const SamplerContext& ctx);
    SamplerKind kind() const override { return SamplerKind::DtTmp; }
    Query next_query() override;
    void observe(const Query& q, const ApiResponse& response, const SampleLog& log) override;
    void after_call(std::size_t calls_made) override;

    const QueryPool& pool() const { return pool_; }
    std::size_t expansions() const { return expansions_; }

private:
    SamplerConfig config_;
    const Dataset* dataset_;
    std::size_t m_;
    RewardMode mode_;
    Rng rng_;
    QueryPool pool_;
    const SampleLog* log_ = nullptr;
    std::size_t expansions_ = 0;
};

// Throws ConfigError when the context lacks what the kind needs.
std::unique_ptr<Sampler> make_sampler(const SamplerConfig& config, const SamplerContext& ctx);

// Issues queries until the ledger is exhausted. In fixed-ranking mode a
// re-issued query continues from its last page token and restarts from the
// first page once exhausted.
SampleLog run(Sampler& sampler, SimulatedApi& api, BudgetLedger& ledger);

}  // namespace hps
