#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/dataset.hpp"
#include "hps/metrics.hpp"
#include "hps/samplers.hpp"
#include "hps/sim_api.hpp"

namespace hps {

struct SamplerSpec {
    std::string label;
    SamplerConfig config;
};

struct ExperimentSpec {
    std::vector<SamplerSpec> samplers;
    // Positive, strictly increasing.
    std::vector<std::size_t> budgets;
    std::size_t replicates = 100;
    std::uint64_t seed = 0;
    // rng_seed is ignored; every run derives its own.
    ApiConfig api;
    // Query text whose first issue is timed ("calls_to_first_issue").
    std::optional<std::string> tracked_query;
    // Shuffle applied per replicate with a replicate-specific seed.
    std::optional<double> shuffle_ratio;
    // Worker threads; 0 means the available hardware parallelism.
    std::size_t jobs = 0;

    // Throws ConfigError.
    void validate() const;
};

struct RunRecord {
    std::string label;
    SamplerKind kind = SamplerKind::Uni;
    std::size_t budget = 0;
    std::size_t replicate = 0;
    std::uint64_t sampler_seed = 0;
    std::uint64_t api_seed = 0;
    std::size_t page_size = 0;
    std::size_t calls = 0;
    std::size_t distinct_entities = 0;
    std::size_t distinct_targets = 0;
    std::size_t target_count = 0;
    double recall = 0.0;
    double normalized_recall = 0.0;
    double throughput = 0.0;
    // Targets per call, counting repeats within a page.
    double mean_yield = 0.0;
    // 1-based call of the first issue of the tracked query; budget + 1 if never.
    std::optional<std::size_t> first_issue;
    // Free-form label of the ablation cell the run belongs to.
    std::string tag;
    // Distinct targets after each call.
    std::vector<std::size_t> series;

    nlohmann::json to_json() const;
    static RunRecord from_json(const nlohmann::json& j);
};

struct AggregateRow {
    std::string label;
    std::size_t budget = 0;
    std::string metric;
    Summary summary;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    std::vector<AggregateRow> summary;

    const AggregateRow* find(const std::string& label, std::size_t budget, const std::string& metric) const;
};

// Names of the metrics aggregated per (sampler, budget).
std::vector<std::string> metric_names(bool with_first_issue);
double metric_value(const RunRecord& run, const std::string& metric);

// One run per (sampler, budget, replicate) with a fresh ledger. The API and
// sampler seeds depend only on (seed, replicate), so every sampler and
// budget sees the same random streams. Results are ordered by (sampler,
// budget, replicate) regardless of the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetPtr& dataset);

// Aggregates runs per (label, budget, metric) in first-appearance order of
// labels and budgets. Runs sharing (label, budget, replicate) but differing
// in tag are averaged first.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs);

void write_raw_jsonl(const std::vector<RunRecord>& runs, std::ostream& out);
std::vector<RunRecord> read_raw_jsonl(std::istream& in);
// Columns: sampler, budget, metric, mean, ci_low, ci_high.
void write_summary_tsv(const std::vector<AggregateRow>& rows, std::ostream& out);
void print_summary_table(const std::vector<AggregateRow>& rows, std::ostream& out);

std::string format_double(double x);

}  // namespace hps
