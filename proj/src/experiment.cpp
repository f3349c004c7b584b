#include "hps/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <thread>

#include "hps/error.hpp"
#include "hps/transform.hpp"

namespace hps {

void ExperimentSpec::validate() const {
    if (samplers.empty()) throw ConfigError("experiment lists no samplers");
    for (std::size_t i = 0; i < samplers.size(); ++i) {
        if (samplers[i].label.empty()) throw ConfigError("sampler label must not be empty");
        for (std::size_t k = 0; k < i; ++k) {
            if (samplers[k].label == samplers[i].label) throw ConfigError("duplicate sampler label '" + samplers[i].label + "'");
        }
    }
    if (budgets.empty()) throw ConfigError("experiment lists no budgets");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] == 0) throw ConfigError("budgets must be positive");
        if (i > 0 && budgets[i] <= budgets[i - 1]) throw ConfigError("budgets must be strictly increasing");
    }
    if (replicates < 1) throw ConfigError("replicates must be at least 1");
    if (api.page_size < 1) throw ConfigError("page size must be at least 1");
    if (shuffle_ratio && !(*shuffle_ratio >= 0.0 && *shuffle_ratio <= 1.0)) {
        throw ConfigError("shuffle ratio must lie in [0, 1]");
    }
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

nlohmann::json RunRecord::to_json() const {
    nlohmann::json j = {{"sampler", label},
                        {"kind", sampler_kind_name(kind)},
                        {"budget", budget},
                        {"replicate", replicate},
                        {"sampler_seed", sampler_seed},
                        {"api_seed", api_seed},
                        {"page_size", page_size},
                        {"calls", calls},
                        {"distinct_entities", distinct_entities},
                        {"distinct_targets", distinct_targets},
                        {"target_count", target_count},
                        {"recall", recall},
                        {"normalized_recall", normalized_recall},
                        {"throughput", throughput},
                        {"mean_yield", mean_yield}};
    if (first_issue) j["calls_to_first_issue"] = *first_issue;
    if (!tag.empty()) j["tag"] = tag;
    j["series"] = series;
    return j;
}

RunRecord RunRecord::from_json(const nlohmann::json& j) {
    RunRecord r;
    try {
        r.label = j.at("sampler").get<std::string>();
        r.kind = sampler_kind_from_name(j.at("kind").get<std::string>());
        r.budget = j.at("budget").get<std::size_t>();
        r.replicate = j.at("replicate").get<std::size_t>();
        r.sampler_seed = j.at("sampler_seed").get<std::uint64_t>();
        r.api_seed = j.at("api_seed").get<std::uint64_t>();
        r.page_size = j.at("page_size").get<std::size_t>();
        r.calls = j.at("calls").get<std::size_t>();
        r.distinct_entities = j.at("distinct_entities").get<std::size_t>();
        r.distinct_targets = j.at("distinct_targets").get<std::size_t>();
        r.target_count = j.at("target_count").get<std::size_t>();
        r.recall = j.at("recall").get<double>();
        r.normalized_recall = j.at("normalized_recall").get<double>();
        r.throughput = j.at("throughput").get<double>();
        r.mean_yield = j.at("mean_yield").get<double>();
        if (j.contains("calls_to_first_issue")) r.first_issue = j.at("calls_to_first_issue").get<std::size_t>();
        r.tag = j.value("tag", std::string());
        r.series = j.at("series").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("corrupt run record: ") + e.what());
    }
    return r;
}

const AggregateRow* ExperimentResult::find(const std::string& label, std::size_t budget, const std::string& metric) const {
    for (const auto& row : summary) {
        if (row.label == label && row.budget == budget && row.metric == metric) return &row;
    }
    return nullptr;
}

std::vector<std::string> metric_names(bool with_first_issue) {
    std::vector<std::string> names = {"recall", "normalized_recall", "throughput", "mean_yield", "distinct_targets"};
    if (with_first_issue) names.push_back("calls_to_first_issue");
    return names;
}

double metric_value(const RunRecord& run, const std::string& metric) {
    if (metric == "recall") return run.recall;
    if (metric == "normalized_recall") return run.normalized_recall;
    if (metric == "throughput") return run.throughput;
    if (metric == "mean_yield") return run.mean_yield;
    if (metric == "distinct_targets") return static_cast<double>(run.distinct_targets);
    if (metric == "calls_to_first_issue") {
        if (!run.first_issue) throw ConfigError("run has no tracked query");
        return static_cast<double>(*run.first_issue);
    }
    throw ConfigError("unknown metric '" + metric + "'");
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
    std::vector<std::string> labels;
    std::map<std::string, std::vector<std::size_t>> budgets;
    // (label, budget) -> replicate -> run indices
    std::map<std::pair<std::string, std::size_t>, std::map<std::size_t, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
        auto& bl = budgets[r.label];
        if (std::find(bl.begin(), bl.end(), r.budget) == bl.end()) bl.push_back(r.budget);
        groups[{r.label, r.budget}][r.replicate].push_back(i);
    }
    std::vector<AggregateRow> out;
    for (const auto& label : labels) {
        for (std::size_t budget : budgets[label]) {
            const auto& reps = groups[{label, budget}];
            bool tracked = true;
            for (const auto& [rep, idx] : reps) {
                for (std::size_t i : idx) tracked = tracked && runs[i].first_issue.has_value();
            }
            for (const auto& metric : metric_names(tracked)) {
                std::vector<double> values;
                for (const auto& [rep, idx] : reps) {
                    double sum = 0.0;
                    for (std::size_t i : idx) sum += metric_value(runs[i], metric);
                    values.push_back(sum / static_cast<double>(idx.size()));
                }
                out.push_back({label, budget, metric, summarize(values)});
            }
        }
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const DatasetPtr& dataset) {
    spec.validate();
    if (!dataset) throw ConfigError("experiment has no dataset");
    if (dataset->target_count() == 0) throw DataError("dataset has no target entities; recall is undefined");

    DatasetPtr base = dataset;
    if (spec.api.paging_mode == PagingMode::FixedRanking && !base->has_rank()) {
        base = std::make_shared<const Dataset>(with_random_rank(*base, derive_seed(spec.seed, SeedStream::Rank, 0)));
    }
    auto index = std::make_shared<const QueryIndex>(base);
    QueryCatalogPtr catalog;
    if (std::any_of(spec.samplers.begin(), spec.samplers.end(), [](const auto& s) { return needs_catalog(s.config.kind); })) {
        catalog = std::make_shared<const QueryCatalog>(*index);
    }
    std::optional<Query> tracked;
    if (spec.tracked_query) tracked = parse_query(*spec.tracked_query, base->schema());

    const std::size_t n_s = spec.samplers.size();
    const std::size_t n_b = spec.budgets.size();
    const std::size_t n_r = spec.replicates;
    ExperimentResult result;
    result.runs.resize(n_s * n_b * n_r);

    auto run_replicate = [&](std::size_t rep) {
        DatasetPtr ds = base;
        if (spec.shuffle_ratio && *spec.shuffle_ratio > 0.0) {
            Shuffle sh{*spec.shuffle_ratio, derive_seed(spec.seed, SeedStream::Shuffle, rep)};
            ds = std::make_shared<const Dataset>(apply_transform(*base, sh));
        }
        const std::uint64_t api_seed = derive_seed(spec.seed, SeedStream::Api, rep);
        const std::uint64_t sampler_seed = derive_seed(spec.seed, SeedStream::Sampler, rep);
        for (std::size_t s = 0; s < n_s; ++s) {
            for (std::size_t b = 0; b < n_b; ++b) {
                ApiConfig api = spec.api;
                api.rng_seed = api_seed;
                SimulatedApi sim(index, api, ds);
                SamplerConfig sc = spec.samplers[s].config;
                sc.rng_seed = sampler_seed;
                SamplerContext ctx{ds.get(), api, catalog};
                auto sampler = make_sampler(sc, ctx);
                BudgetLedger ledger(spec.budgets[b]);
                const SampleLog log = run(*sampler, sim, ledger);

                RunRecord& r = result.runs[(s * n_b + b) * n_r + rep];
                r.label = spec.samplers[s].label;
                r.kind = sc.kind;
                r.budget = spec.budgets[b];
                r.replicate = rep;
                r.sampler_seed = sampler_seed;
                r.api_seed = api_seed;
                r.page_size = api.page_size;
                r.calls = ledger.calls_made();
                r.distinct_entities = log.distinct_entities();
                r.distinct_targets = log.distinct_targets();
                r.target_count = ds->target_count();
                r.recall = recall(r.distinct_targets, ds->target_count());
                r.normalized_recall = normalized_recall(r.distinct_targets, r.budget, api.page_size);
                r.throughput = throughput_rate(r.distinct_targets, r.budget, api.page_size);
                std::size_t yield = 0;
                for (const auto& c : log.calls()) yield += c.targets;
                r.mean_yield = log.call_count() ? static_cast<double>(yield) / static_cast<double>(log.call_count()) : 0.0;
                if (tracked) {
                    r.first_issue = r.budget + 1;
                    for (const auto& c : log.calls()) {
                        if (c.query == *tracked) {
                            r.first_issue = c.call;
                            break;
                        }
                    }
                }
                r.series = log.cumulative_targets();
            }
        }
    };

    std::size_t jobs = spec.jobs ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, n_r);
    if (jobs <= 1) {
        for (std::size_t rep = 0; rep < n_r; ++rep) run_replicate(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t rep = next++; rep < n_r; rep = next++) {
                    try {
                        run_replicate(rep);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n_r;
                    }
                }
            });
        }
        for (auto& t : workers) t.join();
        if (error) std::rethrow_exception(error);
    }
    result.summary = aggregate_runs(result.runs);
    return result;
}

void write_raw_jsonl(const std::vector<RunRecord>& runs, std::ostream& out) {
    for (const auto& r : runs) out << r.to_json().dump() << '\n';
}

std::vector<RunRecord> read_raw_jsonl(std::istream& in) {
    std::vector<RunRecord> runs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("raw results line " + std::to_string(line_no) + " is not valid JSON");
        }
        runs.push_back(RunRecord::from_json(j));
    }
    return runs;
}

void write_summary_tsv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "sampler\tbudget\tmetric\tmean\tci_low\tci_high\n";
    for (const auto& r : rows) {
        out << r.label << '\t' << r.budget << '\t' << r.metric << '\t' << format_double(r.summary.mean) << '\t'
            << format_double(r.summary.ci_low) << '\t' << format_double(r.summary.ci_high) << '\n';
    }
}

void print_summary_table(const std::vector<AggregateRow>& rows, std::ostream& out) {
    std::size_t w = 7;
    for (const auto& r : rows) w = std::max(w, r.label.size());
    out << std::left << std::setw(static_cast<int>(w) + 2) << "sampler" << std::setw(8) << "budget" << std::setw(22)
        << "metric" << std::setw(14) << "mean" << std::setw(14) << "ci_low" << "ci_high" << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(w) + 2) << r.label << std::setw(8) << r.budget << std::setw(22)
            << r.metric << std::setw(14) << format_double(r.summary.mean) << std::setw(14)
            << format_double(r.summary.ci_low) << format_double(r.summary.ci_high) << '\n';
    }
}

}  // namespace hps
