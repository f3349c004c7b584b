#include "hps/ablation.hpp"

#include <algorithm>
#include <cmath>

#include "hps/error.hpp"
#include "hps/transform.hpp"

namespace hps {

std::string axis_name(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::PageSize: return "page-size";
        case AblationAxis::Attributes: return "attributes";
        case AblationAxis::Cardinality: return "cardinality";
        case AblationAxis::Shuffle: return "shuffle";
    }
    return "?";
}

AblationAxis axis_from_name(const std::string& name) {
    for (auto a : {AblationAxis::PageSize, AblationAxis::Attributes, AblationAxis::Cardinality, AblationAxis::Shuffle}) {
        if (axis_name(a) == name) return a;
    }
    throw ConfigError("unknown ablation axis '" + name + "'");
}

namespace {

std::size_t as_count(double v, double min, const std::string& what) {
    if (!(v >= min) || std::floor(v) != v) {
        throw ConfigError(what + " must be an integer >= " + format_double(min) + ", got " + format_double(v));
    }
    return static_cast<std::size_t>(v);
}

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == k) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = start; i < n && n - i >= k - cur.size(); ++i) {
        cur.push_back(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

std::string label_for(AblationAxis axis, double v) {
    return axis == AblationAxis::Shuffle ? format_double(v) : std::to_string(static_cast<std::size_t>(v));
}

}  // namespace

AblationResult run_ablation(const ExperimentSpec& spec, const DatasetPtr& dataset, AblationAxis axis,
                            const std::vector<double>& values, std::size_t subset_cap) {
    if (values.empty()) throw ConfigError("ablation needs at least one value");
    if (!dataset) throw ConfigError("ablation has no dataset");
    const auto& schema = dataset->schema();
    for (double v : values) {
        switch (axis) {
            case AblationAxis::PageSize: as_count(v, 1, "page size"); break;
            case AblationAxis::Attributes:
                if (as_count(v, 1, "subset size") > schema.size()) {
                    throw ConfigError("subset size exceeds the " + std::to_string(schema.size()) + " attributes");
                }
                break;
            case AblationAxis::Cardinality: as_count(v, 2, "cardinality"); break;
            case AblationAxis::Shuffle:
                if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("shuffle ratio must lie in [0, 1]");
                break;
        }
    }
    if (subset_cap < 1) throw ConfigError("subset cap must be at least 1");

    AblationResult out;
    out.axis = axis;
    for (double v : values) {
        AblationPoint point;
        point.value = v;
        point.value_label = label_for(axis, v);
        ExperimentSpec s = spec;
        switch (axis) {
            case AblationAxis::PageSize:
                s.api.page_size = static_cast<std::size_t>(v);
                point.result = run_experiment(s, dataset);
                break;
            case AblationAxis::Shuffle:
                s.shuffle_ratio = v;
                point.result = run_experiment(s, dataset);
                break;
            case AblationAxis::Cardinality: {
                const auto c = static_cast<std::size_t>(v);
                s.tracked_query.reset();
                Dataset merged = *dataset;
                nlohmann::json done = nlohmann::json::array();
                nlohmann::json skipped = nlohmann::json::array();
                for (const auto& a : schema.attributes()) {
                    if (a.cardinality() > c) {
                        merged = apply_transform(merged, CardinalityMerge{a.name, c, "MERGED"});
                        done.push_back(a.name);
                    } else {
                        skipped.push_back(a.name);
                    }
                }
                point.info = {{"merged", done}, {"unchanged", skipped}};
                point.result = run_experiment(s, std::make_shared<const Dataset>(std::move(merged)));
                break;
            }
            case AblationAxis::Attributes: {
                const auto k = static_cast<std::size_t>(v);
                s.tracked_query.reset();
                std::vector<std::vector<std::size_t>> subsets;
                std::vector<std::size_t> cur;
                combinations(schema.size(), k, 0, cur, subsets);
                const std::size_t total = subsets.size();
                const std::uint64_t subset_seed = derive_seed(spec.seed, SeedStream::Subsets, k);
                if (subsets.size() > subset_cap) {
                    Rng rng(subset_seed);
                    std::shuffle(subsets.begin(), subsets.end(), rng);
                    subsets.resize(subset_cap);
                    std::sort(subsets.begin(), subsets.end());
                }
                nlohmann::json used = nlohmann::json::array();
                for (const auto& subset : subsets) {
                    AttributeSubset t;
                    std::string tag;
                    for (std::size_t a : subset) {
                        t.attributes.push_back(schema[a].name);
                        tag += (tag.empty() ? "" : "+") + schema[a].name;
                    }
                    used.push_back(t.attributes);
                    auto sub = std::make_shared<const Dataset>(apply_transform(*dataset, t));
                    auto res = run_experiment(s, sub);
                    for (auto& r : res.runs) {
                        r.tag = tag;
                        point.result.runs.push_back(std::move(r));
                    }
                }
                point.result.summary = aggregate_runs(point.result.runs);
                point.info = {{"subsets", used}, {"available", total}, {"cap", subset_cap}, {"seed", subset_seed}};
                break;
            }
        }
        out.points.push_back(std::move(point));
    }

    if (axis == AblationAxis::PageSize) {
        for (std::size_t i = 1; i < out.points.size(); ++i) {
            const auto& prev = out.points[i - 1];
            const auto& next = out.points[i];
            for (const auto& row : next.result.summary) {
                if (row.metric != "recall") continue;
                const auto* before = prev.result.find(row.label, row.budget, "recall");
                if (!before) continue;
                out.deltas.push_back({row.label, row.budget, prev.value_label, next.value_label, before->summary.mean,
                                      row.summary.mean, percent_change(before->summary.mean, row.summary.mean)});
            }
        }
    }
    return out;
}

void write_combined_tsv(const AblationResult& result, std::ostream& out) {
    out << "axis\tvalue\tsampler\tbudget\tmetric\tmean\tci_low\tci_high\n";
    for (const auto& p : result.points) {
        for (const auto& r : p.result.summary) {
            out << axis_name(result.axis) << '\t' << p.value_label << '\t' << r.label << '\t' << r.budget << '\t'
                << r.metric << '\t' << format_double(r.summary.mean) << '\t' << format_double(r.summary.ci_low) << '\t'
                << format_double(r.summary.ci_high) << '\n';
        }
    }
}

void write_delta_tsv(const std::vector<DeltaRow>& rows, std::ostream& out) {
    out << "sampler\tbudget\tfrom\tto\trecall_from\trecall_to\tdelta_pct\n";
    for (const auto& d : rows) {
        out << d.label << '\t' << d.budget << '\t' << d.from << '\t' << d.to << '\t' << format_double(d.recall_from)
            << '\t' << format_double(d.recall_to) << '\t' << format_double(d.delta_pct) << '\n';
    }
}

}  // namespace hps
