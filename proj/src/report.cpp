#include "hps/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hps/error.hpp"
#include "hps/experiment.hpp"
#include "hps/experiment_file.hpp"
#include "hps/precision.hpp"

namespace hps {

namespace fs = std::filesystem;

std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << content;
}

}  // namespace

void write_report(const ReportOptions& options, std::ostream& out) {
    const fs::path dir = options.results_dir;
    if (!fs::is_directory(dir)) throw DataError("results directory not found: " + dir.string());
    const fs::path raw_path = dir / "raw.jsonl";
    if (!fs::exists(raw_path)) throw DataError("no raw.jsonl in " + dir.string());

    const std::string raw_bytes = read_file(raw_path);
    std::istringstream raw_in(raw_bytes);
    const auto runs = read_raw_jsonl(raw_in);
    if (runs.empty()) throw DataError("raw.jsonl in " + dir.string() + " holds no runs");
    const auto summary = aggregate_runs(runs);

    std::optional<ExperimentPlan> plan;
    std::string hash_source = raw_bytes;
    if (fs::exists(dir / "plan.json")) {
        hash_source = read_file(dir / "plan.json");
        try {
            plan = ExperimentPlan::from_json(nlohmann::json::parse(hash_source), dir);
        } catch (const nlohmann::json::exception&) {
            throw DataError("plan.json in " + dir.string() + " is not valid JSON");
        }
    }

    // Final metrics at each sampler's largest budget.
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> max_budget;
    for (const auto& r : runs) {
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) labels.push_back(r.label);
        max_budget[r.label] = std::max(max_budget[r.label], r.budget);
    }
    auto lookup = [&](const std::string& label, const std::string& metric) -> const AggregateRow* {
        for (const auto& row : summary) {
            if (row.label == label && row.budget == max_budget[label] && row.metric == metric) return &row;
        }
        return nullptr;
    };
    std::size_t w = 7;
    for (const auto& l : labels) w = std::max(w, l.size());
    out << "final metrics (largest budget per sampler)\n";
    out << std::left << std::setw(static_cast<int>(w) + 2) << "sampler" << std::setw(8) << "budget" << std::setw(30)
        << "normalized_recall [95% CI]" << "recall [95% CI]\n";
    for (const auto& l : labels) {
        const auto* nr = lookup(l, "normalized_recall");
        const auto* rc = lookup(l, "recall");
        auto fmt = [](const AggregateRow* row) {
            return format_double(row->summary.mean) + " [" + format_double(row->summary.ci_low) + ", " +
                   format_double(row->summary.ci_high) + "]";
        };
        out << std::left << std::setw(static_cast<int>(w) + 2) << l << std::setw(8) << max_budget[l] << std::setw(30)
            << fmt(nr) << fmt(rc) << '\n';
    }
    if (labels.size() > 1) {
        out << "\npairwise improvement in normalized_recall, 100*(A-B)/B\n";
        for (const auto& a : labels) {
            for (const auto& b : labels) {
                if (a == b) continue;
                const double ma = lookup(a, "normalized_recall")->summary.mean;
                const double mb = lookup(b, "normalized_recall")->summary.mean;
                out << a << " vs " << b << ": " << format_double(percent_change(mb, ma)) << "%\n";
            }
        }
    }

    const fs::path bundle = options.bundle_dir.empty() ? dir / "bundle" : options.bundle_dir;
    fs::create_directories(bundle);

    std::vector<AggregateRow> rows = summary;
    std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& x, const AggregateRow& y) {
        if (x.label != y.label) return x.label < y.label;
        if (x.budget != y.budget) return x.budget < y.budget;
        return x.metric < y.metric;
    });
    std::ostringstream series;
    write_summary_tsv(rows, series);
    write_file(bundle / "series.tsv", series.str());

    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["seed"] = plan ? nlohmann::json(plan->spec.seed) : nlohmann::json(nullptr);
    manifest["config_hash"] = content_hash(hash_source);
    manifest["sampler_order"] = labels;
    nlohmann::json figures = nlohmann::json::array();
    const std::pair<const char*, const char*> curves[] = {
        {"normalized_recall", "normalized recall"},
        {"recall", "recall"},
        {"throughput", "throughput rate"},
    };
    for (auto [metric, label] : curves) {
        figures.push_back({{"kind", "curve"},
                           {"id", metric},
                           {"input", "series.tsv"},
                           {"metric", metric},
                           {"x_label", "budget (API calls)"},
                           {"y_label", label}});
    }

    if (options.heatmap) {
        if (!plan) throw DataError("a heatmap needs plan.json in " + dir.string());
        auto dataset = plan->load();
        QueryIndex index(dataset);
        const auto hm = precision_heatmap(index, options.heatmap->first, options.heatmap->second);
        std::ostringstream hs;
        write_heatmap_tsv(hm, hs);
        write_file(bundle / "heatmap.tsv", hs.str());
        figures.push_back({{"kind", "heatmap"},
                           {"id", "precision_heatmap"},
                           {"input", "heatmap.tsv"},
                           {"x_label", hm.col_attribute},
                           {"y_label", hm.row_attribute}});
    }

    std::vector<fs::path> ablations;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_directory() && name.rfind("ablation-", 0) == 0 && fs::exists(entry.path() / "combined.tsv")) {
            ablations.push_back(entry.path());
        }
    }
    std::sort(ablations.begin(), ablations.end());
    for (const auto& a : ablations) {
        const std::string axis = a.filename().string().substr(std::string("ablation-").size());
        const std::string file = "ablation_" + axis + ".tsv";
        write_file(bundle / file, read_file(a / "combined.tsv"));
        figures.push_back({{"kind", "ablation"},
                           {"id", "ablation_" + axis},
                           {"axis", axis},
                           {"input", file},
                           {"metric", "recall"},
                           {"x_label", axis},
                           {"y_label", "recall"}});
    }
    manifest["figures"] = figures;
    write_file(bundle / "manifest.json", manifest.dump(2) + "\n");
    out << "\nbundle written to " << bundle.string() << '\n';
}

}  // namespace hps
