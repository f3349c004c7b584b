#include "hps/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "hps/ablation.hpp"
#include "hps/dataset_io.hpp"
#include "hps/error.hpp"
#include "hps/experiment_file.hpp"
#include "hps/query_index.hpp"
#include "hps/report.hpp"
#include "hps/synth.hpp"

namespace hps {

namespace {

namespace fs = std::filesystem;

struct Overrides {
    std::string output_dir;
    long long jobs = -1;
    long long replicates = -1;
    std::string seed;
};

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    out << text;
}

ExperimentPlan load_plan(const std::string& config, const Overrides& o) {
    ExperimentPlan plan = ExperimentPlan::from_file(config);
    if (const char* env = std::getenv("HPS_OUTPUT_DIR"); env && *env) plan.output_dir = fs::absolute(env);
    if (const char* env = std::getenv("HPS_JOBS"); env && *env) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (*end != '\0' || v < 0) throw ConfigError("HPS_JOBS must be a non-negative integer");
        plan.spec.jobs = static_cast<std::size_t>(v);
    }
    if (!o.output_dir.empty()) plan.output_dir = fs::absolute(o.output_dir);
    if (o.jobs >= 0) plan.spec.jobs = static_cast<std::size_t>(o.jobs);
    if (o.replicates >= 0) {
        if (o.replicates < 1) throw ConfigError("replicates must be at least 1");
        plan.spec.replicates = static_cast<std::size_t>(o.replicates);
    }
    if (!o.seed.empty()) {
        try {
            std::size_t used = 0;
            plan.spec.seed = std::stoull(o.seed, &used);
            if (used != o.seed.size()) throw ConfigError("seed must be an unsigned integer");
        } catch (const std::logic_error&) {
            throw ConfigError("seed must be an unsigned integer");
        }
    }
    plan.output_dir = plan.output_dir.lexically_normal();
    return plan;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--output-dir", o.output_dir, "Output directory (overrides the file and HPS_OUTPUT_DIR)");
    cmd->add_option("--jobs", o.jobs, "Worker threads, 0 = available parallelism")->check(CLI::NonNegativeNumber);
    cmd->add_option("--replicates", o.replicates, "Replicates per (sampler, budget)");
    cmd->add_option("--seed", o.seed, "Master seed");
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw ConfigError("bad value '" + item + "'");
        } catch (const std::logic_error&) {
            throw ConfigError("bad value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("no values given");
    return out;
}

int cmd_run(const std::string& config, const Overrides& o, bool dry_run, std::ostream& out) {
    const ExperimentPlan plan = load_plan(config, o);
    if (dry_run) {
        out << plan.to_json().dump(2) << '\n';
        return kExitOk;
    }
    const auto dataset = plan.load();
    const auto result = run_experiment(plan.spec, dataset);
    fs::create_directories(plan.output_dir);
    std::ostringstream raw;
    write_raw_jsonl(result.runs, raw);
    write_text(plan.output_dir / "raw.jsonl", raw.str());
    std::ostringstream summary;
    write_summary_tsv(result.summary, summary);
    write_text(plan.output_dir / "summary.tsv", summary.str());
    write_text(plan.output_dir / "plan.json", plan.to_json().dump(2) + "\n");
    print_summary_table(result.summary, out);
    return kExitOk;
}

int cmd_ablate(const std::string& config, const Overrides& o, const std::string& axis_text,
               const std::string& values_text, std::size_t subset_cap, std::ostream& out) {
    const AblationAxis axis = axis_from_name(axis_text);
    const auto values = parse_values(values_text);
    const ExperimentPlan plan = load_plan(config, o);
    const auto dataset = plan.load();
    const auto result = run_ablation(plan.spec, dataset, axis, values, subset_cap);

    const fs::path dir = plan.output_dir / ("ablation-" + axis_name(axis));
    fs::create_directories(dir);
    nlohmann::json info = nlohmann::json::object();
    for (const auto& p : result.points) {
        std::ostringstream raw;
        write_raw_jsonl(p.result.runs, raw);
        write_text(dir / ("raw_" + p.value_label + ".jsonl"), raw.str());
        std::ostringstream summary;
        write_summary_tsv(p.result.summary, summary);
        write_text(dir / ("summary_" + p.value_label + ".tsv"), summary.str());
        info[p.value_label] = p.info;
    }
    std::ostringstream combined;
    write_combined_tsv(result, combined);
    write_text(dir / "combined.tsv", combined.str());
    write_text(dir / "info.json", nlohmann::json({{"axis", axis_name(axis)}, {"points", info}, {"plan", plan.to_json()}}).dump(2) + "\n");
    if (axis == AblationAxis::PageSize) {
        std::ostringstream delta;
        write_delta_tsv(result.deltas, delta);
        write_text(dir / "delta.tsv", delta.str());
        out << delta.str();
    } else {
        out << combined.str();
    }
    return kExitOk;
}

int cmd_gen_synth(const SynthParams& params, const std::string& prefix, std::ostream& out) {
    const auto synth = generate_synth(params);
    const fs::path csv = prefix + ".csv";
    const fs::path decl = prefix + ".decl.json";
    if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
    write_dataset(synth.dataset, csv, decl, synth.meta);
    out << "wrote " << csv.string() << " and " << decl.string() << " (" << synth.dataset.size() << " records, "
        << synth.dataset.target_count() << " targets)\n";
    return kExitOk;
}

int cmd_validate(const std::string& data, const std::string& decl_path, bool count_queries, std::ostream& out) {
    if (!fs::exists(data)) throw DataError("dataset file not found: " + data);
    const auto decl = DatasetDeclaration::from_file(decl_path);
    LoadReport report;
    auto dataset = std::make_shared<const Dataset>(load_dataset(data, decl, &report));
    out << "records\t" << dataset->size() << '\n';
    out << "rows_skipped_missing\t" << report.rows_skipped_missing << '\n';
    out << "targets\t" << dataset->target_count() << '\n';
    out << "target_fraction\t" << format_double(dataset->target_fraction()) << '\n';
    for (const auto& a : dataset->schema().attributes()) {
        out << "attribute\t" << a.name << '\t' << a.cardinality() << '\n';
    }
    if (count_queries) {
        QueryIndex index(dataset);
        out << "nonempty_queries\t" << enumerate_nonempty_queries(index).size() << '\n';
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hidden-population search over simulated query APIs"};
    app.require_subcommand(1);

    Overrides run_o;
    std::string run_config;
    bool dry_run = false;
    auto* run = app.add_subcommand("run", "Run an experiment file");
    run->add_option("config", run_config, "Experiment file")->required();
    run->add_flag("--dry-run", dry_run, "Validate and print the resolved plan");
    add_overrides(run, run_o);

    Overrides abl_o;
    std::string abl_config, axis, values;
    std::size_t subset_cap = kDefaultSubsetCap;
    auto* ablate = app.add_subcommand("ablate", "Run an ablation over one axis");
    ablate->add_option("config", abl_config, "Experiment file")->required();
    ablate->add_option("--axis", axis, "page-size | attributes | cardinality | shuffle")->required();
    ablate->add_option("--values", values, "Comma-separated axis values")->required();
    ablate->add_option("--subset-cap", subset_cap, "Random subsets per size when there are more");
    add_overrides(ablate, abl_o);

    SynthParams synth;
    std::string cards, mode = "planted", levels, prefix;
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset");
    gen->add_option("--cards", cards, "Comma-separated cardinalities")->required();
    gen->add_option("--records", synth.records, "Number of records")->required();
    gen->add_option("--target-fraction", synth.target_fraction, "Overall target fraction (planted)");
    gen->add_option("--correlation", synth.correlation, "Hot-cell correlation strength in [0, 1] (planted)");
    gen->add_option("--mode", mode, "planted | clustered");
    gen->add_option("--levels", levels, "Comma-separated cluster levels (clustered)");
    gen->add_option("--spread", synth.spread, "Within-cluster spread (clustered)");
    gen->add_option("--seed", synth.seed, "Generator seed");
    gen->add_option("--out", prefix, "Output prefix; writes <prefix>.csv and <prefix>.decl.json")->required();

    std::string report_dir, bundle_dir, heatmap;
    auto* report = app.add_subcommand("report", "Summarize results and write the plot bundle");
    report->add_option("results", report_dir, "Results directory")->required();
    report->add_option("--bundle-dir", bundle_dir, "Bundle directory (default <results>/bundle)");
    report->add_option("--heatmap", heatmap, "Two attributes, e.g. education,marital_status");

    std::string val_data, val_decl;
    bool count_queries = false;
    auto* validate = app.add_subcommand("validate-dataset", "Load and check a dataset");
    validate->add_option("data", val_data, "Delimited data file")->required();
    validate->add_option("declaration", val_decl, "Declaration file")->required();
    validate->add_flag("--count-queries", count_queries, "Also count non-empty queries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, run_o, dry_run, out);
        if (ablate->parsed()) return cmd_ablate(abl_config, abl_o, axis, values, subset_cap, out);
        if (gen->parsed()) {
            if (mode == "planted") {
                synth.mode = SynthMode::Planted;
            } else if (mode == "clustered") {
                synth.mode = SynthMode::Clustered;
                synth.cluster_levels = parse_values(levels);
            } else {
                throw ConfigError("unknown gen-synth mode '" + mode + "'");
            }
            for (double c : parse_values(cards)) {
                if (!(c >= 1) || c != static_cast<double>(static_cast<std::size_t>(c))) {
                    throw ConfigError("cardinalities must be positive integers");
                }
                synth.cardinalities.push_back(static_cast<std::size_t>(c));
            }
            return cmd_gen_synth(synth, prefix, out);
        }
        if (report->parsed()) {
            ReportOptions ro;
            ro.results_dir = report_dir;
            ro.bundle_dir = bundle_dir;
            if (!heatmap.empty()) {
                const auto comma = heatmap.find(',');
                if (comma == std::string::npos) throw ConfigError("--heatmap needs two comma-separated attributes");
                ro.heatmap = std::make_pair(heatmap.substr(0, comma), heatmap.substr(comma + 1));
            }
            write_report(ro, out);
            return kExitOk;
        }
        if (validate->parsed()) return cmd_validate(val_data, val_decl, count_queries, out);
    } catch (const ConfigError& e) {
        err << "error: config: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "error: data: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const QueryError& e) {
        err << "error: query: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: runtime: " << one_line(e.what()) << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace hps
