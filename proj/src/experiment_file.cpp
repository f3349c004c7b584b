#include "hps/experiment_file.hpp"

#include <algorithm>
#include <fstream>

#include "hps/dataset_io.hpp"
#include "hps/error.hpp"

namespace hps {

namespace {

namespace fs = std::filesystem;

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative()) path = base / path;
    return path.lexically_normal();
}

}  // namespace

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j, const fs::path& base_dir) {
    reject_unknown(j,
                   {"dataset", "transforms", "api", "samplers", "budgets", "replicates", "seed", "tracked_query",
                    "shuffle_ratio", "output_dir", "jobs"},
                   "experiment file");
    ExperimentPlan plan;
    try {
        const auto& d = j.at("dataset");
        reject_unknown(d, {"path", "declaration"}, "dataset");
        plan.dataset_path = resolve(base_dir, d.at("path").get<std::string>());
        plan.declaration_path = resolve(base_dir, d.at("declaration").get<std::string>());

        if (j.contains("transforms")) {
            for (const auto& t : j.at("transforms")) plan.transforms.push_back(transform_from_json(t));
        }

        ApiConfig api;
        if (j.contains("api")) {
            const auto& a = j.at("api");
            reject_unknown(a, {"page_size", "paging_mode", "report_match_count"}, "api");
            if (a.contains("page_size")) {
                const auto m = a.at("page_size").get<std::int64_t>();
                if (m < 1) throw ConfigError("page_size must be at least 1");
                api.page_size = static_cast<std::size_t>(m);
            }
            if (a.contains("paging_mode")) api.paging_mode = paging_mode_from_name(a.at("paging_mode").get<std::string>());
            api.report_match_count = a.value("report_match_count", api.report_match_count);
        }
        plan.spec.api = api;

        for (const auto& s : j.at("samplers")) {
            if (!s.is_object()) throw ConfigError("sampler entries must be objects");
            nlohmann::json cfg = s;
            std::string label;
            if (cfg.contains("label")) {
                label = cfg.at("label").get<std::string>();
                cfg.erase("label");
            }
            SamplerSpec spec{label, SamplerConfig::from_json(cfg)};
            if (spec.label.empty()) spec.label = sampler_kind_name(spec.config.kind);
            plan.spec.samplers.push_back(std::move(spec));
        }
        for (const auto& b : j.at("budgets")) {
            const auto v = b.get<std::int64_t>();
            if (v < 1) throw ConfigError("budgets must be positive");
            plan.spec.budgets.push_back(static_cast<std::size_t>(v));
        }
        if (j.contains("replicates")) {
            const auto r = j.at("replicates").get<std::int64_t>();
            if (r < 1) throw ConfigError("replicates must be at least 1");
            plan.spec.replicates = static_cast<std::size_t>(r);
        }
        plan.spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("tracked_query")) plan.spec.tracked_query = j.at("tracked_query").get<std::string>();
        if (j.contains("shuffle_ratio")) plan.spec.shuffle_ratio = j.at("shuffle_ratio").get<double>();
        if (j.contains("jobs")) {
            const auto n = j.at("jobs").get<std::int64_t>();
            if (n < 0) throw ConfigError("jobs must not be negative");
            plan.spec.jobs = static_cast<std::size_t>(n);
        }
        plan.output_dir = resolve(base_dir, j.value("output_dir", std::string("results")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment file: ") + e.what());
    }
    plan.spec.validate();
    return plan;
}

ExperimentPlan ExperimentPlan::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("experiment file " + path.string() + " is not valid JSON");
    }
    return from_json(j, fs::absolute(path).parent_path());
}

nlohmann::json ExperimentPlan::to_json() const {
    nlohmann::json j;
    j["dataset"] = {{"path", dataset_path.string()}, {"declaration", declaration_path.string()}};
    j["transforms"] = nlohmann::json::array();
    for (const auto& t : transforms) j["transforms"].push_back(transform_to_json(t));
    j["api"] = {{"page_size", spec.api.page_size},
                {"paging_mode", paging_mode_name(spec.api.paging_mode)},
                {"report_match_count", spec.api.report_match_count}};
    j["samplers"] = nlohmann::json::array();
    for (const auto& s : spec.samplers) {
        nlohmann::json e = s.config.to_json();
        e["label"] = s.label;
        j["samplers"].push_back(e);
    }
    j["budgets"] = spec.budgets;
    j["replicates"] = spec.replicates;
    j["seed"] = spec.seed;
    if (spec.tracked_query) j["tracked_query"] = *spec.tracked_query;
    if (spec.shuffle_ratio) j["shuffle_ratio"] = *spec.shuffle_ratio;
    j["jobs"] = spec.jobs;
    j["output_dir"] = output_dir.string();
    return j;
}

DatasetPtr ExperimentPlan::load() const {
    if (!fs::exists(dataset_path)) throw DataError("dataset file not found: " + dataset_path.string());
    if (!fs::exists(declaration_path)) throw DataError("declaration file not found: " + declaration_path.string());
    const auto decl = DatasetDeclaration::from_file(declaration_path);
    Dataset ds = load_dataset(dataset_path, decl);
    for (const auto& t : transforms) ds = apply_transform(ds, t);
    return std::make_shared<const Dataset>(std::move(ds));
}

}  // namespace hps
