#include "hps/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hps/error.hpp"
#include "hps/random.hpp"

namespace hps {

namespace {

Dataset rebuild(const Dataset& src, AttributeSchema schema, std::vector<HiddenField> hidden,
                std::vector<EntityRecord> records) {
    return Dataset(std::move(schema), std::move(hidden), std::move(records), src.target_spec(), src.rank());
}

Dataset apply(const Dataset& ds, const CardinalityMerge& t) {
    const std::size_t a = ds.schema().require_index(t.attribute);
    const Attribute& attr = ds.schema()[a];
    if (t.c < 2) throw DataError("cardinality-merge needs c >= 2");
    if (t.c > attr.cardinality()) {
        throw DataError("cardinality-merge c=" + std::to_string(t.c) + " exceeds the cardinality " +
                        std::to_string(attr.cardinality()) + " of '" + attr.name + "'");
    }
    std::vector<std::size_t> targets(attr.cardinality(), 0);
    for (std::size_t row = 0; row < ds.size(); ++row) {
        if (ds.is_target(static_cast<RowIndex>(row))) ++targets[ds.records()[row].values[a]];
    }
    std::vector<std::size_t> order(attr.cardinality());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return targets[x] > targets[y]; });
    std::vector<bool> keep(attr.cardinality(), false);
    for (std::size_t i = 0; i + 1 < t.c; ++i) keep[order[i]] = true;

    Attribute merged = attr;
    merged.domain.clear();
    merged.bin_edges.clear();
    std::vector<ValueCode> remap(attr.cardinality());
    for (std::size_t v = 0; v < attr.cardinality(); ++v) {
        if (keep[v]) {
            if (attr.domain[v] == t.merged_label) {
                throw DataError("merged label '" + t.merged_label + "' collides with a kept value");
            }
            remap[v] = static_cast<ValueCode>(merged.domain.size());
            merged.domain.push_back(attr.domain[v]);
        }
    }
    const auto merged_code = static_cast<ValueCode>(merged.domain.size());
    merged.domain.push_back(t.merged_label);
    for (std::size_t v = 0; v < attr.cardinality(); ++v) {
        if (!keep[v]) remap[v] = merged_code;
    }

    auto attrs = ds.schema().attributes();
    attrs[a] = std::move(merged);
    auto records = ds.records();
    for (auto& r : records) r.values[a] = remap[r.values[a]];
    return rebuild(ds, AttributeSchema(std::move(attrs)), ds.hidden_fields(), std::move(records));
}

Dataset apply(const Dataset& ds, const Shuffle& t) {
    if (!(t.ratio >= 0.0 && t.ratio <= 1.0)) throw DataError("shuffle ratio must lie in [0, 1]");
    auto records = ds.records();
    const auto k = static_cast<std::size_t>(std::ceil(t.ratio * static_cast<double>(records.size())));
    if (k >= 2) {
        Rng rng(t.seed);
        std::vector<std::size_t> rows(records.size());
        std::iota(rows.begin(), rows.end(), 0);
        // Partial Fisher-Yates: the first k entries are a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) std::swap(rows[i], rows[i + uniform_index(rows.size() - i, rng)]);
        rows.resize(k);
        std::sort(rows.begin(), rows.end());
        std::vector<std::size_t> perm = rows;
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < k; ++i) records[rows[i]].hidden = ds.records()[perm[i]].hidden;
    }
    return rebuild(ds, ds.schema(), ds.hidden_fields(), std::move(records));
}

Dataset apply(const Dataset& ds, const AttributeSubset& t) {
    if (t.attributes.empty()) throw DataError("attribute-subset must list at least one attribute");
    std::set<std::size_t> wanted;
    for (const auto& name : t.attributes) {
        if (!wanted.insert(ds.schema().require_index(name)).second) {
            throw DataError("attribute-subset lists '" + name + "' twice");
        }
    }
    std::vector<Attribute> attrs;
    for (std::size_t a : wanted) attrs.push_back(ds.schema()[a]);
    auto records = ds.records();
    for (auto& r : records) {
        std::vector<ValueCode> vals;
        vals.reserve(wanted.size());
        for (std::size_t a : wanted) vals.push_back(r.values[a]);
        r.values = std::move(vals);
    }
    return rebuild(ds, AttributeSchema(std::move(attrs)), ds.hidden_fields(), std::move(records));
}

Dataset apply(const Dataset& ds, const Discretize& t) {
    auto h = ds.hidden_index(t.field);
    if (!h) throw DataError("discretize: unknown hidden field '" + t.field + "'");
    if (ds.hidden_fields()[*h].type != FieldType::Number) {
        throw DataError("discretize: field '" + t.field + "' is not numeric");
    }
    if (t.edges.size() < 2 || std::adjacent_find(t.edges.begin(), t.edges.end(), std::greater_equal<>()) !=
                                  t.edges.end()) {
        throw DataError("discretize: edges must be at least two strictly increasing values");
    }
    Attribute attr;
    attr.name = t.name.empty() ? t.field + "_bin" : t.name;
    attr.source_column = t.field;
    attr.bin_edges = t.edges;
    for (std::size_t b = 0; b + 1 < t.edges.size(); ++b) attr.domain.push_back(bin_label(t.edges, b));

    auto attrs = ds.schema().attributes();
    attrs.push_back(attr);
    auto records = ds.records();
    for (auto& r : records) {
        const double x = std::get<double>(r.hidden[*h]);
        auto bin = find_bin(t.edges, x);
        if (!bin) {
            throw DataError("discretize: entity " + std::to_string(r.id) + " value outside the bin edges");
        }
        r.values.push_back(static_cast<ValueCode>(*bin));
    }
    return rebuild(ds, AttributeSchema(std::move(attrs)), ds.hidden_fields(), std::move(records));
}

}  // namespace

Dataset apply_transform(const Dataset& dataset, const TransformSpec& transform) {
    return std::visit([&](const auto& t) { return apply(dataset, t); }, transform);
}

Dataset with_random_rank(const Dataset& dataset, std::uint64_t seed) {
    std::vector<EntityId> rank;
    rank.reserve(dataset.size());
    for (const auto& r : dataset.records()) rank.push_back(r.id);
    Rng rng(seed);
    std::shuffle(rank.begin(), rank.end(), rng);
    return Dataset(dataset.schema(), dataset.hidden_fields(), dataset.records(), dataset.target_spec(),
                   std::move(rank));
}

TransformSpec transform_from_json(const nlohmann::json& j) {
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
                throw ConfigError("unknown key '" + it.key() + "' in transform");
            }
        }
    };
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("transform must be an object with a 'kind'");
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "cardinality-merge") {
            check_keys({"kind", "attribute", "c", "merged_label"});
            CardinalityMerge t;
            t.attribute = j.at("attribute").get<std::string>();
            const auto c = j.at("c").get<std::int64_t>();
            if (c < 2) throw ConfigError("cardinality-merge needs c >= 2");
            t.c = static_cast<std::size_t>(c);
            t.merged_label = j.value("merged_label", t.merged_label);
            return t;
        }
        if (kind == "shuffle") {
            check_keys({"kind", "ratio", "seed"});
            Shuffle t;
            t.ratio = j.at("ratio").get<double>();
            if (!(t.ratio >= 0.0 && t.ratio <= 1.0)) throw ConfigError("shuffle ratio must lie in [0, 1]");
            t.seed = j.value("seed", std::uint64_t{0});
            return t;
        }
        if (kind == "attribute-subset") {
            check_keys({"kind", "attributes"});
            AttributeSubset t;
            t.attributes = j.at("attributes").get<std::vector<std::string>>();
            if (t.attributes.empty()) throw ConfigError("attribute-subset must list at least one attribute");
            return t;
        }
        if (kind == "discretize") {
            check_keys({"kind", "field", "edges", "name"});
            Discretize t;
            t.field = j.at("field").get<std::string>();
            t.edges = j.at("edges").get<std::vector<double>>();
            t.name = j.value("name", std::string());
            return t;
        }
        throw ConfigError("unknown transform kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed transform: ") + e.what());
    }
}

nlohmann::json transform_to_json(const TransformSpec& t) {
    struct Visitor {
        nlohmann::json operator()(const CardinalityMerge& x) const {
            return {{"kind", "cardinality-merge"}, {"attribute", x.attribute}, {"c", x.c}, {"merged_label", x.merged_label}};
        }
        nlohmann::json operator()(const Shuffle& x) const {
            return {{"kind", "shuffle"}, {"ratio", x.ratio}, {"seed", x.seed}};
        }
        nlohmann::json operator()(const AttributeSubset& x) const {
            return {{"kind", "attribute-subset"}, {"attributes", x.attributes}};
        }
        nlohmann::json operator()(const Discretize& x) const {
            nlohmann::json j = {{"kind", "discretize"}, {"field", x.field}, {"edges", x.edges}};
            if (!x.name.empty()) j["name"] = x.name;
            return j;
        }
    };
    return std::visit(Visitor{}, t);
}

}  // namespace hps
