#include "hps/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hps/error.hpp"
#include "hps/query.hpp"
#include "hps/random.hpp"

namespace hps {

nlohmann::json SynthParams::to_json() const {
    nlohmann::json j = {{"mode", mode == SynthMode::Planted ? "planted" : "clustered"},
                        {"cardinalities", cardinalities},
                        {"records", records},
                        {"seed", seed}};
    if (mode == SynthMode::Planted) {
        j["target_fraction"] = target_fraction;
        j["correlation"] = correlation;
    } else {
        j["cluster_levels"] = cluster_levels;
        j["spread"] = spread;
    }
    return j;
}

namespace {

void mark_random(std::vector<RowIndex> rows, std::size_t k, Rng& rng, std::vector<std::uint8_t>& target) {
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(rows[i], rows[i + uniform_index(rows.size() - i, rng)]);
        target[rows[i]] = 1;
    }
}

}  // namespace

SynthOutput generate_synth(const SynthParams& p) {
    if (p.cardinalities.empty()) throw ConfigError("gen-synth needs at least one attribute");
    std::size_t cells = 1;
    for (std::size_t c : p.cardinalities) {
        if (c < 1 || c >= kMaxCardinality) throw ConfigError("cardinalities must lie in [1, 65534]");
        if (cells > (std::size_t{1} << 40) / c) throw ConfigError("too many cells");
        cells *= c;
    }
    if (p.records < 1) throw ConfigError("gen-synth needs at least one record");

    std::vector<Attribute> attrs;
    for (std::size_t a = 0; a < p.cardinalities.size(); ++a) {
        Attribute attr;
        attr.name = "A" + std::to_string(a + 1);
        for (std::size_t v = 0; v < p.cardinalities[a]; ++v) attr.domain.push_back("v" + std::to_string(v));
        attrs.push_back(std::move(attr));
    }
    AttributeSchema schema(attrs);

    const std::size_t n = p.records;
    std::vector<std::size_t> cell_of(n);
    std::vector<std::vector<RowIndex>> rows_in(cells);
    for (std::size_t i = 0; i < n; ++i) {
        cell_of[i] = static_cast<std::size_t>((static_cast<unsigned __int128>(i) * cells) / n);
        rows_in[cell_of[i]].push_back(static_cast<RowIndex>(i));
    }
    auto cell_query = [&](std::size_t cell) {
        std::vector<ValueCode> slots(p.cardinalities.size());
        for (std::size_t a = p.cardinalities.size(); a-- > 0;) {
            slots[a] = static_cast<ValueCode>(cell % p.cardinalities[a]);
            cell /= p.cardinalities[a];
        }
        return Query(std::move(slots));
    };
    std::vector<std::size_t> nonempty;
    for (std::size_t c = 0; c < cells; ++c) {
        if (!rows_in[c].empty()) nonempty.push_back(c);
    }

    Rng rng(p.seed);
    std::vector<std::uint8_t> target(n, 0);
    nlohmann::json meta = {{"generator", p.to_json()}};

    if (p.mode == SynthMode::Planted) {
        if (!(p.target_fraction >= 0.0 && p.target_fraction <= 1.0)) throw ConfigError("target fraction must lie in [0, 1]");
        if (!(p.correlation >= 0.0 && p.correlation <= 1.0)) throw ConfigError("correlation must lie in [0, 1]");
        const std::size_t hot = nonempty[uniform_index(nonempty.size(), rng)];
        const double p_hot = p.target_fraction + p.correlation * (1.0 - p.target_fraction);
        const auto total = static_cast<std::size_t>(std::llround(p.target_fraction * static_cast<double>(n)));
        const std::size_t n_hot = rows_in[hot].size();
        const std::size_t t_hot =
            std::min(total, static_cast<std::size_t>(std::llround(p_hot * static_cast<double>(n_hot))));
        const std::size_t rest = total - t_hot;
        if (rest > n - n_hot) {
            throw ConfigError("infeasible target fraction: " + std::to_string(rest) +
                              " targets do not fit outside the hot cell");
        }
        mark_random(rows_in[hot], t_hot, rng, target);
        std::vector<RowIndex> others;
        for (std::size_t i = 0; i < n; ++i) {
            if (cell_of[i] != hot) others.push_back(static_cast<RowIndex>(i));
        }
        mark_random(std::move(others), rest, rng, target);
        meta["hot_cell"] = format_query(cell_query(hot), schema);
        meta["hot_cell_precision"] = static_cast<double>(t_hot) / static_cast<double>(n_hot);
    } else {
        const std::size_t k = p.cardinalities[0];
        if (p.cluster_levels.size() != k) {
            throw ConfigError("clustered mode needs one level per value of the first attribute");
        }
        for (double l : p.cluster_levels) {
            if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("cluster levels must lie in [0, 1]");
        }
        if (!(p.spread >= 0.0 && p.spread <= 1.0)) throw ConfigError("spread must lie in [0, 1]");
        const std::size_t top = static_cast<std::size_t>(
            std::max_element(p.cluster_levels.begin(), p.cluster_levels.end()) - p.cluster_levels.begin());
        std::vector<std::size_t> top_cells;
        for (std::size_t c : nonempty) {
            if (c / (cells / k) == top) top_cells.push_back(c);
        }
        if (top_cells.empty()) throw ConfigError("the top cluster has no records");
        const std::size_t optimum = top_cells[uniform_index(top_cells.size(), rng)];
        std::vector<double> realized(cells, -1.0);
        for (std::size_t c : nonempty) {
            const double level = p.cluster_levels[c / (cells / k)];
            double prec = level;
            if (c != optimum) prec = std::clamp(level - p.spread * (0.2 + 0.8 * uniform_unit(rng)), 0.0, 1.0);
            const std::size_t nc = rows_in[c].size();
            const auto t = static_cast<std::size_t>(std::llround(prec * static_cast<double>(nc)));
            mark_random(rows_in[c], t, rng, target);
            realized[c] = static_cast<double>(t) / static_cast<double>(nc);
        }
        for (std::size_t c : nonempty) {
            if (c != optimum && realized[c] >= realized[optimum]) {
                throw ConfigError("planted optimum is not unique; use more records or a wider spread");
            }
        }
        meta["optimum"] = format_query(cell_query(optimum), schema);
        meta["optimum_precision"] = realized[optimum];
    }

    std::vector<EntityRecord> records(n);
    std::size_t t_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        records[i].id = static_cast<EntityId>(i + 1);
        records[i].values = cell_query(cell_of[i]).slots();
        records[i].hidden = {HiddenValue(target[i] ? 1.0 : 0.0)};
        t_count += target[i];
    }
    meta["target_fraction"] = static_cast<double>(t_count) / static_cast<double>(n);
    Dataset ds(std::move(schema), {{"label", FieldType::Number}}, std::move(records),
               HiddenPropertySpec::compare("label", CompareOp::Eq, 1.0));
    return {std::move(ds), std::move(meta)};
}

}  // namespace hps
