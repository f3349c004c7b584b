#include "hps/precision.hpp"

#include "hps/error.hpp"
#include "hps/experiment.hpp"

namespace hps {

std::vector<std::optional<double>> true_precision_map(const QueryIndex& index, const std::vector<Query>& queries) {
    std::vector<std::optional<double>> out;
    out.reserve(queries.size());
    const Dataset& ds = index.dataset();
    for (const auto& q : queries) {
        const auto rows = index.match_rows(q);
        if (rows.empty()) {
            out.emplace_back();
            continue;
        }
        std::size_t t = 0;
        for (RowIndex r : rows) t += ds.is_target(r) ? 1 : 0;
        out.emplace_back(static_cast<double>(t) / static_cast<double>(rows.size()));
    }
    return out;
}

Heatmap precision_heatmap(const QueryIndex& index, const std::string& row_attribute, const std::string& col_attribute) {
    const auto& schema = index.schema();
    const std::size_t a = schema.require_index(row_attribute);
    const std::size_t b = schema.require_index(col_attribute);
    if (a == b) throw DataError("heatmap needs two different attributes");
    Heatmap h;
    h.row_attribute = row_attribute;
    h.col_attribute = col_attribute;
    h.row_labels = schema[a].domain;
    h.col_labels = schema[b].domain;
    std::vector<std::vector<std::size_t>> n(h.row_labels.size(), std::vector<std::size_t>(h.col_labels.size(), 0));
    auto t = n;
    const Dataset& ds = index.dataset();
    for (std::size_t row = 0; row < ds.size(); ++row) {
        const auto& v = ds.records()[row].values;
        ++n[v[a]][v[b]];
        if (ds.is_target(static_cast<RowIndex>(row))) ++t[v[a]][v[b]];
    }
    h.cells.resize(h.row_labels.size());
    for (std::size_t i = 0; i < h.row_labels.size(); ++i) {
        for (std::size_t j = 0; j < h.col_labels.size(); ++j) {
            if (n[i][j] == 0) {
                h.cells[i].emplace_back();
            } else {
                h.cells[i].emplace_back(static_cast<double>(t[i][j]) / static_cast<double>(n[i][j]));
            }
        }
    }
    return h;
}

void write_heatmap_tsv(const Heatmap& heatmap, std::ostream& out) {
    out << heatmap.row_attribute << '\\' << heatmap.col_attribute;
    for (const auto& c : heatmap.col_labels) out << '\t' << c;
    out << '\n';
    for (std::size_t i = 0; i < heatmap.row_labels.size(); ++i) {
        out << heatmap.row_labels[i];
        for (const auto& cell : heatmap.cells[i]) out << '\t' << (cell ? format_double(*cell) : "NA");
        out << '\n';
    }
}

}  // namespace hps
