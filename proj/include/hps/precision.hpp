#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hps/query_index.hpp"

namespace hps {

// Exact target fraction among the matches of each query; nullopt for
// queries without matches. Aligned with `queries`.
std::vector<std::optional<double>> true_precision_map(const QueryIndex& index, const std::vector<Query>& queries);

// True precision of every two-attribute query (row value, column value),
// other slots wildcards.
struct Heatmap {
    std::string row_attribute;
    std::string col_attribute;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<std::optional<double>>> cells;
};

// Throws DataError for unknown or identical attributes.
Heatmap precision_heatmap(const QueryIndex& index, const std::string& row_attribute, const std::string& col_attribute);

// Tab-separated matrix: a header of column labels after a corner cell
// "row_attribute\col_attribute", one line per row value, "NA" for empty cells.
void write_heatmap_tsv(const Heatmap& heatmap, std::ostream& out);

}  // namespace hps
