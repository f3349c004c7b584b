#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/dataset.hpp"

namespace hps {

struct QueryableColumnDecl {
    std::string column;
    // Attribute name; defaults to the column name.
    std::string name;
    // Closed domain. Empty together with infer_domain == true means "infer".
    std::vector<std::string> domain;
    bool infer_domain = true;
    // Numeric discretization edges (strictly increasing, at least two).
    std::vector<double> bins;
};

struct HiddenColumnDecl {
    std::string column;
    FieldType type = FieldType::String;
};

// Sidecar declaration that accompanies a delimited dataset file.
struct DatasetDeclaration {
    char delimiter = ',';
    // When absent, ids are 1-based row numbers.
    std::optional<std::string> id_column;
    std::vector<QueryableColumnDecl> queryable;
    std::vector<HiddenColumnDecl> hidden;
    std::optional<HiddenPropertySpec> target;
    // Optional fixed ranking column (numeric); ties broken by id.
    std::optional<std::string> rank_column;
    bool rank_descending = false;
    // Cell values treated as missing; rows containing one are skipped.
    std::vector<std::string> missing_tokens{""};
    // Free-form metadata carried through unchanged.
    nlohmann::json meta = nlohmann::json::object();

    static DatasetDeclaration from_json(const nlohmann::json& j);
    static DatasetDeclaration from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t rows_skipped_missing = 0;
};

// Parses one delimited line, honoring double quotes. Unquoted fields are
// trimmed of surrounding blanks.
std::vector<std::string> split_delimited(const std::string& line, char delimiter);

Dataset load_dataset(const std::filesystem::path& path, const DatasetDeclaration& decl,
                     const HiddenPropertySpec& target, LoadReport* report = nullptr);

// Uses decl.target, or the constant-true predicate when the declaration has none.
Dataset load_dataset(const std::filesystem::path& path, const DatasetDeclaration& decl,
                     LoadReport* report = nullptr);

// Writes `dataset` as a delimited file plus a declaration that reloads it
// losslessly (closed domains, rank column when a rank is present).
void write_dataset(const Dataset& dataset, const std::filesystem::path& csv_path,
                   const std::filesystem::path& decl_path,
                   const nlohmann::json& meta = nlohmann::json::object());

}  // namespace hps
