#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "hps/dataset_io.hpp"
#include "hps/query.hpp"

namespace hps_test {

inline std::filesystem::path fixture(const std::string& name) {
    return std::filesystem::path(HPS_FIXTURE_DIR) / name;
}

inline hps::Dataset load_toy() {
    auto decl = hps::DatasetDeclaration::from_file(fixture("toy.decl.json"));
    return hps::load_dataset(fixture("toy.csv"), decl);
}

inline hps::DatasetPtr toy_ptr() { return std::make_shared<const hps::Dataset>(load_toy()); }

inline hps::Query q(const hps::Dataset& ds, const std::string& text) { return hps::parse_query(text, ds.schema()); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hps_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace hps_test
