#include "hps/schema.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "hps/error.hpp"

namespace hps {

std::optional<ValueCode> Attribute::code_of(std::string_view value) const {
    for (std::size_t i = 0; i < domain.size(); ++i) {
        if (domain[i] == value) return static_cast<ValueCode>(i);
    }
    return std::nullopt;
}

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes)
    : attributes_(std::move(attributes)) {
    std::unordered_set<std::string> names;
    for (auto& a : attributes_) {
        if (a.name.empty()) throw DataError("attribute with empty name");
        if (!names.insert(a.name).second) throw DataError("duplicate attribute name: " + a.name);
        if (a.domain.empty()) throw DataError("attribute '" + a.name + "' has an empty domain");
        if (a.domain.size() >= kMaxCardinality) {
            throw DataError("attribute '" + a.name + "' has too many values");
        }
        std::unordered_set<std::string> values;
        for (const auto& v : a.domain) {
            if (!values.insert(v).second) {
                throw DataError("attribute '" + a.name + "' repeats domain value '" + v + "'");
            }
        }
        if (a.source_column.empty()) a.source_column = a.name;
    }
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name == name) return i;
    }
    return std::nullopt;
}

std::size_t AttributeSchema::require_index(std::string_view name) const {
    auto idx = index_of(name);
    if (!idx) throw DataError("unknown attribute: " + std::string(name));
    return *idx;
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (attributes_[i].name != other[i].name || attributes_[i].domain != other[i].domain) {
            return false;
        }
    }
    return true;
}

std::string_view field_type_name(FieldType type) {
    return type == FieldType::Number ? "number" : "string";
}

namespace {

std::string format_edge(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

}  // namespace

std::string bin_label(const std::vector<double>& edges, std::size_t i) {
    const bool last = i + 2 == edges.size();
    return "[" + format_edge(edges[i]) + "," + format_edge(edges[i + 1]) + (last ? "]" : ")");
}

std::optional<std::size_t> find_bin(const std::vector<double>& edges, double x) {
    if (edges.size() < 2) return std::nullopt;
    if (x < edges.front() || x > edges.back()) return std::nullopt;
    if (x == edges.back()) return edges.size() - 2;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return static_cast<std::size_t>(it - edges.begin()) - 1;
}

}  // namespace hps
