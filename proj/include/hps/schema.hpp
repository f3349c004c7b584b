#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hps {

// Index of a value inside an attribute domain.
using ValueCode = std::uint16_t;
inline constexpr ValueCode kWildcard = 0xFFFF;
inline constexpr std::size_t kMaxCardinality = kWildcard;

// Position of a record inside its Dataset.
using RowIndex = std::uint32_t;
using EntityId = std::int64_t;

struct Attribute {
    std::string name;
    std::vector<std::string> domain;
    // Raw column the attribute was read from (defaults to `name`).
    std::string source_column;
    // Non-empty when the attribute discretizes a numeric column.
    std::vector<double> bin_edges;

    std::size_t cardinality() const { return domain.size(); }
    std::optional<ValueCode> code_of(std::string_view value) const;
};

// Ordered queryable attributes. Names are unique, domains non-empty with
// unique values. The wildcard is never a domain value.
class AttributeSchema {
public:
    AttributeSchema() = default;
    explicit AttributeSchema(std::vector<Attribute> attributes);

    std::size_t size() const { return attributes_.size(); }
    bool empty() const { return attributes_.empty(); }
    const Attribute& operator[](std::size_t i) const { return attributes_[i]; }
    const std::vector<Attribute>& attributes() const { return attributes_; }

    std::optional<std::size_t> index_of(std::string_view name) const;
    // Throws DataError for an unknown name.
    std::size_t require_index(std::string_view name) const;

    bool operator==(const AttributeSchema& other) const;

private:
    std::vector<Attribute> attributes_;
};

enum class FieldType { Number, String };

struct HiddenField {
    std::string name;
    FieldType type = FieldType::String;
};

using HiddenValue = std::variant<double, std::string>;

struct EntityRecord {
    EntityId id = 0;
    // One code per schema attribute.
    std::vector<ValueCode> values;
    // Aligned with Dataset::hidden_fields().
    std::vector<HiddenValue> hidden;

    bool operator==(const EntityRecord&) const = default;
};

std::string_view field_type_name(FieldType type);

// Label of bin `i` for the given edges: "[lo,hi)" or "[lo,hi]" for the last.
std::string bin_label(const std::vector<double>& edges, std::size_t i);

// Bin index for `x`; bins are closed-open except the last, which is closed.
std::optional<std::size_t> find_bin(const std::vector<double>& edges, double x);

}  // namespace hps
