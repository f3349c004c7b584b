#pragma once

#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hps/schema.hpp"

namespace hps {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

// Boolean expression over hidden (non-queryable) fields; stands in for the
// oracle that labels an entity as target or not.
//
// JSON form:
//   {"op": "true"}
//   {"op": "eq"|"ne"|"lt"|"le"|"gt"|"ge", "field": F, "value": V}
//   {"op": "in", "field": F, "values": [V, ...]}
//   {"op": "and"|"or", "args": [P, ...]}
//   {"op": "not", "arg": P}
// Ordering comparisons need a numeric field; strings support eq/ne/in.
class HiddenPropertySpec {
public:
    // Constant-true predicate.
    HiddenPropertySpec();

    static HiddenPropertySpec always_true();
    static HiddenPropertySpec compare(std::string field, CompareOp op, HiddenValue value);
    static HiddenPropertySpec member_of(std::string field, std::vector<HiddenValue> values);
    static HiddenPropertySpec all_of(std::vector<HiddenPropertySpec> args);
    static HiddenPropertySpec any_of(std::vector<HiddenPropertySpec> args);
    static HiddenPropertySpec negate(HiddenPropertySpec arg);

    static HiddenPropertySpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    std::set<std::string> referenced_fields() const;

    // Throws DataError if a referenced field is undeclared or has the wrong type.
    void validate(std::span<const HiddenField> fields) const;

    // `values` is aligned with `fields`; call validate() first.
    bool evaluate(std::span<const HiddenField> fields, std::span<const HiddenValue> values) const;

    struct Node;

private:
    explicit HiddenPropertySpec(std::shared_ptr<const Node> root);
    std::shared_ptr<const Node> root_;
};

}  // namespace hps
