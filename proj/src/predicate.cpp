#include "hps/predicate.hpp"

#include <algorithm>

#include "hps/error.hpp"

namespace hps {

struct HiddenPropertySpec::Node {
    enum class Kind { True, Compare, In, And, Or, Not };
    Kind kind = Kind::True;
    std::string field;
    CompareOp op = CompareOp::Eq;
    HiddenValue value;
    std::vector<HiddenValue> values;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = HiddenPropertySpec::Node;

constexpr std::pair<CompareOp, const char*> kOpNames[] = {
    {CompareOp::Eq, "eq"}, {CompareOp::Ne, "ne"}, {CompareOp::Lt, "lt"},
    {CompareOp::Le, "le"}, {CompareOp::Gt, "gt"}, {CompareOp::Ge, "ge"},
};

const char* op_name(CompareOp op) {
    for (auto [o, n] : kOpNames) {
        if (o == op) return n;
    }
    return "?";
}

HiddenValue value_from_json(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw DataError("predicate value must be a number or string: " + j.dump());
}

nlohmann::json value_to_json(const HiddenValue& v) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    return std::get<std::string>(v);
}

const nlohmann::json& member(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(std::string("predicate missing '") + key + "': " + j.dump());
    return *it;
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(),
                              [&](const char* k) { return it.key() == k; });
        if (!ok) throw DataError("unknown predicate key '" + it.key() + "'");
    }
}

std::shared_ptr<const Node> parse_node(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("predicate must be an object: " + j.dump());
    const std::string op = member(j, "op").get<std::string>();
    auto node = std::make_shared<Node>();
    if (op == "true") {
        reject_unknown_keys(j, {"op"});
        node->kind = Node::Kind::True;
        return node;
    }
    for (auto [o, n] : kOpNames) {
        if (op == n) {
            reject_unknown_keys(j, {"op", "field", "value"});
            node->kind = Node::Kind::Compare;
            node->op = o;
            node->field = member(j, "field").get<std::string>();
            node->value = value_from_json(member(j, "value"));
            return node;
        }
    }
    if (op == "in") {
        reject_unknown_keys(j, {"op", "field", "values"});
        node->kind = Node::Kind::In;
        node->field = member(j, "field").get<std::string>();
        for (const auto& v : member(j, "values")) node->values.push_back(value_from_json(v));
        return node;
    }
    if (op == "and" || op == "or") {
        reject_unknown_keys(j, {"op", "args"});
        node->kind = op == "and" ? Node::Kind::And : Node::Kind::Or;
        for (const auto& a : member(j, "args")) node->args.push_back(parse_node(a));
        return node;
    }
    if (op == "not") {
        reject_unknown_keys(j, {"op", "arg"});
        node->kind = Node::Kind::Not;
        node->args.push_back(parse_node(member(j, "arg")));
        return node;
    }
    throw DataError("unknown predicate op: " + op);
}

nlohmann::json node_to_json(const Node& n) {
    switch (n.kind) {
        case Node::Kind::True:
            return {{"op", "true"}};
        case Node::Kind::Compare:
            return {{"op", op_name(n.op)}, {"field", n.field}, {"value", value_to_json(n.value)}};
        case Node::Kind::In: {
            nlohmann::json vals = nlohmann::json::array();
            for (const auto& v : n.values) vals.push_back(value_to_json(v));
            return {{"op", "in"}, {"field", n.field}, {"values", vals}};
        }
        case Node::Kind::And:
        case Node::Kind::Or: {
            nlohmann::json args = nlohmann::json::array();
            for (const auto& a : n.args) args.push_back(node_to_json(*a));
            return {{"op", n.kind == Node::Kind::And ? "and" : "or"}, {"args", args}};
        }
        case Node::Kind::Not:
            return {{"op", "not"}, {"arg", node_to_json(*n.args.front())}};
    }
    return {};
}

void collect_fields(const Node& n, std::set<std::string>& out) {
    if (n.kind == Node::Kind::Compare || n.kind == Node::Kind::In) out.insert(n.field);
    for (const auto& a : n.args) collect_fields(*a, out);
}

std::optional<std::size_t> field_index(std::span<const HiddenField> fields, const std::string& name) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].name == name) return i;
    }
    return std::nullopt;
}

bool value_matches_type(const HiddenValue& v, FieldType t) {
    return (t == FieldType::Number) == std::holds_alternative<double>(v);
}

void validate_node(const Node& n, std::span<const HiddenField> fields) {
    if (n.kind == Node::Kind::Compare || n.kind == Node::Kind::In) {
        auto idx = field_index(fields, n.field);
        if (!idx) throw DataError("predicate references undeclared hidden field '" + n.field + "'");
        const FieldType t = fields[*idx].type;
        if (n.kind == Node::Kind::Compare) {
            if (!value_matches_type(n.value, t)) {
                throw DataError("predicate compares field '" + n.field + "' with a value of the wrong type");
            }
            if (t == FieldType::String && n.op != CompareOp::Eq && n.op != CompareOp::Ne) {
                throw DataError(std::string("ordering comparison '") + op_name(n.op) +
                                "' on string field '" + n.field + "'");
            }
        } else {
            for (const auto& v : n.values) {
                if (!value_matches_type(v, t)) {
                    throw DataError("predicate set for field '" + n.field + "' has a value of the wrong type");
                }
            }
        }
    }
    if ((n.kind == Node::Kind::And || n.kind == Node::Kind::Or) && n.args.empty()) {
        throw DataError("empty and/or in predicate");
    }
    for (const auto& a : n.args) validate_node(*a, fields);
}

bool compare(const HiddenValue& lhs, CompareOp op, const HiddenValue& rhs) {
    if (const double* a = std::get_if<double>(&lhs)) {
        const double b = std::get<double>(rhs);
        switch (op) {
            case CompareOp::Eq: return *a == b;
            case CompareOp::Ne: return *a != b;
            case CompareOp::Lt: return *a < b;
            case CompareOp::Le: return *a <= b;
            case CompareOp::Gt: return *a > b;
            case CompareOp::Ge: return *a >= b;
        }
    }
    const bool eq = std::get<std::string>(lhs) == std::get<std::string>(rhs);
    return op == CompareOp::Eq ? eq : !eq;
}

bool eval_node(const Node& n, std::span<const HiddenField> fields, std::span<const HiddenValue> values) {
    switch (n.kind) {
        case Node::Kind::True:
            return true;
        case Node::Kind::Compare:
            return compare(values[*field_index(fields, n.field)], n.op, n.value);
        case Node::Kind::In: {
            const auto& v = values[*field_index(fields, n.field)];
            return std::find(n.values.begin(), n.values.end(), v) != n.values.end();
        }
        case Node::Kind::And:
            return std::all_of(n.args.begin(), n.args.end(),
                               [&](const auto& a) { return eval_node(*a, fields, values); });
        case Node::Kind::Or:
            return std::any_of(n.args.begin(), n.args.end(),
                               [&](const auto& a) { return eval_node(*a, fields, values); });
        case Node::Kind::Not:
            return !eval_node(*n.args.front(), fields, values);
    }
    return false;
}

}  // namespace

HiddenPropertySpec::HiddenPropertySpec() : root_(std::make_shared<Node>()) {}

HiddenPropertySpec::HiddenPropertySpec(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

HiddenPropertySpec HiddenPropertySpec::always_true() { return HiddenPropertySpec(); }

HiddenPropertySpec HiddenPropertySpec::compare(std::string field, CompareOp op, HiddenValue value) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Compare;
    n->field = std::move(field);
    n->op = op;
    n->value = std::move(value);
    return HiddenPropertySpec(n);
}

HiddenPropertySpec HiddenPropertySpec::member_of(std::string field, std::vector<HiddenValue> values) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::In;
    n->field = std::move(field);
    n->values = std::move(values);
    return HiddenPropertySpec(n);
}

HiddenPropertySpec HiddenPropertySpec::all_of(std::vector<HiddenPropertySpec> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::And;
    for (auto& a : args) n->args.push_back(a.root_);
    return HiddenPropertySpec(n);
}

HiddenPropertySpec HiddenPropertySpec::any_of(std::vector<HiddenPropertySpec> args) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Or;
    for (auto& a : args) n->args.push_back(a.root_);
    return HiddenPropertySpec(n);
}

HiddenPropertySpec HiddenPropertySpec::negate(HiddenPropertySpec arg) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Not;
    n->args.push_back(arg.root_);
    return HiddenPropertySpec(n);
}

HiddenPropertySpec HiddenPropertySpec::from_json(const nlohmann::json& j) {
    return HiddenPropertySpec(parse_node(j));
}

nlohmann::json HiddenPropertySpec::to_json() const { return node_to_json(*root_); }

std::set<std::string> HiddenPropertySpec::referenced_fields() const {
    std::set<std::string> out;
    collect_fields(*root_, out);
    return out;
}

void HiddenPropertySpec::validate(std::span<const HiddenField> fields) const {
    validate_node(*root_, fields);
}

bool HiddenPropertySpec::evaluate(std::span<const HiddenField> fields,
                                  std::span<const HiddenValue> values) const {
    return eval_node(*root_, fields, values);
}

}  // namespace hps
