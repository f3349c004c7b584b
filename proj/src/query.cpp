#include "hps/query.hpp"

#include <algorithm>
#include <cstdio>

#include "hps/error.hpp"

namespace hps {

std::size_t Query::bound_count() const {
    return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](ValueCode v) { return v != kWildcard; }));
}

std::uint64_t Query::bound_mask() const {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i] != kWildcard) mask |= std::uint64_t{1} << i;
    }
    return mask;
}

std::size_t hash_slots(std::span<const ValueCode> slots) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (ValueCode v : slots) {
        h ^= v;
        h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
}

namespace {
constexpr std::size_t kNoNext = static_cast<std::size_t>(-1);
}

std::optional<std::size_t> QueryTable::find(std::span<const ValueCode> slots) const {
    auto it = head_.find(hash_slots(slots));
    if (it == head_.end()) return std::nullopt;
    for (std::size_t id = it->second; id != kNoNext; id = next_[id]) {
        const auto& qs = queries_[id].slots();
        if (std::equal(qs.begin(), qs.end(), slots.begin(), slots.end())) return id;
    }
    return std::nullopt;
}

std::pair<std::size_t, bool> QueryTable::insert(const Query& q) {
    if (auto id = find(q)) return {*id, false};
    const std::size_t id = queries_.size();
    queries_.push_back(q);
    auto [it, fresh] = head_.emplace(q.hash(), id);
    if (fresh) {
        next_.push_back(kNoNext);
    } else {
        next_.push_back(it->second);
        it->second = id;
    }
    return {id, true};
}

void QueryTable::reserve(std::size_t n) {
    head_.reserve(n);
    next_.reserve(n);
    queries_.reserve(n);
}

ObservedValues full_domain_values(const AttributeSchema& schema) {
    ObservedValues out(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) {
        for (std::size_t v = 0; v < schema[a].cardinality(); ++v) out[a].push_back(static_cast<ValueCode>(v));
    }
    return out;
}

bool matches(const Query& q, const EntityRecord& e) {
    if (q.size() != e.values.size()) {
        throw SchemaMismatch("query has " + std::to_string(q.size()) + " slots but entity has " +
                             std::to_string(e.values.size()) + " values");
    }
    return matches_values(q, e.values);
}

bool matches_values(const Query& q, std::span<const ValueCode> values) {
    for (std::size_t i = 0; i < q.size(); ++i) {
        const ValueCode s = q.slot(i);
        if (s != kWildcard && s != values[i]) return false;
    }
    return true;
}

bool is_generalization(const Query& q1, const Query& q2) {
    if (q1.size() != q2.size()) throw SchemaMismatch("queries have different arity");
    for (std::size_t i = 0; i < q1.size(); ++i) {
        if (q1.is_bound(i) && q1.slot(i) != q2.slot(i)) return false;
    }
    return true;
}

QueryRelation relation(const Query& q1, const Query& q2) {
    const bool g = is_generalization(q1, q2);
    const bool s = is_generalization(q2, q1);
    if (g && s) return QueryRelation::Equal;
    if (g) return QueryRelation::Generalizes;
    if (s) return QueryRelation::Specializes;
    return QueryRelation::Incomparable;
}

Query specialize(const Query& q, const AttributeSchema& schema, std::size_t i, ValueCode v) {
    if (q.size() != schema.size()) throw SchemaMismatch("query arity does not match the schema");
    if (i >= q.size()) throw QueryError("attribute index out of range");
    if (q.is_bound(i)) throw QueryError("slot '" + schema[i].name + "' is already bound");
    if (v >= schema[i].cardinality()) throw QueryError("value outside the domain of '" + schema[i].name + "'");
    auto slots = q.slots();
    slots[i] = v;
    return Query(std::move(slots));
}

Query generalize(const Query& q, std::size_t i) {
    if (i >= q.size()) throw QueryError("attribute index out of range");
    if (!q.is_bound(i)) throw QueryError("slot is already a wildcard");
    auto slots = q.slots();
    slots[i] = kWildcard;
    return Query(std::move(slots));
}

std::vector<Query> lattice_neighbors(const Query& q, const AttributeSchema& schema, LatticeDirection direction,
                                     const ObservedValues& observed) {
    if (q.size() != schema.size()) throw SchemaMismatch("query arity does not match the schema");
    std::vector<Query> out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (direction == LatticeDirection::Generalize) {
            if (q.is_bound(i)) out.push_back(generalize(q, i));
        } else if (!q.is_bound(i) && i < observed.size()) {
            for (ValueCode v : observed[i]) out.push_back(specialize(q, schema, i, v));
        }
    }
    return out;
}

std::vector<Query> lattice_neighbors(const Query& q, const AttributeSchema& schema, LatticeDirection direction) {
    return lattice_neighbors(q, schema, direction, full_domain_values(schema));
}

namespace {

std::string escape(std::string_view s) {
    if (s == "*") return "%2A";
    std::string out;
    for (char c : s) {
        if (c == '%' || c == '&' || c == '=') {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size()) throw QueryError("truncated escape in query text");
        const int hi = hex_digit(s[i + 1]);
        const int lo = hex_digit(s[i + 2]);
        if (hi < 0 || lo < 0) throw QueryError("bad escape in query text");
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
    }
    return out;
}

}  // namespace

std::string format_query(const Query& q, const AttributeSchema& schema) {
    if (q.size() != schema.size()) throw SchemaMismatch("query arity does not match the schema");
    std::string out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) out += '&';
        out += escape(schema[i].name);
        out += '=';
        out += q.is_bound(i) ? escape(schema[i].domain[q.slot(i)]) : "*";
    }
    return out;
}

Query parse_query(std::string_view text, const AttributeSchema& schema) {
    auto slots = Query::root(schema).slots();
    std::vector<bool> seen(schema.size(), false);
    if (text.empty()) return Query(std::move(slots));
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t amp = text.find('&', pos);
        if (amp == std::string_view::npos) amp = text.size();
        const auto term = text.substr(pos, amp - pos);
        const auto eq = term.find('=');
        if (eq == std::string_view::npos) throw QueryError("query term without '=': " + std::string(term));
        const std::string name = unescape(term.substr(0, eq));
        const auto raw_value = term.substr(eq + 1);
        auto idx = schema.index_of(name);
        if (!idx) throw QueryError("unknown attribute in query: " + name);
        if (seen[*idx]) throw QueryError("attribute repeated in query: " + name);
        seen[*idx] = true;
        if (raw_value != "*") {
            const std::string value = unescape(raw_value);
            auto code = schema[*idx].code_of(value);
            if (!code) throw QueryError("value '" + value + "' outside the domain of '" + name + "'");
            slots[*idx] = *code;
        }
        pos = amp + 1;
    }
    return Query(std::move(slots));
}

}  // namespace hps
