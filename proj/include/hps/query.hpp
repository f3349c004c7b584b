#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hps/schema.hpp"

namespace hps {

std::size_t hash_slots(std::span<const ValueCode> slots);

// Conjunctive query: one slot per schema attribute, each a value code or
// kWildcard. Identity is syntactic.
class Query {
public:
    Query() = default;
    explicit Query(std::vector<ValueCode> slots) : slots_(std::move(slots)) {}

    static Query root(std::size_t attribute_count) {
        return Query(std::vector<ValueCode>(attribute_count, kWildcard));
    }
    static Query root(const AttributeSchema& schema) { return root(schema.size()); }

    std::size_t size() const { return slots_.size(); }
    ValueCode slot(std::size_t i) const { return slots_[i]; }
    bool is_bound(std::size_t i) const { return slots_[i] != kWildcard; }
    const std::vector<ValueCode>& slots() const { return slots_; }
    std::size_t bound_count() const;
    bool is_root() const { return bound_count() == 0; }
    bool is_fully_bound() const { return bound_count() == slots_.size(); }
    // Bit i set when slot i is bound. Requires size() <= 64.
    std::uint64_t bound_mask() const;
    std::size_t hash() const { return hash_slots(slots_); }

    auto operator<=>(const Query&) const = default;

private:
    std::vector<ValueCode> slots_;
};

struct QueryHash {
    std::size_t operator()(const Query& q) const { return q.hash(); }
};

enum class QueryRelation { Generalizes, Specializes, Equal, Incomparable };

enum class LatticeDirection { Generalize, Specialize };

// Per attribute, the value codes allowed when specializing (sorted, unique).
using ObservedValues = std::vector<std::vector<ValueCode>>;

ObservedValues full_domain_values(const AttributeSchema& schema);

// Throws SchemaMismatch when arities differ.
bool matches(const Query& q, const EntityRecord& e);
// Unchecked variant for hot loops; `values` must have q.size() entries.
bool matches_values(const Query& q, std::span<const ValueCode> values);

// True iff every bound slot of q1 is bound to the same value in q2.
bool is_generalization(const Query& q1, const Query& q2);
QueryRelation relation(const Query& q1, const Query& q2);

// Throws QueryError when slot i is bound or v is outside dom(A_i).
Query specialize(const Query& q, const AttributeSchema& schema, std::size_t i, ValueCode v);
// Throws QueryError when slot i is already a wildcard.
Query generalize(const Query& q, std::size_t i);

// Generalize: every query with one bound slot unbound. Specialize: every
// query binding one wildcard slot to a value in `observed`.
std::vector<Query> lattice_neighbors(const Query& q, const AttributeSchema& schema, LatticeDirection direction,
                                     const ObservedValues& observed);
std::vector<Query> lattice_neighbors(const Query& q, const AttributeSchema& schema, LatticeDirection direction);

// Text form "attr=value&attr=*"; '%', '&', '=' and a literal "*" value are
// percent-escaped. Every attribute is printed, in schema order.
std::string format_query(const Query& q, const AttributeSchema& schema);
// Accepts any attribute order; omitted attributes are wildcards. Throws
// QueryError on unknown attributes, repeats, bad escapes or unknown values.
Query parse_query(std::string_view text, const AttributeSchema& schema);

// Calls f(slots) for every generalization of `slots` (itself included),
// i.e. every way of unbinding a subset of its bound positions. Visits 2^b
// slot vectors for b bound positions; the span is only valid during the call.
template <typename F>
void for_each_generalization(std::span<const ValueCode> slots, F&& f) {
    std::vector<std::size_t> bound;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] != kWildcard) bound.push_back(i);
    }
    std::vector<ValueCode> buf(slots.begin(), slots.end());
    const std::uint64_t combos = std::uint64_t{1} << bound.size();
    for (std::uint64_t mask = 0; mask < combos; ++mask) {
        for (std::size_t k = 0; k < bound.size(); ++k) {
            buf[bound[k]] = (mask >> k) & 1 ? kWildcard : slots[bound[k]];
        }
        f(std::span<const ValueCode>(buf));
    }
}

// Insert-only set of queries with dense ids and allocation-free lookup.
class QueryTable {
public:
    std::size_t size() const { return queries_.size(); }
    const Query& query(std::size_t id) const { return queries_[id]; }
    const std::vector<Query>& queries() const { return queries_; }

    std::optional<std::size_t> find(std::span<const ValueCode> slots) const;
    std::optional<std::size_t> find(const Query& q) const { return find(std::span<const ValueCode>(q.slots())); }
    // Returns the id and whether the query was new.
    std::pair<std::size_t, bool> insert(const Query& q);
    void reserve(std::size_t n);

private:
    std::unordered_map<std::size_t, std::size_t> head_;
    std::vector<std::size_t> next_;
    std::vector<Query> queries_;
};

}  // namespace hps
