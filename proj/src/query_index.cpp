#include "hps/query_index.hpp"

#include <algorithm>

#include "hps/error.hpp"

namespace hps {

QueryIndex::QueryIndex(DatasetPtr dataset) : dataset_(std::move(dataset)) {
    if (!dataset_) throw DataError("query index needs a dataset");
    const auto& schema = dataset_->schema();
    postings_.resize(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a) postings_[a].resize(schema[a].cardinality());
    for (std::size_t row = 0; row < dataset_->size(); ++row) {
        const auto& values = dataset_->records()[row].values;
        for (std::size_t a = 0; a < values.size(); ++a) postings_[a][values[a]].push_back(static_cast<RowIndex>(row));
    }
}

std::vector<RowIndex> QueryIndex::match_rows(const Query& q) const {
    if (q.size() != schema().size()) throw SchemaMismatch("query arity does not match the index schema");
    std::vector<const std::vector<RowIndex>*> lists;
    for (std::size_t a = 0; a < q.size(); ++a) {
        if (!q.is_bound(a)) continue;
        if (q.slot(a) >= postings_[a].size()) throw QueryError("value outside the domain of '" + schema()[a].name + "'");
        lists.push_back(&postings_[a][q.slot(a)]);
    }
    std::vector<RowIndex> out;
    if (lists.empty()) {
        out.resize(dataset_->size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<RowIndex>(i);
        return out;
    }
    std::sort(lists.begin(), lists.end(), [](auto* x, auto* y) { return x->size() < y->size(); });
    out = *lists.front();
    std::vector<RowIndex> tmp;
    for (std::size_t k = 1; k < lists.size() && !out.empty(); ++k) {
        tmp.clear();
        std::set_intersection(out.begin(), out.end(), lists[k]->begin(), lists[k]->end(), std::back_inserter(tmp));
        out.swap(tmp);
    }
    return out;
}

std::size_t QueryIndex::match_count(const Query& q) const {
    if (q.is_root() && q.size() == schema().size()) return dataset_->size();
    return match_rows(q).size();
}

std::size_t QueryIndex::target_count(const Query& q) const {
    std::size_t n = 0;
    for (RowIndex row : match_rows(q)) n += dataset_->is_target(row) ? 1 : 0;
    return n;
}

namespace {

// Depth-first walk; at depth i the rows all agree with the bound prefix.
template <typename Emit>
void walk(const Dataset& ds, std::vector<ValueCode>& slots, std::size_t depth, const std::vector<RowIndex>& rows,
          std::size_t cap, std::size_t& produced, Emit& emit) {
    if (rows.empty()) return;
    const auto& schema = ds.schema();
    if (depth == schema.size()) {
        if (++produced > cap) {
            throw OverflowError("more than " + std::to_string(cap) + " non-empty queries");
        }
        emit(slots, rows);
        return;
    }
    slots[depth] = kWildcard;
    walk(ds, slots, depth + 1, rows, cap, produced, emit);
    std::vector<std::vector<RowIndex>> parts(schema[depth].cardinality());
    for (RowIndex r : rows) parts[ds.records()[r].values[depth]].push_back(r);
    for (std::size_t v = 0; v < parts.size(); ++v) {
        if (parts[v].empty()) continue;
        slots[depth] = static_cast<ValueCode>(v);
        walk(ds, slots, depth + 1, parts[v], cap, produced, emit);
    }
    slots[depth] = kWildcard;
}

template <typename Emit>
void enumerate(const QueryIndex& index, std::size_t cap, Emit emit) {
    const Dataset& ds = index.dataset();
    std::vector<RowIndex> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<RowIndex>(i);
    std::vector<ValueCode> slots(ds.schema().size(), kWildcard);
    std::size_t produced = 0;
    walk(ds, slots, 0, all, cap, produced, emit);
}

}  // namespace

std::vector<Query> enumerate_nonempty_queries(const QueryIndex& index, std::size_t cap) {
    std::vector<Query> out;
    enumerate(index, cap, [&](const std::vector<ValueCode>& slots, const std::vector<RowIndex>&) {
        out.emplace_back(slots);
    });
    return out;
}

QueryCatalog::QueryCatalog(const QueryIndex& index, std::size_t cap) {
    const Dataset& ds = index.dataset();
    enumerate(index, cap, [&](const std::vector<ValueCode>& slots, const std::vector<RowIndex>& rows) {
        Entry e{Query(slots), rows.size(), 0};
        for (RowIndex r : rows) e.target_count += ds.is_target(r) ? 1 : 0;
        entries_.push_back(std::move(e));
    });
    table_.reserve(entries_.size());
    for (const auto& e : entries_) table_.insert(e.query);
}

std::ptrdiff_t QueryCatalog::find(const Query& q) const { return find(std::span<const ValueCode>(q.slots())); }

std::ptrdiff_t QueryCatalog::find(std::span<const ValueCode> slots) const {
    auto id = table_.find(slots);
    return id ? static_cast<std::ptrdiff_t>(*id) : -1;
}

std::size_t QueryCatalog::match_count(const Query& q) const {
    auto i = find(q);
    return i < 0 ? 0 : entries_[static_cast<std::size_t>(i)].match_count;
}

}  // namespace hps
