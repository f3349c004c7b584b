#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "hps/dataset.hpp"
#include "hps/query.hpp"

namespace hps {

// Inverted posting lists over a dataset's queryable values. Immutable.
class QueryIndex {
public:
    explicit QueryIndex(DatasetPtr dataset);

    const Dataset& dataset() const { return *dataset_; }
    const DatasetPtr& dataset_ptr() const { return dataset_; }
    const AttributeSchema& schema() const { return dataset_->schema(); }

    // Rows with attribute a bound to v, ascending.
    const std::vector<RowIndex>& posting(std::size_t a, ValueCode v) const { return postings_[a][v]; }

    // Matching rows in ascending order. Throws SchemaMismatch on arity mismatch.
    std::vector<RowIndex> match_rows(const Query& q) const;
    std::size_t match_count(const Query& q) const;
    std::size_t target_count(const Query& q) const;

private:
    DatasetPtr dataset_;
    std::vector<std::vector<std::vector<RowIndex>>> postings_;
};

using QueryIndexPtr = std::shared_ptr<const QueryIndex>;

inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

// Every syntactic query with at least one match. Order: slot by slot, the
// wildcard before the domain values in domain order. Throws OverflowError
// when more than `cap` queries would be produced.
std::vector<Query> enumerate_nonempty_queries(const QueryIndex& index,
                                              std::size_t cap = kDefaultEnumerationCap);

// Non-empty queries with their exact match and target counts.
class QueryCatalog {
public:
    struct Entry {
        Query query;
        std::size_t match_count = 0;
        std::size_t target_count = 0;
    };

    explicit QueryCatalog(const QueryIndex& index, std::size_t cap = kDefaultEnumerationCap);

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    const Entry& operator[](std::size_t i) const { return entries_[i]; }
    // Position in entries(), or -1 when the query is empty.
    std::ptrdiff_t find(const Query& q) const;
    std::ptrdiff_t find(std::span<const ValueCode> slots) const;
    std::size_t match_count(const Query& q) const;

private:
    std::vector<Entry> entries_;
    QueryTable table_;
};

using QueryCatalogPtr = std::shared_ptr<const QueryCatalog>;

}  // namespace hps
