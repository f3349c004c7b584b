#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hps/dataset.hpp"
#include "hps/query.hpp"
#include "hps/reward.hpp"
#include "hps/sim_api.hpp"

namespace hps {

struct PoolNode {
    Query query;
    QueryStats stats;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
};

// Queries tracked by the tree sampler. Node 0 is the all-wildcard root;
// every other node was added as a one-slot specialization of its parent.
class QueryPool {
public:
    explicit QueryPool(std::size_t arity);

    std::size_t arity() const { return arity_; }
    std::size_t size() const { return nodes_.size(); }
    static constexpr std::size_t root() { return 0; }
    const PoolNode& node(std::size_t id) const { return nodes_[id]; }
    PoolNode& node(std::size_t id) { return nodes_[id]; }
    const std::vector<PoolNode>& nodes() const { return nodes_; }

    std::optional<std::size_t> find(const Query& q) const { return table_.find(q); }
    std::optional<std::size_t> find(std::span<const ValueCode> slots) const { return table_.find(slots); }

    // Adds `child` under `parent` with fresh stats. `child` must bind exactly
    // one slot that is a wildcard in the parent (QueryError otherwise).
    // Returns the id and whether the node is new.
    std::pair<std::size_t, bool> add_child(std::size_t parent, const Query& child);

    // Ids of pool queries matching an entity with the given values.
    template <typename F>
    void for_each_matching(std::span<const ValueCode> values, F&& f) const {
        if (use_masks(values.size())) {
            for_each_generalization(values, [&](std::span<const ValueCode> slots) {
                if (auto id = table_.find(slots)) f(*id);
            });
        } else {
            for (std::size_t id = 0; id < nodes_.size(); ++id) {
                if (matches_values(nodes_[id].query, values)) f(id);
            }
        }
    }

    // Ids of pool queries that generalize q (q itself included when present).
    template <typename F>
    void for_each_generalizing(const Query& q, F&& f) const {
        if (use_masks(q.bound_count())) {
            for_each_generalization(q.slots(), [&](std::span<const ValueCode> slots) {
                if (auto id = table_.find(slots)) f(*id);
            });
        } else {
            for (std::size_t id = 0; id < nodes_.size(); ++id) {
                if (is_generalization(nodes_[id].query, q)) f(id);
            }
        }
    }

private:
    bool use_masks(std::size_t bits) const { return bits < 20 && (std::size_t{1} << bits) <= 4 * nodes_.size(); }

    std::size_t arity_;
    std::vector<PoolNode> nodes_;
    QueryTable table_;
};

// Thompson argmax over the pool; ties broken uniformly at random. Nodes
// without a known match count are scored with the UnknownN form.
std::size_t select_query(const QueryPool& pool, std::size_t m, RewardMode mode, Rng& rng);

// Argmax of expected_reward, ties broken uniformly at random.
std::size_t best_query(const QueryPool& pool, std::size_t m, RewardMode mode, Rng& rng);

// Posterior update after issuing q_star. `target_flags` is aligned with
// response.rows; `newly_seen` lists the rows seen for the first time in this
// page. Throws QueryError when q_star is not in the pool.
void update_on_result(QueryPool& pool, const Query& q_star, const ApiResponse& response,
                      const std::vector<bool>& target_flags, const Dataset& dataset,
                      std::span<const RowIndex> newly_seen);

// Adds every specialization of q_star by one value observed among the
// sampled rows that match it. Returns the number of new nodes.
std::size_t expand_pool(QueryPool& pool, std::size_t q_star, const Dataset& dataset,
                        std::span<const RowIndex> sampled_rows);

}  // namespace hps
