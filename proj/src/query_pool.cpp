#include "hps/query_pool.hpp"

#include <map>

#include "hps/error.hpp"

namespace hps {

QueryPool::QueryPool(std::size_t arity) : arity_(arity) {
    PoolNode root;
    root.query = Query::root(arity);
    table_.insert(root.query);
    nodes_.push_back(std::move(root));
}

std::pair<std::size_t, bool> QueryPool::add_child(std::size_t parent, const Query& child) {
    if (parent >= nodes_.size()) throw QueryError("unknown parent node");
    const Query& pq = nodes_[parent].query;
    if (child.size() != arity_) throw SchemaMismatch("query arity does not match the pool");
    if (!is_generalization(pq, child) || child.bound_count() != pq.bound_count() + 1) {
        throw QueryError("pool child must bind exactly one more slot than its parent");
    }
    auto [id, fresh] = table_.insert(child);
    if (!fresh) return {id, false};
    PoolNode n;
    n.query = child;
    n.parent = parent;
    nodes_.push_back(std::move(n));
    nodes_[parent].children.push_back(id);
    return {id, true};
}

namespace {

// Argmax with reservoir tie-breaking.
template <typename Score>
std::size_t argmax_random_ties(std::size_t n, Score score, Rng& rng) {
    std::size_t best = 0;
    double best_value = -1.0;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = score(i);
        if (v > best_value) {
            best_value = v;
            best = i;
            ties = 1;
        } else if (v == best_value) {
            ++ties;
            if (uniform_index(ties, rng) == 0) best = i;
        }
    }
    return best;
}

}  // namespace

std::size_t select_query(const QueryPool& pool, std::size_t m, RewardMode mode, Rng& rng) {
    return argmax_random_ties(
        pool.size(),
        [&](std::size_t i) {
            const auto& st = pool.node(i).stats;
            return thompson_draw(st, m, effective_mode(st, mode), rng);
        },
        rng);
}

std::size_t best_query(const QueryPool& pool, std::size_t m, RewardMode mode, Rng& rng) {
    return argmax_random_ties(
        pool.size(),
        [&](std::size_t i) {
            const auto& st = pool.node(i).stats;
            return expected_reward(st, m, effective_mode(st, mode));
        },
        rng);
}

void update_on_result(QueryPool& pool, const Query& q_star, const ApiResponse& response,
                      const std::vector<bool>& target_flags, const Dataset& dataset,
                      std::span<const RowIndex> newly_seen) {
    auto star = pool.find(q_star);
    if (!star) throw QueryError("issued query is not in the pool");
    if (target_flags.size() != response.rows.size()) throw Error("target flags do not match the page");

    QueryStats& st = pool.node(*star).stats;
    ++st.times_issued;
    if (response.match_count) st.est_match_count = *response.match_count;

    for (RowIndex row : newly_seen) {
        pool.for_each_matching(dataset.record(row).values, [&](std::size_t id) { ++pool.node(id).stats.n_seen; });
    }

    const double total = static_cast<double>(response.rows.size());
    double s = 0.0;
    for (bool t : target_flags) s += t ? 1.0 : 0.0;
    if (response.rows.empty()) return;

    st.S += s;
    st.F += total - s;

    // Descendants: only the page rows they match.
    for (std::size_t k = 0; k < response.rows.size(); ++k) {
        const bool t = target_flags[k];
        pool.for_each_matching(dataset.record(response.rows[k]).values, [&](std::size_t id) {
            if (id == *star) return;
            auto& node = pool.node(id);
            if (!is_generalization(q_star, node.query)) return;
            if (t) {
                node.stats.S += 1.0;
            } else {
                node.stats.F += 1.0;
            }
        });
    }

    // Ancestors: the whole page, scaled by the estimated size ratio.
    const QueryStats star_stats = pool.node(*star).stats;
    pool.for_each_generalizing(q_star, [&](std::size_t id) {
        if (id == *star) return;
        auto& a = pool.node(id).stats;
        double rho = 1.0;
        if (star_stats.est_match_count && a.est_match_count && *a.est_match_count > 0) {
            rho = static_cast<double>(*star_stats.est_match_count) / static_cast<double>(*a.est_match_count);
        } else if (a.n_seen > 0) {
            rho = static_cast<double>(star_stats.n_seen) / static_cast<double>(a.n_seen);
        }
        a.S += rho * s;
        a.F += rho * (total - s);
    });
}

std::size_t expand_pool(QueryPool& pool, std::size_t q_star, const Dataset& dataset,
                        std::span<const RowIndex> sampled_rows) {
    const Query q = pool.node(q_star).query;
    std::vector<std::size_t> free_slots;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!q.is_bound(i)) free_slots.push_back(i);
    }
    if (free_slots.empty()) return 0;

    // (slot, value) -> distinct sampled rows matching the specialization.
    std::map<std::pair<std::size_t, ValueCode>, std::size_t> observed;
    for (RowIndex row : sampled_rows) {
        const auto& values = dataset.record(row).values;
        if (!matches_values(q, values)) continue;
        for (std::size_t i : free_slots) ++observed[{i, values[i]}];
    }
    std::size_t added = 0;
    for (const auto& [key, count] : observed) {
        auto slots = q.slots();
        slots[key.first] = key.second;
        auto [id, fresh] = pool.add_child(q_star, Query(std::move(slots)));
        if (fresh) {
            pool.node(id).stats.n_seen = count;
            ++added;
        }
    }
    return added;
}

}  // namespace hps
