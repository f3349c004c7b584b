#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hps/error.hpp"
#include "hps/query_index.hpp"
#include "hps/query_pool.hpp"
#include "hps/reward.hpp"
#include "hps/sample_log.hpp"
#include "hps/samplers.hpp"
#include "hps/transform.hpp"
#include "test_util.hpp"

using namespace hps;
using hps_test::q;

namespace {

QueryStats stats(double S, double F, std::optional<std::size_t> N, std::size_t n) {
    QueryStats st;
    st.S = S;
    st.F = F;
    st.est_match_count = N;
    st.n_seen = n;
    return st;
}

// Mean distinct count of m draws with replacement from N items, simulated.
double simulated_distinct(std::size_t N, std::size_t m, std::size_t trials, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> stamp(N, 0);
    double total = 0;
    for (std::size_t t = 1; t <= trials; ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            auto& s = stamp[uniform_index(N, rng)];
            if (s != t) {
                s = t;
                total += 1;
            }
        }
    }
    return total / static_cast<double>(trials);
}

struct Env {
    DatasetPtr ds;
    QueryIndexPtr index;
    QueryCatalogPtr catalog;
    explicit Env(DatasetPtr d)
        : ds(std::move(d)),
          index(std::make_shared<const QueryIndex>(ds)),
          catalog(std::make_shared<const QueryCatalog>(*index)) {}

    SampleLog run_kind(SamplerKind kind, std::size_t budget, std::size_t m, std::uint64_t seed,
                       PagingMode mode = PagingMode::WithoutReplacementPerCall) const {
        SamplerConfig cfg;
        cfg.kind = kind;
        cfg.rng_seed = seed;
        ApiConfig api_cfg{m, mode, true, seed + 1000};
        auto sampler = make_sampler(cfg, SamplerContext{ds.get(), api_cfg, catalog});
        SimulatedApi api(index, api_cfg);
        BudgetLedger ledger(budget);
        return run(*sampler, api, ledger);
    }
};

std::vector<RowIndex> rows_of(const Dataset& ds, std::initializer_list<EntityId> ids) {
    std::vector<RowIndex> out;
    for (EntityId id : ids) out.push_back(*ds.row_of(id));
    return out;
}

std::vector<bool> flags_of(const Dataset& ds, const std::vector<RowIndex>& rows) {
    std::vector<bool> out;
    for (RowIndex r : rows) out.push_back(ds.is_target(r));
    return out;
}

}  // namespace

TEST(Reward, ClosedFormValues) {
    const auto st = stats(1, 1, 100, 0);
    const double factor = 100 * (1 - std::pow(0.99, 10));
    EXPECT_NEAR(expected_reward(st, 10, RewardMode::WithReplacementUnique), 0.5 * factor, 1e-12);
    EXPECT_NEAR(expected_reward(st, 10, RewardMode::WithReplacementUnique), 4.7809, 5e-5);
    EXPECT_NEAR(expected_reward(st, 10, RewardMode::WithReplacementUniqueLiteral), 0.5 * factor / 100, 1e-12);
    EXPECT_NEAR(expected_reward(st, 10, RewardMode::WithoutReplacement), 5.0, 1e-12);
    EXPECT_NEAR(expected_reward(stats(3, 1, std::nullopt, 0), 20, RewardMode::UnknownN), 15.0, 1e-12);
    EXPECT_NEAR(expected_reward(stats(1, 1, 100, 25), 10, RewardMode::WithoutReplacement), 0.5 * 0.75 * 10, 1e-12);
}

TEST(Reward, DistinctFactorMatchesSimulation) {
    EXPECT_NEAR(simulated_distinct(100, 10, 200000, 3), 100 * (1 - std::pow(0.99, 10)), 0.01);
}

TEST(Reward, ExhaustedQueryIsWorthless) {
    for (auto mode : {RewardMode::WithReplacementUnique, RewardMode::WithoutReplacement}) {
        EXPECT_EQ(expected_reward(stats(5, 1, 40, 40), 10, mode), 0.0);
        EXPECT_EQ(expected_reward(stats(5, 1, 40, 41), 10, mode), 0.0);
    }
}

TEST(Reward, MissingMatchCount) {
    const auto st = stats(1, 1, std::nullopt, 0);
    EXPECT_THROW(expected_reward(st, 10, RewardMode::WithoutReplacement), ConfigError);
    EXPECT_EQ(effective_mode(st, RewardMode::WithoutReplacement), RewardMode::UnknownN);
    EXPECT_EQ(effective_mode(stats(1, 1, 5, 0), RewardMode::WithoutReplacement), RewardMode::WithoutReplacement);
    EXPECT_FALSE(needs_match_count(RewardMode::UnknownN));
    EXPECT_TRUE(needs_match_count(RewardMode::WithReplacementUnique));
}

TEST(Reward, ForcedPrecision) {
    const auto st = stats(1, 1, 100, 0);
    EXPECT_NEAR(reward_for_precision(1.0, st, 10, RewardMode::WithReplacementUnique), 9.5618, 5e-5);
    EXPECT_EQ(reward_for_precision(0.0, st, 10, RewardMode::WithReplacementUnique), 0.0);
}

TEST(Reward, DrawsConcentrateForLargeCounts) {
    const auto st = stats(1e6, 1, 100, 0);
    Rng rng(4);
    double total = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) total += thompson_draw(st, 10, RewardMode::WithReplacementUnique, rng);
    const double expect = expected_reward(st, 10, RewardMode::WithReplacementUnique);
    EXPECT_NEAR(total / draws, expect, 0.01 * expect);
}

TEST(Reward, BetaSamplerMoments) {
    Rng rng(8);
    const double a = 2.5, b = 0.7;
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_beta(a, b, rng);
        ASSERT_GE(x, 0.0);
        ASSERT_LE(x, 1.0);
        sum += x;
        sq += x * x;
    }
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    EXPECT_NEAR(sum / n, mean, 0.003);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), var, 0.002);
}

TEST(Reward, ModeNames) {
    for (auto m : {RewardMode::WithReplacementUnique, RewardMode::WithReplacementUniqueLiteral,
                   RewardMode::WithoutReplacement, RewardMode::UnknownN}) {
        EXPECT_EQ(reward_mode_from_name(reward_mode_name(m)), m);
    }
    EXPECT_THROW(reward_mode_from_name("greedy"), ConfigError);
}

TEST(QueryPool, SelectionOnSingletonAndSkewedPools) {
    QueryPool pool(2);
    Rng rng(1);
    EXPECT_EQ(select_query(pool, 10, RewardMode::WithReplacementUnique, rng), QueryPool::root());

    const auto [child, fresh] = pool.add_child(QueryPool::root(), Query({0, kWildcard}));
    EXPECT_TRUE(fresh);
    pool.node(QueryPool::root()).stats = stats(100, 1, 1000000000, 0);
    pool.node(child).stats = stats(1, 100, 1000000000, 0);
    int first = 0;
    for (int i = 0; i < 10000; ++i) first += select_query(pool, 10, RewardMode::WithReplacementUnique, rng) == 0;
    EXPECT_GE(first, 9900);
    EXPECT_EQ(best_query(pool, 10, RewardMode::WithReplacementUnique, rng), QueryPool::root());
}

TEST(QueryPool, AddChildValidation) {
    QueryPool pool(2);
    EXPECT_THROW(pool.add_child(QueryPool::root(), Query({0, 1})), QueryError);
    EXPECT_THROW(pool.add_child(QueryPool::root(), Query::root(2)), QueryError);
    auto [a, fresh_a] = pool.add_child(QueryPool::root(), Query({0, kWildcard}));
    auto [again, fresh_again] = pool.add_child(QueryPool::root(), Query({0, kWildcard}));
    EXPECT_TRUE(fresh_a);
    EXPECT_FALSE(fresh_again);
    EXPECT_EQ(a, again);
    EXPECT_THROW(pool.add_child(a, Query({1, 1})), QueryError);
    EXPECT_EQ(pool.node(a).parent, QueryPool::root());
}

TEST(QueryPool, UpdateOnToyPage) {
    const Dataset ds = hps_test::load_toy();
    QueryPool pool(2);
    const auto a = pool.add_child(QueryPool::root(), q(ds, "A1=a")).first;
    const auto ay = pool.add_child(a, q(ds, "A1=a&A2=y")).first;
    pool.node(QueryPool::root()).stats.est_match_count = 8;

    ApiResponse resp;
    resp.rows = rows_of(ds, {1, 2, 3});
    resp.match_count = 4;
    update_on_result(pool, q(ds, "A1=a"), resp, flags_of(ds, resp.rows), ds, resp.rows);

    const auto& sa = pool.node(a).stats;
    EXPECT_DOUBLE_EQ(sa.S, 3.0);
    EXPECT_DOUBLE_EQ(sa.F, 2.0);
    EXPECT_EQ(sa.est_match_count, 4u);
    EXPECT_EQ(sa.times_issued, 1u);
    const auto& say = pool.node(ay).stats;
    EXPECT_DOUBLE_EQ(say.S, 2.0);
    EXPECT_DOUBLE_EQ(say.F, 1.0);
    const auto& sr = pool.node(QueryPool::root()).stats;
    EXPECT_DOUBLE_EQ(sr.S, 2.0);
    EXPECT_DOUBLE_EQ(sr.F, 1.5);
    EXPECT_EQ(sr.n_seen, 3u);
    EXPECT_EQ(sa.n_seen, 3u);
    EXPECT_EQ(say.n_seen, 1u);
}

TEST(QueryPool, EmptyAndNegativePages) {
    const Dataset ds = hps_test::load_toy();
    QueryPool pool(2);
    const auto b = pool.add_child(QueryPool::root(), q(ds, "A1=b")).first;

    ApiResponse empty;
    empty.match_count = 0;
    update_on_result(pool, q(ds, "A1=b"), empty, {}, ds, {});
    for (const auto& node : pool.nodes()) {
        EXPECT_DOUBLE_EQ(node.stats.S, 1.0);
        EXPECT_DOUBLE_EQ(node.stats.F, 1.0);
    }

    // Five non-target rows, with repeats as a with-replacement page would give.
    ApiResponse neg;
    neg.rows = rows_of(ds, {5, 6, 7, 5, 6});
    neg.match_count = 4;
    update_on_result(pool, q(ds, "A1=b"), neg, flags_of(ds, neg.rows), ds, rows_of(ds, {5, 6, 7}));
    EXPECT_DOUBLE_EQ(pool.node(b).stats.S, 1.0);
    EXPECT_DOUBLE_EQ(pool.node(b).stats.F, 6.0);

    EXPECT_THROW(update_on_result(pool, q(ds, "A2=x"), neg, flags_of(ds, neg.rows), ds, {}), QueryError);
}

TEST(QueryPool, ExpansionFromObservedValues) {
    const Dataset ds = hps_test::load_toy();
    QueryPool pool(2);
    const auto sampled = rows_of(ds, {1, 5});
    EXPECT_EQ(expand_pool(pool, QueryPool::root(), ds, sampled), 3u);
    std::set<std::string> got;
    for (const auto& node : pool.nodes()) got.insert(format_query(node.query, ds.schema()));
    EXPECT_EQ(got, (std::set<std::string>{"A1=*&A2=*", "A1=a&A2=*", "A1=b&A2=*", "A1=*&A2=x"}));
    EXPECT_EQ(pool.node(*pool.find(q(ds, "A1=a"))).stats.n_seen, 1u);

    EXPECT_EQ(expand_pool(pool, QueryPool::root(), ds, sampled), 0u);
    EXPECT_EQ(pool.size(), 4u);

    const auto ax = pool.add_child(*pool.find(q(ds, "A1=a")), q(ds, "A1=a&A2=x")).first;
    EXPECT_EQ(expand_pool(pool, ax, ds, rows_of(ds, {1, 2, 3, 4, 5, 6, 7, 8})), 0u);
}

TEST(QueryPool, MaskAndScanLookupsAgree) {
    // A wide schema forces the linear scan; compare against direct matching.
    std::vector<ValueCode> values(24, 1);
    QueryPool pool(24);
    auto slots = Query::root(24).slots();
    std::size_t parent = QueryPool::root();
    for (std::size_t i = 0; i < 24; i += 3) {
        slots[i] = 1;
        parent = pool.add_child(parent, Query(slots)).first;
    }
    std::vector<std::size_t> ids;
    pool.for_each_matching(values, [&](std::size_t id) { ids.push_back(id); });
    EXPECT_EQ(ids.size(), pool.size());
    std::size_t gens = 0;
    pool.for_each_generalizing(pool.node(parent).query, [&](std::size_t) { ++gens; });
    EXPECT_EQ(gens, pool.size());
}

TEST(SampleLog, TracksDistinctEntitiesAndTargets) {
    const Dataset ds = hps_test::load_toy();
    SampleLog log(ds);
    ApiResponse r1;
    r1.rows = rows_of(ds, {1, 2, 1});
    EXPECT_EQ(log.record(Query::root(2), r1), rows_of(ds, {1, 2}));
    ApiResponse r2;
    r2.rows = rows_of(ds, {2, 3, 8});
    EXPECT_EQ(log.record(Query::root(2), r2), rows_of(ds, {3, 8}));
    EXPECT_EQ(log.distinct_entities(), 4u);
    EXPECT_EQ(log.distinct_targets(), 3u);
    EXPECT_EQ(log.cumulative_targets(), (std::vector<std::size_t>{1, 3}));
    EXPECT_EQ(log.calls()[0].targets, 2u);
    EXPECT_EQ(log.calls()[1].new_targets, 2u);
    std::ostringstream out;
    log.write_jsonl(out);
    const std::string text = out.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Samplers, ZeroBudgetGivesEmptyLog) {
    Env env(hps_test::toy_ptr());
    for (auto kind : {SamplerKind::DtTmp, SamplerKind::Tmp, SamplerKind::Exp, SamplerKind::Uni, SamplerKind::Rw,
                      SamplerKind::Ls, SamplerKind::Cb}) {
        EXPECT_EQ(env.run_kind(kind, 0, 4, 1).call_count(), 0u);
    }
}

TEST(Samplers, EveryKindSpendsExactlyTheBudget) {
    Env env(hps_test::toy_ptr());
    for (auto kind : {SamplerKind::DtTmp, SamplerKind::Tmp, SamplerKind::Exp, SamplerKind::Uni, SamplerKind::Rw,
                      SamplerKind::Ls, SamplerKind::Cb}) {
        for (auto mode : {PagingMode::WithReplacement, PagingMode::WithoutReplacementPerCall}) {
            EXPECT_EQ(env.run_kind(kind, 37, 3, 2, mode).call_count(), 37u) << sampler_kind_name(kind);
        }
    }
}

TEST(Samplers, UniAlwaysIssuesRoot) {
    Env env(hps_test::toy_ptr());
    const auto log = env.run_kind(SamplerKind::Uni, 20, 4, 3);
    for (const auto& c : log.calls()) EXPECT_TRUE(c.query.is_root());
}

TEST(Samplers, LsStartsAtLargestQuery) {
    Env env(hps_test::toy_ptr());
    EXPECT_TRUE(env.run_kind(SamplerKind::Ls, 1, 100, 3).calls().front().query.is_root());
}

TEST(Samplers, CbStartsAtRoot) {
    Env env(hps_test::toy_ptr());
    EXPECT_TRUE(env.run_kind(SamplerKind::Cb, 1, 4, 3).calls().front().query.is_root());
}

TEST(Samplers, ExpAndTmpIssueOnlyNonEmptyQueries) {
    auto ds = std::make_shared<const Dataset>(apply_transform(hps_test::load_toy(), Discretize{"label", {0, 0.5, 1}, ""}));
    Env env(ds);
    for (auto kind : {SamplerKind::Exp, SamplerKind::Tmp, SamplerKind::Ls, SamplerKind::Cb, SamplerKind::Rw}) {
        const auto log = env.run_kind(kind, 60, 2, 5);
        for (const auto& c : log.calls()) {
            EXPECT_GE(env.catalog->find(c.query), 0) << sampler_kind_name(kind);
        }
    }
}

TEST(Samplers, RwMovesOneLatticeStep) {
    Env env(hps_test::toy_ptr());
    const auto log = env.run_kind(SamplerKind::Rw, 200, 2, 8);
    Query prev = Query::root(2);
    for (const auto& c : log.calls()) {
        const auto diff = static_cast<int>(c.query.bound_count()) - static_cast<int>(prev.bound_count());
        EXPECT_EQ(std::abs(diff), 1);
        EXPECT_NE(relation(prev, c.query), QueryRelation::Incomparable);
        prev = c.query;
    }
}

TEST(Samplers, DtTmpGrowsItsPool) {
    Env env(hps_test::toy_ptr());
    SamplerConfig cfg;
    cfg.epoch = 2;
    ApiConfig api_cfg{2, PagingMode::WithoutReplacementPerCall, true, 4};
    DtTmpSampler sampler(cfg, SamplerContext{env.ds.get(), api_cfg, nullptr});
    SimulatedApi api(env.index, api_cfg);
    BudgetLedger ledger(50);
    run(sampler, api, ledger);
    EXPECT_EQ(sampler.expansions(), 25u);
    EXPECT_GT(sampler.pool().size(), 1u);
    for (const auto& node : sampler.pool().nodes()) {
        if (!node.parent) continue;
        EXPECT_EQ(relation(sampler.pool().node(*node.parent).query, node.query), QueryRelation::Generalizes);
    }
}

TEST(Samplers, DeterministicForSeed) {
    Env env(hps_test::toy_ptr());
    for (auto kind : {SamplerKind::DtTmp, SamplerKind::Tmp, SamplerKind::Exp, SamplerKind::Rw, SamplerKind::Cb}) {
        std::ostringstream a, b;
        env.run_kind(kind, 40, 3, 12).write_jsonl(a);
        env.run_kind(kind, 40, 3, 12).write_jsonl(b);
        EXPECT_EQ(a.str(), b.str()) << sampler_kind_name(kind);
    }
}

TEST(Samplers, DtTmpAtLeastAsGoodAsTmpOnToy) {
    Env env(hps_test::toy_ptr());
    double dt = 0, tmp = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        dt += static_cast<double>(env.run_kind(SamplerKind::DtTmp, 200, 4, seed).distinct_targets());
        tmp += static_cast<double>(env.run_kind(SamplerKind::Tmp, 200, 4, seed).distinct_targets());
    }
    EXPECT_GE(dt / 100 / 4, tmp / 100 / 4);
}

TEST(Samplers, FixedRankingResumesPages) {
    auto ds = std::make_shared<const Dataset>(with_random_rank(hps_test::load_toy(), 2));
    Env env(ds);
    const auto log = env.run_kind(SamplerKind::Uni, 3, 3, 1, PagingMode::FixedRanking);
    std::vector<EntityId> ids;
    for (const auto& c : log.calls()) {
        for (RowIndex r : c.rows) ids.push_back(ds->record(r).id);
    }
    EXPECT_EQ(ids, *ds->rank());
}

TEST(Samplers, ConfigJson) {
    const auto cfg = SamplerConfig::from_json({{"kind", "cb"}, {"cb_alpha", 2.0}, {"reward_mode", "unknown-n"}});
    EXPECT_EQ(cfg.kind, SamplerKind::Cb);
    EXPECT_EQ(cfg.cb_alpha, 2.0);
    EXPECT_EQ(SamplerConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
    EXPECT_THROW(SamplerConfig::from_json({{"kind", "cb"}, {"alpha", 2.0}}), ConfigError);
    EXPECT_THROW(SamplerConfig::from_json({{"kind", "magic"}}), ConfigError);
    SamplerConfig tmp;
    tmp.kind = SamplerKind::Tmp;
    EXPECT_THROW(make_sampler(tmp, SamplerContext{nullptr, {}, nullptr}), ConfigError);
}

TEST(Samplers, RewardModeResolution) {
    SamplerConfig cfg;
    EXPECT_EQ(resolve_reward_mode(cfg, ApiConfig{10, PagingMode::WithReplacement, true, 0}), RewardMode::WithReplacementUnique);
    EXPECT_EQ(resolve_reward_mode(cfg, ApiConfig{10, PagingMode::WithoutReplacementPerCall, true, 0}), RewardMode::WithoutReplacement);
    EXPECT_EQ(resolve_reward_mode(cfg, ApiConfig{10, PagingMode::WithReplacement, false, 0}), RewardMode::UnknownN);
    cfg.reward_mode = RewardMode::WithReplacementUniqueLiteral;
    EXPECT_EQ(resolve_reward_mode(cfg, ApiConfig{10, PagingMode::WithReplacement, true, 0}), RewardMode::WithReplacementUniqueLiteral);
}
