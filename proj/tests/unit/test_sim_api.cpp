#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "hps/error.hpp"
#include "hps/query_index.hpp"
#include "hps/sim_api.hpp"
#include "hps/transform.hpp"
#include "test_util.hpp"

using namespace hps;
using hps_test::q;

namespace {

struct ToyApi {
    DatasetPtr ds;
    QueryIndexPtr index;
    explicit ToyApi(DatasetPtr d) : ds(std::move(d)), index(std::make_shared<const QueryIndex>(ds)) {}
    SimulatedApi make(std::size_t m, PagingMode mode, std::uint64_t seed = 1, bool report = true) const {
        return SimulatedApi(index, ApiConfig{m, mode, report, seed});
    }
};

std::set<EntityId> ids_of(const Dataset& ds, const std::vector<RowIndex>& rows) {
    std::set<EntityId> out;
    for (RowIndex r : rows) out.insert(ds.record(r).id);
    return out;
}

}  // namespace

TEST(SimulatedApi, SmallMatchSetReturnedWhole) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(10, PagingMode::WithoutReplacementPerCall);
    BudgetLedger ledger(5);
    const auto resp = api.execute(q(*t.ds, "A1=a"), ledger);
    EXPECT_EQ(ids_of(*t.ds, resp.rows), (std::set<EntityId>{1, 2, 3, 4}));
    EXPECT_EQ(resp.rows.size(), 4u);
    EXPECT_EQ(resp.match_count, 4u);
    EXPECT_EQ(ledger.calls_made(), 1u);
    EXPECT_EQ(ledger.calls_for(q(*t.ds, "A1=a")), 1u);
}

TEST(SimulatedApi, EmptyMatchSetStillCharges) {
    auto ds = std::make_shared<const Dataset>(apply_transform(hps_test::load_toy(), AttributeSubset{{"A1"}}));
    std::vector<EntityRecord> recs;
    for (const auto& r : ds->records()) {
        if (r.values[0] == 0) recs.push_back(r);
    }
    auto only_a = std::make_shared<const Dataset>(ds->schema(), ds->hidden_fields(), recs, ds->target_spec());
    ToyApi t(only_a);
    for (auto mode : {PagingMode::WithReplacement, PagingMode::WithoutReplacementPerCall, PagingMode::FixedRanking}) {
        auto api = mode == PagingMode::FixedRanking
                       ? SimulatedApi(std::make_shared<const QueryIndex>(std::make_shared<const Dataset>(with_random_rank(*only_a, 1))),
                                      ApiConfig{3, mode, true, 1})
                       : t.make(3, mode);
        BudgetLedger ledger(2);
        const auto resp = api.execute(Query({1}), ledger);
        EXPECT_TRUE(resp.rows.empty());
        EXPECT_EQ(resp.match_count, 0u);
        EXPECT_EQ(ledger.calls_made(), 1u);
    }
}

TEST(SimulatedApi, BudgetExhaustion) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(2, PagingMode::WithReplacement);
    BudgetLedger ledger(2);
    const Query root = Query::root(t.ds->schema());
    api.execute(root, ledger);
    api.execute(root, ledger);
    EXPECT_TRUE(ledger.exhausted());
    EXPECT_THROW(api.execute(root, ledger), BudgetExhausted);
    EXPECT_EQ(ledger.calls_made(), 2u);
    BudgetLedger zero(0);
    EXPECT_THROW(api.execute(root, zero), BudgetExhausted);
}

TEST(SimulatedApi, MatchCountCanBeHidden) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(2, PagingMode::WithoutReplacementPerCall, 1, false);
    BudgetLedger ledger(1);
    EXPECT_FALSE(api.execute(Query::root(t.ds->schema()), ledger).match_count.has_value());
}

TEST(SimulatedApi, WithoutReplacementPagesAreDistinctAndUniform) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(3, PagingMode::WithoutReplacementPerCall, 17);
    const std::size_t calls = 40000;
    BudgetLedger ledger(calls);
    std::map<EntityId, std::size_t> hits;
    for (std::size_t i = 0; i < calls; ++i) {
        const auto resp = api.execute(Query::root(t.ds->schema()), ledger);
        ASSERT_EQ(resp.rows.size(), 3u);
        ASSERT_EQ(ids_of(*t.ds, resp.rows).size(), 3u);
        for (RowIndex r : resp.rows) ++hits[t.ds->record(r).id];
    }
    // Each entity appears with probability 3/8 per call; 5 sd band.
    const double expect = calls * 3.0 / 8.0;
    const double sd = std::sqrt(calls * (3.0 / 8.0) * (5.0 / 8.0));
    for (const auto& [id, n] : hits) EXPECT_NEAR(static_cast<double>(n), expect, 5 * sd) << id;
}

TEST(SimulatedApi, WithReplacementDrawsIid) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(10, PagingMode::WithReplacement, 5);
    const std::size_t calls = 5000;
    BudgetLedger ledger(calls);
    double distinct = 0;
    for (std::size_t i = 0; i < calls; ++i) {
        const auto resp = api.execute(q(*t.ds, "A1=a"), ledger);
        ASSERT_EQ(resp.rows.size(), 10u);
        for (RowIndex r : resp.rows) ASSERT_EQ(t.ds->record(r).values[0], 0);
        distinct += static_cast<double>(ids_of(*t.ds, resp.rows).size());
    }
    EXPECT_NEAR(distinct / calls, expected_distinct(4, 10), 0.02);
}

TEST(SimulatedApi, FixedRankingPagesThroughInRankOrder) {
    auto ds = std::make_shared<const Dataset>(with_random_rank(hps_test::load_toy(), 9));
    ToyApi t(ds);
    auto api = t.make(3, PagingMode::FixedRanking);
    BudgetLedger ledger(10);
    const Query root = Query::root(ds->schema());
    std::vector<EntityId> seen;
    std::optional<std::string> token;
    do {
        const auto resp = api.execute(root, ledger, token);
        for (RowIndex r : resp.rows) seen.push_back(ds->record(r).id);
        token = resp.next_page_token;
    } while (token);
    EXPECT_EQ(seen, *ds->rank());
    EXPECT_EQ(ledger.calls_made(), 3u);

    const auto first = api.execute(root, ledger);
    const auto again = api.execute(root, ledger);
    EXPECT_EQ(first.rows, again.rows);

    EXPECT_THROW(api.execute(root, ledger, std::string("zz")), InvalidPageToken);
    EXPECT_THROW(api.execute(q(*ds, "A1=a"), ledger, first.next_page_token), InvalidPageToken);
    EXPECT_THROW(api.execute(root, ledger, std::string("64.") + first.next_page_token->substr(2)), InvalidPageToken);
    EXPECT_EQ(ledger.calls_made(), 5u);
}

TEST(SimulatedApi, TokensRejectedOutsideFixedRanking) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(3, PagingMode::WithReplacement);
    BudgetLedger ledger(1);
    EXPECT_THROW(api.execute(Query::root(t.ds->schema()), ledger, std::string("3.1")), InvalidPageToken);
}

TEST(SimulatedApi, SameSeedSamePages) {
    ToyApi t(hps_test::toy_ptr());
    auto a = t.make(3, PagingMode::WithoutReplacementPerCall, 99);
    auto b = t.make(3, PagingMode::WithoutReplacementPerCall, 99);
    BudgetLedger la(50), lb(50);
    for (int i = 0; i < 50; ++i) {
        const Query x = i % 2 ? Query::root(t.ds->schema()) : q(*t.ds, "A2=y");
        EXPECT_EQ(a.execute(x, la).rows, b.execute(x, lb).rows);
    }
}

TEST(SimulatedApi, TraceLines) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(8, PagingMode::WithoutReplacementPerCall);
    std::ostringstream trace;
    api.set_trace(&trace);
    BudgetLedger ledger(1);
    api.execute(q(*t.ds, "A2=y"), ledger);
    const auto line = nlohmann::json::parse(trace.str());
    EXPECT_EQ(line.at("call"), 1);
    EXPECT_EQ(line.at("query"), "A1=*&A2=y");
    EXPECT_EQ(line.at("returned"), 4);
    EXPECT_EQ(line.at("targets"), 3);
}

TEST(SimulatedApi, ArityMismatch) {
    ToyApi t(hps_test::toy_ptr());
    auto api = t.make(3, PagingMode::WithReplacement);
    BudgetLedger ledger(1);
    EXPECT_THROW(api.execute(Query::root(3), ledger), SchemaMismatch);
}

TEST(ExpectedDistinct, ClosedForm) {
    EXPECT_NEAR(expected_distinct(100, 10), 100 * (1 - std::pow(0.99, 10)), 1e-12);
    EXPECT_DOUBLE_EQ(expected_distinct(1, 7), 1.0);
    EXPECT_DOUBLE_EQ(expected_distinct(0, 7), 0.0);
    EXPECT_DOUBLE_EQ(expected_distinct(50, 0), 0.0);
    EXPECT_NEAR(expected_distinct(1e9, 10), 10.0, 1e-6);
}

TEST(PagingMode, Names) {
    for (auto m : {PagingMode::WithReplacement, PagingMode::WithoutReplacementPerCall, PagingMode::FixedRanking}) {
        EXPECT_EQ(paging_mode_from_name(paging_mode_name(m)), m);
    }
    EXPECT_THROW(paging_mode_from_name("sideways"), ConfigError);
}
