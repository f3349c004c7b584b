#include "hps/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hps/error.hpp"

namespace hps {

namespace {

constexpr std::pair<SamplerKind, const char*> kKindNames[] = {
    {SamplerKind::DtTmp, "dt-tmp"}, {SamplerKind::Tmp, "tmp"}, {SamplerKind::Exp, "exp"}, {SamplerKind::Uni, "uni"},
    {SamplerKind::Rw, "rw"},        {SamplerKind::Ls, "ls"},   {SamplerKind::Cb, "cb"},
};

// Distinct sampled entities per catalog query, kept up to date from the
// newly seen rows of each page.
class SeenCounter {
public:
    explicit SeenCounter(const QueryCatalog& catalog) : catalog_(&catalog), counts_(catalog.size(), 0) {}

    void add(const Dataset& dataset, std::span<const RowIndex> rows) {
        for (RowIndex row : rows) {
            for_each_generalization(dataset.record(row).values, [&](std::span<const ValueCode> slots) {
                auto i = catalog_->find(slots);
                if (i >= 0) ++counts_[static_cast<std::size_t>(i)];
            });
        }
    }
    std::size_t operator[](std::size_t i) const { return counts_[i]; }

private:
    const QueryCatalog* catalog_;
    std::vector<std::uint32_t> counts_;
};

// Index set with O(1) insert, erase and uniform draw.
class IndexSet {
public:
    explicit IndexSet(std::size_t universe) : pos_(universe, kAbsent) {}

    bool contains(std::size_t i) const { return pos_[i] != kAbsent; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const std::vector<std::size_t>& items() const { return items_; }
    void insert(std::size_t i) {
        if (contains(i)) return;
        pos_[i] = items_.size();
        items_.push_back(i);
    }
    void erase(std::size_t i) {
        if (!contains(i)) return;
        const std::size_t p = pos_[i];
        const std::size_t last = items_.back();
        items_[p] = last;
        pos_[last] = p;
        items_.pop_back();
        pos_[i] = kAbsent;
    }
    std::size_t draw(Rng& rng) const { return items_[uniform_index(items_.size(), rng)]; }

private:
    static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> pos_;
    std::vector<std::size_t> items_;
};

std::size_t require_arm(const QueryCatalog& catalog, const Query& q) {
    auto i = catalog.find(q);
    if (i < 0) throw QueryError("issued query is not a non-empty query");
    return static_cast<std::size_t>(i);
}

class UniSampler : public Sampler {
public:
    explicit UniSampler(const SamplerContext& ctx) : root_(Query::root(ctx.dataset->schema())) {}
    SamplerKind kind() const override { return SamplerKind::Uni; }
    Query next_query() override { return root_; }
    void observe(const Query&, const ApiResponse&, const SampleLog&) override {}

private:
    Query root_;
};

class ExpSampler : public Sampler {
public:
    ExpSampler(const SamplerConfig& config, const SamplerContext& ctx)
        : catalog_(ctx.catalog), rng_(config.rng_seed) {}
    SamplerKind kind() const override { return SamplerKind::Exp; }
    Query next_query() override { return (*catalog_)[uniform_index(catalog_->size(), rng_)].query; }
    void observe(const Query&, const ApiResponse&, const SampleLog&) override {}

private:
    QueryCatalogPtr catalog_;
    Rng rng_;
};

// Flat Thompson sampling over every non-empty query. Unissued arms share
// the prior and the match-count-free reward theta * m, so their maximum is
// drawn in one step as m * U^(1/K) with a uniformly chosen winner.
class TmpSampler : public Sampler {
public:
    TmpSampler(const SamplerConfig& config, const SamplerContext& ctx)
        : catalog_(ctx.catalog),
          dataset_(ctx.dataset),
          m_(ctx.api.page_size),
          mode_(resolve_reward_mode(config, ctx.api)),
          rng_(config.rng_seed),
          stats_(catalog_->size()),
          unissued_(catalog_->size()),
          seen_(*catalog_) {
        for (std::size_t i = 0; i < catalog_->size(); ++i) unissued_.insert(i);
    }
    SamplerKind kind() const override { return SamplerKind::Tmp; }

    Query next_query() override {
        std::size_t best = 0;
        double best_value = -1.0;
        std::size_t ties = 0;
        for (std::size_t arm : issued_) {
            QueryStats st = stats_[arm];
            st.n_seen = seen_[arm];
            const double v = thompson_draw(st, m_, effective_mode(st, mode_), rng_);
            if (v > best_value) {
                best_value = v;
                best = arm;
                ties = 1;
            } else if (v == best_value && uniform_index(++ties, rng_) == 0) {
                best = arm;
            }
        }
        if (!unissued_.empty()) {
            const double k = static_cast<double>(unissued_.size());
            const double v = std::pow(uniform_unit(rng_), 1.0 / k) * static_cast<double>(m_);
            if (v > best_value) best = unissued_.draw(rng_);
        }
        return (*catalog_)[best].query;
    }

    void observe(const Query& q, const ApiResponse& response, const SampleLog& log) override {
        const std::size_t arm = require_arm(*catalog_, q);
        if (unissued_.contains(arm)) {
            unissued_.erase(arm);
            issued_.push_back(arm);
        }
        auto& st = stats_[arm];
        ++st.times_issued;
        if (response.match_count) st.est_match_count = *response.match_count;
        const auto& call = log.calls().back();
        st.S += static_cast<double>(call.targets);
        st.F += static_cast<double>(call.rows.size() - call.targets);
        seen_.add(*dataset_, log.last_new_rows());
    }

private:
    QueryCatalogPtr catalog_;
    const Dataset* dataset_;
    std::size_t m_;
    RewardMode mode_;
    Rng rng_;
    std::vector<QueryStats> stats_;
    std::vector<std::size_t> issued_;
    IndexSet unissued_;
    SeenCounter seen_;
};

// Greedy unseen cover: the query with the most matching entities not yet seen.
class LsSampler : public Sampler {
public:
    LsSampler(const SamplerConfig&, const SamplerContext& ctx)
        : catalog_(ctx.catalog), dataset_(ctx.dataset), seen_(*catalog_) {}
    SamplerKind kind() const override { return SamplerKind::Ls; }

    Query next_query() override {
        std::size_t best = 0;
        std::size_t best_value = 0;
        for (std::size_t i = 0; i < catalog_->size(); ++i) {
            const std::size_t v = (*catalog_)[i].match_count - seen_[i];
            if (v > best_value) {
                best_value = v;
                best = i;
            }
        }
        return (*catalog_)[best].query;
    }

    void observe(const Query&, const ApiResponse&, const SampleLog& log) override {
        seen_.add(*dataset_, log.last_new_rows());
    }

private:
    QueryCatalogPtr catalog_;
    const Dataset* dataset_;
    SeenCounter seen_;
};

// Greedy on smoothed observed precision, where a success is a target not
// seen before. Candidates are issued queries and their non-empty one-slot
// specializations, starting from the root.
class CbSampler : public Sampler {
public:
    CbSampler(const SamplerConfig& config, const SamplerContext& ctx)
        : catalog_(ctx.catalog),
          alpha_(config.cb_alpha),
          rng_(config.rng_seed),
          successes_(catalog_->size(), 0.0),
          trials_(catalog_->size(), 0.0),
          issued_flag_(catalog_->size(), 0),
          unissued_(catalog_->size()) {
        if (!(alpha_ > 0.0)) throw ConfigError("cb_alpha must be positive");
        for (const auto& a : ctx.dataset->schema().attributes()) cards_.push_back(a.cardinality());
        unissued_.insert(require_arm(*catalog_, Query::root(ctx.dataset->schema())));
    }
    SamplerKind kind() const override { return SamplerKind::Cb; }

    Query next_query() override {
        const double fresh = alpha_ / (2.0 * alpha_);
        double best_value = -1.0;
        ties_.clear();
        for (std::size_t arm : issued_) {
            const double v = score(arm);
            if (v > best_value) {
                best_value = v;
                ties_.assign(1, arm);
            } else if (v == best_value) {
                ties_.push_back(arm);
            }
        }
        std::size_t pool = ties_.size();
        if (!unissued_.empty()) {
            if (fresh > best_value) {
                return (*catalog_)[unissued_.draw(rng_)].query;
            }
            if (fresh == best_value) pool += unissued_.size();
        }
        const std::size_t pick = uniform_index(pool, rng_);
        const std::size_t arm = pick < ties_.size() ? ties_[pick] : unissued_.items()[pick - ties_.size()];
        return (*catalog_)[arm].query;
    }

    void observe(const Query& q, const ApiResponse& response, const SampleLog& log) override {
        const std::size_t arm = require_arm(*catalog_, q);
        successes_[arm] += static_cast<double>(log.calls().back().new_targets);
        trials_[arm] += static_cast<double>(response.rows.size());
        if (issued_flag_[arm]) return;
        issued_flag_[arm] = 1;
        unissued_.erase(arm);
        issued_.push_back(arm);
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (q.is_bound(i)) continue;
            auto slots = q.slots();
            for (std::size_t v = 0; v < cards_[i]; ++v) {
                slots[i] = static_cast<ValueCode>(v);
                auto child = catalog_->find(std::span<const ValueCode>(slots));
                if (child >= 0 && !issued_flag_[static_cast<std::size_t>(child)]) {
                    unissued_.insert(static_cast<std::size_t>(child));
                }
            }
        }
    }

private:
    double score(std::size_t arm) const { return (successes_[arm] + alpha_) / (trials_[arm] + 2.0 * alpha_); }

    QueryCatalogPtr catalog_;
    double alpha_;
    Rng rng_;
    std::vector<double> successes_;
    std::vector<double> trials_;
    std::vector<std::uint8_t> issued_flag_;
    std::vector<std::size_t> issued_;
    IndexSet unissued_;
    std::vector<std::size_t> ties_;
    std::vector<std::size_t> cards_;
};

// Random walk on the lattice, restricted to non-empty queries.
class RwSampler : public Sampler {
public:
    RwSampler(const SamplerConfig& config, const SamplerContext& ctx)
        : catalog_(ctx.catalog),
          schema_(&ctx.dataset->schema()),
          p_generalize_(config.rw_generalize_prob),
          rng_(config.rng_seed),
          current_(Query::root(*schema_)) {
        if (!(p_generalize_ >= 0.0 && p_generalize_ <= 1.0)) {
            throw ConfigError("rw_generalize_prob must lie in [0, 1]");
        }
    }
    SamplerKind kind() const override { return SamplerKind::Rw; }

    Query next_query() override {
        const bool can_generalize = !current_.is_root();
        if (can_generalize && uniform_unit(rng_) < p_generalize_) {
            generalize();
        } else {
            std::vector<Query> next;
            for (auto& q : lattice_neighbors(current_, *schema_, LatticeDirection::Specialize)) {
                if (catalog_->find(q) >= 0) next.push_back(std::move(q));
            }
            if (!next.empty()) {
                current_ = next[uniform_index(next.size(), rng_)];
            } else if (can_generalize) {
                generalize();
            }
        }
        return current_;
    }
    void observe(const Query&, const ApiResponse&, const SampleLog&) override {}

private:
    void generalize() {
        auto up = lattice_neighbors(current_, *schema_, LatticeDirection::Generalize);
        current_ = up[uniform_index(up.size(), rng_)];
    }

    QueryCatalogPtr catalog_;
    const AttributeSchema* schema_;
    double p_generalize_;
    Rng rng_;
    Query current_;
};

}  // namespace

std::string sampler_kind_name(SamplerKind kind) {
    for (auto [k, n] : kKindNames) {
        if (k == kind) return n;
    }
    return "?";
}

SamplerKind sampler_kind_from_name(const std::string& name) {
    for (auto [k, n] : kKindNames) {
        if (name == n) return k;
    }
    throw ConfigError("unknown sampler kind '" + name + "'");
}

bool needs_catalog(SamplerKind kind) { return kind != SamplerKind::DtTmp && kind != SamplerKind::Uni; }

SamplerConfig SamplerConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("sampler config must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const char* allowed[] = {"kind", "epoch", "reward_mode", "rw_generalize_prob", "cb_alpha"};
        if (std::none_of(std::begin(allowed), std::end(allowed), [&](const char* k) { return it.key() == k; })) {
            throw ConfigError("unknown key '" + it.key() + "' in sampler config");
        }
    }
    SamplerConfig c;
    try {
        c.kind = sampler_kind_from_name(j.at("kind").get<std::string>());
        if (j.contains("epoch")) {
            const auto h = j.at("epoch").get<std::int64_t>();
            if (h < 1) throw ConfigError("epoch must be at least 1");
            c.epoch = static_cast<std::size_t>(h);
        }
        if (j.contains("reward_mode")) c.reward_mode = reward_mode_from_name(j.at("reward_mode").get<std::string>());
        c.rw_generalize_prob = j.value("rw_generalize_prob", c.rw_generalize_prob);
        c.cb_alpha = j.value("cb_alpha", c.cb_alpha);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sampler config: ") + e.what());
    }
    if (!(c.rw_generalize_prob >= 0.0 && c.rw_generalize_prob <= 1.0)) {
        throw ConfigError("rw_generalize_prob must lie in [0, 1]");
    }
    if (!(c.cb_alpha > 0.0)) throw ConfigError("cb_alpha must be positive");
    return c;
}

nlohmann::json SamplerConfig::to_json() const {
    nlohmann::json j = {{"kind", sampler_kind_name(kind)}, {"epoch", epoch}};
    if (reward_mode) j["reward_mode"] = reward_mode_name(*reward_mode);
    j["rw_generalize_prob"] = rw_generalize_prob;
    j["cb_alpha"] = cb_alpha;
    return j;
}

RewardMode resolve_reward_mode(const SamplerConfig& config, const ApiConfig& api) {
    if (!api.report_match_count) return RewardMode::UnknownN;
    if (config.reward_mode) return *config.reward_mode;
    return api.paging_mode == PagingMode::WithReplacement ? RewardMode::WithReplacementUnique
                                                          : RewardMode::WithoutReplacement;
}

DtTmpSampler::DtTmpSampler(const SamplerConfig& config, const SamplerContext& ctx)
    : config_(config),
      dataset_(ctx.dataset),
      m_(ctx.api.page_size),
      mode_(resolve_reward_mode(config, ctx.api)),
      rng_(config.rng_seed),
      pool_(ctx.dataset->schema().size()) {
    if (config_.epoch < 1) throw ConfigError("epoch must be at least 1");
}

Query DtTmpSampler::next_query() { return pool_.node(select_query(pool_, m_, mode_, rng_)).query; }

void DtTmpSampler::observe(const Query& q, const ApiResponse& response, const SampleLog& log) {
    log_ = &log;
    update_on_result(pool_, q, response, log.target_flags(log.calls().back()), *dataset_, log.last_new_rows());
}

void DtTmpSampler::after_call(std::size_t calls_made) {
    if (calls_made % config_.epoch != 0 || !log_) return;
    const std::size_t best = best_query(pool_, m_, mode_, rng_);
    expand_pool(pool_, best, *dataset_, log_->sampled_rows());
    ++expansions_;
}

std::unique_ptr<Sampler> make_sampler(const SamplerConfig& config, const SamplerContext& ctx) {
    if (!ctx.dataset) throw ConfigError("sampler context has no dataset");
    if (needs_catalog(config.kind) && !ctx.catalog) {
        throw ConfigError("sampler " + sampler_kind_name(config.kind) + " needs the non-empty query list");
    }
    switch (config.kind) {
        case SamplerKind::DtTmp: return std::make_unique<DtTmpSampler>(config, ctx);
        case SamplerKind::Tmp: return std::make_unique<TmpSampler>(config, ctx);
        case SamplerKind::Exp: return std::make_unique<ExpSampler>(config, ctx);
        case SamplerKind::Uni: return std::make_unique<UniSampler>(ctx);
        case SamplerKind::Rw: return std::make_unique<RwSampler>(config, ctx);
        case SamplerKind::Ls: return std::make_unique<LsSampler>(config, ctx);
        case SamplerKind::Cb: return std::make_unique<CbSampler>(config, ctx);
    }
    throw ConfigError("unknown sampler kind");
}

SampleLog run(Sampler& sampler, SimulatedApi& api, BudgetLedger& ledger) {
    SampleLog log(api.dataset());
    const bool ranked = api.config().paging_mode == PagingMode::FixedRanking;
    std::map<Query, std::string> tokens;
    while (!ledger.exhausted()) {
        const Query q = sampler.next_query();
        std::optional<std::string> token;
        if (ranked) {
            auto it = tokens.find(q);
            if (it != tokens.end()) token = it->second;
        }
        const ApiResponse response = api.execute(q, ledger, token);
        if (ranked) {
            if (response.next_page_token) {
                tokens[q] = *response.next_page_token;
            } else {
                tokens.erase(q);
            }
        }
        log.record(q, response);
        sampler.observe(q, response, log);
        sampler.after_call(ledger.calls_made());
    }
    return log;
}

}  // namespace hps
