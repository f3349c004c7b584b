#include "hps/reward.hpp"

#include <cmath>

#include "hps/error.hpp"
#include "hps/sim_api.hpp"

namespace hps {

std::string reward_mode_name(RewardMode mode) {
    switch (mode) {
        case RewardMode::WithReplacementUnique: return "with-replacement-unique";
        case RewardMode::WithReplacementUniqueLiteral: return "with-replacement-unique-literal";
        case RewardMode::WithoutReplacement: return "without-replacement";
        case RewardMode::UnknownN: return "unknown-n";
    }
    return "?";
}

RewardMode reward_mode_from_name(const std::string& name) {
    for (auto m : {RewardMode::WithReplacementUnique, RewardMode::WithReplacementUniqueLiteral,
                   RewardMode::WithoutReplacement, RewardMode::UnknownN}) {
        if (reward_mode_name(m) == name) return m;
    }
    throw ConfigError("unknown reward mode '" + name + "'");
}

bool needs_match_count(RewardMode mode) { return mode != RewardMode::UnknownN; }

double reward_for_precision(double precision, const QueryStats& stats, std::size_t m, RewardMode mode) {
    const double md = static_cast<double>(m);
    if (mode == RewardMode::UnknownN) return precision * md;
    if (!stats.est_match_count) throw ConfigError("reward mode " + reward_mode_name(mode) + " needs a match count");
    const auto N = *stats.est_match_count;
    if (stats.n_seen >= N) return 0.0;
    const double Nd = static_cast<double>(N);
    const double unseen = (Nd - static_cast<double>(stats.n_seen)) / Nd;
    switch (mode) {
        case RewardMode::WithReplacementUnique:
            return precision * unseen * expected_distinct(Nd, md);
        case RewardMode::WithReplacementUniqueLiteral:
            return precision * unseen * (expected_distinct(Nd, md) / Nd);
        case RewardMode::WithoutReplacement:
            return precision * unseen * md;
        case RewardMode::UnknownN:
            break;
    }
    return precision * md;
}

double expected_reward(const QueryStats& stats, std::size_t m, RewardMode mode) {
    return reward_for_precision(stats.precision_estimate(), stats, m, mode);
}

double thompson_draw(const QueryStats& stats, std::size_t m, RewardMode mode, Rng& rng) {
    return reward_for_precision(sample_beta(stats.S, stats.F, rng), stats, m, mode);
}

RewardMode effective_mode(const QueryStats& stats, RewardMode mode) {
    return stats.est_match_count ? mode : RewardMode::UnknownN;
}

}  // namespace hps
