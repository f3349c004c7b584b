#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "hps/random.hpp"

namespace hps {

enum class RewardMode {
    // p * (N - n) / N * N(1 - (1 - 1/N)^m)
    WithReplacementUnique,
    // Same, with the distinct-count factor left without its leading N.
    WithReplacementUniqueLiteral,
    // p * (N - n) / N * m
    WithoutReplacement,
    // p * m
    UnknownN,
};

std::string reward_mode_name(RewardMode mode);
// Throws ConfigError for an unknown name.
RewardMode reward_mode_from_name(const std::string& name);
bool needs_match_count(RewardMode mode);

struct QueryStats {
    double S = 1.0;
    double F = 1.0;
    // Distinct sampled entities matching the query.
    std::size_t n_seen = 0;
    std::optional<std::size_t> est_match_count;
    std::size_t times_issued = 0;

    double precision_estimate() const { return S / (S + F); }
};

// Reward for a given precision value. Throws ConfigError when `mode` needs a
// match count and stats has none.
double reward_for_precision(double precision, const QueryStats& stats, std::size_t m, RewardMode mode);

double expected_reward(const QueryStats& stats, std::size_t m, RewardMode mode);
double thompson_draw(const QueryStats& stats, std::size_t m, RewardMode mode, Rng& rng);

// `mode` when the stats carry a match count, UnknownN otherwise.
RewardMode effective_mode(const QueryStats& stats, RewardMode mode);

}  // namespace hps
