#pragma once

#include <cstdint>
#include <random>

namespace hps {

using Rng = std::mt19937_64;

// Stream labels keep seeds for different consumers of one replicate apart.
enum class SeedStream : std::uint64_t {
    Sampler = 1,
    Api = 2,
    Shuffle = 3,
    Subsets = 4,
    Rank = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic child seed for (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index);

// Beta(a, b) draw for real-valued shapes a, b > 0.
double sample_beta(double a, double b, Rng& rng);

// Uniform index in [0, n). n must be positive.
std::size_t uniform_index(std::size_t n, Rng& rng);

double uniform_unit(Rng& rng);

}  // namespace hps
