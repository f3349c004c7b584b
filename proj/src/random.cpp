#include "hps/random.hpp"

#include <cassert>

namespace hps {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL));
}

double sample_beta(double a, double b, Rng& rng) {
    assert(a > 0.0 && b > 0.0);
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    const double s = x + y;
    // Both gammas can underflow to zero for tiny shapes; fall back to the mean.
    if (s <= 0.0) return a / (a + b);
    return x / s;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
    assert(n > 0);
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(rng);
}

double uniform_unit(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

}  // namespace hps
