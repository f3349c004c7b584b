#include "hps/metrics.hpp"

#include <cmath>
#include <limits>

#include "hps/error.hpp"

namespace hps {

double recall(std::size_t n_s, std::size_t n_d) {
    if (n_d == 0) throw DataError("recall is undefined without target entities");
    return static_cast<double>(n_s) / static_cast<double>(n_d);
}

double normalized_recall(std::size_t n_s, std::size_t budget, std::size_t m) {
    if (budget * m == 0) throw ConfigError("normalized recall needs B * m >= 1");
    return static_cast<double>(n_s) / static_cast<double>(budget * m);
}

double throughput_rate(std::size_t distinct_targets, std::size_t budget, std::size_t k) {
    if (budget * k == 0) throw ConfigError("throughput rate needs B * k >= 1");
    return static_cast<double>(distinct_targets) / static_cast<double>(budget * k);
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    const double half = 1.96 * s.sd / std::sqrt(static_cast<double>(s.n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

bool intervals_overlap(const Summary& a, const Summary& b) { return a.ci_low <= b.ci_high && b.ci_low <= a.ci_high; }

double percent_change(double before, double after) {
    if (before == 0.0) return after == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 100.0 * (after - before) / before;
}

}  // namespace hps
