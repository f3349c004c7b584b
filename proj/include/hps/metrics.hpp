#pragma once

#include <cstddef>
#include <span>

namespace hps {

// Distinct targets sampled over all targets. Throws DataError when n_d == 0.
double recall(std::size_t n_s, std::size_t n_d);
// Distinct targets over the B * m entities a perfect run could return.
double normalized_recall(std::size_t n_s, std::size_t budget, std::size_t m);
double throughput_rate(std::size_t distinct_targets, std::size_t budget, std::size_t k);

struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

// Mean, sample standard deviation and the normal-approximation 95% interval
// mean +- 1.96 sd / sqrt(n). A single value gives a zero-width interval.
Summary summarize(std::span<const double> values);

bool intervals_overlap(const Summary& a, const Summary& b);

// 100 * (after - before) / before.
double percent_change(double before, double after);

}  // namespace hps
