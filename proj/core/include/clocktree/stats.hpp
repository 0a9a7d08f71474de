#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace clocktree {

struct Interval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double halfwidth() const { return 0.5 * (hi - lo); }
};

/// Wilson 95% score interval for k successes in n trials.
inline Interval wilson_interval(int64_t k, int64_t n) {
    const double z = 1.959963984540054;  // Phi^{-1}(0.975)
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (phat + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {phat, center - half, center + half};
}

/// Normal-approximation 95% interval for the mean of a sample.
inline Interval mean_interval(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double s = 0.0;
    for (double x : xs) s += x;
    const double mean = s / n;
    double v = 0.0;
    for (double x : xs) v += (x - mean) * (x - mean);
    const double se = std::sqrt(v / (n * (n - 1.0)));
    const double z = 1.959963984540054;
    return {mean, mean - z * se, mean + z * se};
}

}  // namespace clocktree
