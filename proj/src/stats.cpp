#include "atcd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace atcd::stats {

double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty list");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_stdev(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_stdev needs at least 2 values");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty list");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("percentile of empty list");
    if (p < 0.0 || p > 100.0) throw std::invalid_argument("percentile p outside [0, 100]");
    std::sort(xs.begin(), xs.end());
    const double rank = p / 100.0 * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= xs.size()) return xs.back();
    const double frac = rank - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

}  // namespace atcd::stats
