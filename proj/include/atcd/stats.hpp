#pragma once

#include <vector>

// Small numeric helpers shared by the trainer and the analysis module.

namespace atcd::stats {

double mean(const std::vector<double>& xs);
// Sample standard deviation (n - 1 denominator).
double sample_stdev(const std::vector<double>& xs);
// Median with the usual mid-point rule for even sizes.
double median(std::vector<double> xs);
// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> xs, double p);

}  // namespace atcd::stats
