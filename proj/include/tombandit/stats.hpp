#pragma once

#include <cstddef>
#include <span>

#include "tombandit/rng.hpp"

namespace tombandit::stats {

double mean(std::span<const double> values);
double sample_variance(std::span<const double> values);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the mean. Always contains the sample mean.
Interval bootstrap_mean_interval(std::span<const double> values, std::size_t resamples, double level, Rng& rng);

/// Two-sided exact sign test on paired differences; zeros are dropped.
/// Returns 1 when no non-zero difference remains.
double sign_test_p_value(std::span<const double> differences);

}  // namespace tombandit::stats
