#include "tombandit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tombandit::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

Interval bootstrap_mean_interval(std::span<const double> values, std::size_t resamples, double level, Rng& rng) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("interval level must lie in (0, 1)");
  if (values.empty()) return {};
  const double m = mean(values);
  if (resamples == 0) return {m, m};
  const std::size_t n = values.size();
  std::vector<double> means(resamples);
  for (auto& out : means) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += values[rng.below(n)];
    out = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
    return means[std::min(idx, resamples - 1)];
  };
  return {std::min(pick(alpha), m), std::max(pick(1.0 - alpha), m)};
}

double sign_test_p_value(std::span<const double> differences) {
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (double d : differences) {
    if (d > 0.0) ++pos;
    else if (d < 0.0) ++neg;
  }
  const std::size_t n = pos + neg;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(pos, neg);
  // log P(X = i) for X ~ Binomial(n, 1/2), summed over the lower tail.
  const double log_half_n = static_cast<double>(n) * std::log(0.5);
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                              std::lgamma(static_cast<double>(n - i) + 1.0);
    tail += std::exp(log_choose + log_half_n);
  }
  return std::min(1.0, 2.0 * tail);
}

}  // namespace tombandit::stats
