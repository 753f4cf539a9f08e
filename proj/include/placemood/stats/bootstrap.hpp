#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "placemood/error.hpp"
#include "placemood/random.hpp"

namespace placemood::stats {

struct BootstrapConfig {
  std::size_t n_resamples = 1000;
  double confidence = 0.95;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_resamples < 100) throw std::invalid_argument("n_resamples must be >= 100");
    if (!(confidence > 0.0 && confidence < 1.0)) {
      throw std::invalid_argument("confidence must be in (0, 1)");
    }
  }
};

struct BootstrapResult {
  double estimate = 0.0;       // statistic on the original sample
  double low = 0.0;
  double high = 0.0;
  double resample_mean = 0.0;  // average of the statistic over resamples

  double width() const { return high - low; }
};

using Statistic = std::function<double(std::span<const double>)>;

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw NoData("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

/// Linear-interpolation quantile of sorted data: position p * (n - 1).
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw NoData("quantile of empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

/// Percentile bootstrap. Resample r draws from its own stream derived from
/// (seed, r), so results do not depend on evaluation order.
inline BootstrapResult bootstrap_ci(std::span<const double> sample, const Statistic& statistic,
                                    const BootstrapConfig& cfg) {
  cfg.validate();
  if (sample.empty()) throw NoData("bootstrap on an empty sample");

  const std::size_t n = sample.size();
  std::vector<double> replicate(n);
  std::vector<double> values(cfg.n_resamples);
  for (std::size_t r = 0; r < cfg.n_resamples; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    for (std::size_t i = 0; i < n; ++i) replicate[i] = sample[rng.below(n)];
    values[r] = statistic(replicate);
  }

  BootstrapResult out;
  out.estimate = statistic(sample);
  out.resample_mean = mean(values);
  std::sort(values.begin(), values.end());
  const double tail = (1.0 - cfg.confidence) / 2.0;
  out.low = quantile_sorted(values, tail);
  out.high = quantile_sorted(values, 1.0 - tail);
  return out;
}

/// Percentile intervals of the mean for several equally long samples that share
/// one set of resample indices. Each result equals bootstrap_ci(sample, mean, cfg).
inline std::vector<BootstrapResult> bootstrap_mean_ci(std::span<const std::span<const double>> samples,
                                                      const BootstrapConfig& cfg) {
  cfg.validate();
  if (samples.empty()) return {};
  const std::size_t n = samples.front().size();
  if (n == 0) throw NoData("bootstrap on an empty sample");
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("bootstrap_mean_ci: samples differ in length");
  }
  const std::size_t k = samples.size();
  std::vector<std::vector<double>> values(k, std::vector<double>(cfg.n_resamples));
  std::vector<double> sums(k);
  for (std::size_t r = 0; r < cfg.n_resamples; ++r) {
    Rng rng(derive_seed(cfg.seed, r));
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = rng.below(n);
      for (std::size_t s = 0; s < k; ++s) sums[s] += samples[s][j];
    }
    for (std::size_t s = 0; s < k; ++s) values[s][r] = sums[s] / static_cast<double>(n);
  }

  std::vector<BootstrapResult> out(k);
  const double tail = (1.0 - cfg.confidence) / 2.0;
  for (std::size_t s = 0; s < k; ++s) {
    out[s].estimate = mean(samples[s]);
    out[s].resample_mean = mean(values[s]);
    std::sort(values[s].begin(), values[s].end());
    out[s].low = quantile_sorted(values[s], tail);
    out[s].high = quantile_sorted(values[s], 1.0 - tail);
  }
  return out;
}

}  // namespace placemood::stats
