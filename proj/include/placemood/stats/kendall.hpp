#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "placemood/error.hpp"

namespace placemood::stats {

/// ranks[j][i] is the rank judge j gives item i.
struct RankMatrix {
  std::vector<std::vector<double>> ranks;

  std::size_t judges() const { return ranks.size(); }
  std::size_t items() const { return ranks.empty() ? 0 : ranks.front().size(); }
};

/// Kendall's coefficient of concordance without tie correction:
/// W = 12 S / (m^2 (n^3 - n)), S the squared deviation of item rank sums from their mean.
inline double kendalls_w(const RankMatrix& matrix) {
  const std::size_t m = matrix.judges();
  const std::size_t n = matrix.items();
  if (m < 2 || n < 2) {
    throw InsufficientData("Kendall's W needs at least 2 judges and 2 items (got " +
                           std::to_string(m) + " x " + std::to_string(n) + ")");
  }
  const double nd = static_cast<double>(n);
  const double expected_row_sum = nd * (nd + 1.0) / 2.0;
  std::vector<double> totals(n, 0.0);
  for (const auto& row : matrix.ranks) {
    if (row.size() != n) throw std::invalid_argument("kendalls_w: ragged rank matrix");
    double row_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      totals[i] += row[i];
      row_sum += row[i];
    }
    if (std::abs(row_sum - expected_row_sum) > 1e-9 * expected_row_sum) {
      throw std::invalid_argument("kendalls_w: judge row is not a ranking of 1..n");
    }
  }
  double mean = 0.0;
  for (double t : totals) mean += t;
  mean /= nd;
  double s = 0.0;
  for (double t : totals) s += (t - mean) * (t - mean);
  const double md = static_cast<double>(m);
  return 12.0 * s / (md * md * (nd * nd * nd - nd));
}

}  // namespace placemood::stats
