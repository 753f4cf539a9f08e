#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "placemood/error.hpp"
#include "placemood/stats/correlation.hpp"
#include "placemood/stats/factors.hpp"

namespace placemood::stats {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct DesignMatrix {
  Matrix x;
  std::vector<std::string> columns;  // "intercept", numeric names, "factor=level"
  ReferenceLevels references;
};

inline constexpr std::string_view kIntercept = "intercept";

/// Intercept, numeric factors, then one 0/1 column per non-reference level that
/// occurs in the data. Throws SchemaError for unknown levels or an absent reference.
inline DesignMatrix dummy_encode(std::span<const FactorRow> rows, const ReferenceLevels& references) {
  DesignMatrix out;
  out.columns.emplace_back(kIntercept);
  for (const auto& f : numeric_factors()) out.columns.emplace_back(f.name);

  struct Dummy {
    const CategoricalFactor* factor;
    std::string level;
  };
  std::vector<Dummy> dummies;
  for (const auto& f : categorical_factors()) {
    auto ref_it = references.find(f.name);
    if (ref_it == references.end()) {
      throw SchemaError("no reference level given for factor '" + std::string(f.name) + "'");
    }
    const std::string reference = checked_level(f, ref_it->second);
    out.references[std::string(f.name)] = reference;
    std::vector<bool> seen(f.levels.size(), false);
    for (const auto& row : rows) {
      const std::string level = checked_level(f, row.*f.field);
      seen[static_cast<std::size_t>(std::find(f.levels.begin(), f.levels.end(), level) -
                                    f.levels.begin())] = true;
    }
    const auto ref_pos = static_cast<std::size_t>(
        std::find(f.levels.begin(), f.levels.end(), reference) - f.levels.begin());
    if (!rows.empty() && !seen[ref_pos]) {
      throw SchemaError("reference level '" + reference + "' of factor '" + std::string(f.name) +
                        "' does not occur in the data");
    }
    for (std::size_t k = 0; k < f.levels.size(); ++k) {
      if (k == ref_pos || !seen[k]) continue;
      dummies.push_back({&f, std::string(f.levels[k])});
      out.columns.push_back(std::string(f.name) + "=" + std::string(f.levels[k]));
    }
  }

  out.x = Matrix(rows.size(), out.columns.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::size_t c = 0;
    out.x(r, c++) = 1.0;
    for (const auto& f : numeric_factors()) out.x(r, c++) = rows[r].*f.field;
    for (const auto& d : dummies) {
      out.x(r, c++) = canonical_level(rows[r].*(d.factor->field)) == d.level ? 1.0 : 0.0;
    }
  }
  return out;
}

struct Coefficient {
  std::string name;
  double estimate = 0.0;
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double t_value = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
};

/// "**" for p < 0.001, "*" for p < 0.05, as in the published tables.
inline std::string significance_stars(double p) {
  if (std::isnan(p)) return "";
  if (p < 0.001) return "**";
  if (p < 0.05) return "*";
  return "";
}

struct RegressionResult {
  std::vector<Coefficient> coefficients;
  std::vector<double> fitted;
  std::vector<double> residuals;
  double r_squared = 0.0;
  double f_statistic = std::numeric_limits<double>::quiet_NaN();
  double f_p_value = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> design_columns;
  ReferenceLevels references;

  const Coefficient& coefficient(std::string_view name) const {
    for (const auto& c : coefficients) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("no coefficient named '" + std::string(name) + "'");
  }
  std::vector<double> estimates() const {
    std::vector<double> out;
    for (const auto& c : coefficients) out.push_back(c.estimate);
    return out;
  }
};

/// Least squares by Householder QR. Throws SingularDesign naming the first column
/// that is (numerically) a combination of the preceding ones.
inline RegressionResult ols_fit(const Matrix& x, std::span<const double> y,
                                std::vector<std::string> names = {}) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  if (y.size() != m) throw std::invalid_argument("ols_fit: response length != design rows");
  if (n == 0) throw std::invalid_argument("ols_fit: empty design");
  if (names.empty()) {
    for (std::size_t j = 0; j < n; ++j) names.push_back("x" + std::to_string(j));
  }
  if (names.size() != n) throw std::invalid_argument("ols_fit: column name count mismatch");
  if (m < n) {
    throw SingularDesign("design has " + std::to_string(m) + " rows but " + std::to_string(n) +
                         " columns");
  }

  Matrix a = x;
  std::vector<double> qty(y.begin(), y.end());
  std::vector<double> v(m);
  for (std::size_t k = 0; k < n; ++k) {
    double col_norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) col_norm = std::hypot(col_norm, x(i, k));
    double alpha = 0.0;
    for (std::size_t i = k; i < m; ++i) alpha = std::hypot(alpha, a(i, k));
    if (col_norm == 0.0 || alpha <= 1e-10 * col_norm) {
      throw SingularDesign("column '" + names[k] + "' is collinear with earlier columns");
    }
    if (a(k, k) > 0.0) alpha = -alpha;
    // v = a_k - alpha e_k, reflector H = I - 2 v v^T / (v^T v)
    for (std::size_t i = k; i < m; ++i) v[i] = a(i, k);
    v[k] -= alpha;
    double vtv = 0.0;
    for (std::size_t i = k; i < m; ++i) vtv += v[i] * v[i];
    for (std::size_t j = k; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < m; ++i) dot += v[i] * a(i, j);
      const double scale = 2.0 * dot / vtv;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= scale * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = k; i < m; ++i) dot += v[i] * qty[i];
    const double scale = 2.0 * dot / vtv;
    for (std::size_t i = k; i < m; ++i) qty[i] -= scale * v[i];
  }

  // Back substitution R beta = Q^T y.
  std::vector<double> beta(n);
  for (std::size_t kk = n; kk-- > 0;) {
    double s = qty[kk];
    for (std::size_t j = kk + 1; j < n; ++j) s -= a(kk, j) * beta[j];
    beta[kk] = s / a(kk, kk);
  }

  RegressionResult out;
  out.design_columns = names;
  out.fitted.assign(m, 0.0);
  out.residuals.assign(m, 0.0);
  double y_mean = 0.0;
  for (double v_i : y) y_mean += v_i;
  y_mean /= static_cast<double>(m);
  double ssr = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double f = 0.0;
    for (std::size_t j = 0; j < n; ++j) f += x(i, j) * beta[j];
    out.fitted[i] = f;
    out.residuals[i] = y[i] - f;
    ssr += out.residuals[i] * out.residuals[i];
    sst += (y[i] - y_mean) * (y[i] - y_mean);
  }
  out.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 0.0;

  // (R^T R)^{-1} diagonal via the inverse of the upper-triangular R.
  Matrix rinv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    rinv(j, j) = 1.0 / a(j, j);
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t k = i + 1; k <= j; ++k) s += a(i, k) * rinv(k, j);
      rinv(i, j) = -s / a(i, i);
    }
  }
  const std::size_t df = m - n;
  const double sigma2 = df > 0 ? ssr / static_cast<double>(df) : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < n; ++j) {
    Coefficient c;
    c.name = names[j];
    c.estimate = beta[j];
    if (df > 0) {
      double d = 0.0;
      for (std::size_t k = j; k < n; ++k) d += rinv(j, k) * rinv(j, k);
      c.std_error = std::sqrt(sigma2 * d);
      if (c.std_error > 0.0) {
        c.t_value = c.estimate / c.std_error;
        boost::math::students_t dist(static_cast<double>(df));
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(c.t_value)));
      }
    }
    out.coefficients.push_back(std::move(c));
  }
  if (df > 0 && n > 1 && sst > 0.0 && ssr > 0.0) {
    const double df_model = static_cast<double>(n - 1);
    out.f_statistic = ((sst - ssr) / df_model) / (ssr / static_cast<double>(df));
    if (out.f_statistic >= 0.0) {
      boost::math::fisher_f dist(df_model, static_cast<double>(df));
      out.f_p_value = boost::math::cdf(boost::math::complement(dist, out.f_statistic));
    }
  }
  return out;
}

inline RegressionResult ols_fit(const DesignMatrix& design, std::span<const double> y) {
  auto result = ols_fit(design.x, y, design.columns);
  result.references = design.references;
  return result;
}

struct ScreenEntry {
  std::string factor;
  std::string level;  // empty for numeric factors
  std::optional<double> coefficient;
  std::string note;   // reason when skipped
};

/// Pearson correlation of every numeric factor and every categorical level
/// indicator with the emotion index. Constant factors or indicators are skipped
/// with a note. Throws UndefinedCorrelation when the emotion series is constant.
inline std::vector<ScreenEntry> correlation_screen(std::span<const FactorRow> factors,
                                                   std::span<const double> emotion) {
  if (factors.size() != emotion.size()) {
    throw std::invalid_argument("correlation_screen: factor rows and emotion values differ in length");
  }
  if (emotion.size() < 2) throw InsufficientData("correlation screen needs at least 2 sites");
  if (is_constant(emotion)) {
    throw UndefinedCorrelation("emotion index is constant across sites; every factor correlation is undefined");
  }

  std::vector<ScreenEntry> out;
  auto screen = [&](ScreenEntry entry, const std::vector<double>& series) {
    if (is_constant(series)) {
      if (entry.level.empty()) {
        entry.note = "constant across sites";
      } else {
        entry.note = series.front() == 1.0 ? "level present at every site" : "level absent from every site";
      }
    } else {
      entry.coefficient = pearson(series, emotion);
    }
    out.push_back(std::move(entry));
  };
  for (const auto& f : numeric_factors()) {
    std::vector<double> series;
    for (const auto& row : factors) series.push_back(row.*f.field);
    screen({std::string(f.name), "", std::nullopt, ""}, series);
  }
  for (const auto& f : categorical_factors()) {
    for (auto level : f.levels) {
      std::vector<double> series;
      for (const auto& row : factors) {
        series.push_back(canonical_level(row.*f.field) == level ? 1.0 : 0.0);
      }
      screen({std::string(f.name), std::string(level), std::nullopt, ""}, series);
    }
  }
  return out;
}

}  // namespace placemood::stats
