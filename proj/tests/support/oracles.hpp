#pragma once

// Reference computations used only by tests. Each one takes a different route
// from the library code it checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace aep::oracle {

// AUC by counting every positive/negative pair; ties count one half.
inline double auc_pairs(std::span<const double> scores, std::span<const int> labels) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        good += 1.0;
      } else if (scores[i] == scores[j]) {
        good += 0.5;
      }
    }
  }
  return good / pairs;
}

// Closed-form OLS slope n*Sxy - Sx*Sy over n*Sxx - Sx^2, in long double.
inline double ols_slope(std::span<const double> t, std::span<const double> v) {
  long double n = static_cast<long double>(t.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sx += t[i];
    sy += v[i];
    sxx += static_cast<long double>(t[i]) * t[i];
    sxy += static_cast<long double>(t[i]) * v[i];
  }
  return static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

// Composite Gauss-Legendre quadrature, 20 nodes per panel. Nodes come from
// Newton iteration on the Legendre recurrence.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  constexpr int kNodes = 20;
  static const auto rule = [] {
    std::vector<std::pair<double, double>> r;
    for (int i = 1; i <= kNodes; ++i) {
      long double x = std::cos(3.14159265358979323846L * (i - 0.25L) / (kNodes + 0.5L));
      long double dp = 0;
      for (int iter = 0; iter < 100; ++iter) {
        long double p0 = 1;
        long double p1 = x;
        for (int n = 2; n <= kNodes; ++n) {
          const long double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
          p0 = p1;
          p1 = p2;
        }
        dp = kNodes * (x * p1 - p0) / (x * x - 1);
        const long double dx = p1 / dp;
        x -= dx;
        if (std::fabs(static_cast<double>(dx)) < 1e-19) break;
      }
      r.emplace_back(static_cast<double>(x), static_cast<double>(2 / ((1 - x * x) * dp * dp)));
    }
    return r;
  }();
  long double total = 0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + h * (p + 0.5);
    for (const auto& [x, w] : rule) total += static_cast<long double>(w) * f(mid + x * h / 2);
  }
  return static_cast<double>(total * h / 2);
}

// Upper chi-square tail by integrating the density over [x, x + 600].
inline double chi_square_sf_quadrature(double x, double df) {
  const double k = df / 2.0;
  auto pdf = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp((k - 1.0) * std::log(t) - t / 2.0 - k * std::log(2.0) - std::lgamma(k));
  };
  return gauss_legendre(pdf, x, x + 600.0, 3000);
}

// Upper F tail via the beta-density form of the survival function,
// integrating u^(a-1)(1-u)^(b-1)/B(a,b) over [0, u0] with a = d2/2, b = d1/2.
inline double f_sf_quadrature(double x, double d1, double d2) {
  const double a = d2 / 2.0;
  const double b = d1 / 2.0;
  const double u0 = d2 / (d2 + d1 * x);
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  auto pdf = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - log_beta);
  };
  return gauss_legendre(pdf, 0.0, u0, 3000);
}

}  // namespace aep::oracle
