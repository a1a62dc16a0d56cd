#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace gloc::quadrature {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussLegendreRule make_gauss_legendre(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi initial guess followed by Newton on P_n.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

template <std::size_t N>
const GaussLegendreRule& gauss_legendre() {
  static const GaussLegendreRule rule = make_gauss_legendre(N);
  return rule;
}

template <class F>
double integrate(F&& f, double a, double b, const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

/// Integrates f over [a, b] split at the given interior breakpoints, so that a
/// fixed-order rule only ever sees a smooth integrand.
template <class F>
double integrate_piecewise(F&& f, double a, double b, std::span<const double> breakpoints,
                           const GaussLegendreRule& rule) {
  double total = 0.0;
  double lo = a;
  for (double p : breakpoints) {
    if (p <= lo || p >= b) continue;
    total += integrate(f, lo, p, rule);
    lo = p;
  }
  total += integrate(f, lo, b, rule);
  return total;
}

/// Sorts and de-duplicates breakpoints, keeping only those strictly inside (a, b)
/// and separated from each other and from the ends by more than `min_gap`.
inline std::vector<double> clean_breakpoints(std::vector<double> pts, double a, double b,
                                             double min_gap) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  double last = a;
  for (double p : pts) {
    if (p - last <= min_gap || b - p <= min_gap) continue;
    out.push_back(p);
    last = p;
  }
  return out;
}

}  // namespace gloc::quadrature
