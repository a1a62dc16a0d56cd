#pragma once

// Closed-form evaluation of the per-segment interference integral
//
//   K(a, b) = \int_a^b  g(t) / (1 + g(t)) dt,   g(t) = s_rho (tau t)^{-alpha},
//
// whose primitive is t * 2F1(1, 1/alpha; 1 + 1/alpha; -(tau t)^alpha / s_rho).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gloc/errors.hpp"
#include "gloc/quadrature.hpp"

namespace gloc::special {

namespace detail {

// |z| below this uses the Pfaff-transformed series, above it the 1/z expansion.
inline constexpr double kSeriesSwitch = 4.0;

// 2F1(1, 1; 1 + b; w) for 0 <= w < 1. All terms are positive.
inline double hyp2f1_11(double b, double w) {
  double term = 1.0;
  double sum = 1.0;
  for (int n = 0; n < 10000; ++n) {
    term *= (n + 1.0) / (n + 1.0 + b) * w;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

// b * sum_{k>=1} (-1)^{k-1} y^k / (k - b), y <= 1/kSeriesSwitch.
inline double inverse_series(double b, double y) {
  double power = y;
  double sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    const double term = power / (k - b);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-17 * std::abs(sum)) break;
    power *= y;
  }
  return b * sum;
}

inline double reflection_factor(double b) {
  return std::numbers::pi * b / std::sin(std::numbers::pi * b);
}

}  // namespace detail

/// Gauss hypergeometric 2F1(1, b; 1 + b; z) for z <= 0 and 0 < b < 1.
inline double hyp2f1_1b(double b, double z) {
  if (z == 0.0) return 1.0;
  const double m = -z;
  if (m <= detail::kSeriesSwitch) {
    // Pfaff: 2F1(1,b;1+b;z) = (1-z)^{-1} 2F1(1,1;1+b; z/(z-1)).
    return detail::hyp2f1_11(b, m / (1.0 + m)) / (1.0 + m);
  }
  if (std::isinf(m)) return 0.0;
  return detail::reflection_factor(b) * std::pow(m, -b) -
         detail::inverse_series(b, 1.0 / m);
}

/// The rational path-loss kernel 1 / (1 + (tau t)^alpha / s_rho) and its
/// antiderivatives, with s_rho = s * rho_vt.
class PathLossKernel {
 public:
  PathLossKernel(double tau, double alpha, double s_rho)
      : tau_(tau), alpha_(alpha), b_(1.0 / alpha), s_rho_(s_rho), log_s_rho_(std::log(s_rho)) {}

  double operator()(double t) const {
    if (t <= 0.0) return 1.0;
    return 1.0 / (1.0 + std::exp(alpha_ * std::log(tau_ * t) - log_s_rho_));
  }

  // |z| = (tau t)^alpha / s_rho
  double argument_magnitude(double t) const {
    if (t <= 0.0) return 0.0;
    return std::exp(alpha_ * std::log(tau_ * t) - log_s_rho_);
  }

  /// \int_0^t kernel = t * 2F1(1, 1/alpha; 1 + 1/alpha; -(tau t)^alpha / s_rho).
  double primitive(double t) const {
    if (t <= 0.0) return 0.0;
    return t * hyp2f1_1b(b_, -argument_magnitude(t));
  }

  /// \int_0^inf kernel.
  double total() const {
    return std::exp(b_ * log_s_rho_) / tau_ * detail::reflection_factor(b_);
  }

  /// \int_t^inf kernel; accurate only when argument_magnitude(t) > kSeriesSwitch.
  double tail(double t) const { return t * detail::inverse_series(b_, 1.0 / argument_magnitude(t)); }

  double tau() const { return tau_; }
  double alpha() const { return alpha_; }
  double s_rho() const { return s_rho_; }

 private:
  double tau_;
  double alpha_;
  double b_;
  double s_rho_;
  double log_s_rho_;
};

/// Quadrature of the kernel over [a, b]. Short intervals far from the origin
/// get one 32-point Gauss-Legendre panel, which is exact to rounding there
/// because the kernel is analytic in a disc of radius a around the panel.
inline double branch_integral_quadrature(double a, double b, const PathLossKernel& kernel) {
  if (b <= a) return 0.0;
  auto f = [&](double t) { return kernel(t); };
  if (b - a <= 0.5 * a) return quadrature::integrate(f, a, b, quadrature::gauss_legendre<32>());
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13, &error);
}

/// \int_a^b s_rho (tau t)^-alpha / (1 + s_rho (tau t)^-alpha) dt for 0 <= a <= b.
/// Uses the hypergeometric primitive, switching to adaptive quadrature when the
/// difference of primitives cancels more than three significant digits.
inline double branch_integral(double a, double b, double tau, double alpha, double s_rho) {
  if (!(a >= 0.0) || !(b >= a))
    throw DomainError("branch_integral requires 0 <= a <= b (got a=" + std::to_string(a) +
                      ", b=" + std::to_string(b) + ")");
  if (b == a || s_rho == 0.0) return 0.0;
  if (std::isinf(s_rho)) return b - a;

  const PathLossKernel kernel(tau, alpha, s_rho);
  double value = 0.0;
  double magnitude = 0.0;
  const double ma = kernel.argument_magnitude(a);
  const double mb = kernel.argument_magnitude(b);
  if (ma > detail::kSeriesSwitch) {
    // Both ends in the far field: difference of tails avoids subtracting the total.
    const double ta = kernel.tail(a);
    const double tb = kernel.tail(b);
    value = ta - tb;
    magnitude = ta + tb;
  } else {
    const double pa = kernel.primitive(a);
    const double pb = mb > detail::kSeriesSwitch ? kernel.total() - kernel.tail(b)
                                                 : kernel.primitive(b);
    value = pb - pa;
    magnitude = pb + pa;
  }

  if (!(value > 0.0) || magnitude > 1e3 * value) {
    const double q = branch_integral_quadrature(a, b, kernel);
    // The closed form is only trusted to its rounding level once it cancels.
    const double tolerance = std::max(1e-6 * std::abs(q),
                                      64.0 * std::numeric_limits<double>::epsilon() * magnitude);
    if (std::abs(q - value) > tolerance)
      throw PrecisionLoss("branch_integral closed form " + std::to_string(value) +
                          " and quadrature " + std::to_string(q) + " disagree on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    value = q;
  }
  return std::clamp(value, 0.0, b - a);
}

}  // namespace gloc::special
