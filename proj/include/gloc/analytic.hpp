#pragma once

// Analytic performance model: Laplace transform of the co-channel
// interference, capture probability, mean interference, binary rate, energy
// efficiency and the energy-efficient transmit power.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gloc/errors.hpp"
#include "gloc/hypergeometric.hpp"
#include "gloc/interval_set.hpp"
#include "gloc/quadrature.hpp"
#include "gloc/scenario.hpp"
#include "gloc/units.hpp"

namespace gloc {

namespace detail {

// Small fixed-capacity list; a region never has more than six pieces.
struct PieceList {
  std::array<Interval, 8> items{};
  int count = 0;
  void push(Interval iv) {
    if (iv.hi > iv.lo) items[count++] = iv;
  }
};

inline PieceList subtract_open(const PieceList& in, double cut_lo, double cut_hi) {
  PieceList out;
  for (int i = 0; i < in.count; ++i) {
    const auto& p = in.items[i];
    if (p.hi <= cut_lo || p.lo >= cut_hi) {
      out.push(p);
      continue;
    }
    if (p.lo < cut_lo) out.push({p.lo, cut_lo});
    if (p.hi > cut_hi) out.push({cut_hi, p.hi});
  }
  return out;
}

/// Calls f(lo, hi) for every distance interval of co-channel cluster c seen from
/// a receiver at x, with the probe transmitter at v.
template <class F>
void for_each_region_interval(std::int64_t c, double x, double v, Scheme scheme,
                              const ScenarioConfig& cfg, F&& f) {
  const double center = static_cast<double>(c) * co_channel_period(cfg);
  const double lo = std::max(center - cfg.d_segment / 2.0 - x, -cfg.d_max);
  const double hi = std::min(center + cfg.d_segment / 2.0 - x, cfg.d_max);
  if (!(lo < hi)) return;

  PieceList pieces;
  pieces.push({lo, hi});
  if (scheme == Scheme::MLP && cfg.d_safe > 0.0) {
    // Conditional thinning: nobody within d_safe of the receiver or the probe.
    pieces = subtract_open(pieces, -cfg.d_safe, cfg.d_safe);
    pieces = subtract_open(pieces, v - x - cfg.d_safe, v - x + cfg.d_safe);
  }
  for (int i = 0; i < pieces.count; ++i) {
    const auto& p = pieces.items[i];
    if (p.hi > 0.0) {
      const double a = std::max(p.lo, 0.0);
      if (p.hi > a) f(a, p.hi);
    }
    if (p.lo < 0.0) {
      const double a = std::max(-p.hi, 0.0);
      if (-p.lo > a) f(a, -p.lo);
    }
  }
}

/// sum_c sum_intervals of the kernel integral, i.e. -ln L / (lambda p_a).
inline double interference_exponent(double x, double v, Scheme scheme, const ScenarioConfig& cfg,
                                    double s_rho) {
  if (s_rho == 0.0) return 0.0;
  const auto [c_first, c_last] = co_channel_range(cfg);
  double total = 0.0;
  for (std::int64_t c = c_first; c <= c_last; ++c) {
    for_each_region_interval(c, x, v, scheme, cfg, [&](double a, double b) {
      total += special::branch_integral(a, b, cfg.tau, cfg.alpha, s_rho);
    });
  }
  return total;
}

}  // namespace detail

/// Distance intervals (t = |y - x|) over which cluster c contributes interference.
inline IntervalSet interference_region(std::int64_t c, double x, double v, Scheme scheme,
                                       const ScenarioConfig& cfg) {
  std::vector<Interval> out;
  detail::for_each_region_interval(c, x, v, scheme, cfg,
                                   [&](double a, double b) { out.push_back({a, b}); });
  return IntervalSet(std::move(out));
}

struct LaplaceQuery {
  double s = 0.0;  // 1 / (mW/Hz)
  double x = 0.0;  // receiver position, m
  double v = 0.0;  // probe transmitter position, m (MLP only)
  Scheme scheme = Scheme::SLP;
  double p_a = 0.0;
};

/// E[exp(-s I(x))] under Rayleigh fading for the scheme's abstraction process.
inline double laplace_interference(const LaplaceQuery& q, const ScenarioConfig& cfg) {
  if (!(q.s >= 0.0)) throw DomainError("Laplace argument s must be >= 0");
  const double density = derive_scheme(cfg, q.scheme).lambda_abs * q.p_a;
  if (density == 0.0 || q.s == 0.0) return 1.0;
  return std::exp(-density * detail::interference_exponent(q.x, q.v, q.scheme, cfg,
                                                            q.s * cfg.rho_vt));
}

/// Whether the MLP Laplace transform reduces to the SLP form without the probe
/// cluster. Beyond the segment/d_safe ordering and |x| < n_ar d_A / 2, the
/// receiver must also be at least d_safe away from every other co-channel segment.
inline bool mlp_simplification_applies(const ScenarioConfig& cfg, double x) {
  const double period = co_channel_period(cfg);
  if (!(cfg.d_segment < cfg.d_safe &&
        cfg.d_safe < static_cast<double>(cfg.n_ar - 1) * cfg.d_segment))
    return false;
  if (!(std::abs(x) < period / 2.0)) return false;
  const double gap = period - cfg.d_segment / 2.0 - std::abs(x);
  return gap >= cfg.d_safe;
}

/// MLP Laplace transform as the SLP sum restricted to c != 0.
inline double laplace_interference_mlp_simplified(const LaplaceQuery& q,
                                                  const ScenarioConfig& cfg) {
  const double density = derive_scheme(cfg, Scheme::MLP).lambda_abs * q.p_a;
  if (density == 0.0 || q.s == 0.0) return 1.0;
  const double s_rho = q.s * cfg.rho_vt;
  const auto [c_first, c_last] = co_channel_range(cfg);
  double total = 0.0;
  for (std::int64_t c = c_first; c <= c_last; ++c) {
    if (c == 0) continue;
    detail::for_each_region_interval(c, q.x, q.v, Scheme::SLP, cfg, [&](double a, double b) {
      total += special::branch_integral(a, b, cfg.tau, cfg.alpha, s_rho);
    });
  }
  return std::exp(-density * total);
}

enum class CapturePath {
  Auto,            // uniform average when the MLP weight is provably constant
  UniformAverage,  // (1/d_A) \int L dv
  GeneralWeight,   // MLP: \int 1(r_bc > d_safe) / |D(v + r_bc)| L dv
};

struct CaptureDetails {
  double value = 0.0;         // capture probability
  double c1 = 0.0;            // interference-only factor (value with sigma_n2 = 0)
  double c2 = 0.0;            // mW/Hz; value = c1 * exp(-c2 / rho_vt)
  double noise_factor = 1.0;  // exp(-c2 / rho_vt)
  double p_a = 0.0;
  double weight_mass = 1.0;   // integral of the probe-position density over the segment
  bool weights_flagged = false;
  double renormalized = 0.0;  // value / weight_mass
  bool uniform_path = true;
};

/// c2 = gamma sigma_n^2 (tau r_bc)^alpha, in mW/Hz.
inline double noise_constant(const ScenarioConfig& cfg) {
  return cfg.gamma * cfg.sigma_n2 * std::pow(cfg.tau * cfg.r_bc, cfg.alpha);
}

/// Probe-position density for MLP capture at v: the receiver at
/// v + r_bc forbids a ball of radius d_safe inside the probe segment.
inline double mlp_probe_weight(double v, const ScenarioConfig& cfg) {
  if (!(cfg.r_bc > cfg.d_safe)) return 0.0;
  const double x = v + cfg.r_bc;
  const double half = cfg.d_segment / 2.0;
  const double overlap = std::max(0.0, std::min(half, x + cfg.d_safe) - std::max(-half, x - cfg.d_safe));
  const double measure = cfg.d_segment - overlap;
  return measure > 0.0 ? 1.0 / measure : 0.0;
}

inline bool mlp_weight_is_uniform(const ScenarioConfig& cfg) {
  return cfg.r_bc > cfg.d_safe && (cfg.d_safe == 0.0 || cfg.r_bc - cfg.d_safe >= cfg.d_segment);
}

namespace detail {

// v-positions in the probe segment where the integrand is not smooth.
inline std::vector<double> capture_breakpoints(const ScenarioConfig& cfg, Scheme scheme) {
  const double half = cfg.d_segment / 2.0;
  std::vector<double> offsets{0.0, cfg.d_max, -cfg.d_max};
  if (scheme == Scheme::MLP && cfg.d_safe > 0.0) {
    offsets.insert(offsets.end(), {cfg.d_safe, -cfg.d_safe, -cfg.r_bc + cfg.d_safe,
                                   -cfg.r_bc - cfg.d_safe});
  }
  std::vector<double> pts;
  const auto [c_first, c_last] = co_channel_range(cfg);
  for (std::int64_t c = c_first; c <= c_last; ++c) {
    const double center = static_cast<double>(c) * co_channel_period(cfg);
    for (double edge : {center - half, center + half}) {
      for (double k : offsets) {
        // raw endpoint edge - (v + r_bc) meets offset k
        const double v = edge - cfg.r_bc - k;
        if (v > -half && v < half) pts.push_back(v);
      }
    }
  }
  if (scheme == Scheme::MLP) {
    for (double s1 : {-half, half})
      for (double s2 : {-cfg.d_safe, cfg.d_safe}) pts.push_back(s1 - cfg.r_bc - s2);
  }
  return quadrature::clean_breakpoints(std::move(pts), -half, half, 1e-9 * cfg.d_segment);
}

}  // namespace detail

/// Capture probability at distance r_bc from a probe transmitter placed
/// uniformly in its segment; Gauss-Legendre of order 64 over each smooth piece,
/// checked against order 128.
inline CaptureDetails capture_details(const ScenarioConfig& cfg, Scheme scheme,
                                      const TrafficModel& tm,
                                      CapturePath path = CapturePath::Auto) {
  const SchemeDerived sd = derive_scheme(cfg, scheme);
  CaptureDetails out;
  out.p_a = activity_probability(cfg, sd, tm);
  out.c2 = noise_constant(cfg);
  out.noise_factor = std::exp(-out.c2 / cfg.rho_vt);

  bool uniform = scheme == Scheme::SLP || path == CapturePath::UniformAverage;
  if (scheme == Scheme::MLP && path == CapturePath::Auto) uniform = mlp_weight_is_uniform(cfg);
  out.uniform_path = uniform;

  const double half = cfg.d_segment / 2.0;
  const double density = sd.lambda_abs * out.p_a;
  const double s_rho = cfg.gamma * std::pow(cfg.tau * cfg.r_bc, cfg.alpha);
  const auto breaks = detail::capture_breakpoints(cfg, scheme);

  auto weight = [&](double v) { return uniform ? 1.0 / cfg.d_segment : mlp_probe_weight(v, cfg); };
  auto integrand = [&](double v) {
    const double w = weight(v);
    if (w == 0.0) return 0.0;
    if (density == 0.0) return w;
    return w * std::exp(-density * detail::interference_exponent(v + cfg.r_bc, v, scheme, cfg, s_rho));
  };

  if (uniform) {
    out.weight_mass = 1.0;
  } else {
    out.weight_mass = quadrature::integrate_piecewise(weight, -half, half, breaks,
                                                      quadrature::gauss_legendre<128>());
  }

  double c1 = 0.0;
  if (density == 0.0) {
    c1 = out.weight_mass;
  } else {
    const double coarse =
        quadrature::integrate_piecewise(integrand, -half, half, breaks, quadrature::gauss_legendre<64>());
    const double fine =
        quadrature::integrate_piecewise(integrand, -half, half, breaks, quadrature::gauss_legendre<128>());
    if (std::abs(coarse - fine) > 1e-7)
      throw QuadratureNotConverged("capture integral: order 64 gives " + std::to_string(coarse) +
                                   ", order 128 gives " + std::to_string(fine));
    c1 = fine;
  }
  out.c1 = c1;
  out.value = c1 * out.noise_factor;
  out.weights_flagged = std::abs(out.weight_mass - 1.0) > 1e-6;
  out.renormalized = out.weight_mass > 0.0 ? out.value / out.weight_mass : 0.0;
  return out;
}

inline double capture_probability(const ScenarioConfig& cfg, Scheme scheme, const TrafficModel& tm) {
  return capture_details(cfg, scheme, tm).value;
}

struct MeanInterference {
  double value = 0.0;  // mW/Hz
  bool divergent = false;
};

/// First moment of the interference at x (probe at v) by Campbell's theorem.
/// Infinite when interferers may sit arbitrarily close to the receiver.
inline MeanInterference mean_interference(double x, double v, Scheme scheme,
                                          const ScenarioConfig& cfg, const TrafficModel& tm) {
  const SchemeDerived sd = derive_scheme(cfg, scheme);
  const double density = sd.lambda_abs * activity_probability(cfg, sd, tm);
  if (density == 0.0) return {0.0, false};
  const auto [c_first, c_last] = co_channel_range(cfg);
  double sum = 0.0;
  bool divergent = false;
  for (std::int64_t c = c_first; c <= c_last; ++c) {
    detail::for_each_region_interval(c, x, v, scheme, cfg, [&](double a, double b) {
      if (a == 0.0) {
        divergent = true;
        return;
      }
      sum += std::pow(a, 1.0 - cfg.alpha) - std::pow(b, 1.0 - cfg.alpha);
    });
  }
  if (divergent) return {std::numeric_limits<double>::infinity(), true};
  return {density * cfg.rho_vt * std::pow(cfg.tau, -cfg.alpha) * sum / (cfg.alpha - 1.0), false};
}

struct LinkMetrics {
  double capture = 0.0;
  double avg_br = 0.0;  // bit/s
  double avg_ee = 0.0;  // bit/J
};

inline LinkMetrics link_metrics(const ScenarioConfig& cfg, Scheme scheme, const TrafficModel& tm) {
  const double f = capture_probability(cfg, scheme, tm);
  const double se = spectral_efficiency(cfg);
  const double b_ar = derive_scheme(cfg, scheme).b_ar;
  return {f, b_ar * se * f, se / (cfg.rho_vt * units::kMilliwattToWatt) * f};
}

struct OptimizationResult {
  double rho_opt = 0.0;         // mW/Hz
  double ee_opt = 0.0;          // bit/J
  double capture_at_opt = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;              // mW/Hz
  double delta = 0.0;
};

/// Power maximising energy efficiency subject to capture >= delta * c1.
/// The unconstrained optimum rho = c2 is feasible whenever delta <= 1/e.
inline OptimizationResult optimal_power(double delta, const ScenarioConfig& cfg, Scheme scheme,
                                        const TrafficModel& tm) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  const CaptureDetails cap = capture_details(cfg, scheme, tm);
  if (!(cap.c2 > 0.0)) throw DomainError("power optimisation needs a positive noise power");

  OptimizationResult r;
  r.delta = delta;
  r.c1 = cap.c1;
  r.c2 = cap.c2;
  const double se = spectral_efficiency(cfg);
  const double c2_watt = cap.c2 * units::kMilliwattToWatt;
  if (delta <= std::exp(-1.0)) {
    r.rho_opt = cap.c2;
    r.ee_opt = cap.c1 / c2_watt * se * std::exp(-1.0);
    r.capture_at_opt = cap.c1 * std::exp(-1.0);
  } else {
    const double log_inv = std::log(1.0 / delta);
    r.rho_opt = cap.c2 / log_inv;
    r.ee_opt = cap.c1 / c2_watt * log_inv * se * delta;
    r.capture_at_opt = cap.c1 * delta;
  }
  return r;
}

}  // namespace gloc
