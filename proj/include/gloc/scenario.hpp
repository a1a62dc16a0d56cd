#pragma once

// System model for geo-location based channel access on a straight road:
// physical parameters, per-scheme abstraction quantities, traffic activity and
// the mapping from road positions to segments / access resources.

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "gloc/errors.hpp"

namespace gloc {

enum class Scheme { SLP, MLP };
enum class ProcessKind { PPP, ConditionallyThinnedPPP };

inline std::string_view to_string(Scheme s) { return s == Scheme::SLP ? "slp" : "mlp"; }

inline Scheme parse_scheme(std::string_view text) {
  if (text == "slp" || text == "SLP") return Scheme::SLP;
  if (text == "mlp" || text == "MLP") return Scheme::MLP;
  throw ConfigError("unknown scheme '" + std::string(text) + "' (expected slp|mlp)");
}

/// Physical and system parameters. Powers are linear: mW/Hz.
/// Defaults reproduce the reference highway scenario (two lanes at 80% of the
/// hard-core density cap, 9 MHz useful bandwidth, 5.2 GHz V2V path loss).
struct ScenarioConfig {
  double tau = 490.0;               // path-loss slope, applied to metres
  double alpha = 1.68;              // path-loss exponent
  double lambda_lane = 0.8 / 84.0;  // vehicles / m / lane
  double d_safe = 42.0;             // m
  std::int64_t n_lanes = 2;
  double d_segment = 42.0;          // m
  std::int64_t n_ar = 10;           // SLP: total ARs; MLP: ARs per lane
  double bw = 9e6;                  // Hz
  double rho_vt = 1e-4;             // mW/Hz  (-40 dBm/Hz)
  double sigma_n2 = 3.1622776601683795e-17;  // mW/Hz  (-165 dBm/Hz)
  double gamma = 3.1622776601683795;         // linear  (5 dB)
  double d_max = 56000.0;           // m
  double r_bc = 150.0;              // m

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(std::string(name) + " must be finite and > 0");
    };
    positive(tau, "tau");
    positive(lambda_lane, "lambda_lane");
    positive(d_segment, "d_segment");
    positive(bw, "bw");
    positive(rho_vt, "rho_vt");
    positive(gamma, "gamma");
    positive(d_max, "d_max");
    positive(r_bc, "r_bc");
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 1");
    if (!(d_safe >= 0.0) || !std::isfinite(d_safe)) throw ConfigError("d_safe must be >= 0");
    if (!(sigma_n2 >= 0.0) || !std::isfinite(sigma_n2))
      throw ConfigError("sigma_n2 must be finite and >= 0");
    if (n_lanes < 1) throw ConfigError("n_lanes must be >= 1");
    if (n_ar < 1) throw ConfigError("n_ar must be >= 1");
    if (d_safe > 0.0 && lambda_lane > 1.0 / (2.0 * d_safe))
      throw ConfigError("lambda_lane exceeds the hard-core cap 1/(2*d_safe)");
  }
};

struct NonPeriodic {
  double p_a = 0.25;
};

struct Periodic {
  double m_bc = 2400.0;  // bits
  double t_rep = 0.1;    // s
};

using TrafficModel = std::variant<NonPeriodic, Periodic>;

struct SchemeDerived {
  Scheme scheme = Scheme::SLP;
  double lambda_abs = 0.0;  // vehicles / m in the one-dimensional abstraction
  double b_ar = 0.0;        // Hz
  double min_dist = 0.0;    // m
  ProcessKind process_kind = ProcessKind::PPP;
};

inline SchemeDerived derive_scheme(const ScenarioConfig& cfg, Scheme scheme) {
  cfg.validate();
  const auto n_ar = static_cast<double>(cfg.n_ar);
  const auto n_lanes = static_cast<double>(cfg.n_lanes);
  if (scheme == Scheme::SLP)
    return {Scheme::SLP, cfg.lambda_lane * n_lanes, cfg.bw / n_ar, 0.0, ProcessKind::PPP};
  return {Scheme::MLP, cfg.lambda_lane, cfg.bw / (n_ar * n_lanes), cfg.d_safe,
          ProcessKind::ConditionallyThinnedPPP};
}

inline double spectral_efficiency(const ScenarioConfig& cfg) { return std::log2(1.0 + cfg.gamma); }

/// Probability that a vehicle is transmitting. Periodic traffic is active for
/// the fraction of the reporting interval needed to send one message.
inline double activity_probability(const ScenarioConfig& cfg, const SchemeDerived& sd,
                                   const TrafficModel& tm) {
  if (const auto* np = std::get_if<NonPeriodic>(&tm)) {
    if (!(np->p_a >= 0.0 && np->p_a <= 1.0)) throw ConfigError("p_a must lie in [0, 1]");
    return np->p_a;
  }
  const auto& p = std::get<Periodic>(tm);
  if (!(p.m_bc >= 0.0) || !std::isfinite(p.m_bc)) throw ConfigError("m_bc must be >= 0");
  if (!(p.t_rep > 0.0) || !std::isfinite(p.t_rep)) throw ConfigError("t_rep must be > 0");
  const double airtime = p.m_bc / (sd.b_ar * spectral_efficiency(cfg));
  if (airtime >= p.t_rep)
    throw ConstraintViolation("message airtime " + std::to_string(airtime) +
                              " s is not below t_rep = " + std::to_string(p.t_rep) + " s");
  return airtime / p.t_rep;
}

struct SegmentAddress {
  std::int64_t cluster = 0;
  std::int64_t ar_index = 0;

  friend bool operator==(const SegmentAddress&, const SegmentAddress&) = default;
};

/// Segment containing road position x. The probe segment is [-d/2, d/2) and
/// carries AR 0; segments are half-open so boundaries map to exactly one.
inline SegmentAddress segment_of(double x, const ScenarioConfig& cfg) {
  const double k = std::floor((x + cfg.d_segment / 2.0) / cfg.d_segment);
  const double cluster = std::floor(k / static_cast<double>(cfg.n_ar));
  auto ar = static_cast<std::int64_t>(k - cluster * static_cast<double>(cfg.n_ar));
  // Guard against k/n_ar rounding up to the next integer for huge |x|.
  if (ar < 0) ar += cfg.n_ar;
  if (ar >= cfg.n_ar) ar -= cfg.n_ar;
  return {static_cast<std::int64_t>(cluster), ar};
}

/// MLP without interference: no co-channel vehicle can lie inside the probe
/// segment nor within d_max of any receiver.
inline bool noise_limited(const ScenarioConfig& cfg) {
  return cfg.d_safe >= cfg.d_segment &&
         static_cast<double>(cfg.n_ar) > (2.0 * cfg.d_max + cfg.d_segment) / cfg.d_segment;
}

/// Co-channel cluster indices c in [first, second] summed by the Laplace
/// functional: -floor(d_max / P) .. ceil(d_max / P), P = n_ar * d_segment.
inline std::pair<std::int64_t, std::int64_t> co_channel_range(const ScenarioConfig& cfg) {
  const double ratio = cfg.d_max / (static_cast<double>(cfg.n_ar) * cfg.d_segment);
  return {-static_cast<std::int64_t>(std::floor(ratio)),
          static_cast<std::int64_t>(std::ceil(ratio))};
}

inline double co_channel_period(const ScenarioConfig& cfg) {
  return static_cast<double>(cfg.n_ar) * cfg.d_segment;
}

}  // namespace gloc
