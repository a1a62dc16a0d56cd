#pragma once

// Monte Carlo simulator for the road network: vehicle point processes,
// Rayleigh fading and per-snapshot SINR, used to cross-check the analytic model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gloc/analytic.hpp"
#include "gloc/errors.hpp"
#include "gloc/parallel.hpp"
#include "gloc/scenario.hpp"
#include "gloc/units.hpp"

namespace gloc::mc {

using Rng = std::mt19937_64;

/// Independent stream for realization `index` under master seed `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x676c6f63u};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double exponential(Rng& rng) { return -std::log1p(-uniform01(rng)); }

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Homogeneous PPP on [lo, hi); positions are returned sorted.
inline std::vector<double> sample_ppp(Window w, double density, Rng& rng) {
  if (!(density >= 0.0)) throw DomainError("PPP density must be >= 0");
  if (!(w.hi > w.lo)) throw DomainError("PPP window must be non-empty");
  if (density == 0.0) return {};
  std::poisson_distribution<std::int64_t> count(density * w.length());
  std::vector<double> pts(static_cast<std::size_t>(count(rng)));
  for (auto& p : pts) p = w.lo + w.length() * uniform01(rng);
  std::sort(pts.begin(), pts.end());
  return pts;
}

/// Parent intensity whose Matern type-II thinning keeps `target_density`.
inline double matern2_parent_density(double target_density, double d_safe) {
  if (d_safe == 0.0) return target_density;
  if (!(target_density * 2.0 * d_safe < 1.0))
    throw DensityInfeasible("lane density " + std::to_string(target_density) +
                            " reaches the hard-core cap 1/(2*d_safe)");
  return -std::log1p(-2.0 * d_safe * target_density) / (2.0 * d_safe);
}

struct Parent {
  double pos = 0.0;
  double mark = 0.0;
};

namespace detail {

inline std::vector<Parent> sample_marked(Window w, double density, Rng& rng) {
  const auto pos = sample_ppp(w, density, rng);
  std::vector<Parent> out(pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i) out[i] = {pos[i], uniform01(rng)};
  return out;
}

// Does parents[i] survive, i.e. no other parent closer than d has a smaller mark?
// `period` > 0 wraps distances on a circle of that length.
inline bool survives(std::span<const Parent> parents, std::size_t i, double d, double period) {
  const std::size_t n = parents.size();
  const double mark = parents[i].mark;
  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t j = (i + step) % n;
    if (period <= 0.0 && j < i) break;
    double gap = parents[j].pos - parents[i].pos;
    if (gap < 0.0) gap += period;
    if (gap >= d) break;
    if (parents[j].mark < mark) return false;
  }
  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t j = (i + n - step) % n;
    if (period <= 0.0 && j > i) break;
    double gap = parents[i].pos - parents[j].pos;
    if (gap < 0.0) gap += period;
    if (gap >= d) break;
    if (parents[j].mark < mark) return false;
  }
  return true;
}

inline std::vector<double> retain(std::span<const Parent> parents, double d, double period) {
  std::vector<double> out;
  for (std::size_t i = 0; i < parents.size(); ++i)
    if (survives(parents, i, d, period)) out.push_back(parents[i].pos);
  return out;
}

}  // namespace detail

/// Matern type-II hard-core process on a window with toroidal edge correction.
inline std::vector<double> sample_matern2(Window w, double target_density, double d_safe, Rng& rng) {
  const double parent_density = matern2_parent_density(target_density, d_safe);
  if (d_safe == 0.0) return sample_ppp(w, target_density, rng);
  const auto parents = detail::sample_marked(w, parent_density, rng);
  return detail::retain(parents, d_safe, w.length());
}

enum class SimMode { ModelFaithful, GroundTruth };

struct Interferer {
  double position = 0.0;
  double fading = 1.0;
};

struct Snapshot {
  double probe_tx = 0.0;
  double receiver = 0.0;
  std::vector<Interferer> interferers;
  double probe_fading = 1.0;
  // false when the geometry admits no valid probe/receiver pair (MLP with r_bc <= d_safe)
  bool admissible = true;
};

inline constexpr int kMaxRejections = 10000;

/// Half-width of the simulated road, centred on the probe segment. Covers d_max
/// around every possible receiver plus two co-channel periods of margin.
inline double window_half_width(const ScenarioConfig& cfg) {
  return cfg.d_max + 2.0 * co_channel_period(cfg) + cfg.r_bc + cfg.d_segment;
}

namespace detail {

// Probe position for the thinned model: density proportional to the MLP weight.
inline double draw_model_probe(const ScenarioConfig& cfg, Scheme scheme, Rng& rng, bool& admissible) {
  const double half = cfg.d_segment / 2.0;
  auto uniform_v = [&] { return -half + cfg.d_segment * uniform01(rng); };
  admissible = true;
  if (scheme == Scheme::SLP || mlp_weight_is_uniform(cfg)) return uniform_v();
  if (!(cfg.r_bc > cfg.d_safe)) {
    admissible = false;
    return uniform_v();
  }
  // Weight is piecewise constant-reciprocal-linear; its maximum sits at a kink or an end.
  double w_max = 0.0;
  std::vector<double> probes{-half, half};
  for (double s1 : {-half, half})
    for (double s2 : {-cfg.d_safe, cfg.d_safe}) probes.push_back(s1 - cfg.r_bc - s2);
  for (double v : probes)
    if (v >= -half && v <= half) w_max = std::max(w_max, mlp_probe_weight(v, cfg));
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double v = uniform_v();
    if (uniform01(rng) * w_max < mlp_probe_weight(v, cfg)) return v;
  }
  throw RejectionOverflow("no probe position accepted after " + std::to_string(kMaxRejections) +
                          " draws");
}

inline void add_interferer(Snapshot& snap, double y, Rng& rng) {
  snap.interferers.push_back({y, exponential(rng)});
}

// Thinned-PPP interferers of the analytic model at fixed receiver x and probe v.
inline void model_interferers(Snapshot& snap, const ScenarioConfig& cfg, Scheme scheme,
                              double density, Rng& rng) {
  if (density == 0.0) return;
  const double x = snap.receiver;
  const double v = snap.probe_tx;
  const double half = cfg.d_segment / 2.0;
  const auto [c_first, c_last] = co_channel_range(cfg);
  for (std::int64_t c = c_first; c <= c_last; ++c) {
    const double center = static_cast<double>(c) * co_channel_period(cfg);
    const Window seg{std::max(center - half, x - cfg.d_max), std::min(center + half, x + cfg.d_max)};
    if (!(seg.hi > seg.lo)) continue;
    for (double y : sample_ppp(seg, density, rng)) {
      if (scheme == Scheme::MLP &&
          (std::abs(y - x) < cfg.d_safe || std::abs(y - v) < cfg.d_safe))
        continue;
      add_interferer(snap, y, rng);
    }
  }
}

// Active, co-channel, in-range vehicles of a sampled lane.
inline void lane_interferers(Snapshot& snap, const std::vector<double>& lane, const ScenarioConfig& cfg,
                             double p_a, Rng& rng) {
  for (double y : lane) {
    if (!(uniform01(rng) < p_a)) continue;
    if (segment_of(y, cfg).ar_index != 0) continue;
    if (std::abs(y - snap.receiver) > cfg.d_max) continue;
    add_interferer(snap, y, rng);
  }
}

// One MLP lane conditioned on the probe at v and the receiver at x keeping
// d_safe from every vehicle. Only parents near v and x decide acceptance, so
// the rest of the lane is sampled once a placement is accepted.
inline std::vector<double> conditioned_lane(const ScenarioConfig& cfg, Window w, double parent_density,
                                            double& v, double& x, Rng& rng) {
  const double half = cfg.d_segment / 2.0;
  const double d = cfg.d_safe;
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    v = -half + cfg.d_segment * uniform01(rng);
    x = v + cfg.r_bc;
    const Window patch{std::min(v, x) - 2.0 * d, std::max(v, x) + 2.0 * d};
    auto parents = sample_marked(patch, parent_density, rng);
    bool clear = true;
    for (std::size_t i = 0; i < parents.size() && clear; ++i) {
      const double p = parents[i].pos;
      if ((std::abs(p - v) < d || std::abs(p - x) < d) && survives(parents, i, d, 0.0)) clear = false;
    }
    if (!clear) continue;
    auto left = sample_marked({w.lo, patch.lo}, parent_density, rng);
    auto right = sample_marked({patch.hi, w.hi}, parent_density, rng);
    left.insert(left.end(), parents.begin(), parents.end());
    left.insert(left.end(), right.begin(), right.end());
    return retain(left, d, w.length());
  }
  throw RejectionOverflow("probe placement rejected " + std::to_string(kMaxRejections) + " times");
}

}  // namespace detail

/// One spatial realization: probe, receiver at probe + r_bc, interferers with fading.
inline Snapshot realize_snapshot(const ScenarioConfig& cfg, Scheme scheme, const TrafficModel& tm,
                                 SimMode mode, Rng& rng) {
  const SchemeDerived sd = derive_scheme(cfg, scheme);
  const double p_a = activity_probability(cfg, sd, tm);
  Snapshot snap;

  if (mode == SimMode::ModelFaithful) {
    snap.probe_tx = detail::draw_model_probe(cfg, scheme, rng, snap.admissible);
    snap.receiver = snap.probe_tx + cfg.r_bc;
    detail::model_interferers(snap, cfg, scheme, sd.lambda_abs * p_a, rng);
  } else {
    const double hw = window_half_width(cfg);
    const Window w{-hw, hw};
    if (scheme == Scheme::SLP) {
      snap.probe_tx = -cfg.d_segment / 2.0 + cfg.d_segment * uniform01(rng);
      snap.receiver = snap.probe_tx + cfg.r_bc;
      for (std::int64_t lane = 0; lane < cfg.n_lanes; ++lane)
        detail::lane_interferers(snap, sample_matern2(w, cfg.lambda_lane, cfg.d_safe, rng), cfg, p_a,
                                 rng);
    } else if (!(cfg.r_bc > cfg.d_safe)) {
      snap.admissible = false;
      snap.probe_tx = -cfg.d_segment / 2.0 + cfg.d_segment * uniform01(rng);
      snap.receiver = snap.probe_tx + cfg.r_bc;
    } else {
      const double parent_density = matern2_parent_density(cfg.lambda_lane, cfg.d_safe);
      const auto lane =
          detail::conditioned_lane(cfg, w, parent_density, snap.probe_tx, snap.receiver, rng);
      detail::lane_interferers(snap, lane, cfg, p_a, rng);
    }
  }
  snap.probe_fading = exponential(rng);
  return snap;
}

/// Aggregate received interference power density at the receiver, mW/Hz.
inline double interference_at(const Snapshot& snap, const ScenarioConfig& cfg) {
  double total = 0.0;
  for (const auto& it : snap.interferers)
    total += cfg.rho_vt * it.fading * std::pow(cfg.tau * std::abs(it.position - snap.receiver), -cfg.alpha);
  return total;
}

inline double sinr(const Snapshot& snap, const ScenarioConfig& cfg) {
  const double signal = cfg.rho_vt * snap.probe_fading * std::pow(cfg.tau * cfg.r_bc, -cfg.alpha);
  return signal / (cfg.sigma_n2 + interference_at(snap, cfg));
}

inline bool captured(const Snapshot& snap, const ScenarioConfig& cfg) {
  return snap.admissible && sinr(snap, cfg) > cfg.gamma;
}

struct MetricEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const MetricEstimate&, const MetricEstimate&) = default;
};

enum class Metric { Capture, MeanInterference, BR, EE };

/// Pairwise summation; result independent of how samples were produced.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 64) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

inline MetricEstimate summarize(std::span<const double> samples, std::uint64_t seed) {
  const auto n = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  std::vector<double> sq(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - mean) * (samples[i] - mean);
  const double var = samples.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), samples.size(), seed};
}

/// Draws sample(rng_i) for i < n with per-index streams and summarizes.
template <class SampleFn>
MetricEstimate estimate_samples(std::uint64_t n, std::uint64_t seed, SampleFn&& sample,
                                unsigned threads = 0) {
  if (n < 100) throw DomainError("Monte Carlo needs at least 100 realizations");
  std::vector<double> values(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        Rng rng = make_stream(seed, i);
        values[i] = sample(rng);
      },
      threads);
  return summarize(values, seed);
}

inline MetricEstimate estimate(Metric metric, const ScenarioConfig& cfg, Scheme scheme,
                               const TrafficModel& tm, SimMode mode, std::uint64_t n_realizations,
                               std::uint64_t seed, unsigned threads = 0) {
  const double se = spectral_efficiency(cfg);
  const double b_ar = derive_scheme(cfg, scheme).b_ar;
  const double rho_watt = cfg.rho_vt * units::kMilliwattToWatt;
  return estimate_samples(
      n_realizations, seed,
      [&](Rng& rng) {
        const Snapshot snap = realize_snapshot(cfg, scheme, tm, mode, rng);
        switch (metric) {
          case Metric::MeanInterference:
            return interference_at(snap, cfg);
          case Metric::BR:
            return captured(snap, cfg) ? b_ar * se : 0.0;
          case Metric::EE:
            return captured(snap, cfg) ? se / rho_watt : 0.0;
          case Metric::Capture:
          default:
            return captured(snap, cfg) ? 1.0 : 0.0;
        }
      },
      threads);
}

/// Interferers of the analytic model at a fixed receiver/probe geometry.
inline Snapshot fixed_geometry_snapshot(const LaplaceQuery& q, const ScenarioConfig& cfg, Rng& rng) {
  Snapshot snap;
  snap.probe_tx = q.v;
  snap.receiver = q.x;
  detail::model_interferers(snap, cfg, q.scheme, derive_scheme(cfg, q.scheme).lambda_abs * q.p_a, rng);
  return snap;
}

/// Empirical E[exp(-s I(x))] at a fixed geometry.
inline MetricEstimate estimate_laplace(const LaplaceQuery& q, const ScenarioConfig& cfg,
                                       std::uint64_t n, std::uint64_t seed, unsigned threads = 0) {
  return estimate_samples(
      n, seed,
      [&](Rng& rng) { return std::exp(-q.s * interference_at(fixed_geometry_snapshot(q, cfg, rng), cfg)); },
      threads);
}

/// Empirical mean interference at a fixed geometry.
inline MetricEstimate estimate_mean_interference(const LaplaceQuery& q, const ScenarioConfig& cfg,
                                                 std::uint64_t n, std::uint64_t seed,
                                                 unsigned threads = 0) {
  return estimate_samples(
      n, seed, [&](Rng& rng) { return interference_at(fixed_geometry_snapshot(q, cfg, rng), cfg); },
      threads);
}

}  // namespace gloc::mc
