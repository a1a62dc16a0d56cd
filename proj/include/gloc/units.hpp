#pragma once

#include <cmath>
#include <limits>

namespace gloc::units {

// Power spectral densities are stored in mW/Hz; dBm/Hz only appears at I/O.
inline double db_to_linear(double db) {
  if (db == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double linear) {
  if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

inline double dbm_hz_to_mw_hz(double dbm_hz) { return db_to_linear(dbm_hz); }
inline double mw_hz_to_dbm_hz(double mw_hz) { return linear_to_db(mw_hz); }

inline constexpr double kMilliwattToWatt = 1e-3;

}  // namespace gloc::units
