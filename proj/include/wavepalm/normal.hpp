#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace wavepalm {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal distribution function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse of normal_cdf, Wichura's AS241 (relative accuracy about 1e-16).
/// Returns -inf / +inf at p = 0 / 1.
double normal_quantile(double p);

/// Uniform on the open interval (0, 1) with 53 random bits.
inline double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard Gaussian draw by inversion. Portable across standard libraries,
/// unlike std::normal_distribution.
inline double gaussian(std::mt19937_64& rng) { return normal_quantile(uniform_open(rng)); }

}  // namespace wavepalm
