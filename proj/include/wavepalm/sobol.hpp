#pragma once

#include "wavepalm/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wavepalm {

/// Sobol' points (Joe-Kuo direction numbers, Gray-code order) with optional
/// random linear matrix scrambling and digital shift.
class SobolSequence {
 public:
  static constexpr int kMaxDimensions = 1024;

  explicit SobolSequence(int dimensions);
  /// Independent randomization drawn from `seed`. Only the direction numbers
  /// needed for the first `max_points` points are scrambled; later points throw.
  static SobolSequence scrambled(int dimensions, std::uint64_t seed, std::uint64_t max_points = 1ull << 32);

  int dimensions() const { return dims_; }

  /// Point number k in [0, 1)^d. Unscrambled values are exact dyadic rationals.
  void point(std::uint32_t k, double* out) const;
  /// Rows of `out` receive points first, first + 1, ... (out has `dimensions()` columns).
  void fill(std::uint32_t first, Mat& out) const;

 private:
  int dims_;
  std::uint64_t limit_ = 1ull << 32;
  std::vector<std::array<std::uint32_t, 32>> directions_;
  std::vector<std::uint32_t> shift_;
};

}  // namespace wavepalm
