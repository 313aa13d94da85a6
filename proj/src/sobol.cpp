#include "wavepalm/sobol.hpp"

#include <algorithm>
#include <bit>
#include <initializer_list>
#include <random>
#include <string>

namespace wavepalm {

namespace {

struct DirectionRow {
  std::uint32_t poly;
  std::initializer_list<std::uint32_t> m;
};

const DirectionRow kTable[] = {
#include "sobol_directions.inc"
};

static_assert(sizeof(kTable) / sizeof(kTable[0]) >= SobolSequence::kMaxDimensions);

std::array<std::uint32_t, 32> initial_directions(int d) {
  std::array<std::uint32_t, 32> v{};
  if (d == 0) {
    for (int j = 0; j < 32; ++j) v[j] = 1u << (31 - j);
    return v;
  }
  const auto& row = kTable[d];
  const int s = std::bit_width(row.poly) - 1;
  auto m = row.m.begin();
  for (int j = 0; j < s; ++j, ++m) v[j] = *m << (31 - j);
  for (int j = s; j < 32; ++j) {
    std::uint32_t next = v[j - s] ^ (v[j - s] >> s);
    for (int k = 1; k < s; ++k)
      if ((row.poly >> (s - k)) & 1u) next ^= v[j - k];
    v[j] = next;
  }
  return v;
}

const std::vector<std::array<std::uint32_t, 32>>& base_directions() {
  static const auto table = [] {
    std::vector<std::array<std::uint32_t, 32>> t;
    t.reserve(SobolSequence::kMaxDimensions);
    for (int d = 0; d < SobolSequence::kMaxDimensions; ++d) t.push_back(initial_directions(d));
    return t;
  }();
  return table;
}

}  // namespace

SobolSequence::SobolSequence(int dimensions) : dims_(dimensions) {
  if (dimensions < 1 || dimensions > kMaxDimensions)
    throw DomainError("Sobol sequence supports 1.." + std::to_string(kMaxDimensions) + " dimensions");
  const auto& base = base_directions();
  directions_.assign(base.begin(), base.begin() + dims_);
  shift_.assign(dims_, 0u);
}

SobolSequence SobolSequence::scrambled(int dimensions, std::uint64_t seed, std::uint64_t max_points) {
  SobolSequence seq(dimensions);
  seq.limit_ = std::clamp<std::uint64_t>(max_points, 1, 1ull << 32);
  // points below 2^used only touch the first `used` direction numbers
  const int used = std::bit_width(seq.limit_ - 1);
  std::mt19937_64 rng(seed);
  for (int d = 0; d < dimensions; ++d) {
    // lower-triangular scramble with unit diagonal; digit i is bit 31 - i
    std::array<std::uint32_t, 32> rows{};
    rows[0] = 1u << 31;
    for (int i = 1; i < 32; ++i) {
      const auto bits = static_cast<std::uint32_t>(rng() >> 32);
      const std::uint32_t above = ~((1u << (32 - i)) - 1u);
      rows[i] = (bits & above) | (1u << (31 - i));
    }
    // column b of the scramble matrix is the image of the single bit b
    std::array<std::uint32_t, 32> cols{};
    for (int i = 0; i < 32; ++i)
      for (std::uint32_t r = rows[i]; r != 0; r &= r - 1) cols[std::countr_zero(r)] |= 1u << (31 - i);
    for (int j = 0; j < 32; ++j) {
      auto& v = seq.directions_[d][j];
      if (j >= used) {
        v = 0;
        continue;
      }
      std::uint32_t out = 0;
      for (std::uint32_t b = v; b != 0; b &= b - 1) out ^= cols[std::countr_zero(b)];
      v = out;
    }
    seq.shift_[d] = static_cast<std::uint32_t>(rng() >> 32);
  }
  return seq;
}

void SobolSequence::point(std::uint32_t k, double* out) const {
  if (k >= limit_) throw DomainError("SobolSequence: point index beyond the scrambled range");
  const std::uint32_t gray = k ^ (k >> 1);
  for (int d = 0; d < dims_; ++d) {
    std::uint32_t x = shift_[d];
    for (std::uint32_t g = gray; g != 0; g &= g - 1) x ^= directions_[d][std::countr_zero(g)];
    out[d] = x * 0x1.0p-32;
  }
}

void SobolSequence::fill(std::uint32_t first, Mat& out) const {
  if (out.cols() != dims_) throw DomainError("SobolSequence::fill: column count mismatch");
  if (first + static_cast<std::uint64_t>(out.rows()) > limit_)
    throw DomainError("SobolSequence::fill: points beyond the scrambled range");
  std::vector<std::uint32_t> x(dims_);
  const std::uint32_t gray = first ^ (first >> 1);
  for (int d = 0; d < dims_; ++d) {
    x[d] = shift_[d];
    for (std::uint32_t g = gray; g != 0; g &= g - 1) x[d] ^= directions_[d][std::countr_zero(g)];
  }
  for (Index row = 0; row < out.rows(); ++row) {
    if (row > 0) {
      // Gray-code step from point k - 1 to k flips direction countr_zero(k)
      const int bit = std::countr_zero(static_cast<std::uint32_t>(first + row));
      for (int d = 0; d < dims_; ++d) x[d] ^= directions_[d][bit];
    }
    for (int d = 0; d < dims_; ++d) out(row, d) = x[d] * 0x1.0p-32;
  }
}

}  // namespace wavepalm
