#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace wavepalm {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure (quadrature, root search) did not reach its target.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A covariance matrix that should be positive definite is not, beyond the
/// tolerated rounding level.
class SingularCovariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spectral moments describe a model in which a requested law does not exist
/// (zero velocity variance, degenerate encountered derivative, ...).
class DegenerateModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too few observations for an empirical estimator.
class InsufficientSamples : public std::runtime_error {
 public:
  InsufficientSamples(const std::string& what, std::size_t count)
      : std::runtime_error(what + " (got " + std::to_string(count) + ")"), count_(count) {}
  std::size_t count() const { return count_; }

 private:
  std::size_t count_;
};

/// SplitMix64 finalizer. Used to derive independent substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for substream `index` of a computation seeded with `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

}  // namespace wavepalm
