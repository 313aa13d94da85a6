#pragma once

#include "wavepalm/geometry.hpp"
#include "wavepalm/palm.hpp"
#include "wavepalm/spectrum.hpp"
#include "wavepalm/types.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace wavepalm {

/// One realization of the sea as a finite sum of harmonics,
/// W(x, t) = sum_j a_j cos(omega_j t + k_j x) + b_j sin(omega_j t + k_j x),
/// where k_j = kappa(omega_j) cos(theta).
struct SeaRealization {
  Eigen::ArrayXd a;
  Eigen::ArrayXd b;
  Eigen::ArrayXd omega;
  Eigen::ArrayXd k;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(a.size()); }
};

/// Draws a realization with `n_components` harmonics. Frequencies are one
/// uniform draw per equal-energy stratum of S on (0, omega_c]; amplitudes are
/// independent N(0, lambda00 / n_components), so the ensemble covariance is
/// the kernel of `cfg`.
SeaRealization synthesize(const SpectrumConfig& cfg, std::size_t n_components, std::uint64_t seed);

/// W(x, t) = amplitude cos(omega t + k x). Testing hook.
SeaRealization single_harmonic(double amplitude, double omega, double k);

struct FieldValue {
  double w = 0.0;
  double wx = 0.0;
  double wt = 0.0;
  double wxx = 0.0;
};

/// Exact values of W and its partials by term-wise differentiation.
FieldValue evaluate(const SeaRealization& sea, double x, double t);

struct CrossingRecord {
  double location = 0.0;  ///< x of the center (spatial) or time t (encountered)
  double slope = 0.0;     ///< W_x at the center
  double velocity = 0.0;  ///< -W_t / W_x at the center
  double x2 = 0.0;        ///< distance back to the preceding maximum
  double x3 = 0.0;        ///< distance forward to the following minimum
  double h2 = 0.0;        ///< height of that maximum
  double h3 = 0.0;        ///< height of that minimum
};

struct ScanOptions {
  double step = 0.0;        ///< sampling step (m or s); 0 = shortest period / 16
  double max_search = 0.0;  ///< extremum search distance (m); 0 = 50 mean wavelengths
  /// Re-scan at half the step and fail if the number of crossings or extrema
  /// found changes.
  bool check_resolution = false;
};

struct ScanResult {
  std::vector<CrossingRecord> records;
  std::size_t censored = 0;  ///< centers whose extremum search gave up
  double extent = 0.0;       ///< length (m) or duration (s) scanned

  std::size_t centers() const { return records.size() + censored; }
};

/// Default x step: a sixteenth of the shortest wavelength present.
double default_space_step(const SeaRealization& sea);
/// Default t step for Z(t) = W(vt, t): a sixteenth of its shortest period.
double default_time_step(const SeaRealization& sea, double v);

/// Wave centers (zero-downcrossings of W(., 0)) in [x0, x1).
ScanResult find_centers_spatial(const SeaRealization& sea, double x0, double x1, const ScanOptions& opts = {});

/// Overtaking wave centers in [t0, t1): upcrossings of Z(t) = W(vt, t) with
/// W_x(vt, t) < 0. Geometry is read from the frozen profile W(., t) around vt.
ScanResult find_centers_encountered(const SeaRealization& sea, double v, double t0, double t1,
                                    const ScanOptions& opts = {});

struct SimulationOptions {
  std::size_t n_components = 2048;
  double window = 0.0;              ///< per-realization length (m) or duration (s); 0 = 200 mean periods
  std::size_t target_centers = 20000;
  std::size_t max_realizations = 100000;
  unsigned threads = 1;
  ScanOptions scan;
  /// Checked between batches; the result then holds fewer than target_centers.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct SimulationResult {
  std::vector<CrossingRecord> records;
  std::size_t censored = 0;
  std::size_t realizations = 0;
  double extent = 0.0;

  /// Centers per meter (spatial) or per second (encountered).
  double rate() const;
  /// Standard error of rate(), treating counts as Poisson.
  double rate_std_error() const;
  double censored_fraction() const;
};

/// Pools centers over independent realizations (seed derive_seed(seed, i) for
/// realization i) until `target_centers` records are collected. Realizations
/// run in fixed batches, so the result does not depend on `threads`.
SimulationResult simulate_spatial(const SpectrumConfig& cfg, std::uint64_t seed, const SimulationOptions& opts = {});
SimulationResult simulate_encountered(const SpectrumConfig& cfg, double v, std::uint64_t seed,
                                      const SimulationOptions& opts = {});

enum class RecordField { slope, velocity, x2, x3, h2, h3 };

double field_value(const CrossingRecord& r, RecordField f);
std::vector<double> field_values(std::span<const CrossingRecord> records, RecordField f);

/// Empirical Palm distribution function on `grid` with binomial standard errors.
struct EmpiricalCdf {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::size_t count = 0;

  TabulatedCdf table() const { return {grid, values}; }
};

/// Throws InsufficientSamples below 100 records.
EmpiricalCdf empirical_palm_cdf(std::span<const CrossingRecord> records, RecordField f,
                                std::span<const double> grid);

/// sup_x |F_n(x) - F(x)| for the empirical distribution of `sample`, exact
/// for continuous F (checked on both sides of every jump).
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Histogram of (x2, x3, H2, H3) over the cells given by the axes' edges,
/// normalized by the total record count (records outside the axes count in
/// the total but in no cell), with multinomial standard errors.
DensityGrid4 empirical_density4(std::span<const CrossingRecord> records, const std::array<GridAxis, 4>& axes);

}  // namespace wavepalm
