#pragma once

#include "wavepalm/spectrum.hpp"
#include "wavepalm/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace wavepalm {

/// Expected number of u-crossings per unit parameter of a stationary Gaussian
/// process with the given variances. Up- and downcrossings each occur at half
/// this rate.
double rice_intensity(double var_z, double var_zt, double u = 0.0);

/// P(a U + b R+ > x) for independent standard Gaussian U and Rayleigh R+.
double rayleigh_gauss_tail(double a, double b, double x);

/// Palm CDF of the slope at wave centers (zero-downcrossings of W(., 0)).
double slope_cdf_spatial(double lambda20, double w);

/// Variance of d/dt W(vt, t).
double encountered_derivative_variance(const MomentSet& m, double v);

/// Correlation between d/dt W(vt, t) and W_x(vt, t). Throws DegenerateModel when
/// the encountered derivative has zero variance.
double encountered_slope_correlation(const MomentSet& m, double v);

/// Palm CDF of the slope at wave centers overtaking a ship of speed v.
double slope_cdf_encountered(const MomentSet& m, double v, double w);

/// Palm CDF of the wave velocity V = -W_t / W_x at wave centers.
double velocity_cdf(const MomentSet& m, double v);

/// Wave centers per meter along a transect at a fixed time.
double spatial_center_intensity(const MomentSet& m);

/// Wave centers overtaking a ship of speed v, per second.
double encountered_center_intensity(const MomentSet& m, double v);

/// Distribution function tabulated on a strictly increasing grid. Evaluation
/// between nodes is linear; outside the grid it is clamped to the end values.
struct TabulatedCdf {
  std::vector<double> grid;
  std::vector<double> values;

  double operator()(double x) const;
  /// Throws DomainError unless grid is strictly increasing and values form a CDF.
  void validate() const;

  static TabulatedCdf tabulate(const std::function<double(double)>& cdf, double lo, double hi,
                               std::size_t points = 512);
};

/// Default tables: 512 points over +-6 native scale units around the center.
TabulatedCdf tabulate_slope_spatial(const MomentSet& m, std::size_t points = 512);
TabulatedCdf tabulate_slope_encountered(const MomentSet& m, double v, std::size_t points = 512);
TabulatedCdf tabulate_velocity(const MomentSet& m, std::size_t points = 512);

/// Values of a correlated process Y and the derivative Z_t observed at a
/// randomly chosen u-crossing of Z.
struct SlepianSlopeModel {
  double m_u = 0.0;
  double sigma_Y = 1.0;
  double sigma_Zt = 1.0;
  double rho_ZY = 0.0;
  double rho_ZtY = 0.0;

  void validate() const;
};

/// Model for Y = W_x(vt, t) observed at zero-crossings of Z(t) = W(vt, t).
SlepianSlopeModel encountered_slope_model(const MomentSet& m, double v);

enum class CrossingSide { up, down, both };

struct SlepianSample {
  std::vector<double> zt;
  std::vector<double> y;
};

/// n independent draws of (Z_t^u, Y^u), restricted to up- or downcrossings if asked.
SlepianSample slepian_sample(const SlepianSlopeModel& model, CrossingSide side, std::size_t n, std::uint64_t seed);

}  // namespace wavepalm
