#pragma once

#include "wavepalm/quadrature.hpp"
#include "wavepalm/types.hpp"

#include <array>
#include <limits>

namespace wavepalm {

/// JONSWAP-family frequency spectrum for a unidirectional sea.
struct SpectrumConfig {
  double hs = 1.0;        ///< significant wave height [m]
  double tp = 10.0;       ///< peak period [s]
  double gamma = 1.0;     ///< peak enhancement
  double sigma_a = 0.07;  ///< spectral width below the peak
  double sigma_b = 0.09;  ///< spectral width above the peak
  double omega_c = std::numeric_limits<double>::infinity();  ///< cutoff [rad/s]; inf = none
  double theta = 0.0;     ///< wave direction [rad]
  double g = 9.81;        ///< gravitational acceleration [m/s^2]

  double peak_frequency() const;
  bool has_cutoff() const { return std::isfinite(omega_c); }
  /// Throws DomainError naming the first violated invariant.
  void validate() const;
};

/// Deep-water dispersion relation, wavenumber for angular frequency `omega`.
double dispersion(double omega, double g = 9.81);

/// S(omega) for `cfg`: Bretschneider base times the peak-enhancement factor,
/// rescaled so that the uncut spectrum has 4 sqrt(lambda00) = hs, then
/// truncated at omega_c.
double jonswap_density(const SpectrumConfig& cfg, double omega);

/// Spectral moments lambda_ij for i + j <= 4. Entries that diverge (no cutoff
/// and 2i + j >= 4) hold NaN.
struct MomentSet {
  std::array<std::array<double, 5>, 5> lambda{};

  double operator()(int i, int j) const { return lambda[i][j]; }
  double l00() const { return lambda[0][0]; }
  double l11() const { return lambda[1][1]; }
  double l20() const { return lambda[2][0]; }
  double l02() const { return lambda[0][2]; }

  /// Mean wave velocity -lambda11 / lambda20.
  double mean_velocity() const { return -l11() / l20(); }
  /// lambda02 - lambda11^2 / lambda20.
  double velocity_sigma2() const { return l02() - l11() * l11() / l20(); }
};

/// All partial derivatives of R at one (xi, tau): d[a][b] = d^{a+b} R / dxi^a dtau^b,
/// defined for a + b <= 4.
struct KernelDerivatives {
  std::array<std::array<double, 5>, 5> d{};
  double operator()(int a, int b) const { return d[a][b]; }
};

/// A unidirectional spectrum together with the quadrature rule used for every
/// moment and covariance evaluation.
///
/// The object represents S(omega) = amplitude * S_cfg(omega * frequency_scale),
/// with wavenumber kappa(omega) = (omega * frequency_scale)^2 / (g * length_scale).
/// The raw spectrum has all three scales equal to one; `rescaled` produces the
/// spectrum of the same sea in stretched space/time/elevation coordinates.
class Spectrum {
 public:
  explicit Spectrum(const SpectrumConfig& cfg);

  const SpectrumConfig& config() const { return cfg_; }
  double density(double omega) const;
  double wavenumber(double omega) const;
  double direction_cosine() const { return cos_theta_; }
  double gravity() const { return g_eff_; }
  /// Upper end of the support in this spectrum's frequency variable (inf if none).
  double cutoff() const;
  /// Lower end of the quadrature support; S is below 1e-130 of its peak there.
  double support_lower() const;

  /// lambda_ij. Throws NumericError if the moment diverges.
  double moment(int i, int j) const;
  MomentSet moments() const;

  /// d^{a+b} R / dxi^a dtau^b at (xi, tau), a + b <= 4.
  double covariance(double xi, double tau, int a, int b) const;
  KernelDerivatives kernel(double xi, double tau = 0.0) const;

  /// Relative disagreement between the working rule and a rule with doubled
  /// resolution, measured on the highest finite moments.
  double quadrature_residual() const { return residual_; }

  /// Spectrum of the same sea after x -> x * length_scale, t -> t * time_scale,
  /// W -> W / elevation_scale.
  Spectrum rescaled(double length_scale, double time_scale, double elevation_scale) const;

  const QuadratureRule& rule() const { return rule_; }
  /// Quadrature weights times S at the nodes.
  const Vec& measure() const { return measure_; }
  /// kappa(omega) cos(theta) at the nodes.
  const Vec& wavenumbers() const { return k_; }

 private:
  Spectrum() = default;
  void build_rule(int refinement);
  void precompute();

  SpectrumConfig cfg_;
  double norm_ = 1.0;  // JONSWAP rescaling constant
  double amp_ = 1.0;
  double freq_ = 1.0;
  double g_eff_ = 9.81;
  double cos_theta_ = 1.0;
  double residual_ = 0.0;
  QuadratureRule rule_;
  Vec measure_;
  Vec k_;
  std::array<std::array<Vec, 5>, 5> weighted_;  // measure * k^a * omega^b
};

/// lambda_ij of the spectrum described by `cfg`.
double spectral_moment(const SpectrumConfig& cfg, int i, int j);

/// d^{a+b} R / dxi^a dtau^b for the spectrum described by `cfg`.
double covariance(const SpectrumConfig& cfg, double xi, double tau, int a, int b);

struct NormalizationScales {
  double x_scale = 1.0;  ///< sqrt(lambda20 / lambda00) [1/m]
  double t_scale = 1.0;  ///< sqrt(lambda02 / lambda00) [1/s]
  double v_scale = 1.0;  ///< sqrt(lambda20 / lambda02) [s/m]
  double elevation_scale = 1.0;  ///< sqrt(lambda00) [m]
};

/// Spectrum in coordinates where lambda00 = lambda20 = lambda02 = 1.
struct NormalizedModel {
  Spectrum spectrum;
  NormalizationScales scales;
  double speed = 0.0;  ///< ship speed in normalized units
};

NormalizedModel normalize(const Spectrum& spectrum, double v = 0.0);
NormalizedModel normalize(const SpectrumConfig& cfg, double v = 0.0);

}  // namespace wavepalm
