#include "wavepalm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace wavepalm {

namespace {

constexpr int kPointsPerPanel = 12;
constexpr double kPi = std::numbers::pi;

// Lower end of the support as a fraction of the peak frequency:
// exp(-1.25 * 4^4) ~ 1e-139.
constexpr double kLowerFraction = 0.25;
// Where the finite part of an uncut rule hands over to the tail map.
constexpr double kTailStart = 8.0;

double shape(const SpectrumConfig& cfg, double omega) {
  if (omega <= 0.0) return 0.0;
  const double wp = cfg.peak_frequency();
  const double ratio = wp / omega;
  const double r4 = ratio * ratio * ratio * ratio;
  const double base = 5.0 / 16.0 * cfg.hs * cfg.hs * r4 / omega * std::exp(-1.25 * r4);
  if (cfg.gamma == 1.0) return base;
  const double sigma = omega <= wp ? cfg.sigma_a : cfg.sigma_b;
  const double dev = (omega - wp) / (sigma * wp);
  return base * std::pow(cfg.gamma, std::exp(-0.5 * dev * dev));
}

// Panel breaks on [lo, hi] in raw frequency: fine panels around the peak where
// the enhancement factor varies on the scale sigma * wp, coarse elsewhere.
std::vector<double> spectral_breaks(const SpectrumConfig& cfg, double hi, int refinement) {
  const double wp = cfg.peak_frequency();
  const double lo = kLowerFraction * wp;
  const double scale = std::ldexp(1.0, -refinement);
  const double coarse = 0.04 * wp * scale;
  const double fine_a = std::min(0.5 * cfg.sigma_a * wp * scale, coarse);
  const double fine_b = std::min(0.5 * cfg.sigma_b * wp * scale, coarse);
  const double zone_lo = wp * (1.0 - 8.0 * cfg.sigma_a);
  const double zone_hi = wp * (1.0 + 8.0 * cfg.sigma_b);

  std::vector<double> breaks{lo};
  auto fill_to = [&](double end, double width) {
    end = std::min(end, hi);
    const double start = breaks.back();
    if (end <= start) return;
    const int n = std::max(1, static_cast<int>(std::ceil((end - start) / width)));
    for (int i = 1; i <= n; ++i) breaks.push_back(start + (end - start) * i / n);
  };
  if (cfg.gamma == 1.0) {
    fill_to(wp, coarse);
    fill_to(hi, coarse);
  } else {
    fill_to(zone_lo, coarse);
    fill_to(wp, fine_a);
    fill_to(zone_hi, fine_b);
    fill_to(hi, coarse);
  }
  return breaks;
}

QuadratureRule raw_rule(const SpectrumConfig& cfg, bool truncate, int refinement) {
  const double wp = cfg.peak_frequency();
  if (truncate && cfg.has_cutoff()) {
    const auto breaks = spectral_breaks(cfg, cfg.omega_c, refinement);
    return composite_gauss_legendre(breaks, kPointsPerPanel);
  }
  const auto breaks = spectral_breaks(cfg, kTailStart * wp, refinement);
  auto body = composite_gauss_legendre(breaks, kPointsPerPanel);
  const auto tail = gauss_legendre_tail(8 << refinement, kPointsPerPanel, kTailStart * wp);
  QuadratureRule rule{Vec(body.size() + tail.size()), Vec(body.size() + tail.size())};
  rule.nodes << body.nodes, tail.nodes;
  rule.weights << body.weights, tail.weights;
  return rule;
}

// Rescaling constant making the uncut spectrum integrate to hs^2 / 16.
double jonswap_normalization(const SpectrumConfig& cfg) {
  const auto rule = raw_rule(cfg, false, 1);
  const double total = rule.integrate([&](double w) { return shape(cfg, w); });
  return cfg.hs * cfg.hs / 16.0 / total;
}

bool moment_diverges(const SpectrumConfig& cfg, int a, int b) {
  return !cfg.has_cutoff() && 2 * a + b >= 4;
}

void check_order(int a, int b) {
  if (a < 0 || b < 0 || a + b > 4)
    throw DomainError("derivative orders must satisfy 0 <= a, b and a + b <= 4 (got " +
                      std::to_string(a) + ", " + std::to_string(b) + ")");
}

}  // namespace

double SpectrumConfig::peak_frequency() const { return 2.0 * kPi / tp; }

void SpectrumConfig::validate() const {
  auto fail = [](const std::string& msg) { throw DomainError("spectrum config: " + msg); };
  if (!(hs > 0.0)) fail("hs must be > 0");
  if (!(tp > 0.0)) fail("tp must be > 0");
  if (!(gamma >= 1.0)) fail("gamma must be >= 1");
  if (!(sigma_a > 0.0 && sigma_a < 1.0)) fail("sigma_a must lie in (0, 1)");
  if (!(sigma_b > 0.0 && sigma_b < 1.0)) fail("sigma_b must lie in (0, 1)");
  if (!(omega_c > peak_frequency())) fail("omega_c must exceed 2 pi / tp");
  if (!(theta >= 0.0 && theta <= 2.0 * kPi)) fail("theta must lie in [0, 2 pi]");
  if (!(g > 0.0)) fail("g must be > 0");
}

double dispersion(double omega, double g) {
  if (omega < 0.0) throw DomainError("dispersion: omega must be >= 0");
  return omega * omega / g;
}

double jonswap_density(const SpectrumConfig& cfg, double omega) {
  cfg.validate();
  if (omega < 0.0) throw DomainError("jonswap_density: omega must be >= 0");
  if (omega == 0.0 || omega > cfg.omega_c) return 0.0;
  return jonswap_normalization(cfg) * shape(cfg, omega);
}

//////////////////////////////////////////////////

Spectrum::Spectrum(const SpectrumConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  norm_ = jonswap_normalization(cfg_);
  g_eff_ = cfg_.g;
  cos_theta_ = std::cos(cfg_.theta);

  // residual against a rule with twice as many panels
  build_rule(1);
  const MomentSet fine = moments();
  build_rule(0);
  const MomentSet coarse = moments();
  residual_ = 0.0;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j) {
      if (moment_diverges(cfg_, i, j) || fine(i, j) == 0.0) continue;
      residual_ = std::max(residual_, std::abs(coarse(i, j) - fine(i, j)) / std::abs(fine(i, j)));
    }
  if (residual_ > 1e-8)
    throw NumericError("spectral quadrature did not converge", residual_);
}

void Spectrum::build_rule(int refinement) {
  rule_ = raw_rule(cfg_, true, refinement);
  precompute();
}

void Spectrum::precompute() {
  const Index n = rule_.size();
  measure_.resize(n);
  k_.resize(n);
  for (Index q = 0; q < n; ++q) {
    measure_[q] = rule_.weights[q] * density(rule_.nodes[q]);
    k_[q] = wavenumber(rule_.nodes[q]) * cos_theta_;
  }
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b)
      weighted_[a][b] = (measure_.array() * k_.array().pow(a) * rule_.nodes.array().pow(b)).matrix();
}

double Spectrum::density(double omega) const {
  if (omega < 0.0) throw DomainError("spectral density: omega must be >= 0");
  const double raw = omega * freq_;
  if (raw == 0.0 || raw > cfg_.omega_c) return 0.0;
  return amp_ * norm_ * shape(cfg_, raw);
}

double Spectrum::wavenumber(double omega) const { return omega * omega / g_eff_; }

double Spectrum::cutoff() const { return cfg_.omega_c / freq_; }

double Spectrum::support_lower() const { return kLowerFraction * cfg_.peak_frequency() / freq_; }

double Spectrum::moment(int i, int j) const {
  if (i < 0 || j < 0 || i + j > 4)
    throw DomainError("spectral moment: need i, j >= 0 and i + j <= 4");
  if (moment_diverges(cfg_, i, j))
    throw NumericError("spectral moment lambda_" + std::to_string(i) + std::to_string(j) +
                           " diverges without a cutoff frequency",
                       std::numeric_limits<double>::infinity());
  return weighted_[i][j].sum();
}

MomentSet Spectrum::moments() const {
  MomentSet m;
  for (auto& row : m.lambda) row.fill(std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      if (!moment_diverges(cfg_, i, j)) m.lambda[i][j] = weighted_[i][j].sum();
  return m;
}

double Spectrum::covariance(double xi, double tau, int a, int b) const {
  check_order(a, b);
  if (moment_diverges(cfg_, a, b))
    throw NumericError("covariance derivative diverges without a cutoff frequency",
                       std::numeric_limits<double>::infinity());
  const Eigen::ArrayXd phase = k_.array() * xi + rule_.nodes.array() * tau;
  const auto& w = weighted_[a][b].array();
  // d^n/dphi^n cos(phi) = cos(phi + n pi / 2)
  switch ((a + b) % 4) {
    case 0: return (w * phase.cos()).sum();
    case 1: return -(w * phase.sin()).sum();
    case 2: return -(w * phase.cos()).sum();
    default: return (w * phase.sin()).sum();
  }
}

KernelDerivatives Spectrum::kernel(double xi, double tau) const {
  const Eigen::ArrayXd phase = k_.array() * xi + rule_.nodes.array() * tau;
  const Eigen::ArrayXd c = phase.cos();
  const Eigen::ArrayXd s = phase.sin();
  KernelDerivatives out;
  for (auto& row : out.d) row.fill(std::numeric_limits<double>::quiet_NaN());
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      if (moment_diverges(cfg_, a, b)) continue;
      const auto& w = weighted_[a][b].array();
      switch ((a + b) % 4) {
        case 0: out.d[a][b] = (w * c).sum(); break;
        case 1: out.d[a][b] = -(w * s).sum(); break;
        case 2: out.d[a][b] = -(w * c).sum(); break;
        default: out.d[a][b] = (w * s).sum(); break;
      }
    }
  return out;
}

Spectrum Spectrum::rescaled(double length_scale, double time_scale, double elevation_scale) const {
  if (!(length_scale > 0.0 && time_scale > 0.0 && elevation_scale > 0.0))
    throw DomainError("rescaled: scales must be positive");
  Spectrum out = *this;
  const double e2 = elevation_scale * elevation_scale;
  out.amp_ = amp_ * time_scale / e2;
  out.freq_ = freq_ * time_scale;
  out.g_eff_ = g_eff_ * length_scale / (time_scale * time_scale);
  out.rule_.nodes = rule_.nodes / time_scale;
  out.rule_.weights = rule_.weights / time_scale;
  out.precompute();
  return out;
}

//////////////////////////////////////////////////

double spectral_moment(const SpectrumConfig& cfg, int i, int j) { return Spectrum(cfg).moment(i, j); }

double covariance(const SpectrumConfig& cfg, double xi, double tau, int a, int b) {
  check_order(a, b);
  return Spectrum(cfg).covariance(xi, tau, a, b);
}

NormalizedModel normalize(const Spectrum& spectrum, double v) {
  const double l00 = spectrum.moment(0, 0);
  const double l20 = spectrum.moment(2, 0);
  const double l02 = spectrum.moment(0, 2);
  if (!(l00 > 0.0 && l20 > 0.0 && l02 > 0.0))
    throw DegenerateModel("normalize: lambda00, lambda20 and lambda02 must be positive");
  NormalizationScales scales;
  scales.x_scale = std::sqrt(l20 / l00);
  scales.t_scale = std::sqrt(l02 / l00);
  scales.v_scale = std::sqrt(l20 / l02);
  scales.elevation_scale = std::sqrt(l00);
  return NormalizedModel{spectrum.rescaled(scales.x_scale, scales.t_scale, scales.elevation_scale), scales,
                         v * scales.v_scale};
}

NormalizedModel normalize(const SpectrumConfig& cfg, double v) { return normalize(Spectrum(cfg), v); }

}  // namespace wavepalm
