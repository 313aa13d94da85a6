#include "wavepalm/palm.hpp"

#include "wavepalm/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace wavepalm {

double rice_intensity(double var_z, double var_zt, double u) {
  if (!(var_z > 0.0) || !(var_zt > 0.0)) throw DomainError("rice_intensity: variances must be positive");
  return std::sqrt(var_zt / var_z) / std::numbers::pi * std::exp(-u * u / (2.0 * var_z));
}

double rayleigh_gauss_tail(double a, double b, double x) {
  if (!(a > 0.0)) throw DomainError("rayleigh_gauss_tail: a must be positive");
  const double sigma = std::hypot(a, b);
  return normal_cdf(-x / a) + std::exp(-x * x / (2.0 * sigma * sigma)) * (b / sigma) * normal_cdf(x * b / (sigma * a));
}

double slope_cdf_spatial(double lambda20, double w) {
  if (!(lambda20 > 0.0)) throw DomainError("slope_cdf_spatial: lambda20 must be positive");
  if (w >= 0.0) return 1.0;
  return std::exp(-w * w / (2.0 * lambda20));
}

double encountered_derivative_variance(const MomentSet& m, double v) {
  return v * v * m.l20() + 2.0 * v * m.l11() + m.l02();
}

double encountered_slope_correlation(const MomentSet& m, double v) {
  const double var = encountered_derivative_variance(m, v);
  if (!(var > 0.0) || !(m.l20() > 0.0))
    throw DegenerateModel("encountered process derivative is degenerate at this ship speed");
  return (v * m.l20() + m.l11()) / std::sqrt(m.l20() * var);
}

double slope_cdf_encountered(const MomentSet& m, double v, double w) {
  const double rho = encountered_slope_correlation(m, v);
  if (!(std::abs(rho) < 1.0)) throw DegenerateModel("encountered slope correlation has modulus one");
  if (w >= 0.0) return 1.0;
  const double s = std::sqrt(m.l20() * (1.0 - rho * rho));
  const double f =
      2.0 / (1.0 - rho) * (normal_cdf(w / s) - rho * std::exp(-w * w / (2.0 * m.l20())) * normal_cdf(rho * w / s));
  return std::clamp(f, 0.0, 1.0);
}

double velocity_cdf(const MomentSet& m, double v) {
  const double sigma2 = m.velocity_sigma2();
  if (!(m.l20() > 0.0) || !(sigma2 > 0.0)) throw DegenerateModel("velocity field is degenerate (sigma^2 <= 0)");
  const double d = v - m.mean_velocity();
  return 0.5 * (1.0 + d / std::sqrt(d * d + sigma2 / m.l20()));
}

double spatial_center_intensity(const MomentSet& m) { return 0.5 * rice_intensity(m.l00(), m.l20()); }

double encountered_center_intensity(const MomentSet& m, double v) {
  if (!(m.l00() > 0.0) || !(m.l20() > 0.0)) throw DegenerateModel("encountered intensity: moments must be positive");
  const double inner = v * v + 2.0 * v * m.l11() / m.l20() + m.l02() / m.l20();
  if (!(inner > 0.0)) throw DegenerateModel("encountered process derivative is degenerate at this ship speed");
  const double bracket = std::sqrt(inner) - m.l11() / m.l20() - v;
  return std::sqrt(m.l20() / m.l00()) / (4.0 * std::numbers::pi) * std::max(bracket, 0.0);
}

double TabulatedCdf::operator()(double x) const {
  if (grid.empty()) throw DomainError("TabulatedCdf: empty table");
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) return values.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

void TabulatedCdf::validate() const {
  if (grid.size() != values.size() || grid.empty()) throw DomainError("TabulatedCdf: grid/value size mismatch");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw DomainError("TabulatedCdf: value outside [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("TabulatedCdf: grid not strictly increasing");
    if (i > 0 && values[i] < values[i - 1]) throw DomainError("TabulatedCdf: values decrease");
  }
}

TabulatedCdf TabulatedCdf::tabulate(const std::function<double(double)>& cdf, double lo, double hi,
                                    std::size_t points) {
  if (points < 2 || !(hi > lo)) throw DomainError("TabulatedCdf::tabulate: need lo < hi and at least two points");
  TabulatedCdf t;
  t.grid.resize(points);
  t.values.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    t.grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    t.values[i] = cdf(t.grid[i]);
  }
  return t;
}

TabulatedCdf tabulate_slope_spatial(const MomentSet& m, std::size_t points) {
  const double sd = std::sqrt(m.l20());
  return TabulatedCdf::tabulate([&](double w) { return slope_cdf_spatial(m.l20(), w); }, -6.0 * sd, 6.0 * sd,
                                points);
}

TabulatedCdf tabulate_slope_encountered(const MomentSet& m, double v, std::size_t points) {
  const double sd = std::sqrt(m.l20());
  return TabulatedCdf::tabulate([&](double w) { return slope_cdf_encountered(m, v, w); }, -6.0 * sd, 6.0 * sd,
                                points);
}

TabulatedCdf tabulate_velocity(const MomentSet& m, std::size_t points) {
  const double scale = std::sqrt(m.velocity_sigma2() / m.l20());
  const double c = m.mean_velocity();
  return TabulatedCdf::tabulate([&](double v) { return velocity_cdf(m, v); }, c - 6.0 * scale, c + 6.0 * scale,
                                points);
}

void SlepianSlopeModel::validate() const {
  if (!(sigma_Y > 0.0) || !(sigma_Zt > 0.0)) throw DomainError("Slepian model: standard deviations must be positive");
  if (rho_ZY * rho_ZY + rho_ZtY * rho_ZtY > 1.0 + 1e-12)
    throw DomainError("Slepian model: rho_ZY^2 + rho_ZtY^2 exceeds one");
}

SlepianSlopeModel encountered_slope_model(const MomentSet& m, double v) {
  SlepianSlopeModel model;
  model.sigma_Y = std::sqrt(m.l20());
  model.sigma_Zt = std::sqrt(encountered_derivative_variance(m, v));
  model.rho_ZtY = encountered_slope_correlation(m, v);
  model.rho_ZY = 0.0;  // Cov(W, W_x) = 0 at a common point
  model.m_u = 0.0;
  return model;
}

SlepianSample slepian_sample(const SlepianSlopeModel& model, CrossingSide side, std::size_t n, std::uint64_t seed) {
  model.validate();
  std::mt19937_64 rng(seed);
  const double resid = std::sqrt(std::max(0.0, 1.0 - model.rho_ZY * model.rho_ZY - model.rho_ZtY * model.rho_ZtY));
  SlepianSample out;
  out.zt.resize(n);
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::sqrt(-2.0 * std::log(uniform_open(rng)));
    switch (side) {
      case CrossingSide::up:
        break;
      case CrossingSide::down:
        r = -r;
        break;
      case CrossingSide::both:
        if (uniform_open(rng) < 0.5) r = -r;
        break;
    }
    const double u = gaussian(rng);
    out.zt[i] = model.sigma_Zt * r;
    out.y[i] = model.m_u + model.sigma_Y * (model.rho_ZtY * r + resid * u);
  }
  return out;
}

}  // namespace wavepalm
