#include "wavepalm/normal.hpp"
#include "wavepalm/palm.hpp"

#include "oracles/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace wavepalm;

namespace {

MomentSet reference_moments() {
  SpectrumConfig c;
  c.hs = 11.5;
  c.tp = 12.25;
  c.omega_c = 1.25;
  c.theta = std::numbers::pi;
  return Spectrum(c).moments();
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sd_of_mean(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1) / double(v.size()));
}

}  // namespace

TEST_CASE("Rice intensity") {
  const auto m = reference_moments();
  const double zero = rice_intensity(m.l00(), m.l20());
  CHECK(zero == doctest::Approx(std::sqrt(m.l20() / m.l00()) / std::numbers::pi));
  CHECK(0.5 * zero == doctest::Approx(spatial_center_intensity(m)));
  CHECK(rice_intensity(m.l00(), m.l20(), std::sqrt(m.l00())) == doctest::Approx(zero * std::exp(-0.5)));
  CHECK(rice_intensity(m.l00(), m.l20(), 1e3) < 1e-100);
  CHECK_THROWS_AS(rice_intensity(0.0, 1.0), DomainError);
}

TEST_CASE("Rayleigh-Gauss tail") {
  CHECK(rayleigh_gauss_tail(1.3, 0.0, 0.7) == doctest::Approx(normal_cdf(-0.7 / 1.3)));
  const double a = 0.8, b = 0.6;
  CHECK(rayleigh_gauss_tail(a, b, 0.0) == doctest::Approx(0.5 + b / (2.0 * std::hypot(a, b))));
  CHECK(rayleigh_gauss_tail(1e-6, 1.0, 1.5) == doctest::Approx(std::exp(-1.5 * 1.5 / 2.0)).epsilon(1e-5));
  CHECK_THROWS_AS(rayleigh_gauss_tail(0.0, 1.0, 0.0), DomainError);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 4; ++i) {
    const double aa = 0.2 + 2.0 * u(rng), bb = 2.0 * u(rng), x = -2.0 + 4.0 * u(rng);
    const auto mc = oracle::rayleigh_gauss_tail_mc(aa, bb, x, 10'000'000, 100 + i);
    CHECK(std::abs(rayleigh_gauss_tail(aa, bb, x) - mc.value) <= 3.0 * mc.std_error);
  }
}

TEST_CASE("spatial slope law") {
  const double l20 = 0.0207903;
  CHECK(slope_cdf_spatial(l20, 0.0) == 1.0);
  CHECK(slope_cdf_spatial(l20, 0.3) == 1.0);
  CHECK(slope_cdf_spatial(l20, -std::sqrt(l20)) == doctest::Approx(std::exp(-0.5)));
  CHECK(slope_cdf_spatial(l20, -50.0) == 0.0);
  // The negative-Rayleigh density integrates to the closed form.
  const double s = std::sqrt(l20);
  const double mass = oracle::adaptive_simpson(
      [&](double w) { return -w / l20 * std::exp(-w * w / (2 * l20)); }, -12.0 * s, -s, 1e-13);
  CHECK(mass == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
}

TEST_CASE("encountered slope law") {
  const auto m = reference_moments();
  for (double v : {0.0, 7.0, 13.0, 16.0}) {
    CAPTURE(v);
    CHECK(slope_cdf_encountered(m, v, 0.0) == 1.0);
    CHECK(slope_cdf_encountered(m, v, 1.0) == 1.0);
    CHECK(slope_cdf_encountered(m, v, -1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(slope_cdf_encountered(m, v, -10.0) < 1e-12);
    const auto t = tabulate_slope_encountered(m, v);
    CHECK(t.grid.size() == 512);
    CHECK_NOTHROW(t.validate());
  }
}

TEST_CASE("encountered slope law matches the Slepian representation") {
  const auto m = reference_moments();
  for (double v : {0.0, 13.0}) {
    const auto model = encountered_slope_model(m, v);
    const auto s = slepian_sample(model, CrossingSide::up, 400000, 31);
    std::vector<double> slopes;
    for (double y : s.y)
      if (y < 0.0) slopes.push_back(y);
    std::sort(slopes.begin(), slopes.end());
    double sup = 0.0;
    for (std::size_t i = 0; i < slopes.size(); i += 97) {
      const double f = slope_cdf_encountered(m, v, slopes[i]);
      sup = std::max(sup, std::abs(f - double(i + 1) / double(slopes.size())));
    }
    CAPTURE(v);
    CHECK(sup < 5.0 * 0.5 / std::sqrt(double(slopes.size())));
  }
}

TEST_CASE("ship speed shifts encountered slopes toward less steep waves") {
  const auto m = reference_moments();
  const auto grid = tabulate_slope_spatial(m).grid;
  const double speeds[] = {0.0, 7.0, 13.0, 16.0};
  for (double w : grid)
    for (int i = 0; i + 1 < 4; ++i)
      CHECK(slope_cdf_encountered(m, speeds[i + 1], w) <= slope_cdf_encountered(m, speeds[i], w) + 1e-15);
}

TEST_CASE("spatial and encountered slope laws differ at zero speed") {
  const auto m = reference_moments();
  double sup = 0.0, at = 0.0;
  for (double w : tabulate_slope_spatial(m).grid) {
    const double d = std::abs(slope_cdf_spatial(m.l20(), w) - slope_cdf_encountered(m, 0.0, w));
    if (d > sup) sup = d, at = slope_cdf_spatial(m.l20(), w);
  }
  // five binomial standard errors at 2e4 centers, at the point of largest difference
  CHECK(sup > 5.0 * std::sqrt(at * (1.0 - at) / 2e4));
}

TEST_CASE("velocity law") {
  const auto m = reference_moments();
  CHECK(velocity_cdf(m, m.mean_velocity()) == doctest::Approx(0.5));
  CHECK(velocity_cdf(m, 1e6) == doctest::Approx(1.0));
  CHECK(velocity_cdf(m, -1e6) == doctest::Approx(0.0));
  const auto t = tabulate_velocity(m);
  CHECK_NOTHROW(t.validate());
  for (std::size_t i = 1; i < t.values.size(); ++i) CHECK(t.values[i] > t.values[i - 1]);

  MomentSet flat = m;
  flat.lambda[0][2] = m.l11() * m.l11() / m.l20();
  CHECK_THROWS_AS(velocity_cdf(flat, 1.0), DegenerateModel);
}

TEST_CASE("encountered center intensity") {
  const auto m = reference_moments();
  const double zero = std::sqrt(m.l20() / m.l00()) / (4 * std::numbers::pi) *
                      (std::sqrt(m.l02() / m.l20()) - m.l11() / m.l20());
  CHECK(encountered_center_intensity(m, 0.0) == doctest::Approx(zero).epsilon(1e-12));
  CHECK(encountered_center_intensity(m, 0.0) == doctest::Approx(0.101944).epsilon(1e-5));
  CHECK(encountered_center_intensity(m, 7.0) == doctest::Approx(0.0474019).epsilon(1e-5));
  double prev = encountered_center_intensity(m, 0.0);
  for (double v = 0.5; v <= 40.0; v += 0.5) {
    const double cur = encountered_center_intensity(m, v);
    CHECK(cur >= 0.0);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("Slepian sampler") {
  SlepianSlopeModel model;
  model.sigma_Zt = 1.7;
  model.sigma_Y = 0.9;
  model.rho_ZtY = 0.45;
  const std::size_t n = 1'000'000;
  const auto both = slepian_sample(model, CrossingSide::both, n, 1);
  CHECK(std::abs(mean(both.zt)) < 3.0 * sd_of_mean(both.zt));
  const auto up = slepian_sample(model, CrossingSide::up, n, 2);
  CHECK(std::abs(mean(up.zt) - model.sigma_Zt * std::sqrt(std::numbers::pi / 2)) < 3.0 * sd_of_mean(up.zt));
  std::size_t pos = 0;
  for (double y : up.y) pos += y > 0.0;
  const double p = double(pos) / double(n);
  CHECK(std::abs(p - (0.5 + model.rho_ZtY / 2)) < 3.0 * std::sqrt(p * (1 - p) / double(n)));

  model.rho_ZY = 0.95;
  CHECK_THROWS_AS(slepian_sample(model, CrossingSide::up, 10, 1), DomainError);
  const auto again = slepian_sample(encountered_slope_model(reference_moments(), 7.0), CrossingSide::up, 100, 3);
  CHECK(again.y == slepian_sample(encountered_slope_model(reference_moments(), 7.0), CrossingSide::up, 100, 3).y);
}

TEST_CASE("tabulated distribution functions") {
  TabulatedCdf t{{0.0, 1.0, 2.0}, {0.0, 0.5, 1.0}};
  CHECK(t(0.5) == doctest::Approx(0.25));
  CHECK(t(-3.0) == 0.0);
  CHECK(t(9.0) == 1.0);
  TabulatedCdf bad{{0.0, 1.0}, {0.6, 0.4}};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
