#include "wavepalm/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wavepalm;

namespace {

const Spectrum& reference() {
  static const Spectrum sp([] {
    SpectrumConfig c;
    c.hs = 11.5;
    c.tp = 12.25;
    c.omega_c = 1.25;
    c.theta = std::numbers::pi;
    return c;
  }());
  return sp;
}

// Cov of two point functionals straight from the kernel derivatives.
double direct_covariance(const Spectrum& sp, const PointFunctional& f, const PointFunctional& g) {
  double c = 0.0;
  for (const auto& a : f.terms)
    for (const auto& b : g.terms) {
      const double sign = (a.dx + a.dt) % 2 ? -1.0 : 1.0;
      c += a.coef * b.coef * sign * sp.covariance(g.x - f.x, g.t - f.t, a.dx + b.dx, a.dt + b.dt);
    }
  return c;
}

}  // namespace

TEST_CASE("Chebyshev indicator grid") {
  const auto g = chebyshev_grid(12.0, 30.0, 16);
  REQUIRE(g.size() == 16);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g[i] > -12.0);
    CHECK(g[i] < 30.0);
    if (i > 0) CHECK(g[i] > g[i - 1]);
  }
}

TEST_CASE("assembled covariance") {
  const auto& sp = reference();
  const auto m = sp.moments();
  for (auto sampling : {Sampling::spatial, Sampling::encountered}) {
    GeometryQuery q{25.0, 18.0, 3.0, -2.0, 9.0, chebyshev_grid(25.0, 18.0, 12)};
    const auto a = assemble_covariance(sp, q, sampling);
    const Index n_t = sampling == Sampling::spatial ? 12 : 13;
    CHECK(a.n_t == n_t);
    CHECK(a.joint.dim() == n_t + 8);
    const Index c = a.c_begin();
    const Mat raw = functional_covariance(sp, a.functionals);
    CHECK(raw(c, c) == doctest::Approx(m.l20()).epsilon(1e-12));
    CHECK(raw(c + 2, c + 2) == doctest::Approx(m.l00()).epsilon(1e-12));
    // W_x(-r) and W(-r): odd derivative of an even kernel at lag zero
    CHECK(std::abs(raw(c, c + 2)) < 1e-14);
    CHECK((a.joint.cov - a.joint.cov.transpose()).norm() == 0.0);
    // entries before repair, against the kernel evaluated pair by pair
    double worst = 0.0;
    for (Index i = 0; i < raw.rows(); ++i)
      for (Index j = 0; j < raw.cols(); ++j) {
        const double ref = direct_covariance(sp, a.functionals[i], a.functionals[j]);
        const double scale = std::sqrt(std::abs(raw(i, i) * raw(j, j)));
        worst = std::max(worst, std::abs(raw(i, j) - ref) / scale);
      }
    CHECK(worst < 1e-10);
    // the repair only touches the diagonal, by at most the jitter
    const Mat diff = a.joint.cov - raw;
    const double n = double(raw.rows());
    CHECK((diff.diagonal().array() <= 1e-12 * n * raw.diagonal().array() * 1.001).all());
    CHECK((diff - Mat(diff.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-15 * raw.trace());
  }
}

TEST_CASE("functional covariance needs finite moments") {
  SpectrumConfig c;
  c.hs = 2.0;
  c.tp = 8.0;
  const Spectrum uncut(c);
  const std::vector<PointFunctional> f{{0.0, 0.0, {{1.0, 2, 0}}}};
  CHECK_THROWS_AS(functional_covariance(uncut, f), NumericError);
}

TEST_CASE("density outside the domain is zero") {
  const GeometryModel model(reference(), Sampling::spatial);
  CHECK(model.density(20.0, 20.0, 3.0, 1.0, 1).value == 0.0);
  CHECK(model.density(20.0, 20.0, -3.0, -1.0, 1).value == 0.0);
  CHECK(model.density(-1.0, 20.0, 3.0, -1.0, 1).value == 0.0);
}

TEST_CASE("densities are nonnegative and reproducible") {
  const GeometryModel model(reference(), Sampling::spatial);
  for (double r : {3.0, 20.0, 60.0})
    for (double u : {0.5, 4.0}) {
      const auto e = model.density(r, 22.0, u, -3.0, 7);
      CHECK(e.value >= 0.0);
      CHECK(e.std_error >= 0.0);
    }
  const auto a = model.density(20.0, 22.0, 4.0, -3.0, 7);
  const auto b = model.density(20.0, 22.0, 4.0, -3.0, 7);
  CHECK(a.value == b.value);
  CHECK(a.value > 0.0);
}

TEST_CASE("density does not depend on the center position") {
  DensityOptions shifted;
  shifted.origin = 137.5;
  const GeometryModel a(reference(), Sampling::encountered, 7.0);
  const GeometryModel b(reference(), Sampling::encountered, 7.0, shifted);
  const auto da = a.density(18.0, 25.0, 3.0, -4.0, 3);
  const auto db = b.density(18.0, 25.0, 3.0, -4.0, 3);
  // shifted lags differ by rounding, amplified by the near-singular grid block
  CHECK(std::abs(da.value - db.value) <= 1e-8 * da.value);
}

TEST_CASE("encountered density at zero speed is not the spatial one") {
  const GeometryModel spatial(reference(), Sampling::spatial);
  const GeometryModel encountered(reference(), Sampling::encountered, 0.0);
  const auto s = spatial.density(20.0, 20.0, 3.0, -3.0, 5);
  const auto e = encountered.density(20.0, 20.0, 3.0, -3.0, 5);
  CHECK(std::abs(s.value - e.value) > 5.0 * std::hypot(s.std_error, e.std_error));
}

TEST_CASE("Doppler identity at one point") {
  const GeometryModel model(reference(), Sampling::encountered, 7.0);
  const auto direct = model.density(22.0, 16.0, 3.5, -2.5, 11);
  const auto doppler = model.density_doppler(22.0, 16.0, 3.5, -2.5, 12);
  CHECK(std::abs(direct.value - doppler.value) <= 3.0 * std::hypot(direct.std_error, doppler.std_error));
}

TEST_CASE("coarser indicator grid bounds the density from above") {
  const GeometryModel model(reference(), Sampling::spatial);
  const double r = 25.0, s = 20.0, u = 3.0, w = -3.0;
  const auto coarse = model.density_on_grid(r, s, u, w, chebyshev_grid(r, s, 4), 1);
  const auto fine = model.density_on_grid(r, s, u, w, chebyshev_grid(r, s, 32), 2);
  CHECK(coarse.value >= fine.value - 3.0 * std::hypot(coarse.std_error, fine.std_error));
}

TEST_CASE("normalized and raw coordinates agree") {
  DensityOptions raw;
  raw.normalized = false;
  const GeometryModel a(reference(), Sampling::spatial);
  const GeometryModel b(reference(), Sampling::spatial, 0.0, raw);
  const auto da = a.density(15.0, 30.0, 2.0, -5.0, 4);
  const auto db = b.density(15.0, 30.0, 2.0, -5.0, 4);
  CHECK(std::abs(da.value - db.value) <= 3.0 * std::hypot(da.std_error, db.std_error));
  CHECK(a.denominator() == doctest::Approx(b.denominator()).epsilon(1e-9));
}

TEST_CASE("block evaluation matches single evaluation") {
  const GeometryModel model(reference(), Sampling::spatial);
  const std::vector<double> us{1.0, 3.0}, ws{-2.0, -0.5};
  const auto block = model.density_block(20.0, 20.0, us, ws, 9);
  REQUIRE(block.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto single = model.density(20.0, 20.0, us[k / 2], ws[k % 2], derive_seed(9, k));
    CHECK(std::abs(block[k].value - single.value) <= 3.0 * std::hypot(block[k].std_error, single.std_error));
  }
}

TEST_CASE("grid axes") {
  const auto g = gauss_axis(0.0, 2.0, 4, 3);
  double sum = 0.0;
  for (double w : g.weights) sum += w;
  CHECK(sum == doctest::Approx(2.0));
  CHECK(g.size() == 12);
  const auto l = log_axis(1.0, 100.0, 2);
  CHECK(l.edges[1] == doctest::Approx(10.0));
  CHECK(l.nodes[0] == doctest::Approx(std::sqrt(10.0)));
  const auto mid = midpoint_axis(0.0, 1.0, 4);
  CHECK(mid.nodes[0] == doctest::Approx(0.125));
}

TEST_CASE("half-wavelength and height marginal") {
  DensityGrid4 grid;
  grid.axes = {midpoint_axis(0, 40, 4), midpoint_axis(0, 40, 4), midpoint_axis(0, 8, 4), midpoint_axis(-8, 0, 4)};
  grid.values.assign(grid.size(), 0.0);
  grid.std_errors.assign(grid.size(), 0.0);
  grid.evaluated.assign(grid.size(), 1);

  SUBCASE("single cell") {
    grid.values[grid.index(1, 2, 0, 3)] = 2.0;  // r 15, s 25, u 1, w -1
    const auto m = marginal_halfwavelength_height(grid, {0, 20, 39, 41, 80}, {0, 1.5, 2.5, 16});
    CHECK(m.total_mass() == doctest::Approx(grid.total_mass()).epsilon(1e-12));
    CHECK(m.mass[2 * 3 + 1] == doctest::Approx(grid.total_mass()));
  }
  SUBCASE("mass conservation") {
    for (std::size_t k = 0; k < grid.size(); ++k) grid.values[k] = 1e-4 * double(k % 7);
    const auto m = marginal_halfwavelength_height(grid, 5, 3);
    CHECK(std::abs(m.total_mass() - grid.total_mass()) < 1e-12);
    double lsum = 0.0;
    for (double x : m.l_marginal()) lsum += x;
    CHECK(lsum == doctest::Approx(m.total_mass()));
  }
  SUBCASE("empty grid") {
    DensityGrid4 empty;
    CHECK_THROWS_AS(marginal_halfwavelength_height(empty, 4, 4), DomainError);
  }
}

TEST_CASE("grid evaluation is independent of threads") {
  const GeometryModel model(reference(), Sampling::spatial);
  const std::array<GridAxis, 4> axes{log_axis(5, 40, 2), log_axis(5, 40, 2), midpoint_axis(0, 6, 2),
                                     midpoint_axis(-6, 0, 2)};
  GridEvaluationOptions two;
  two.threads = 2;
  const auto a = evaluate_grid(model, axes, 21);
  const auto b = evaluate_grid(model, axes, 21, two);
  CHECK(a.values == b.values);
  CHECK(a.complete());
  for (double v : a.values) CHECK(v >= 0.0);
  const auto cm = cell_masses(a);
  double sum = 0.0;
  for (double x : cm.mass) sum += x;
  CHECK(sum == doctest::Approx(a.total_mass()));
}

TEST_CASE("importance-sampled integrals") {
  std::vector<Point4> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({10.0 + i, 12.0 + 0.5 * i, 1.0 + 0.1 * i, -1.0 - 0.05 * i});
  const LogKernelProposal q(pts);
  CHECK(q.density({20.0, 20.0, 2.0, -2.0}) > 0.0);
  CHECK(q.density({20.0, 20.0, -2.0, -2.0}) == 0.0);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto z = q.sample(rng);
    CHECK(z[0] > 0.0);
    CHECK(z[3] < 0.0);
  }
  const GeometryModel model(reference(), Sampling::spatial);
  const auto a = importance_integral(model, q, 40, 3);
  const auto b = importance_integral(model, q, 40, 3, {}, 2);
  CHECK(a.ratio == b.ratio);
  CHECK(a.mass() > 0.0);
  const auto cells = a.cell_masses({std::vector<double>{0, 30, 1e9}, {0, 1e9}, {0, 1e9}, {-1e9, 0}});
  CHECK(cells.mass[0] + cells.mass[1] == doctest::Approx(a.mass()));
}
