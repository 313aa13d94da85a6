#include "wavepalm/gauss_expect.hpp"
#include "wavepalm/normal.hpp"

#include "oracles/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wavepalm;

namespace {

GaussianVecd gaussian(std::initializer_list<double> mean, std::initializer_list<std::initializer_list<double>> cov) {
  GaussianVecd g;
  const auto n = static_cast<Index>(mean.size());
  g.mean.resize(n);
  g.cov.resize(n, n);
  Index i = 0;
  for (double m : mean) g.mean[i++] = m;
  i = 0;
  for (const auto& row : cov) {
    Index j = 0;
    for (double c : row) g.cov(i, j++) = c;
    ++i;
  }
  return g;
}

Mat random_spd(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Mat a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = z(rng);
  return a * a.transpose() / double(n) + 0.2 * Mat::Identity(n, n);
}

}  // namespace

TEST_CASE("conditioning textbook cases") {
  const std::vector<Index> second{1};
  SUBCASE("independent") {
    const auto g = condition(gaussian({0, 0}, {{1, 0}, {0, 1}}), second, Vec::Constant(1, 5.0));
    CHECK(g.mean[0] == doctest::Approx(0.0));
    CHECK(g.cov(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("correlated") {
    const auto g = condition(gaussian({0, 0}, {{1, 0.5}, {0.5, 1}}), second, Vec::Constant(1, 1.0));
    CHECK(g.mean[0] == doctest::Approx(0.5));
    CHECK(g.cov(0, 0) == doctest::Approx(0.75));
  }
  SUBCASE("perfectly correlated") {
    const auto g = condition(gaussian({0, 0}, {{1, 1}, {1, 1}}), second, Vec::Constant(1, 2.5));
    CHECK(g.mean[0] == doctest::Approx(2.5));
    CHECK(g.cov(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("singular conditioning block") {
    const std::vector<Index> both{0, 1};
    CHECK_THROWS_AS(condition(gaussian({0, 0, 0}, {{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}), both, Vec::Zero(2)),
                    SingularCovariance);
  }
}

TEST_CASE("conditional mean is affine and covariance does not depend on the values") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 10; ++trial) {
    GaussianVecd g;
    g.cov = random_spd(5, rng);
    g.mean = Vec::NullaryExpr(5, [&] { return z(rng); });
    const std::vector<Index> idx{1, 3};
    const Vec c1 = Vec::NullaryExpr(2, [&] { return z(rng); });
    const Vec c2 = Vec::NullaryExpr(2, [&] { return z(rng); });
    const auto a = condition(g, idx, c1);
    const auto b = condition(g, idx, c2);
    const auto mid = condition(g, idx, Vec(0.5 * (c1 + c2)));
    CHECK((mid.mean - 0.5 * (a.mean + b.mean)).norm() < 1e-12);
    CHECK((a.cov - b.cov).norm() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(a.cov).eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("multivariate normal density") {
  CHECK(mvn_density_at(gaussian({0}, {{1}}), Vec::Zero(1)) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  CHECK(mvn_density_at(gaussian({3}, {{2}}), Vec::Constant(1, 3.0)) ==
        doctest::Approx(mvn_density_at(gaussian({0}, {{2}}), Vec::Zero(1))));
  Vec x(2);
  x << 0.3, -1.1;
  CHECK(mvn_density_at(gaussian({0, 0}, {{1, 0}, {0, 4}}), x) ==
        doctest::Approx(normal_pdf(0.3) * normal_pdf(-1.1 / 2.0) / 2.0));
}

TEST_CASE("covariance repair") {
  Mat c(2, 2);
  c << 1, 1, 1, 1;
  const Mat r = repaired_covariance(c);
  CHECK(r(0, 0) > 1.0);
  Mat bad(2, 2);
  bad << 1, 0, 0, -0.1;
  CHECK_THROWS_AS(repaired_covariance(bad), SingularCovariance);

  // rescaling coordinates commutes with the repair
  Mat near(3, 3);
  near << 4, 2, 2, 2, 1, 1, 2, 1, 1;
  const Vec scale = Vec::LinSpaced(3, 1e-3, 10.0);
  const Mat scaled = repaired_covariance(Mat(scale.asDiagonal() * near * scale.asDiagonal()));
  const Mat back = scale.asDiagonal() * repaired_covariance(near) * scale.asDiagonal();
  CHECK((scaled - back).cwiseAbs().maxCoeff() <= 1e-14 * back.cwiseAbs().maxCoeff());
}

TEST_CASE("closed forms") {
  SUBCASE("half-normal mean") {
    ExpectationProblem p;
    p.joint = gaussian({0}, {{1}});
    p.factors = {{0, FactorSign::positive_part}};
    p.rel_precision = 2e-4;
    const auto e = rice_expectation(p, 1);
    CHECK(e.value == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)).epsilon(1e-3));
  }
  SUBCASE("half probability") {
    ExpectationProblem p;
    p.joint = gaussian({0}, {{1}});
    p.indicator = {0};
    p.rel_precision = 2e-4;
    CHECK(rice_expectation(p, 2).value == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("truncated mean after conditioning") {
    // X | Y = c ~ N(0.6 c, 0.64) for unit variances and correlation 0.6.
    const double c = 0.7, mu = 0.6 * c, sd = 0.8;
    ExpectationProblem p;
    p.joint = gaussian({0, 0}, {{1, 0.6}, {0.6, 1}});
    p.factors = {{0, FactorSign::positive_part}};
    p.conditioning = {1};
    p.conditioning_values = Vec::Constant(1, c);
    p.rel_precision = 1e-4;
    const auto e = rice_expectation(p, 3);
    const double exact = (mu * normal_cdf(mu / sd) + sd * normal_pdf(mu / sd)) * normal_pdf(c);
    CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error + 1e-12);
  }
  SUBCASE("orthant probability") {
    ExpectationProblem p;
    p.joint = gaussian({0, 0}, {{1, 0.5}, {0.5, 1}});
    p.indicator = {0, 1};
    p.rel_precision = 2e-4;
    CHECK(rice_expectation(p, 4).value == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  }
}

TEST_CASE("agreement with the slab rejection oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  ExpectationProblem p;
  p.joint.cov = random_spd(4, rng);
  p.joint.mean = Vec::NullaryExpr(4, [&] { return 0.3 * z(rng); });
  p.indicator = {0};
  p.factors = {{1, FactorSign::negative_part}, {2, FactorSign::positive_part}};
  p.conditioning = {3};
  p.conditioning_values = Vec::Constant(1, 0.2);
  p.rel_precision = 2e-3;
  const auto e = rice_expectation(p, 5);
  const auto o = oracle::slab_rejection(p, 200000, 32, 0.1, 6);
  CHECK(std::abs(e.value - o.value) <= 3.0 * std::hypot(e.std_error, o.std_error));
}

TEST_CASE("removing a constraint never lowers the estimate") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    ExpectationProblem p;
    p.joint.cov = random_spd(4, rng);
    p.joint.mean = Vec::Zero(4);
    p.indicator = {0, 1};
    p.factors = {{2, FactorSign::positive_part}};
    p.conditioning = {3};
    p.conditioning_values = Vec::Constant(1, 0.5);
    const auto tight = rice_expectation(p, 8);
    p.indicator = {0};
    p.carried = {1};
    const auto loose = rice_expectation(p, 8);
    CHECK(loose.value >= tight.value - 3.0 * std::hypot(loose.std_error, tight.std_error));
  }
}

TEST_CASE("weights and carried coordinates") {
  // E[X+ * 1{Y <= 0}] with Y carried and the indicator written as a weight.
  ExpectationProblem p;
  p.joint = gaussian({0, 0}, {{1, -0.4}, {-0.4, 1}});
  p.factors = {{0, FactorSign::positive_part}};
  p.indicator = {1};
  const auto direct = rice_expectation(p, 9);
  p.indicator.clear();
  p.carried = {1};
  p.weight = [](const Vec& x) { return x[1] <= 0.0 ? 1.0 : 0.0; };
  const auto weighted = rice_expectation(p, 9);
  CHECK(std::abs(direct.value - weighted.value) <= 3.0 * std::hypot(direct.std_error, weighted.std_error));
}

TEST_CASE("reproducibility and validation") {
  ExpectationProblem p;
  p.joint = gaussian({0.1, 0}, {{1, 0.3}, {0.3, 1}});
  p.indicator = {0};
  p.factors = {{1, FactorSign::negative_part}};
  const auto a = rice_expectation(p, 42);
  const auto b = rice_expectation(p, 42);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(rice_expectation(p, 43).value != a.value);

  const auto j = to_json(p);
  CHECK(j.contains("mean"));
  CHECK(j.contains("cov"));

  p.factors.clear();
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK_THROWS_AS(rice_expectation(p, 1), DomainError);
}
