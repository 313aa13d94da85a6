#pragma once

#include "wavepalm/types.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace wavepalm {

template <typename Scalar = double>
struct GaussianVec {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  VectorType mean;
  MatrixType cov;

  Index dim() const { return mean.size(); }
};

using GaussianVecd = GaussianVec<double>;

/// Rounding-level repair of a covariance matrix, judged on its correlation
/// form so that rescaling a coordinate never changes the result. Correlation
/// eigenvalues in [-1e-10 n, 0] get 1e-12 n times each variance added to the
/// diagonal; anything more negative is reported as SingularCovariance.
template <typename Derived>
typename Derived::PlainObject repaired_covariance(const Eigen::MatrixBase<Derived>& cov) {
  using Plain = typename Derived::PlainObject;
  using Scalar = typename Derived::Scalar;
  Plain out = Scalar(0.5) * (cov + cov.transpose());
  const auto n = out.rows();
  if (n == 0) return out;
  const Scalar fallback = std::sqrt(std::max(out.trace() / Scalar(n), std::numeric_limits<Scalar>::min()));
  auto sd = out.diagonal().array().max(Scalar(0)).sqrt().eval();
  sd = (sd > Scalar(0)).select(sd, fallback);
  const Plain corr = sd.inverse().matrix().asDiagonal() * out * sd.inverse().matrix().asDiagonal();
  if (Eigen::LLT<Plain>(corr).info() == Eigen::Success) return out;
  const Scalar smallest = Eigen::SelfAdjointEigenSolver<Plain>(corr, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (smallest < Scalar(-1e-10) * Scalar(n))
    throw SingularCovariance("correlation matrix has eigenvalue " + std::to_string(double(smallest)) +
                             " below the repair threshold -1e-10 * dimension");
  if (smallest <= Scalar(0)) out.diagonal().array() += Scalar(1e-12) * Scalar(n) * sd.square();
  return out;
}

/// Distribution of the coordinates not in `cond_idx`, given that those in
/// `cond_idx` equal `values` (Gaussian regression). Remaining coordinates keep
/// their relative order.
template <typename Scalar>
GaussianVec<Scalar> condition(const GaussianVec<Scalar>& joint, std::span<const Index> cond_idx,
                              const typename GaussianVec<Scalar>::VectorType& values) {
  using VectorType = typename GaussianVec<Scalar>::VectorType;
  using MatrixType = typename GaussianVec<Scalar>::MatrixType;
  const Index n = joint.dim();
  const auto nc = static_cast<Index>(cond_idx.size());
  if (values.size() != nc) throw DomainError("condition: one value per conditioning index required");
  std::vector<char> is_cond(n, 0);
  for (Index c : cond_idx) {
    if (c < 0 || c >= n || is_cond[c]) throw DomainError("condition: invalid or repeated conditioning index");
    is_cond[c] = 1;
  }
  std::vector<Index> free_idx;
  for (Index i = 0; i < n; ++i)
    if (!is_cond[i]) free_idx.push_back(i);
  const auto nf = static_cast<Index>(free_idx.size());

  MatrixType s_cc(nc, nc), s_fc(nf, nc);
  VectorType resid(nc);
  for (Index a = 0; a < nc; ++a) {
    resid[a] = values[a] - joint.mean[cond_idx[a]];
    for (Index b = 0; b < nc; ++b) s_cc(a, b) = joint.cov(cond_idx[a], cond_idx[b]);
    for (Index f = 0; f < nf; ++f) s_fc(f, a) = joint.cov(free_idx[f], cond_idx[a]);
  }

  GaussianVec<Scalar> out;
  out.mean.resize(nf);
  out.cov.resize(nf, nf);
  for (Index f = 0; f < nf; ++f) {
    out.mean[f] = joint.mean[free_idx[f]];
    for (Index g = 0; g < nf; ++g) out.cov(f, g) = joint.cov(free_idx[f], free_idx[g]);
  }
  if (nc == 0) return out;

  const Eigen::SelfAdjointEigenSolver<MatrixType> eig(s_cc, Eigen::EigenvaluesOnly);
  const Scalar lo = eig.eigenvalues()(0), hi = eig.eigenvalues()(nc - 1);
  if (!(hi > Scalar(0)) || lo <= Scalar(1e-14) * hi) {
    std::string idx;
    for (Index c : cond_idx) idx += (idx.empty() ? "" : ",") + std::to_string(c);
    throw SingularCovariance("conditioning block {" + idx + "} is singular");
  }
  const Eigen::LDLT<MatrixType> solver(s_cc);
  out.mean += s_fc * solver.solve(resid);
  out.cov -= s_fc * solver.solve(MatrixType(s_fc.transpose()));
  out.cov = Scalar(0.5) * (out.cov + out.cov.transpose()).eval();
  return out;
}

template <typename Scalar>
Scalar mvn_log_density_at(const GaussianVec<Scalar>& g, const typename GaussianVec<Scalar>::VectorType& x) {
  using MatrixType = typename GaussianVec<Scalar>::MatrixType;
  if (x.size() != g.dim()) throw DomainError("mvn_density_at: dimension mismatch");
  const MatrixType cov = repaired_covariance(g.cov);
  const Eigen::LLT<MatrixType> llt(cov);
  if (llt.info() != Eigen::Success) throw SingularCovariance("mvn_density_at: covariance singular after jitter");
  const auto d = (x - g.mean).eval();
  const Scalar quad = llt.matrixL().solve(d).squaredNorm();
  const Scalar log_det = Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return Scalar(-0.5) * (quad + log_det + Scalar(g.dim()) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>));
}

template <typename Scalar>
Scalar mvn_density_at(const GaussianVec<Scalar>& g, const typename GaussianVec<Scalar>::VectorType& x) {
  return std::exp(mvn_log_density_at(g, x));
}

//////////////////////////////////////////////////
// Rice-type expectations

enum class FactorSign {
  positive_part,  ///< x+ = max(x, 0)
  negative_part,  ///< x- = max(-x, 0)
};

struct SignedFactor {
  Index index;
  FactorSign sign;
};

struct SampleBudget {
  std::size_t min_points = 1u << 10;
  std::size_t max_points = 1u << 18;
  int randomizations = 32;
};

/// E[ prod_k sgn_k(X_{d,k}) * 1{X_t <= 0} * weight(X) | X_c = c ] * f_{X_c}(c)
///
/// `carried` coordinates are neither constrained nor factors; they are sampled
/// from their conditional law so that `weight` may depend on them. `weight`
/// receives the full joint vector (conditioning entries set to their values)
/// and must be nonnegative.
struct ExpectationProblem {
  GaussianVecd joint;
  std::vector<Index> indicator;
  std::vector<SignedFactor> factors;
  std::vector<Index> conditioning;
  Vec conditioning_values;
  std::vector<Index> carried;
  std::function<double(const Vec&)> weight;
  double rel_precision = 1e-2;
  double abs_precision = 0.0;
  SampleBudget budget;

  /// Throws DomainError unless the index blocks partition 0..dim-1.
  void validate() const;
};

struct RiceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool budget_exceeded = false;
  std::size_t points = 0;
};

/// Randomized quasi-Monte Carlo estimate of the expectation described by `p`.
///
/// Conditions on X_c analytically, then integrates over the remaining
/// coordinates by sequential conditioning: each constrained coordinate is drawn
/// from its truncated conditional law and the estimator carries the truncation
/// probability as a weight. Points come from independently scrambled Sobol'
/// sequences; the standard error is the spread of the per-randomization means.
/// Identical (problem, seed) give bit-identical results.
RiceEstimate rice_expectation(const ExpectationProblem& p, std::uint64_t seed);

nlohmann::json to_json(const ExpectationProblem& p);

}  // namespace wavepalm
