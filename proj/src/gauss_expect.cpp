#include "wavepalm/gauss_expect.hpp"

#include "wavepalm/normal.hpp"
#include "wavepalm/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavepalm {

void ExpectationProblem::validate() const {
  const Index n = joint.dim();
  if (joint.cov.rows() != n || joint.cov.cols() != n)
    throw DomainError("expectation problem: covariance shape does not match the mean");
  std::vector<int> seen(n, 0);
  auto mark = [&](Index i, const char* block) {
    if (i < 0 || i >= n) throw DomainError(std::string("expectation problem: index out of range in ") + block);
    if (seen[i]++) throw DomainError("expectation problem: coordinate " + std::to_string(i) + " used twice");
  };
  for (Index i : indicator) mark(i, "indicator block");
  for (const auto& f : factors) mark(f.index, "factor block");
  for (Index i : conditioning) mark(i, "conditioning block");
  for (Index i : carried) mark(i, "carried block");
  for (Index i = 0; i < n; ++i)
    if (!seen[i]) throw DomainError("expectation problem: coordinate " + std::to_string(i) + " is in no block");
  if (conditioning_values.size() != static_cast<Index>(conditioning.size()))
    throw DomainError("expectation problem: one conditioning value per conditioning index required");
  if (!(rel_precision >= 0.0) || !(abs_precision >= 0.0))
    throw DomainError("expectation problem: precision targets must be nonnegative");
  if (budget.randomizations < 2 || budget.min_points == 0 || budget.max_points < budget.min_points)
    throw DomainError("expectation problem: invalid sample budget");
}

namespace {

// The free coordinates after conditioning, rewritten as y = s * x so that every
// constraint reads y >= 0, and permuted into the sampling order.
struct SamplingPlan {
  Index m = 0;
  Index constrained = 0;       // positions [0, constrained) carry y >= 0
  Vec mean;                    // in sampling order
  Mat chol;                    // lower triangular, sampling order
  std::vector<char> is_factor;
  std::vector<char> deterministic;
  std::vector<Index> free_pos;  // sampling position -> position among free coordinates
  std::vector<double> sign;    // sampling position -> s
};

// E[Z | Z >= a] for standard normal Z.
double truncated_mean(double a) {
  const double tail = normal_cdf(-a);
  if (tail < 1e-300) return a;
  return normal_pdf(a) / tail;
}

// Greedy variable ordering (least likely constraint first) fused with a
// pivoted Cholesky factorization; rank deficiencies become deterministic
// coordinates instead of failures.
void order_and_factor(SamplingPlan& plan, Mat cov, const Vec& scale) {
  const Index m = plan.m;
  Vec mu = plan.mean;
  Mat L = Mat::Zero(m, m);
  Vec tol(m);
  for (Index i = 0; i < m; ++i) tol[i] = 1e-13 * scale[i];
  std::vector<Index> perm(m);
  for (Index i = 0; i < m; ++i) perm[i] = i;
  Vec zhat = Vec::Zero(m);
  plan.deterministic.assign(m, 0);

  auto swap_pos = [&](Index a, Index b) {
    if (a == b) return;
    std::swap(perm[a], perm[b]);
    std::swap(mu[a], mu[b]);
    std::swap(tol[a], tol[b]);
    cov.row(a).swap(cov.row(b));
    cov.col(a).swap(cov.col(b));
    L.row(a).swap(L.row(b));
  };

  for (Index i = 0; i < m; ++i) {
    const Index end = i < plan.constrained ? plan.constrained : m;
    if (i < plan.constrained) {
      Index best = i;
      double best_prob = std::numeric_limits<double>::infinity();
      for (Index j = i; j < end; ++j) {
        const double var = cov(j, j) - L.row(j).head(i).squaredNorm();
        const double mean = mu[j] + L.row(j).head(i).dot(zhat.head(i));
        const double prob = var <= tol[j] ? (mean >= 0.0 ? 1.0 : 0.0) : normal_cdf(mean / std::sqrt(var));
        if (prob < best_prob) {
          best_prob = prob;
          best = j;
        }
      }
      swap_pos(i, best);
    }
    const double var = cov(i, i) - L.row(i).head(i).squaredNorm();
    if (var <= tol[i]) {
      plan.deterministic[i] = 1;
      zhat[i] = 0.0;
      continue;
    }
    const double sigma = std::sqrt(var);
    L(i, i) = sigma;
    for (Index k = i + 1; k < m; ++k) L(k, i) = (cov(k, i) - L.row(k).head(i).dot(L.row(i).head(i))) / sigma;
    if (i < plan.constrained) {
      const double mean = mu[i] + L.row(i).head(i).dot(zhat.head(i));
      zhat[i] = truncated_mean(-mean / sigma);
    }
  }

  plan.chol = L;
  plan.mean = mu;
  std::vector<Index> free_pos(m);
  std::vector<double> sign(m);
  std::vector<char> is_factor(m);
  for (Index i = 0; i < m; ++i) {
    free_pos[i] = plan.free_pos[perm[i]];
    sign[i] = plan.sign[perm[i]];
    is_factor[i] = plan.is_factor[perm[i]];
  }
  plan.free_pos = std::move(free_pos);
  plan.sign = std::move(sign);
  plan.is_factor = std::move(is_factor);
}

struct BlockEvaluator {
  const SamplingPlan& plan;
  const ExpectationProblem& problem;
  const std::vector<Index>& free_idx;  // position among free coordinates -> joint index

  // Sum of integrand values over the rows of `u` (uniforms in (0, 1)).
  double operator()(const Mat& u) const {
    const Index rows = u.rows();
    const Index m = plan.m;
    Mat z(rows, m), y(rows, m);
    Eigen::ArrayXd w = Eigen::ArrayXd::Ones(rows);
    Vec mu(rows);
    for (Index i = 0; i < m; ++i) {
      mu.setConstant(plan.mean[i]);
      if (i > 0) mu.noalias() += z.leftCols(i) * plan.chol.row(i).head(i).transpose();
      const bool constrained = i < plan.constrained;
      if (plan.deterministic[i]) {
        y.col(i) = mu;
        z.col(i).setZero();
        if (constrained)
          for (Index b = 0; b < rows; ++b)
            if (mu[b] < 0.0) w[b] = 0.0;
      } else {
        const double sigma = plan.chol(i, i);
        for (Index b = 0; b < rows; ++b) {
          double zz;
          if (constrained) {
            const double p = normal_cdf(mu[b] / sigma);
            if (p <= 0.0) {
              w[b] = 0.0;
              zz = -mu[b] / sigma;
            } else {
              w[b] *= p;
              // keep the quantile finite when (1 - u) p underflows
              const double q = std::max((1.0 - u(b, i)) * p, std::numeric_limits<double>::min());
              zz = std::max(-normal_quantile(q), -mu[b] / sigma);
            }
          } else {
            zz = normal_quantile(u(b, i));
          }
          z(b, i) = zz;
          y(b, i) = mu[b] + sigma * zz;
        }
      }
      if (plan.is_factor[i])
        for (Index b = 0; b < rows; ++b) w[b] *= std::max(y(b, i), 0.0);
    }
    if (problem.weight) {
      Vec full(problem.joint.dim());
      for (std::size_t c = 0; c < problem.conditioning.size(); ++c)
        full[problem.conditioning[c]] = problem.conditioning_values[static_cast<Index>(c)];
      for (Index b = 0; b < rows; ++b) {
        if (w[b] == 0.0) continue;
        for (Index i = 0; i < m; ++i) full[free_idx[plan.free_pos[i]]] = plan.sign[i] * y(b, i);
        w[b] *= problem.weight(full);
      }
    }
    return w.sum();
  }
};

}  // namespace

RiceEstimate rice_expectation(const ExpectationProblem& p, std::uint64_t seed) {
  p.validate();
  const Index n = p.joint.dim();
  GaussianVecd joint{p.joint.mean, repaired_covariance(p.joint.cov)};

  double density_c = 1.0;
  GaussianVecd free = joint;
  if (!p.conditioning.empty()) {
    free = condition<double>(joint, p.conditioning, p.conditioning_values);
    const auto nc = static_cast<Index>(p.conditioning.size());
    GaussianVecd marginal{Vec(nc), Mat(nc, nc)};
    for (Index a = 0; a < nc; ++a) {
      marginal.mean[a] = joint.mean[p.conditioning[a]];
      for (Index b = 0; b < nc; ++b) marginal.cov(a, b) = joint.cov(p.conditioning[a], p.conditioning[b]);
    }
    density_c = mvn_density_at(marginal, p.conditioning_values);
  }

  // Role of every joint coordinate: 0 carried, 1 indicator, 2/3 factor +/-.
  std::vector<int> role(n, -1);
  for (Index i : p.carried) role[i] = 0;
  for (Index i : p.indicator) role[i] = 1;
  for (const auto& f : p.factors) role[f.index] = f.sign == FactorSign::positive_part ? 2 : 3;
  std::vector<Index> free_idx;
  for (Index i = 0; i < n; ++i)
    if (role[i] >= 0) free_idx.push_back(i);

  SamplingPlan plan;
  plan.m = static_cast<Index>(free_idx.size());
  if (plan.m > SobolSequence::kMaxDimensions)
    throw DomainError("rice_expectation: too many free coordinates for the point generator");
  // constrained coordinates first, carried ones last
  std::vector<Index> order;
  for (Index f = 0; f < plan.m; ++f)
    if (role[free_idx[f]] != 0) order.push_back(f);
  plan.constrained = static_cast<Index>(order.size());
  for (Index f = 0; f < plan.m; ++f)
    if (role[free_idx[f]] == 0) order.push_back(f);

  plan.mean.resize(plan.m);
  Mat cov(plan.m, plan.m);
  Vec scale(plan.m);
  for (Index a = 0; a < plan.m; ++a) {
    const int r = role[free_idx[order[a]]];
    plan.free_pos.push_back(order[a]);
    plan.sign.push_back(r == 1 || r == 3 ? -1.0 : 1.0);
    plan.is_factor.push_back(r >= 2);
  }
  for (Index a = 0; a < plan.m; ++a) {
    plan.mean[a] = plan.sign[a] * free.mean[order[a]];
    scale[a] = joint.cov(free_idx[order[a]], free_idx[order[a]]);
    for (Index b = 0; b < plan.m; ++b) cov(a, b) = plan.sign[a] * plan.sign[b] * free.cov(order[a], order[b]);
  }
  order_and_factor(plan, cov, scale);

  RiceEstimate est;
  if (density_c == 0.0) return est;
  const BlockEvaluator eval{plan, p, free_idx};
  if (plan.m == 0) {
    est.value = density_c * eval(Mat(1, 0));
    est.points = 1;
    return est;
  }

  const int R = p.budget.randomizations;
  std::vector<SobolSequence> streams;
  streams.reserve(R);
  const std::uint64_t stream_limit =
      std::max<std::uint64_t>(std::max(p.budget.min_points, p.budget.max_points) / R, 1) + 1;
  for (int r = 0; r < R; ++r)
    streams.push_back(SobolSequence::scrambled(static_cast<int>(plan.m), derive_seed(seed, r), stream_limit));

  constexpr std::uint32_t kBlock = 1024;
  std::vector<double> sums(R, 0.0);
  std::uint32_t per_stream = 0;
  std::uint32_t target = static_cast<std::uint32_t>(std::max<std::size_t>(1, p.budget.min_points / R));
  Mat u;
  for (;;) {
    for (int r = 0; r < R; ++r) {
      for (std::uint32_t first = per_stream; first < target; first += kBlock) {
        const std::uint32_t count = std::min(kBlock, target - first);
        u.resize(count, plan.m);
        streams[r].fill(first, u);
        u.array() += 0x1.0p-33;
        sums[r] += eval(u);
      }
    }
    per_stream = target;

    double mean = 0.0;
    for (double s : sums) mean += s / per_stream;
    mean /= R;
    double ss = 0.0;
    for (double s : sums) ss += (s / per_stream - mean) * (s / per_stream - mean);
    const double se = std::sqrt(ss / (R - 1) / R);
    est.value = density_c * mean;
    est.std_error = density_c * se;
    est.points = static_cast<std::size_t>(per_stream) * R;

    if (est.std_error <= std::max(p.rel_precision * std::abs(est.value), p.abs_precision)) break;
    if (static_cast<std::size_t>(2 * per_stream) * R > p.budget.max_points) {
      est.budget_exceeded = true;
      break;
    }
    target = 2 * per_stream;
  }
  return est;
}

nlohmann::json to_json(const ExpectationProblem& p) {
  nlohmann::json j;
  const Index n = p.joint.dim();
  std::vector<double> mean(p.joint.mean.data(), p.joint.mean.data() + n);
  std::vector<std::vector<double>> cov(n, std::vector<double>(n));
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) cov[a][b] = p.joint.cov(a, b);
  j["mean"] = mean;
  j["cov"] = cov;
  j["indicator"] = p.indicator;
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : p.factors)
    factors.push_back({{"index", f.index}, {"sign", f.sign == FactorSign::positive_part ? "+" : "-"}});
  j["factors"] = factors;
  j["conditioning"] = p.conditioning;
  j["conditioning_values"] =
      std::vector<double>(p.conditioning_values.data(), p.conditioning_values.data() + p.conditioning_values.size());
  j["carried"] = p.carried;
  j["weighted"] = static_cast<bool>(p.weight);
  j["rel_precision"] = p.rel_precision;
  j["abs_precision"] = p.abs_precision;
  j["budget"] = {{"min_points", p.budget.min_points},
                 {"max_points", p.budget.max_points},
                 {"randomizations", p.budget.randomizations}};
  return j;
}

}  // namespace wavepalm
