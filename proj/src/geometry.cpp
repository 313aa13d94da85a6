#include "wavepalm/geometry.hpp"

#include "wavepalm/normal.hpp"
#include "wavepalm/palm.hpp"
#include "wavepalm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wavepalm {

namespace {

constexpr int kDefaultGridPoints = 48;

PointFunctional at(double x, std::vector<DerivativeTerm> terms) { return PointFunctional{x, 0.0, std::move(terms)}; }

void check_grid(double r, double s, std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > -r && grid[i] < s)) throw DomainError("indicator grid point outside (-r, s)");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("indicator grid must be strictly increasing");
  }
}

double min_spacing(double r, double s, std::span<const double> grid) {
  double best = std::numeric_limits<double>::infinity();
  double prev = -r;
  for (double g : grid) {
    best = std::min(best, g - prev);
    prev = g;
  }
  return std::min(best, s - prev);
}

// Functionals in the order (X_t, X_d, X_c[, carried W_t(0)]).
AssembledCovariance assemble(const Spectrum& spectrum, double r, double s, double v, std::span<const double> grid,
                             Sampling sampling, double origin, bool carry_wt) {
  check_grid(r, s, grid);
  AssembledCovariance out;
  auto& f = out.functionals;
  for (double g : grid) f.push_back(at(origin + g, {{1.0, 1, 0}}));
  if (sampling == Sampling::encountered) f.push_back(at(origin, {{1.0, 1, 0}}));
  out.n_t = static_cast<Index>(f.size());

  f.push_back(at(origin - r, {{1.0, 2, 0}}));
  f.push_back(at(origin + s, {{1.0, 2, 0}}));
  if (sampling == Sampling::encountered)
    f.push_back(at(origin, {{v, 1, 0}, {1.0, 0, 1}}));
  else
    f.push_back(at(origin, {{1.0, 1, 0}}));

  f.push_back(at(origin - r, {{1.0, 1, 0}}));
  f.push_back(at(origin + s, {{1.0, 1, 0}}));
  f.push_back(at(origin - r, {{1.0, 0, 0}}));
  f.push_back(at(origin + s, {{1.0, 0, 0}}));
  f.push_back(at(origin, {{1.0, 0, 0}}));
  if (carry_wt) f.push_back(at(origin, {{1.0, 0, 1}}));

  const Mat cov = functional_covariance(spectrum, f);
  out.joint.mean = Vec::Zero(cov.rows());
  try {
    out.joint.cov = repaired_covariance(cov);
  } catch (const SingularCovariance& e) {
    throw SingularCovariance(std::string(e.what()) + " (indicator grid spacing " +
                             std::to_string(min_spacing(r, s, grid)) + ")");
  }
  return out;
}

}  // namespace

std::vector<double> chebyshev_grid(double r, double s, int n) {
  if (n < 1) throw DomainError("chebyshev_grid: need at least one point");
  if (!(r > 0.0 && s > 0.0)) throw DomainError("chebyshev_grid: r and s must be positive");
  const double mid = 0.5 * (s - r);
  const double half = 0.5 * (s + r);
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = mid - half * std::cos(std::numbers::pi * (2.0 * k + 1.0) / (2.0 * n));
  return g;
}

Mat functional_covariance(const Spectrum& spectrum, std::span<const PointFunctional> f) {
  const auto n = static_cast<Index>(f.size());
  const Eigen::ArrayXd& k = spectrum.wavenumbers().array();
  const Eigen::ArrayXd& omega = spectrum.rule().nodes.array();
  const Index m = k.size();
  // cos / sin of every point's phase, so that pair terms need no trigonometry:
  // cos(pj - pi) = Cj Ci + Sj Si, sin(pj - pi) = Sj Ci - Cj Si
  Eigen::ArrayXXd c(m, n), s(m, n);
  for (Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd ph = k * f[i].x + omega * f[i].t;
    c.col(i) = ph.cos();
    s.col(i) = ph.sin();
  }
  std::array<std::array<Eigen::ArrayXd, 5>, 5> weight;
  auto weight_of = [&](int a, int b) -> const Eigen::ArrayXd& {
    if (a + b > 4) throw DomainError("functional_covariance: total derivative order above 4");
    if (!spectrum.config().has_cutoff() && 2 * a + b >= 4)
      throw NumericError("functional_covariance: kernel derivative diverges without a cutoff frequency",
                         std::numeric_limits<double>::infinity());
    auto& w = weight[a][b];
    if (w.size() == 0) w = spectrum.measure().array() * k.pow(a) * omega.pow(b);
    return w;
  };
  Mat cov(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      double total = 0.0;
      for (const auto& p : f[i].terms)
        for (const auto& q : f[j].terms) {
          const int a = p.dx + q.dx, b = p.dt + q.dt;
          const Eigen::ArrayXd& w = weight_of(a, b);
          // d^(a+b) R at the pair's lag, R = sum w cos(phase)
          double value;
          if ((a + b) % 2 == 0)
            value = (w * (c.col(j) * c.col(i) + s.col(j) * s.col(i))).sum();
          else
            value = (w * (s.col(j) * c.col(i) - c.col(j) * s.col(i))).sum();
          const int phase = (a + b) % 4;
          if (phase == 1 || phase == 2) value = -value;
          total += ((p.dx + p.dt) % 2 ? -1.0 : 1.0) * p.coef * q.coef * value;
        }
      cov(i, j) = cov(j, i) = total;
    }
  return cov;
}

AssembledCovariance assemble_covariance(const Spectrum& spectrum, const GeometryQuery& q, Sampling sampling,
                                        double origin) {
  if (!(q.r > 0.0 && q.s > 0.0)) throw DomainError("assemble_covariance: r and s must be positive");
  const std::vector<double> grid = q.grid.empty() ? chebyshev_grid(q.r, q.s, kDefaultGridPoints) : q.grid;
  return assemble(spectrum, q.r, q.s, q.v, grid, sampling, origin, false);
}

//////////////////////////////////////////////////

namespace {

Spectrum working_spectrum(const Spectrum& spectrum, bool normalized) {
  return normalized ? normalize(spectrum).spectrum : spectrum;
}

}  // namespace

GeometryModel::GeometryModel(const Spectrum& spectrum, Sampling sampling, double v, DensityOptions options)
    : spectrum_(working_spectrum(spectrum, options.normalized)), sampling_(sampling), v_(v), options_(options) {
  if (options_.grid_points < 1) throw DomainError("GeometryModel: grid_points must be positive");
  if (sampling_ == Sampling::spatial) v_ = 0.0;
  if (options_.normalized) {
    const auto nm = normalize(spectrum, v_);
    scales_ = nm.scales;
    v_internal_ = nm.speed;
  } else {
    scales_ = NormalizationScales{};
    v_internal_ = v_;
  }
  const MomentSet m = spectrum_.moments();
  denominator_internal_ =
      sampling_ == Sampling::spatial ? spatial_center_intensity(m) : encountered_center_intensity(m, v_internal_);
  if (!(denominator_internal_ > 0.0))
    throw DegenerateModel("no wave centers overtake a ship at this speed (zero encounter intensity)");
}

double GeometryModel::denominator() const {
  // per internal unit -> per meter (spatial) or per second (encountered)
  if (sampling_ == Sampling::spatial) return denominator_internal_ * scales_.x_scale;
  return denominator_internal_ * scales_.t_scale;
}

GeometryModel::Scaled GeometryModel::to_internal(double r, double s, double u, double w) const {
  return {r * scales_.x_scale, s * scales_.x_scale, u / scales_.elevation_scale, w / scales_.elevation_scale};
}

double GeometryModel::jacobian() const {
  const double e = scales_.elevation_scale;
  return scales_.x_scale * scales_.x_scale / (e * e);
}

ExpectationProblem GeometryModel::base_problem(const AssembledCovariance& cov) const {
  ExpectationProblem p;
  p.joint = cov.joint;
  for (Index i = 0; i < cov.n_t; ++i) p.indicator.push_back(i);
  const Index d = cov.d_begin();
  p.factors = {{d, FactorSign::negative_part}, {d + 1, FactorSign::positive_part}, {d + 2, FactorSign::negative_part}};
  if (sampling_ == Sampling::encountered) p.factors[2].sign = FactorSign::positive_part;
  for (Index i = 0; i < cov.n_c; ++i) p.conditioning.push_back(cov.c_begin() + i);
  p.conditioning_values = Vec::Zero(cov.n_c);
  p.rel_precision = options_.rel_precision;
  p.abs_precision = options_.abs_precision * denominator_internal_;
  p.budget = options_.budget;
  return p;
}

DensityEstimate GeometryModel::finish(const RiceEstimate& numerator) const {
  const double scale = jacobian() / denominator_internal_;
  return {numerator.value * scale, numerator.std_error * scale, numerator.budget_exceeded, numerator.points};
}

DensityEstimate GeometryModel::density(double r, double s, double u, double w, std::uint64_t seed) const {
  if (!(r > 0.0 && s > 0.0 && u > 0.0 && w < 0.0)) return {};
  const auto q = to_internal(r, s, u, w);
  return evaluate_internal(q, chebyshev_grid(q.r, q.s, options_.grid_points), seed);
}

DensityEstimate GeometryModel::density_on_grid(double r, double s, double u, double w, std::span<const double> grid,
                                               std::uint64_t seed) const {
  if (!(r > 0.0 && s > 0.0 && u > 0.0 && w < 0.0)) return {};
  std::vector<double> scaled(grid.begin(), grid.end());
  for (double& g : scaled) g *= scales_.x_scale;
  return evaluate_internal(to_internal(r, s, u, w), scaled, seed);
}

DensityEstimate GeometryModel::evaluate_internal(const Scaled& q, std::span<const double> grid,
                                                 std::uint64_t seed) const {
  const auto cov = assemble(spectrum_, q.r, q.s, v_internal_, grid, sampling_, options_.origin, false);
  auto p = base_problem(cov);
  p.conditioning_values << 0.0, 0.0, q.u, q.w, 0.0;
  return finish(rice_expectation(p, seed));
}

DensityEstimate GeometryModel::density_doppler(double r, double s, double u, double w, std::uint64_t seed) const {
  if (!(r > 0.0 && s > 0.0 && u > 0.0 && w < 0.0)) return {};
  const auto q = to_internal(r, s, u, w);
  const auto grid = chebyshev_grid(q.r, q.s, options_.grid_points);
  const auto cov = assemble(spectrum_, q.r, q.s, 0.0, grid, Sampling::spatial, options_.origin, true);
  auto p = base_problem(cov);
  p.factors[2].sign = FactorSign::negative_part;
  p.conditioning_values << 0.0, 0.0, q.u, q.w, 0.0;
  const Index wx = cov.d_begin() + 2;
  const Index wt = cov.joint.dim() - 1;
  p.carried = {wt};
  const double v = v_internal_;
  p.weight = [wx, wt, v](const Vec& x) {
    if (!(x[wx] < 0.0)) return 0.0;
    return std::max(-x[wt] / x[wx] - v, 0.0);
  };
  return finish(rice_expectation(p, seed));
}

std::vector<DensityEstimate> GeometryModel::density_block(double r, double s, std::span<const double> us,
                                                          std::span<const double> ws, std::uint64_t seed,
                                                          std::uint64_t seed_offset) const {
  std::vector<DensityEstimate> out(us.size() * ws.size());
  if (!(r > 0.0 && s > 0.0)) return out;
  const auto q = to_internal(r, s, 1.0, -1.0);
  const auto cov = assemble(spectrum_, q.r, q.s, v_internal_, chebyshev_grid(q.r, q.s, options_.grid_points),
                            sampling_, options_.origin, false);
  auto p = base_problem(cov);
  for (std::size_t iu = 0; iu < us.size(); ++iu)
    for (std::size_t iw = 0; iw < ws.size(); ++iw) {
      const std::size_t k = iu * ws.size() + iw;
      if (!(us[iu] > 0.0 && ws[iw] < 0.0)) continue;
      p.conditioning_values << 0.0, 0.0, us[iu] / scales_.elevation_scale, ws[iw] / scales_.elevation_scale, 0.0;
      out[k] = finish(rice_expectation(p, derive_seed(seed, seed_offset + k)));
    }
  return out;
}

//////////////////////////////////////////////////

GridAxis gauss_axis(double lo, double hi, int cells, int points) {
  if (!(hi > lo) || cells < 1 || points < 1) throw DomainError("gauss_axis: invalid range or counts");
  GridAxis axis;
  for (int c = 0; c <= cells; ++c) axis.edges.push_back(lo + (hi - lo) * c / cells);
  for (int c = 0; c < cells; ++c) {
    const auto rule = gauss_legendre(points, axis.edges[c], axis.edges[c + 1]);
    for (Index k = 0; k < rule.size(); ++k) {
      axis.nodes.push_back(rule.nodes[k]);
      axis.weights.push_back(rule.weights[k]);
    }
  }
  return axis;
}

GridAxis midpoint_axis(double lo, double hi, int count) {
  if (!(hi > lo) || count < 1) throw DomainError("midpoint_axis: invalid range or count");
  GridAxis axis;
  for (int c = 0; c <= count; ++c) axis.edges.push_back(lo + (hi - lo) * c / count);
  for (int c = 0; c < count; ++c) {
    axis.nodes.push_back(0.5 * (axis.edges[c] + axis.edges[c + 1]));
    axis.weights.push_back(axis.edges[c + 1] - axis.edges[c]);
  }
  return axis;
}

GridAxis log_axis(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 1) throw DomainError("log_axis: need 0 < lo < hi and count >= 1");
  GridAxis axis;
  const double ratio = std::log(hi / lo);
  for (int c = 0; c <= count; ++c) axis.edges.push_back(lo * std::exp(ratio * c / count));
  axis.edges.back() = hi;
  for (int c = 0; c < count; ++c) {
    axis.nodes.push_back(std::sqrt(axis.edges[c] * axis.edges[c + 1]));
    axis.weights.push_back(axis.edges[c + 1] - axis.edges[c]);
  }
  return axis;
}

std::size_t DensityGrid4::size() const {
  return axes[0].size() * axes[1].size() * axes[2].size() * axes[3].size();
}

std::size_t DensityGrid4::index(std::size_t ir, std::size_t is, std::size_t iu, std::size_t iw) const {
  return ((ir * axes[1].size() + is) * axes[2].size() + iu) * axes[3].size() + iw;
}

double DensityGrid4::cell_weight(std::size_t ir, std::size_t is, std::size_t iu, std::size_t iw) const {
  return axes[0].weights[ir] * axes[1].weights[is] * axes[2].weights[iu] * axes[3].weights[iw];
}

bool DensityGrid4::complete() const {
  return std::all_of(evaluated.begin(), evaluated.end(), [](char c) { return c != 0; });
}

namespace {

template <typename F>
void for_each_node(const DensityGrid4& g, F&& f) {
  for (std::size_t ir = 0; ir < g.axes[0].size(); ++ir)
    for (std::size_t is = 0; is < g.axes[1].size(); ++is)
      for (std::size_t iu = 0; iu < g.axes[2].size(); ++iu)
        for (std::size_t iw = 0; iw < g.axes[3].size(); ++iw) {
          const std::size_t k = g.index(ir, is, iu, iw);
          if (!g.evaluated[k]) continue;
          f(ir, is, iu, iw, k);
        }
}

std::size_t bin_of(const std::vector<double>& edges, double x) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  const auto pos = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(pos, 0, static_cast<std::ptrdiff_t>(edges.size()) - 2));
}

}  // namespace

double DensityGrid4::total_mass() const {
  double m = 0.0;
  for_each_node(*this, [&](auto ir, auto is, auto iu, auto iw, std::size_t k) {
    m += values[k] * cell_weight(ir, is, iu, iw);
  });
  return m;
}

double DensityGrid4::mass_std_error() const {
  double v = 0.0;
  for_each_node(*this, [&](auto ir, auto is, auto iu, auto iw, std::size_t k) {
    const double e = std_errors[k] * cell_weight(ir, is, iu, iw);
    v += e * e;
  });
  return std::sqrt(v);
}

DensityGrid4 evaluate_grid(const GeometryModel& model, const std::array<GridAxis, 4>& axes, std::uint64_t seed,
                           const GridEvaluationOptions& opts) {
  DensityGrid4 g;
  g.axes = axes;
  const std::size_t n = g.size();
  g.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  g.std_errors.assign(n, std::numeric_limits<double>::quiet_NaN());
  g.evaluated.assign(n, 0);
  const std::size_t ns = axes[1].size();
  std::atomic<bool> late{false};
  std::atomic<std::size_t> imprecise{0};
  parallel_for(axes[0].size() * ns, opts.threads, [&](std::size_t pair) {
    if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) {
      late = true;
      return;
    }
    const std::size_t ir = pair / ns, is = pair % ns;
    const std::size_t first = g.index(ir, is, 0, 0);
    const auto block = model.density_block(axes[0].nodes[ir], axes[1].nodes[is], axes[2].nodes, axes[3].nodes, seed,
                                           first);
    for (std::size_t k = 0; k < block.size(); ++k) {
      g.values[first + k] = block[k].value;
      g.std_errors[first + k] = block[k].std_error;
      g.evaluated[first + k] = 1;
      if (block[k].budget_exceeded) ++imprecise;
    }
  });
  g.budget_exceeded = late.load();
  g.imprecise_nodes = imprecise.load();
  return g;
}

CellMasses cell_masses(const DensityGrid4& grid) {
  CellMasses out;
  std::array<std::vector<std::size_t>, 4> cell_of;
  for (int a = 0; a < 4; ++a) {
    out.shape[a] = grid.axes[a].edges.size() - 1;
    for (double x : grid.axes[a].nodes) cell_of[a].push_back(bin_of(grid.axes[a].edges, x));
  }
  const std::size_t total = out.shape[0] * out.shape[1] * out.shape[2] * out.shape[3];
  out.mass.assign(total, 0.0);
  std::vector<double> var(total, 0.0);
  for_each_node(grid, [&](auto ir, auto is, auto iu, auto iw, std::size_t k) {
    const std::size_t c =
        ((cell_of[0][ir] * out.shape[1] + cell_of[1][is]) * out.shape[2] + cell_of[2][iu]) * out.shape[3] +
        cell_of[3][iw];
    const double wgt = grid.cell_weight(ir, is, iu, iw);
    out.mass[c] += grid.values[k] * wgt;
    var[c] += grid.std_errors[k] * wgt * grid.std_errors[k] * wgt;
  });
  out.std_error.resize(total);
  for (std::size_t c = 0; c < total; ++c) out.std_error[c] = std::sqrt(var[c]);
  return out;
}

LogKernelProposal::LogKernelProposal(std::span<const Point4> points, double bandwidth_factor, double defensive,
                                     std::size_t max_kernels)
    : defensive_(defensive) {
  if (!(defensive > 0.0 && defensive <= 1.0)) throw DomainError("LogKernelProposal: defensive weight must be in (0, 1]");
  const std::size_t stride = std::max<std::size_t>(1, (points.size() + max_kernels - 1) / std::max<std::size_t>(max_kernels, 1));
  for (std::size_t i = 0; i < points.size(); i += stride) {
    const Point4& z = points[i];
    if (!(z[0] > 0.0 && z[1] > 0.0 && z[2] > 0.0 && z[3] < 0.0)) continue;
    centers_.push_back({std::log(z[0]), std::log(z[1]), std::log(z[2]), std::log(-z[3])});
  }
  if (centers_.size() < 10) throw InsufficientSamples("LogKernelProposal: need at least 10 points in the domain", centers_.size());
  const auto k = static_cast<double>(centers_.size());
  // Silverman's rule for d = 4
  const double silverman = std::pow(4.0 / 6.0, 1.0 / 8.0) * std::pow(k, -1.0 / 8.0);
  for (int d = 0; d < 4; ++d) {
    double m = 0.0, m2 = 0.0;
    for (const auto& c : centers_) {
      m += c[d];
      m2 += c[d] * c[d];
    }
    m /= k;
    const double sd = std::sqrt(std::max(m2 / k - m * m, 1e-12));
    mean_[d] = m;
    spread_[d] = 2.0 * sd;
    h_[d] = bandwidth_factor * silverman * sd;
  }
}

Point4 LogKernelProposal::sample(std::mt19937_64& rng) const {
  Point4 y;
  if (uniform_open(rng) < defensive_) {
    for (int d = 0; d < 4; ++d) y[d] = mean_[d] + spread_[d] * gaussian(rng);
  } else {
    const auto i = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(centers_.size()));
    const Point4& c = centers_[std::min(i, centers_.size() - 1)];
    for (int d = 0; d < 4; ++d) y[d] = c[d] + h_[d] * gaussian(rng);
  }
  return {std::exp(y[0]), std::exp(y[1]), std::exp(y[2]), -std::exp(y[3])};
}

double LogKernelProposal::density(const Point4& z) const {
  if (!(z[0] > 0.0 && z[1] > 0.0 && z[2] > 0.0 && z[3] < 0.0)) return 0.0;
  const Point4 y{std::log(z[0]), std::log(z[1]), std::log(z[2]), std::log(-z[3])};
  const double norm4 = 4.0 * std::numbers::pi * std::numbers::pi;  // (2 pi)^2
  double kern = 0.0;
  for (const auto& c : centers_) {
    double q = 0.0;
    for (int d = 0; d < 4; ++d) {
      const double t = (y[d] - c[d]) / h_[d];
      q += t * t;
    }
    kern += std::exp(-0.5 * q);
  }
  kern /= static_cast<double>(centers_.size()) * norm4 * h_[0] * h_[1] * h_[2] * h_[3];
  double q = 0.0;
  for (int d = 0; d < 4; ++d) {
    const double t = (y[d] - mean_[d]) / spread_[d];
    q += t * t;
  }
  const double wide = std::exp(-0.5 * q) / (norm4 * spread_[0] * spread_[1] * spread_[2] * spread_[3]);
  const double gy = (1.0 - defensive_) * kern + defensive_ * wide;
  return gy / (z[0] * z[1] * z[2] * -z[3]);
}

bool Box4::contains(const Point4& z) const {
  for (int d = 0; d < 4; ++d)
    if (!(z[d] >= lo[d] && z[d] <= hi[d])) return false;
  return true;
}

double ImportanceIntegral::mass() const {
  if (ratio.empty()) return 0.0;
  double m = 0.0;
  for (double r : ratio) m += r;
  return m / static_cast<double>(ratio.size());
}

double ImportanceIntegral::mass_std_error() const {
  const std::size_t n = ratio.size();
  if (n < 2) return std::numeric_limits<double>::infinity();
  const double m = mass();
  double ss = 0.0;
  for (double r : ratio) ss += (r - m) * (r - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

CellMasses ImportanceIntegral::cell_masses(const std::array<std::vector<double>, 4>& edges) const {
  CellMasses out;
  for (int a = 0; a < 4; ++a) {
    if (edges[a].size() < 2) throw DomainError("cell_masses: every axis needs at least one cell");
    out.shape[a] = edges[a].size() - 1;
  }
  const std::size_t total = out.shape[0] * out.shape[1] * out.shape[2] * out.shape[3];
  std::vector<double> sum(total, 0.0), sum2(total, 0.0);
  for (std::size_t j = 0; j < points.size(); ++j) {
    std::size_t c = 0;
    bool inside = true;
    for (int a = 0; a < 4; ++a) {
      const auto& e = edges[a];
      const double x = points[j][a];
      if (!(x >= e.front() && x < e.back())) {
        inside = false;
        break;
      }
      c = c * out.shape[a] + static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), x) - e.begin()) - 1;
    }
    if (!inside) continue;
    sum[c] += ratio[j];
    sum2[c] += ratio[j] * ratio[j];
  }
  const auto n = static_cast<double>(points.size());
  out.mass.resize(total);
  out.std_error.resize(total);
  for (std::size_t c = 0; c < total; ++c) {
    const double m = sum[c] / n;
    out.mass[c] = m;
    out.std_error[c] = std::sqrt(std::max(sum2[c] / n - m * m, 0.0) / (n - 1.0));
  }
  return out;
}

ImportanceIntegral importance_integral(const GeometryModel& model, const LogKernelProposal& proposal, std::size_t n,
                                       std::uint64_t seed, const Box4& box, unsigned threads) {
  ImportanceIntegral out;
  out.points.resize(n);
  out.ratio.assign(n, 0.0);
  parallel_for(n, threads, [&](std::size_t j) {
    const std::uint64_t sj = derive_seed(seed, j);
    std::mt19937_64 rng(sj);
    const Point4 z = proposal.sample(rng);
    out.points[j] = z;
    if (!box.contains(z)) return;
    const double q = proposal.density(z);
    if (!(q > 0.0)) return;
    out.ratio[j] = model.density(z[0], z[1], z[2], z[3], derive_seed(sj, 1)).value / q;
  });
  return out;
}

double Marginal2::total_mass() const {
  double m = 0.0;
  for (double x : mass) m += x;
  return m;
}

double Marginal2::density(std::size_t il, std::size_t ih) const {
  const std::size_t nh = h_edges.size() - 1;
  return mass[il * nh + ih] / ((l_edges[il + 1] - l_edges[il]) * (h_edges[ih + 1] - h_edges[ih]));
}

std::vector<double> Marginal2::l_marginal() const {
  const std::size_t nl = l_edges.size() - 1, nh = h_edges.size() - 1;
  std::vector<double> out(nl, 0.0);
  for (std::size_t il = 0; il < nl; ++il)
    for (std::size_t ih = 0; ih < nh; ++ih) out[il] += mass[il * nh + ih];
  return out;
}

Marginal2 marginal_halfwavelength_height(const DensityGrid4& grid, std::vector<double> l_edges,
                                         std::vector<double> h_edges) {
  if (grid.size() == 0 || grid.values.empty()) throw DomainError("marginal: empty density grid");
  if (l_edges.size() < 2 || h_edges.size() < 2) throw DomainError("marginal: need at least one cell per axis");
  Marginal2 out{std::move(l_edges), std::move(h_edges), {}, {}};
  const std::size_t nh = out.h_edges.size() - 1;
  out.mass.assign((out.l_edges.size() - 1) * nh, 0.0);
  std::vector<double> var(out.mass.size(), 0.0);
  for_each_node(grid, [&](auto ir, auto is, auto iu, auto iw, std::size_t k) {
    const double l = grid.axes[0].nodes[ir] + grid.axes[1].nodes[is];
    const double h = grid.axes[2].nodes[iu] - grid.axes[3].nodes[iw];
    const std::size_t c = bin_of(out.l_edges, l) * nh + bin_of(out.h_edges, h);
    const double wgt = grid.cell_weight(ir, is, iu, iw);
    out.mass[c] += grid.values[k] * wgt;
    var[c] += grid.std_errors[k] * wgt * grid.std_errors[k] * wgt;
  });
  out.std_error.resize(var.size());
  for (std::size_t c = 0; c < var.size(); ++c) out.std_error[c] = std::sqrt(var[c]);
  return out;
}

Marginal2 marginal_halfwavelength_height(const DensityGrid4& grid, int l_cells, int h_cells) {
  if (l_cells < 1 || h_cells < 1) throw DomainError("marginal: need at least one cell per axis");
  if (grid.size() == 0 || grid.values.empty()) throw DomainError("marginal: empty density grid");
  const double l_lo = grid.axes[0].lo() + grid.axes[1].lo(), l_hi = grid.axes[0].hi() + grid.axes[1].hi();
  const double h_lo = grid.axes[2].lo() - grid.axes[3].hi(), h_hi = grid.axes[2].hi() - grid.axes[3].lo();
  std::vector<double> le(l_cells + 1), he(h_cells + 1);
  for (int i = 0; i <= l_cells; ++i) le[i] = l_lo + (l_hi - l_lo) * i / l_cells;
  for (int i = 0; i <= h_cells; ++i) he[i] = h_lo + (h_hi - h_lo) * i / h_cells;
  return marginal_halfwavelength_height(grid, std::move(le), std::move(he));
}

}  // namespace wavepalm
