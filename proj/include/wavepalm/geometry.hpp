#pragma once

#include "wavepalm/gauss_expect.hpp"
#include "wavepalm/spectrum.hpp"
#include "wavepalm/types.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace wavepalm {

/// Joint law of the distances to the neighbouring extrema and their heights at
/// a wave center: x2 = r (to the preceding maximum), x3 = s (to the following
/// minimum), H2 = u, H3 = w.
struct GeometryQuery {
  double r = 0.0;
  double s = 0.0;
  double u = 0.0;
  double w = 0.0;
  double v = 0.0;              ///< ship speed (encountered case only)
  std::vector<double> grid;    ///< points of [-r, s] where W_x <= 0 is imposed; empty = default

  bool in_domain() const { return r > 0.0 && s > 0.0 && u > 0.0 && w < 0.0; }
};

/// n Chebyshev points (first kind) strictly inside [-r, s].
std::vector<double> chebyshev_grid(double r, double s, int n);

/// c * d^dx/dx^dx d^dt/dt^dt W
struct DerivativeTerm {
  double coef = 1.0;
  int dx = 0;
  int dt = 0;
};

/// A linear combination of derivatives of W taken at a single point (x, t).
struct PointFunctional {
  double x = 0.0;
  double t = 0.0;
  std::vector<DerivativeTerm> terms;
};

/// Covariance matrix of a family of point functionals of the stationary field
/// with kernel `spectrum`, using
/// Cov(d^a_x d^b_t W(p), d^c_x d^d_t W(q)) = (-1)^(a+b) R^(a+c, b+d)(q - p).
Mat functional_covariance(const Spectrum& spectrum, std::span<const PointFunctional> f);

enum class Sampling { spatial, encountered };

/// Joint Gaussian of (X_t, X_d, X_c) for one (r, s) and grid.
///
/// spatial:      X_t = W_x(U), X_d = (W_xx(-r), W_xx(s), W_x(0))
/// encountered:  X_t = (W_x(U), W_x(0)), X_d = (W_xx(-r), W_xx(s), v W_x(0) + W_t(0))
/// both:         X_c = (W_x(-r), W_x(s), W(-r), W(s), W(0))
///
/// `origin` shifts every point; the law does not depend on it.
struct AssembledCovariance {
  GaussianVecd joint;
  std::vector<PointFunctional> functionals;
  Index n_t = 0;
  Index n_d = 3;
  Index n_c = 5;

  Index d_begin() const { return n_t; }
  Index c_begin() const { return n_t + n_d; }
};

AssembledCovariance assemble_covariance(const Spectrum& spectrum, const GeometryQuery& q, Sampling sampling,
                                        double origin = 0.0);

struct DensityOptions {
  int grid_points = 48;       ///< size of the default Chebyshev grid
  bool normalized = true;     ///< compute in coordinates with lambda00 = lambda20 = lambda02 = 1
  double rel_precision = 0.03;
  /// Absolute target on the standard error of the (normalized) density.
  double abs_precision = 2e-4;
  SampleBudget budget{1u << 10, 1u << 16, 32};
  double origin = 0.0;
};

struct DensityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  bool budget_exceeded = false;
  std::size_t points = 0;
};

/// Evaluates the Palm densities of (x2, x3, H2, H3) for one sea and one
/// sampling scheme. All physical arguments and results are in meters; the
/// computation runs in normalized coordinates unless options say otherwise.
class GeometryModel {
 public:
  GeometryModel(const Spectrum& spectrum, Sampling sampling, double v = 0.0, DensityOptions options = {});

  Sampling sampling() const { return sampling_; }
  double speed() const { return v_; }
  const DensityOptions& options() const { return options_; }

  /// Rate of wave centers (per meter, or per second when encountered).
  double denominator() const;

  /// Density at (r, s, u, w) in m^-2 per m^2 of height; zero outside the domain.
  DensityEstimate density(double r, double s, double u, double w, std::uint64_t seed) const;

  /// Same numerator computed from the spatial problem with the extra weight
  /// (V - v)+, V = -W_t(0) / W_x(0). Only meaningful for the encountered case.
  DensityEstimate density_doppler(double r, double s, double u, double w, std::uint64_t seed) const;

  /// Density with an explicit indicator grid (physical coordinates, inside (-r, s)).
  DensityEstimate density_on_grid(double r, double s, double u, double w, std::span<const double> grid,
                                  std::uint64_t seed) const;

  /// Densities for every (u, w) pair at one (r, s); the covariance is assembled once.
  /// Result index is iu * ws.size() + iw; cell k uses seed derive_seed(seed, seed_offset + k).
  std::vector<DensityEstimate> density_block(double r, double s, std::span<const double> us,
                                             std::span<const double> ws, std::uint64_t seed,
                                             std::uint64_t seed_offset = 0) const;

 private:
  struct Scaled {
    double r, s, u, w;
  };
  Scaled to_internal(double r, double s, double u, double w) const;
  double jacobian() const;
  ExpectationProblem base_problem(const AssembledCovariance& cov) const;
  DensityEstimate evaluate_internal(const Scaled& q, std::span<const double> grid, std::uint64_t seed) const;
  DensityEstimate finish(const RiceEstimate& numerator) const;

  Spectrum spectrum_;  // raw or normalized, as used for computation
  Sampling sampling_;
  double v_;           // physical
  double v_internal_;
  DensityOptions options_;
  NormalizationScales scales_;
  double denominator_internal_;
};

//////////////////////////////////////////////////
// Gridded densities

/// Nodes with integration weights; the weights sum to the covered length.
struct GridAxis {
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Edges of the cells that the nodes integrate over; nodes of cell c lie in
  /// [edges[c], edges[c + 1]].
  std::vector<double> edges;

  std::size_t size() const { return nodes.size(); }
  double lo() const { return edges.front(); }
  double hi() const { return edges.back(); }
};

/// Composite Gauss-Legendre: `cells` equal cells on [lo, hi], `points` nodes each.
GridAxis gauss_axis(double lo, double hi, int cells, int points);
/// `count` nodes at the centers of equal cells on [lo, hi].
GridAxis midpoint_axis(double lo, double hi, int count);
/// `count` log-spaced cells on [lo, hi] (lo > 0), node at each cell's geometric center.
GridAxis log_axis(double lo, double hi, int count);

struct DensityGrid4 {
  std::array<GridAxis, 4> axes;  // r, s, u, w
  std::vector<double> values;
  std::vector<double> std_errors;
  std::vector<char> evaluated;  // 0 where a time budget stopped the computation
  bool budget_exceeded = false;
  /// Nodes whose sampling budget ran out before the precision target.
  std::size_t imprecise_nodes = 0;

  std::size_t size() const;
  std::size_t index(std::size_t ir, std::size_t is, std::size_t iu, std::size_t iw) const;
  /// Weight of one node in a 4-D integral.
  double cell_weight(std::size_t ir, std::size_t is, std::size_t iu, std::size_t iw) const;
  bool complete() const;
  double total_mass() const;
  /// Standard error of total_mass, treating cells as independent.
  double mass_std_error() const;
};

struct GridEvaluationOptions {
  unsigned threads = 1;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Evaluates `model` at every node. Node (ir, is, iu, iw) uses the seed
/// derive_seed(seed, flat index), so values do not depend on threads or order.
DensityGrid4 evaluate_grid(const GeometryModel& model, const std::array<GridAxis, 4>& axes, std::uint64_t seed,
                           const GridEvaluationOptions& opts = {});

/// Masses (and standard errors) of the cells of each axis, flattened as the grid.
struct CellMasses {
  std::array<std::size_t, 4> shape{};
  std::vector<double> mass;
  std::vector<double> std_error;
};

CellMasses cell_masses(const DensityGrid4& grid);

//////////////////////////////////////////////////
// Importance-sampled integrals

using Point4 = std::array<double, 4>;  // r, s, u, w

/// Proposal law on r, s, u > 0 > w for importance sampling the density.
/// Works in y = (log r, log s, log u, log -w): a mixture of Gaussian kernels
/// centred at the given points (Silverman bandwidth times `bandwidth_factor`)
/// with weight 1 - defensive, plus a product Gaussian with twice the spread of
/// the points with weight `defensive`, which keeps f / q bounded in the tails.
class LogKernelProposal {
 public:
  explicit LogKernelProposal(std::span<const Point4> points, double bandwidth_factor = 0.5,
                             double defensive = 0.2, std::size_t max_kernels = 4000);

  Point4 sample(std::mt19937_64& rng) const;
  /// Density with respect to dr ds du dw; zero outside the domain.
  double density(const Point4& z) const;

 private:
  std::vector<Point4> centers_;
  Point4 h_{};
  Point4 mean_{};
  Point4 spread_{};
  double defensive_;
};

/// Axis-aligned box; points outside contribute zero.
struct Box4 {
  Point4 lo{0.0, 0.0, 0.0, -std::numeric_limits<double>::infinity()};
  Point4 hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 0.0};

  bool contains(const Point4& z) const;
};

/// Draws z_j ~ q and keeps f(z_j) / q(z_j); averages of these ratios estimate
/// integrals of f. Point j draws from derive_seed(seed, j), so results do not
/// depend on threads.
struct ImportanceIntegral {
  std::vector<Point4> points;
  std::vector<double> ratio;

  double mass() const;
  double mass_std_error() const;
  /// Masses of the cells of a 4-D product of edge lists, flattened r-major as
  /// in CellMasses. Points outside every cell are ignored.
  CellMasses cell_masses(const std::array<std::vector<double>, 4>& edges) const;
};

ImportanceIntegral importance_integral(const GeometryModel& model, const LogKernelProposal& proposal, std::size_t n,
                                       std::uint64_t seed, const Box4& box = {}, unsigned threads = 1);

/// 2-D density of half-wavelength l = x2 + x3 and waveheight h = H2 - H3,
/// obtained by re-binning node masses into the given cells. Nodes outside the
/// edge range go to the nearest end cell, so mass is conserved.
struct Marginal2 {
  std::vector<double> l_edges;
  std::vector<double> h_edges;
  std::vector<double> mass;  // il * (h_edges.size() - 1) + ih
  std::vector<double> std_error;

  double total_mass() const;
  /// Density value (mass over cell area).
  double density(std::size_t il, std::size_t ih) const;
  /// Mass per l-cell, summed over h.
  std::vector<double> l_marginal() const;
};

Marginal2 marginal_halfwavelength_height(const DensityGrid4& grid, std::vector<double> l_edges,
                                         std::vector<double> h_edges);

/// Default edges spanning the reachable (l, h) range of the grid.
Marginal2 marginal_halfwavelength_height(const DensityGrid4& grid, int l_cells = 24, int h_cells = 16);

}  // namespace wavepalm
