#include "wavepalm/sea.hpp"

#include "wavepalm/normal.hpp"
#include "wavepalm/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <utility>

namespace wavepalm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Upper end of the synthesized band when the spectrum has no cutoff; the
// omega^-5 tail beyond it carries a few 1e-6 of the variance.
constexpr double kUncutBand = 20.0;

// Inverse of the normalized cumulative energy of S on [lo, hi], tabulated on a
// fine uniform grid (piecewise-constant density between nodes).
class EnergyQuantile {
 public:
  EnergyQuantile(const Spectrum& spectrum, double lo, double hi, int intervals = 1 << 14)
      : lo_(lo), h_((hi - lo) / intervals), cum_(intervals + 1, 0.0) {
    double prev = spectrum.density(lo);
    for (int i = 1; i <= intervals; ++i) {
      const double cur = spectrum.density(lo + i * h_);
      cum_[i] = cum_[i - 1] + 0.5 * h_ * (prev + cur);
      prev = cur;
    }
    for (double& c : cum_) c /= cum_.back();
  }

  double operator()(double p) const {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), p);
    const auto i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(it - cum_.begin(), 1, cum_.size() - 1));
    const double span = cum_[i] - cum_[i - 1];
    const double t = span > 0.0 ? (p - cum_[i - 1]) / span : 0.5;
    return lo_ + (static_cast<double>(i - 1) + std::clamp(t, 0.0, 1.0)) * h_;
  }

 private:
  double lo_;
  double h_;
  std::vector<double> cum_;
};

// cos / sin of phase0 + n * step for n = 0, 1, ..., by rotation; recomputed
// exactly every kReseed steps so rounding does not accumulate.
class PhaseRotor {
 public:
  PhaseRotor(Eigen::ArrayXd phase0, Eigen::ArrayXd step)
      : phase0_(std::move(phase0)), step_(std::move(step)), cs_(step_.cos()), sn_(step_.sin()) {
    reset(0);
  }

  void advance() {
    if (++n_ % kReseed == 0) {
      reset(n_);
      return;
    }
    tmp_ = c_ * cs_ - s_ * sn_;
    s_ = s_ * cs_ + c_ * sn_;
    c_.swap(tmp_);
  }

  const Eigen::ArrayXd& c() const { return c_; }
  const Eigen::ArrayXd& s() const { return s_; }

 private:
  static constexpr long kReseed = 256;

  void reset(long n) {
    n_ = n;
    const Eigen::ArrayXd ph = phase0_ + static_cast<double>(n) * step_;
    c_ = ph.cos();
    s_ = ph.sin();
  }

  Eigen::ArrayXd phase0_, step_, cs_, sn_, c_, s_, tmp_;
  long n_ = 0;
};

// Safeguarded Newton iteration on a sign-changing bracket; f returns (value, derivative).
template <typename F>
double refine_root(F&& f, double lo, double hi, double ftol) {
  const double flo = f(lo).first;
  const double fhi = f(hi).first;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  double xl = flo < 0.0 ? lo : hi;
  double xh = flo < 0.0 ? hi : lo;
  const double xtol = 1e-12 * (std::abs(hi) + std::abs(hi - lo));
  double x = 0.5 * (lo + hi);
  double step_old = std::abs(hi - lo);
  for (int it = 0; it < 200; ++it) {
    const auto [fx, dfx] = f(x);
    if (std::abs(fx) <= ftol) return x;
    (fx < 0.0 ? xl : xh) = x;
    double next = x - fx / dfx;
    const bool inside = dfx != 0.0 && (next - xl) * (next - xh) < 0.0;
    if (!inside || std::abs(next - x) > 0.5 * step_old) next = 0.5 * (xl + xh);
    step_old = std::abs(next - x);
    x = next;
    if (std::abs(xh - xl) <= xtol) return x;
  }
  return x;
}

struct Scales {
  double w;   // standard deviation of W in this realization's ensemble
  double wx;  // standard deviation of W_x
};

Scales field_scales(const SeaRealization& sea) {
  const Eigen::ArrayXd var = 0.5 * (sea.a.square() + sea.b.square());
  return {std::sqrt(var.sum()), std::sqrt((var * sea.k.square()).sum())};
}

struct Extremum {
  double x;
  double w;
};

// Nearest zero of W_x(., t) from x_c in direction `dir` (W_x(x_c, t) < 0).
std::optional<Extremum> nearest_extremum(const SeaRealization& sea, double xc, double t, int dir, double dx,
                                         double max_search, double ftol) {
  PhaseRotor rot(sea.k * xc + sea.omega * t, sea.k * (dir * dx));
  const Eigen::ArrayXd ka = sea.k * sea.a;
  const Eigen::ArrayXd kb = sea.k * sea.b;
  const auto steps = static_cast<long>(std::ceil(max_search / dx));
  double prev_x = xc;
  for (long i = 1; i <= steps; ++i) {
    rot.advance();
    const double wx = (kb * rot.c() - ka * rot.s()).sum();
    const double x = xc + dir * dx * static_cast<double>(i);
    if (wx >= 0.0) {
      const double root = refine_root(
          [&](double y) {
            const FieldValue f = evaluate(sea, y, t);
            return std::pair{f.wx, f.wxx};
          },
          std::min(prev_x, x), std::max(prev_x, x), ftol);
      return Extremum{root, evaluate(sea, root, t).w};
    }
    prev_x = x;
  }
  return std::nullopt;
}

double default_max_search(const SeaRealization& sea) {
  const Eigen::ArrayXd var = 0.5 * (sea.a.square() + sea.b.square());
  const double l00 = var.sum();
  const double l20 = (var * sea.k.square()).sum();
  // 50 mean distances between centers
  return 50.0 * kTwoPi * std::sqrt(l00 / l20);
}

// Fills geometry of a center at (xc, t); false when an extremum search gives up.
bool fill_geometry(const SeaRealization& sea, double xc, double t, double dx, double max_search, double ftol,
                   CrossingRecord& rec) {
  const auto left = nearest_extremum(sea, xc, t, -1, dx, max_search, ftol);
  if (!left) return false;
  const auto right = nearest_extremum(sea, xc, t, +1, dx, max_search, ftol);
  if (!right) return false;
  rec.x2 = xc - left->x;
  rec.h2 = left->w;
  rec.x3 = right->x - xc;
  rec.h3 = right->w;
  return true;
}

// Sign changes of the scanned process and of its derivative.
struct ScanCounts {
  std::size_t crossings = 0;
  std::size_t extrema = 0;
};

// Scans f(i) = (value, derivative) along the phase grid and counts sign changes.
ScanCounts count_sign_changes(const SeaRealization& sea, const Eigen::ArrayXd& rate, double start, double step,
                              long steps, bool up) {
  PhaseRotor rot(rate * start, rate * step);
  const Eigen::ArrayXd ra = rate * sea.a;
  const Eigen::ArrayXd rb = rate * sea.b;
  ScanCounts n;
  double pz = (sea.a * rot.c() + sea.b * rot.s()).sum();
  double pd = (rb * rot.c() - ra * rot.s()).sum();
  for (long i = 1; i <= steps; ++i) {
    rot.advance();
    const double z = (sea.a * rot.c() + sea.b * rot.s()).sum();
    const double d = (rb * rot.c() - ra * rot.s()).sum();
    if (up ? (pz < 0.0 && z >= 0.0) : (pz > 0.0 && z <= 0.0)) ++n.crossings;
    if ((pd < 0.0) != (d < 0.0)) ++n.extrema;
    pz = z;
    pd = d;
  }
  return n;
}

void check_resolution(const SeaRealization& sea, const Eigen::ArrayXd& rate, double start, double step, long steps,
                      bool up, const ScanCounts& coarse) {
  const ScanCounts fine = count_sign_changes(sea, rate, start, 0.5 * step, 2 * steps, up);
  if (fine.crossings != coarse.crossings || fine.extrema != coarse.extrema)
    throw NumericError("scan step too coarse: halving it changes the number of crossings or extrema",
                       static_cast<double>(fine.crossings + fine.extrema) -
                           static_cast<double>(coarse.crossings + coarse.extrema));
}

}  // namespace

SeaRealization synthesize(const SpectrumConfig& cfg, std::size_t n_components, std::uint64_t seed) {
  cfg.validate();
  if (n_components < 64) throw DomainError("synthesize: need at least 64 components");
  const Spectrum spectrum(cfg);
  const double lo = spectrum.support_lower();
  const double hi = cfg.has_cutoff() ? cfg.omega_c : kUncutBand * cfg.peak_frequency();
  const EnergyQuantile quantile(spectrum, lo, hi);
  const double sd = std::sqrt(spectrum.moment(0, 0) / static_cast<double>(n_components));
  const double cos_theta = std::cos(cfg.theta);

  const auto n = static_cast<Index>(n_components);
  SeaRealization sea;
  sea.seed = seed;
  sea.a.resize(n);
  sea.b.resize(n);
  sea.omega.resize(n);
  sea.k.resize(n);
  std::mt19937_64 rng(seed);
  for (Index j = 0; j < n; ++j) {
    const double p = (static_cast<double>(j) + uniform_open(rng)) / static_cast<double>(n);
    sea.omega[j] = quantile(p);
    sea.k[j] = dispersion(sea.omega[j], cfg.g) * cos_theta;
    sea.a[j] = sd * gaussian(rng);
    sea.b[j] = sd * gaussian(rng);
  }
  return sea;
}

SeaRealization single_harmonic(double amplitude, double omega, double k) {
  SeaRealization sea;
  sea.a = Eigen::ArrayXd::Constant(1, amplitude);
  sea.b = Eigen::ArrayXd::Zero(1);
  sea.omega = Eigen::ArrayXd::Constant(1, omega);
  sea.k = Eigen::ArrayXd::Constant(1, k);
  return sea;
}

FieldValue evaluate(const SeaRealization& sea, double x, double t) {
  const Eigen::ArrayXd phase = sea.k * x + sea.omega * t;
  const Eigen::ArrayXd c = phase.cos();
  const Eigen::ArrayXd s = phase.sin();
  const Eigen::ArrayXd w = sea.a * c + sea.b * s;
  const Eigen::ArrayXd d = sea.b * c - sea.a * s;
  return {w.sum(), (sea.k * d).sum(), (sea.omega * d).sum(), -(sea.k.square() * w).sum()};
}

double default_space_step(const SeaRealization& sea) {
  const double kmax = sea.k.abs().maxCoeff();
  if (!(kmax > 0.0)) throw DomainError("default_space_step: realization has no spatial variation");
  return kTwoPi / kmax / 16.0;
}

double default_time_step(const SeaRealization& sea, double v) {
  const double fmax = (sea.omega + sea.k * v).abs().maxCoeff();
  if (!(fmax > 0.0)) throw DomainError("default_time_step: encountered process is constant");
  return kTwoPi / fmax / 16.0;
}

ScanResult find_centers_spatial(const SeaRealization& sea, double x0, double x1, const ScanOptions& opts) {
  if (!(x1 > x0)) throw DomainError("find_centers_spatial: need x0 < x1");
  const double dx = opts.step > 0.0 ? opts.step : default_space_step(sea);
  const double max_search = opts.max_search > 0.0 ? opts.max_search : default_max_search(sea);
  const Scales sc = field_scales(sea);
  const auto steps = static_cast<long>(std::ceil((x1 - x0) / dx));

  ScanResult out;
  out.extent = x1 - x0;
  ScanCounts counts;
  PhaseRotor rot(sea.k * x0, sea.k * dx);
  const Eigen::ArrayXd ka = sea.k * sea.a;
  const Eigen::ArrayXd kb = sea.k * sea.b;
  double pw = (sea.a * rot.c() + sea.b * rot.s()).sum();
  double pd = (kb * rot.c() - ka * rot.s()).sum();
  for (long i = 1; i <= steps; ++i) {
    rot.advance();
    const double w = (sea.a * rot.c() + sea.b * rot.s()).sum();
    const double d = (kb * rot.c() - ka * rot.s()).sum();
    if ((pd < 0.0) != (d < 0.0)) ++counts.extrema;
    if (pw > 0.0 && w <= 0.0) {
      ++counts.crossings;
      const double lo = x0 + dx * static_cast<double>(i - 1);
      const double xc = refine_root(
          [&](double x) {
            const FieldValue f = evaluate(sea, x, 0.0);
            return std::pair{f.w, f.wx};
          },
          lo, lo + dx, 1e-10 * sc.w);
      if (xc >= x0 && xc < x1) {
        const FieldValue f = evaluate(sea, xc, 0.0);
        CrossingRecord rec;
        rec.location = xc;
        rec.slope = f.wx;
        rec.velocity = -f.wt / f.wx;
        if (fill_geometry(sea, xc, 0.0, dx, max_search, 1e-10 * sc.wx, rec))
          out.records.push_back(rec);
        else
          ++out.censored;
      }
    }
    pw = w;
    pd = d;
  }
  if (opts.check_resolution) check_resolution(sea, sea.k, x0, dx, steps, false, counts);
  return out;
}

ScanResult find_centers_encountered(const SeaRealization& sea, double v, double t0, double t1,
                                    const ScanOptions& opts) {
  if (!(t1 > t0)) throw DomainError("find_centers_encountered: need t0 < t1");
  const double dt = opts.step > 0.0 ? opts.step : default_time_step(sea, v);
  const double dx = default_space_step(sea);
  const double max_search = opts.max_search > 0.0 ? opts.max_search : default_max_search(sea);
  const Scales sc = field_scales(sea);
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / dt));
  const Eigen::ArrayXd rate = sea.omega + sea.k * v;

  ScanResult out;
  out.extent = t1 - t0;
  ScanCounts counts;
  PhaseRotor rot(rate * t0, rate * dt);
  const Eigen::ArrayXd ra = rate * sea.a;
  const Eigen::ArrayXd rb = rate * sea.b;
  double pz = (sea.a * rot.c() + sea.b * rot.s()).sum();
  double pd = (rb * rot.c() - ra * rot.s()).sum();
  for (long i = 1; i <= steps; ++i) {
    rot.advance();
    const double z = (sea.a * rot.c() + sea.b * rot.s()).sum();
    const double d = (rb * rot.c() - ra * rot.s()).sum();
    if ((pd < 0.0) != (d < 0.0)) ++counts.extrema;
    if (pz < 0.0 && z >= 0.0) {
      ++counts.crossings;
      const double lo = t0 + dt * static_cast<double>(i - 1);
      const double tc = refine_root(
          [&](double t) {
            const FieldValue f = evaluate(sea, v * t, t);
            return std::pair{f.w, v * f.wx + f.wt};
          },
          lo, lo + dt, 1e-10 * sc.w);
      const FieldValue f = evaluate(sea, v * tc, tc);
      if (tc >= t0 && tc < t1 && f.wx < 0.0) {
        CrossingRecord rec;
        rec.location = tc;
        rec.slope = f.wx;
        rec.velocity = -f.wt / f.wx;
        if (fill_geometry(sea, v * tc, tc, dx, max_search, 1e-10 * sc.wx, rec))
          out.records.push_back(rec);
        else
          ++out.censored;
      }
    }
    pz = z;
    pd = d;
  }
  if (opts.check_resolution) check_resolution(sea, rate, t0, dt, steps, true, counts);
  return out;
}

double SimulationResult::rate() const {
  return extent > 0.0 ? static_cast<double>(records.size() + censored) / extent : 0.0;
}

double SimulationResult::rate_std_error() const {
  return extent > 0.0 ? std::sqrt(static_cast<double>(records.size() + censored)) / extent : 0.0;
}

double SimulationResult::censored_fraction() const {
  const std::size_t n = records.size() + censored;
  return n > 0 ? static_cast<double>(censored) / static_cast<double>(n) : 0.0;
}

namespace {

constexpr std::size_t kBatch = 8;

template <typename Scan>
SimulationResult simulate(const SpectrumConfig& cfg, std::uint64_t seed, const SimulationOptions& opts, Scan&& scan) {
  SimulationResult out;
  while (out.records.size() < opts.target_centers && out.realizations < opts.max_realizations) {
    if (opts.deadline && std::chrono::steady_clock::now() > *opts.deadline) break;
    const std::size_t batch = std::min(kBatch, opts.max_realizations - out.realizations);
    std::vector<ScanResult> results(batch);
    const std::size_t base = out.realizations;
    parallel_for(batch, opts.threads, [&](std::size_t i) {
      results[i] = scan(synthesize(cfg, opts.n_components, derive_seed(seed, base + i)));
    });
    for (auto& r : results) {
      out.records.insert(out.records.end(), r.records.begin(), r.records.end());
      out.censored += r.censored;
      out.extent += r.extent;
    }
    out.realizations += batch;
  }
  return out;
}

}  // namespace

SimulationResult simulate_spatial(const SpectrumConfig& cfg, std::uint64_t seed, const SimulationOptions& opts) {
  const MomentSet m = Spectrum(cfg).moments();
  const double window = opts.window > 0.0 ? opts.window : 200.0 / spatial_center_intensity(m);
  return simulate(cfg, seed, opts,
                  [&](const SeaRealization& sea) { return find_centers_spatial(sea, 0.0, window, opts.scan); });
}

SimulationResult simulate_encountered(const SpectrumConfig& cfg, double v, std::uint64_t seed,
                                      const SimulationOptions& opts) {
  const MomentSet m = Spectrum(cfg).moments();
  const double window = opts.window > 0.0 ? opts.window : 200.0 / encountered_center_intensity(m, 0.0);
  return simulate(cfg, seed, opts, [&](const SeaRealization& sea) {
    return find_centers_encountered(sea, v, 0.0, window, opts.scan);
  });
}

double field_value(const CrossingRecord& r, RecordField f) {
  switch (f) {
    case RecordField::slope: return r.slope;
    case RecordField::velocity: return r.velocity;
    case RecordField::x2: return r.x2;
    case RecordField::x3: return r.x3;
    case RecordField::h2: return r.h2;
    case RecordField::h3: return r.h3;
  }
  return 0.0;
}

std::vector<double> field_values(std::span<const CrossingRecord> records, RecordField f) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(field_value(r, f));
  return out;
}

EmpiricalCdf empirical_palm_cdf(std::span<const CrossingRecord> records, RecordField f,
                                std::span<const double> grid) {
  if (records.size() < 100) throw InsufficientSamples("empirical_palm_cdf: need at least 100 records", records.size());
  std::vector<double> v = field_values(records, f);
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  EmpiricalCdf out;
  out.count = v.size();
  out.grid.assign(grid.begin(), grid.end());
  for (double g : grid) {
    const double p = static_cast<double>(std::upper_bound(v.begin(), v.end(), g) - v.begin()) / n;
    out.values.push_back(p);
    out.std_errors.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  return out;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InsufficientSamples("ks_distance: empty sample", 0);
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

DensityGrid4 empirical_density4(std::span<const CrossingRecord> records, const std::array<GridAxis, 4>& axes) {
  if (records.empty()) throw InsufficientSamples("empirical_density4: no records", 0);
  DensityGrid4 g;
  for (int a = 0; a < 4; ++a) {
    const auto& e = axes[a].edges;
    if (e.size() < 2) throw DomainError("empirical_density4: every axis needs at least one cell");
    GridAxis& ax = g.axes[a];
    ax.edges = e;
    for (std::size_t c = 0; c + 1 < e.size(); ++c) {
      if (!(e[c + 1] > e[c])) throw DomainError("empirical_density4: edges must increase");
      ax.nodes.push_back(0.5 * (e[c] + e[c + 1]));
      ax.weights.push_back(e[c + 1] - e[c]);
    }
  }
  std::vector<double> counts(g.size(), 0.0);
  for (const auto& r : records) {
    const double coord[4] = {r.x2, r.x3, r.h2, r.h3};
    std::size_t cell[4];
    bool inside = true;
    for (int a = 0; a < 4 && inside; ++a) {
      const auto& e = g.axes[a].edges;
      if (!(coord[a] >= e.front() && coord[a] < e.back())) {
        inside = false;
        break;
      }
      cell[a] = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), coord[a]) - e.begin()) - 1;
    }
    if (inside) counts[g.index(cell[0], cell[1], cell[2], cell[3])] += 1.0;
  }
  const auto n = static_cast<double>(records.size());
  g.values.resize(g.size());
  g.std_errors.resize(g.size());
  g.evaluated.assign(g.size(), 1);
  for (std::size_t ir = 0; ir < g.axes[0].size(); ++ir)
    for (std::size_t is = 0; is < g.axes[1].size(); ++is)
      for (std::size_t iu = 0; iu < g.axes[2].size(); ++iu)
        for (std::size_t iw = 0; iw < g.axes[3].size(); ++iw) {
          const std::size_t i = g.index(ir, is, iu, iw);
          const double vol = g.cell_weight(ir, is, iu, iw);
          const double p = counts[i] / n;
          g.values[i] = p / vol;
          g.std_errors[i] = std::sqrt(p * (1.0 - p) / n) / vol;
        }
  return g;
}

}  // namespace wavepalm
