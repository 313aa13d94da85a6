#include "cli.hpp"

#include "wavepalm/config_io.hpp"
#include "wavepalm/geometry.hpp"
#include "wavepalm/palm.hpp"
#include "wavepalm/sea.hpp"
#include "wavepalm/spectrum.hpp"
#include "wavepalm/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace wavepalm::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// Shortest round-trip decimal form, independent of the locale.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Options {
  std::string config;
  std::vector<double> speeds;
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 1;
  double budget_seconds = 0.0;
  std::string grid_spec;
  std::size_t points = 512;
  std::size_t centers = 20000;
  std::size_t encountered_centers = 10000;
  std::string manifest;
};

std::optional<Clock::time_point> deadline_of(const Options& o, Clock::time_point start) {
  if (o.budget_seconds > 0.0)
    return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(o.budget_seconds));
  return std::nullopt;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_manifest(const std::string& path, const std::vector<std::string>& args, const SpectrumConfig& cfg,
                    const Options& o, double runtime, const std::vector<std::string>& outputs, json extra = {}) {
  json j;
  j["command"] = args;
  j["config"] = to_json(cfg);
  j["seeds"] = {{"master", o.seed}};
  j["speeds"] = o.speeds;
  j["threads"] = o.threads;
  j["version"] = kVersion;
  j["runtime_seconds"] = runtime;
  json digests = json::object();
  for (const auto& p : outputs) digests[p] = file_digest(p);
  j["outputs"] = digests;
  if (!extra.is_null()) j["details"] = extra;
  auto f = open_output(path);
  f << j.dump(2) << '\n';
}

// A sea travelling across the x-axis has no spatial variation along it, so
// none of the Palm laws on x exist.
SpectrumConfig load_model_config(const std::string& path) {
  SpectrumConfig cfg = load_spectrum_config(path);
  if (std::abs(std::cos(cfg.theta)) < 1e-9)
    throw DegenerateModel("wave direction is perpendicular to the x-axis (cos theta = 0)");
  return cfg;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Writes `doc` to --out (with a manifest) or to the report stream.
void emit_json(const json& doc, const Options& o, const std::vector<std::string>& args, const SpectrumConfig& cfg,
               Clock::time_point start, std::ostream& out) {
  if (o.out.empty()) {
    out << doc.dump(2) << '\n';
    return;
  }
  {
    auto f = open_output(o.out);
    f << doc.dump(2) << '\n';
  }
  write_manifest(o.out + ".manifest.json", args, cfg, o, seconds_since(start), {o.out});
}

void emit_text(const std::string& text, const Options& o, const std::vector<std::string>& args,
               const SpectrumConfig& cfg, Clock::time_point start, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  {
    auto f = open_output(o.out);
    f << text;
  }
  write_manifest(o.out + ".manifest.json", args, cfg, o, seconds_since(start), {o.out});
}

//////////////////////////////////////////////////
// Grid specification: comma-separated "axis=kind:lo:hi:count[:points]" for
// axis in r, s, u, w with kind log | mid | gauss, plus "n=<indicator points>".

constexpr const char* kDefaultGridSpec = "r=log:1:250:24,s=log:1:250:24,u=mid:0:15:16,w=mid:-15:0:16,n=48";

struct GridSpec {
  std::array<GridAxis, 4> axes;
  int indicator_points = 48;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

double parse_number(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("grid spec: bad number '" + s + "'");
  return x;
}

GridAxis parse_axis(const std::string& text) {
  const auto f = split(text, ':');
  if (f.size() < 4) throw UsageError("grid spec: axis needs kind:lo:hi:count, got '" + text + "'");
  const double lo = parse_number(f[1]), hi = parse_number(f[2]);
  const int count = static_cast<int>(parse_number(f[3]));
  if (f[0] == "log") return log_axis(lo, hi, count);
  if (f[0] == "mid") return midpoint_axis(lo, hi, count);
  if (f[0] == "gauss") return gauss_axis(lo, hi, count, f.size() > 4 ? static_cast<int>(parse_number(f[4])) : 2);
  throw UsageError("grid spec: unknown axis kind '" + f[0] + "'");
}

GridSpec parse_grid_spec(const std::string& user) {
  GridSpec spec;
  const std::string names = "rsuw";
  std::array<bool, 4> seen{};
  auto apply = [&](const std::string& text) {
    for (const auto& item : split(text, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("grid spec: expected key=value, got '" + item + "'");
      const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "n") {
        spec.indicator_points = static_cast<int>(parse_number(value));
        continue;
      }
      const auto a = names.find(key);
      if (key.size() != 1 || a == std::string::npos) throw UsageError("grid spec: unknown key '" + key + "'");
      spec.axes[a] = parse_axis(value);
      seen[a] = true;
    }
  };
  apply(user);
  // fill the axes the user left out
  for (const auto& item : split(kDefaultGridSpec, ',')) {
    const auto a = names.find(item[0]);
    if (item[0] == 'n' || a == std::string::npos || seen[a]) continue;
    spec.axes[a] = parse_axis(item.substr(2));
  }
  return spec;
}

//////////////////////////////////////////////////

int cmd_moments(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = Clock::now();
  const SpectrumConfig cfg = load_model_config(o.config);
  const Spectrum spectrum(cfg);
  const MomentSet m = spectrum.moments();
  const NormalizationScales sc = normalize(spectrum).scales;
  json doc;
  doc["lambda00"] = m.l00();
  doc["lambda11"] = m.l11();
  doc["lambda20"] = m.l20();
  doc["lambda02"] = m.l02();
  doc["mean_velocity"] = m.mean_velocity();
  doc["velocity_sigma2"] = m.velocity_sigma2();
  doc["scales"] = {{"x_scale", sc.x_scale}, {"t_scale", sc.t_scale}, {"v_scale", sc.v_scale},
                   {"elevation_scale", sc.elevation_scale}};
  emit_json(doc, o, args, cfg, start, out);
  return kOk;
}

int cmd_normalize(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = Clock::now();
  const SpectrumConfig cfg = load_model_config(o.config);
  const Spectrum spectrum(cfg);
  const NormalizedModel nm = normalize(spectrum);
  const MomentSet m = nm.spectrum.moments();
  json doc;
  doc["scales"] = {{"x_scale", nm.scales.x_scale}, {"t_scale", nm.scales.t_scale}, {"v_scale", nm.scales.v_scale},
                   {"elevation_scale", nm.scales.elevation_scale}};
  doc["normalized_moments"] = {{"lambda00", m.l00()}, {"lambda20", m.l20()}, {"lambda02", m.l02()},
                               {"lambda11", m.l11()}};
  json speeds = json::array();
  for (double v : o.speeds) speeds.push_back({{"v", v}, {"v_normalized", normalize(spectrum, v).speed}});
  doc["speeds"] = speeds;
  emit_json(doc, o, args, cfg, start, out);
  return kOk;
}

int cmd_slope(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = Clock::now();
  const SpectrumConfig cfg = load_model_config(o.config);
  const MomentSet m = Spectrum(cfg).moments();
  if (o.points < 2) throw UsageError("--points must be at least 2");
  const double lo = -6.0 * std::sqrt(m.l20());
  std::ostringstream csv;
  csv << "w,spatial";
  for (double v : o.speeds) csv << ",v=" << num(v);
  csv << '\n';
  for (std::size_t i = 0; i < o.points; ++i) {
    const double w = lo * (1.0 - static_cast<double>(i) / static_cast<double>(o.points - 1));
    csv << num(w) << ',' << num(slope_cdf_spatial(m.l20(), w));
    for (double v : o.speeds) csv << ',' << num(slope_cdf_encountered(m, v, w));
    csv << '\n';
  }
  emit_text(csv.str(), o, args, cfg, start, out);
  return kOk;
}

int cmd_velocity(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto start = Clock::now();
  const SpectrumConfig cfg = load_model_config(o.config);
  const MomentSet m = Spectrum(cfg).moments();
  const TabulatedCdf t = tabulate_velocity(m, std::max<std::size_t>(o.points, 2));
  std::ostringstream csv;
  csv << "v,cdf\n";
  for (std::size_t i = 0; i < t.grid.size(); ++i) csv << num(t.grid[i]) << ',' << num(t.values[i]) << '\n';
  emit_text(csv.str(), o, args, cfg, start, out);
  return kOk;
}

int cmd_joint(const Options& o, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  if (o.out.empty()) throw UsageError("joint: --out <prefix> is required");
  if (o.speeds.size() > 1) throw UsageError("joint: give at most one --speed");
  const SpectrumConfig cfg = load_model_config(o.config);
  const Spectrum spectrum(cfg);
  const GridSpec spec = parse_grid_spec(o.grid_spec);
  DensityOptions dopt;
  dopt.grid_points = spec.indicator_points;
  const bool encountered = !o.speeds.empty();
  const double v = encountered ? o.speeds.front() : 0.0;
  if (encountered) encountered_slope_correlation(spectrum.moments(), v);  // degenerate speeds fail here
  const GeometryModel model(spectrum, encountered ? Sampling::encountered : Sampling::spatial, v, dopt);

  GridEvaluationOptions gopt;
  gopt.threads = o.threads;
  gopt.deadline = deadline_of(o, start);
  DensityGrid4 grid = evaluate_grid(model, spec.axes, o.seed, gopt);

  const std::string grid_path = o.out + ".grid.csv", marginal_path = o.out + ".marginal.csv";
  {
    auto f = open_output(grid_path);
    f << "r,s,u,w,value,std_error,evaluated\n";
    for (std::size_t ir = 0; ir < grid.axes[0].size(); ++ir)
      for (std::size_t is = 0; is < grid.axes[1].size(); ++is)
        for (std::size_t iu = 0; iu < grid.axes[2].size(); ++iu)
          for (std::size_t iw = 0; iw < grid.axes[3].size(); ++iw) {
            const std::size_t k = grid.index(ir, is, iu, iw);
            f << num(grid.axes[0].nodes[ir]) << ',' << num(grid.axes[1].nodes[is]) << ','
              << num(grid.axes[2].nodes[iu]) << ',' << num(grid.axes[3].nodes[iw]) << ',' << num(grid.values[k])
              << ',' << num(grid.std_errors[k]) << ',' << int(grid.evaluated[k]) << '\n';
          }
  }
  // nodes a time budget skipped carry no mass in the marginal
  DensityGrid4 filled = grid;
  for (std::size_t k = 0; k < filled.size(); ++k)
    if (!filled.evaluated[k]) filled.values[k] = filled.std_errors[k] = 0.0;
  const Marginal2 marg = marginal_halfwavelength_height(filled);
  {
    auto f = open_output(marginal_path);
    f << "l_lo,l_hi,h_lo,h_hi,mass,density,std_error\n";
    const std::size_t nh = marg.h_edges.size() - 1;
    for (std::size_t il = 0; il + 1 < marg.l_edges.size(); ++il)
      for (std::size_t ih = 0; ih < nh; ++ih)
        f << num(marg.l_edges[il]) << ',' << num(marg.l_edges[il + 1]) << ',' << num(marg.h_edges[ih]) << ','
          << num(marg.h_edges[ih + 1]) << ',' << num(marg.mass[il * nh + ih]) << ',' << num(marg.density(il, ih))
          << ',' << num(marg.std_error[il * nh + ih]) << '\n';
  }
  json details;
  details["grid_spec"] = o.grid_spec.empty() ? std::string(kDefaultGridSpec) : o.grid_spec;
  details["sampling"] = encountered ? "encountered" : "spatial";
  details["speed"] = v;
  details["total_mass"] = filled.total_mass();
  details["marginal_mass"] = marg.total_mass();
  details["imprecise_nodes"] = grid.imprecise_nodes;
  details["complete"] = !grid.budget_exceeded;
  write_manifest(o.out + ".manifest.json", args, cfg, o, seconds_since(start), {grid_path, marginal_path}, details);
  out << "wrote " << grid_path << " and " << marginal_path << " (mass " << num(filled.total_mass()) << ")\n";
  if (grid.budget_exceeded) {
    err << "warning: time budget exceeded; the grid is partial\n";
    return kBudgetExceeded;
  }
  return kOk;
}

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

int cmd_simulate_compare(const Options& o, const std::vector<std::string>& args, std::ostream& out,
                         std::ostream& err) {
  const auto start = Clock::now();
  const SpectrumConfig cfg = load_model_config(o.config);
  const MomentSet m = Spectrum(cfg).moments();
  for (double v : o.speeds) encountered_slope_correlation(m, v);

  SimulationOptions sopt;
  sopt.threads = o.threads;
  sopt.deadline = deadline_of(o, start);
  sopt.target_centers = o.centers;
  const SimulationResult spatial = simulate_spatial(cfg, derive_seed(o.seed, 0), sopt);
  std::vector<SimulationResult> enc;
  sopt.target_centers = o.encountered_centers;
  for (std::size_t i = 0; i < o.speeds.size(); ++i)
    enc.push_back(simulate_encountered(cfg, o.speeds[i], derive_seed(o.seed, i + 1), sopt));

  std::vector<Check> checks;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  const std::size_t min_records = 100;
  if (spatial.records.size() >= min_records) {
    const double ks =
        ks_distance(field_values(spatial.records, RecordField::slope), [&](double w) { return slope_cdf_spatial(m.l20(), w); });
    checks.push_back({"spatial_slope_sup_distance", ks, 0.015, ks <= 0.015});
    std::vector<double> vel = field_values(spatial.records, RecordField::velocity);
    const double ksv = ks_distance(vel, [&](double v) { return velocity_cdf(m, v); });
    checks.push_back({"velocity_sup_distance", ksv, 0.02, ksv <= 0.02});
    std::nth_element(vel.begin(), vel.begin() + vel.size() / 2, vel.end());
    const double med = rel(vel[vel.size() / 2], m.mean_velocity());
    checks.push_back({"velocity_median_rel_error", med, 0.02, med <= 0.02});
    const double rate = rel(spatial.rate(), spatial_center_intensity(m));
    checks.push_back({"spatial_rate_rel_error", rate, 0.02, rate <= 0.02});
  }
  for (std::size_t i = 0; i < o.speeds.size(); ++i) {
    const double v = o.speeds[i];
    const auto& e = enc[i];
    if (e.records.size() < min_records) continue;
    const std::string tag = "_v=" + num(v);
    const double ks = ks_distance(field_values(e.records, RecordField::slope),
                                  [&](double w) { return slope_cdf_encountered(m, v, w); });
    checks.push_back({"encountered_slope_sup_distance" + tag, ks, 0.02, ks <= 0.02});
    const double rate = rel(e.rate(), encountered_center_intensity(m, v));
    checks.push_back({"encountered_rate_rel_error" + tag, rate, 0.03, rate <= 0.03});
    double violations = 0.0;
    for (const auto& r : e.records)
      if (!(r.velocity > v)) violations += 1.0;
    checks.push_back({"velocity_below_ship_speed" + tag, violations, 0.0, violations == 0.0});
  }

  std::ostringstream report;
  report << "check,value,threshold,status\n";
  for (const auto& c : checks)
    report << c.name << ',' << num(c.value) << ',' << num(c.threshold) << ',' << (c.pass ? "PASS" : "FAIL") << '\n';

  json summary;
  auto describe = [&](const SimulationResult& r, double analytic_rate) {
    return json{{"records", r.records.size()},     {"censored", r.censored},
                {"censored_fraction", r.censored_fraction()}, {"realizations", r.realizations},
                {"extent", r.extent},              {"rate", r.rate()},
                {"rate_std_error", r.rate_std_error()}, {"analytic_rate", analytic_rate}};
  };
  summary["spatial"] = describe(spatial, spatial_center_intensity(m));
  summary["spatial"]["seed"] = derive_seed(o.seed, 0);
  json encs = json::array();
  for (std::size_t i = 0; i < enc.size(); ++i) {
    json d = describe(enc[i], encountered_center_intensity(m, o.speeds[i]));
    d["v"] = o.speeds[i];
    d["seed"] = derive_seed(o.seed, i + 1);
    encs.push_back(d);
  }
  summary["encountered"] = encs;

  if (o.out.empty()) {
    out << report.str();
  } else {
    const std::string report_path = o.out + ".report.csv", records_path = o.out + ".records.csv",
                      summary_path = o.out + ".summary.json";
    open_output(report_path) << report.str();
    open_output(summary_path) << summary.dump(2) << '\n';
    {
      auto f = open_output(records_path);
      f << "case,location,slope,velocity,x2,x3,h2,h3\n";
      auto dump = [&](const std::string& name, const SimulationResult& r) {
        for (const auto& c : r.records)
          f << name << ',' << num(c.location) << ',' << num(c.slope) << ',' << num(c.velocity) << ',' << num(c.x2)
            << ',' << num(c.x3) << ',' << num(c.h2) << ',' << num(c.h3) << '\n';
      };
      dump("spatial", spatial);
      for (std::size_t i = 0; i < enc.size(); ++i) dump("v=" + num(o.speeds[i]), enc[i]);
    }
    write_manifest(o.out + ".manifest.json", args, cfg, o, seconds_since(start),
                   {report_path, summary_path, records_path});
    out << report.str();
  }

  if (spatial.records.size() < o.centers) {
    err << "insufficient centers: spatial reached " << spatial.records.size() << " of " << o.centers << '\n';
    return kInsufficientSamples;
  }
  for (std::size_t i = 0; i < enc.size(); ++i)
    if (enc[i].records.size() < o.encountered_centers) {
      err << "insufficient centers: v=" << num(o.speeds[i]) << " reached " << enc[i].records.size() << " of "
          << o.encountered_centers << '\n';
      return kInsufficientSamples;
    }
  const bool all_pass = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  return all_pass ? kOk : kFailure;
}

int cmd_replay(const Options& o, std::ostream& out, std::ostream& err) {
  std::ifstream f(o.manifest);
  if (!f) throw ConfigError("cannot read manifest " + o.manifest);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + o.manifest + " is not valid JSON");
  }
  if (!j.contains("command") || !j.contains("outputs")) throw ConfigError("manifest lacks command or outputs");
  const auto args = j["command"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw ConfigError("manifest records a replay");
  std::ostringstream sink;
  const int code = run(args, sink, err);
  if (code != kOk) return code;
  bool same = true;
  for (const auto& [path, digest] : j["outputs"].items()) {
    const std::string now = file_digest(path);
    if (now != digest.get<std::string>()) {
      same = false;
      out << "differs: " << path << '\n';
    }
  }
  out << (same ? "replay identical\n" : "replay differs\n");
  return same ? kOk : kFailure;
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return "missing";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Palm distributions of wave characteristics for a Gaussian sea", "wavepalm"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "spectrum configuration (JSON)")->envname("WAVEPALM_CONFIG");
    if (needs_config) c->required();
    sub->add_option("--speed", o.speeds, "ship speed in m/s (repeatable)")->envname("WAVEPALM_SPEED")->delimiter(',');
    sub->add_option("--seed", o.seed, "master seed")->envname("WAVEPALM_SEED");
    sub->add_option("--out", o.out, "output path or prefix")->envname("WAVEPALM_OUT");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->envname("WAVEPALM_THREADS");
    sub->add_option("--budget-seconds", o.budget_seconds, "wall-clock budget (0 = none)")
        ->envname("WAVEPALM_BUDGET_SECONDS");
    sub->add_option("--grid-spec", o.grid_spec, "axes as r=log:1:250:24,...,n=48")->envname("WAVEPALM_GRID_SPEC");
  };
  auto* moments = app.add_subcommand("moments", "spectral moments and normalization scales");
  auto* normal = app.add_subcommand("normalize", "normalized model and speeds");
  auto* slope = app.add_subcommand("slope", "Palm slope distributions, spatial and encountered");
  auto* velocity = app.add_subcommand("velocity", "distribution of wave velocity at centers");
  auto* joint = app.add_subcommand("joint", "joint density of (x2, x3, H2, H3) on a grid");
  auto* compare = app.add_subcommand("simulate-compare", "simulated sea against the analytic laws");
  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare output digests");
  for (auto* sub : {moments, normal, slope, velocity, joint, compare}) add_common(sub, true);
  for (auto* sub : {slope, velocity})
    sub->add_option("--points", o.points, "grid points")->envname("WAVEPALM_POINTS");
  compare->add_option("--centers", o.centers, "spatial centers to collect")->envname("WAVEPALM_CENTERS");
  compare->add_option("--encountered-centers", o.encountered_centers, "centers per ship speed")
      ->envname("WAVEPALM_ENCOUNTERED_CENTERS");
  replay->add_option("manifest", o.manifest, "manifest written by an earlier run")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*moments) return cmd_moments(o, args, out);
    if (*normal) return cmd_normalize(o, args, out);
    if (*slope) return cmd_slope(o, args, out);
    if (*velocity) return cmd_velocity(o, args, out);
    if (*joint) return cmd_joint(o, args, out, err);
    if (*compare) return cmd_simulate_compare(o, args, out, err);
    if (*replay) return cmd_replay(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DegenerateModel& e) {
    err << "degenerate model: " << e.what() << '\n';
    return kDegenerateModel;
  } catch (const InsufficientSamples& e) {
    err << "insufficient samples: " << e.what() << '\n';
    return kInsufficientSamples;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace wavepalm::cli
