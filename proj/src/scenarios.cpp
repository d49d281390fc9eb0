// Copyright 2026 The polariton-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polsim/scenarios.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "polsim/errors.hpp"
#include "polsim/parallel.hpp"

namespace polsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Triplet ratios of the default parameter blocks. fig2*: result of the
// saturation fit to S = 1 at 0.24 photons per lifetime (fig2e refits it).
// fig4*: strong shelving, needed for near-full probe transmission at one
// pump photon per cavity lifetime.
constexpr double kFig2TripletRatio = 2.65;
constexpr double kFig4TripletRatio = 100.0;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

using KeyValues = std::map<std::string, std::string>;

KeyValues system_block(double g, double eta_cpl, double triplet_ratio) {
  const double gamma_et = 1e-5;
  return {{"g", format_number(g)},
          {"kappa", "1.3"},
          {"gamma", "0.04"},
          {"branching_beta", "0.3"},
          {"gamma_et", format_number(gamma_et)},
          {"gamma_tg", format_number(gamma_et / triplet_ratio)},
          {"gamma_deph", "0"},
          {"delta_cavity", "0"},
          {"delta_molecule", "0"},
          {"lambda_nm", "785"},
          {"eta_cpl", format_number(eta_cpl)}};
}

KeyValues sweep_block(const std::string& start, const std::string& stop, const std::string& points,
                      const std::string& scale) {
  return {{"sweep_start", start}, {"sweep_stop", stop}, {"sweep_points", points}, {"sweep_scale", scale}};
}

KeyValues floquet_block() {
  return {{"n_harmonics", "auto"}, {"floquet_tol", "1e-6"}, {"max_harmonics", "41"}};
}

void merge(KeyValues& into, const KeyValues& from) {
  for (const auto& kv : from) into[kv.first] = kv.second;
}

KeyValues default_values(Experiment e) {
  KeyValues v;
  switch (e) {
    case Experiment::fig2a:
    case Experiment::fig2c:
      v = system_block(e == Experiment::fig2a ? 0.0 : 0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("-4", "4", "161", "linear"));
      merge(v, {{"power_pw", "1"},
                {"jitter_fwhm", e == Experiment::fig2a ? "0" : "0.9"},
                {"jitter_nodes", "11"},
                {"coherent_only", "false"},
                {"n_fock", "6"},
                {"cavity_frame", "displaced"}});
      break;
    case Experiment::fig2b:
    case Experiment::fig2d:
      v = system_block(e == Experiment::fig2b ? 0.0 : 0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("0", "2000", "1001", "linear"));
      merge(v, {{"initial_photons", "1"}, {"irf_fwhm_ps", "80"}, {"n_fock", "8"}});
      break;
    case Experiment::fig2e:
      v = system_block(0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("0.1", "1e7", "41", "log"));
      merge(v, {{"coherent_only", "false"},
                {"target_s1_photons", "0.24"},
                {"fit_ratio_min", "0.01"},
                {"fit_ratio_max", "1000"},
                {"n_fock", "8"}});
      break;
    case Experiment::fig2f:
      v = system_block(0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("0", "20", "401", "linear"));
      merge(v, {{"power_pw", "1"},
                {"detuning_ghz", "0"},
                {"g2_target", "250"},
                {"background_fraction", "auto"},
                {"n_fock", "6"},
                {"cavity_frame", "displaced"}});
      break;
    case Experiment::fig3:
      v = system_block(0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("-1", "1", "2001", "linear"));
      merge(v, floquet_block());
      merge(v, {{"power_pw", "425"},
                {"tone_separation_ghz", "0.3"},
                {"detuning_ghz", "0"},
                {"filter_fwhm", "0.03"},
                {"n_fock", "6"},
                {"cavity_frame", "displaced"}});
      break;
    case Experiment::fig4a:
    case Experiment::fig4b:
      v = system_block(0.63, 0.18, kFig4TripletRatio);
      merge(v, sweep_block("0.01", "100", "21", "log"));
      merge(v, floquet_block());
      merge(v, {{"pump_detuning_ghz", "0.3"},
                {"probe_detuning_ghz", "0"},
                {"probe_power_pw", "auto"},
                {"n_fock", "6"},
                {"cavity_frame", "displaced"}});
      if (e == Experiment::fig4a) {
        v["operating_photons"] = "1";
      } else {
        merge(v, {{"row_start", "0.1"}, {"row_stop", "1"}, {"row_points", "10"}});
      }
      break;
    case Experiment::custom:
      v = system_block(0.77, 1.0, kFig2TripletRatio);
      merge(v, sweep_block("-4", "4", "81", "linear"));
      merge(v, {{"sweep_axis", "detuning_ghz"},
                {"power_pw", "1"},
                {"detuning_ghz", "0"},
                {"coherent_only", "false"},
                {"n_fock", "6"},
                {"cavity_frame", "displaced"}});
      break;
  }
  return v;
}

enum class KeyType { number, integer, flag, text };

KeyType key_type(const std::string& key) {
  static const std::set<std::string> integers{"n_fock", "jitter_nodes", "sweep_points", "row_points",
                                              "max_harmonics"};
  static const std::set<std::string> flags{"coherent_only"};
  static const std::set<std::string> texts{"sweep_scale", "sweep_axis", "cavity_frame"};
  if (integers.count(key)) return KeyType::integer;
  if (flags.count(key)) return KeyType::flag;
  if (texts.count(key)) return KeyType::text;
  return KeyType::number;  // n_harmonics, background_fraction and probe_power_pw also accept "auto"
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  double d = 0.0;
  if (!parse_double(s, d) || d != std::floor(d) || std::abs(d) > 1e9) return false;
  out = static_cast<int>(d);
  return true;
}

bool auto_allowed(const std::string& key) {
  return key == "n_harmonics" || key == "background_fraction" || key == "probe_power_pw";
}

void check_value(const std::string& key, const std::string& value) {
  double d = 0.0;
  int i = 0;
  bool ok = false;
  switch (key_type(key)) {
    case KeyType::number:
      ok = parse_double(value, d) || (auto_allowed(key) && value == "auto");
      if (key == "n_harmonics" && value != "auto") ok = parse_int(value, i) && i >= 1;
      break;
    case KeyType::integer:
      ok = parse_int(value, i);
      break;
    case KeyType::flag:
      ok = value == "true" || value == "false" || value == "1" || value == "0";
      break;
    case KeyType::text:
      if (key == "sweep_scale") ok = value == "linear" || value == "log";
      else if (key == "cavity_frame") ok = value == "lab" || value == "displaced";
      else ok = !value.empty();
      break;
  }
  if (!ok) throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::fig2a: return "fig2a";
    case Experiment::fig2b: return "fig2b";
    case Experiment::fig2c: return "fig2c";
    case Experiment::fig2d: return "fig2d";
    case Experiment::fig2e: return "fig2e";
    case Experiment::fig2f: return "fig2f";
    case Experiment::fig3: return "fig3";
    case Experiment::fig4a: return "fig4a";
    case Experiment::fig4b: return "fig4b";
    case Experiment::custom: return "custom";
  }
  return "custom";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : named_experiments()) {
    if (to_string(e) == name) return e;
  }
  if (name == "custom") return Experiment::custom;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::vector<Experiment> named_experiments() {
  return {Experiment::fig2a, Experiment::fig2b, Experiment::fig2c, Experiment::fig2d, Experiment::fig2e,
          Experiment::fig2f, Experiment::fig3,  Experiment::fig4a, Experiment::fig4b};
}

std::vector<double> SweepSpec::values() const {
  if (points < 1) throw ConfigError("sweep: points must be >= 1");
  if (log && !(start > 0.0 && stop > 0.0)) throw ConfigError("sweep: log scale needs positive bounds");
  if (points == 1) return {start};
  if (!(stop > start)) throw ConfigError("sweep: stop must exceed start");
  std::vector<double> out;
  out.reserve(points);
  const double n = points - 1;
  for (int k = 0; k < points; ++k) {
    if (log) {
      const double e = (std::log10(start) * (n - k) + std::log10(stop) * k) / n;
      out.push_back(std::pow(10.0, e));
    } else {
      out.push_back((start * (n - k) + stop * k) / n);
    }
  }
  out.front() = start;
  out.back() = stop;
  return out;
}

FloquetOptions Numerics::floquet() const {
  FloquetOptions o;
  o.n_harmonics = n_harmonics;
  o.max_harmonics = max_harmonics;
  o.convergence_tol = floquet_tol;
  return o;
}

ExperimentConfig::ExperimentConfig(Experiment experiment)
    : experiment_(experiment), values_(default_values(experiment)) {}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) {
    throw ConfigError("key '" + key + "' is not defined for experiment " + to_string(experiment_));
  }
  const std::string v = trim(value);
  check_value(key, v);
  values_[key] = v;
  overridden_.insert(key);
}

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    set(trim(t.substr(0, eq)), t.substr(eq + 1));
  }
}

const std::string& ExperimentConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("key '" + key + "' is not defined for experiment " + to_string(experiment_));
  }
  consumed_.insert(key);
  return it->second;
}

double ExperimentConfig::number(const std::string& key) const {
  double d = 0.0;
  if (!parse_double(raw(key), d)) throw ConfigError("key '" + key + "' is not a number");
  return d;
}

int ExperimentConfig::integer(const std::string& key) const {
  int i = 0;
  if (!parse_int(raw(key), i)) throw ConfigError("key '" + key + "' is not an integer");
  return i;
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string& v = raw(key);
  return v == "true" || v == "1";
}

std::string ExperimentConfig::text(const std::string& key) const { return raw(key); }

SystemParams ExperimentConfig::system() const {
  SystemParams p;
  p.g = number("g");
  p.kappa = number("kappa");
  p.gamma = number("gamma");
  p.branching_beta = number("branching_beta");
  p.gamma_et = number("gamma_et");
  p.gamma_tg = number("gamma_tg");
  p.gamma_deph = number("gamma_deph");
  p.delta_cavity = number("delta_cavity");
  p.delta_molecule = number("delta_molecule");
  p.lambda_nm = number("lambda_nm");
  p.eta_cpl = number("eta_cpl");
  p.validate();
  return p;
}

InstrumentModel ExperimentConfig::instrument() const {
  InstrumentModel m;
  if (has("jitter_fwhm")) m.jitter_fwhm = number("jitter_fwhm");
  if (has("jitter_nodes")) m.jitter_nodes = integer("jitter_nodes");
  if (has("irf_fwhm_ps")) m.irf_fwhm = number("irf_fwhm_ps");
  if (has("filter_fwhm")) m.filter_fwhm = number("filter_fwhm");
  if (has("background_fraction") && raw("background_fraction") != "auto") {
    m.background_fraction = number("background_fraction");
  }
  if (has("coherent_only")) m.coherent_only = flag("coherent_only");
  m.validate();
  return m;
}

Numerics ExperimentConfig::numerics() const {
  Numerics n;
  n.n_fock = integer("n_fock");
  if (n.n_fock < 2) throw ConfigError("n_fock must be >= 2");
  if (has("n_harmonics") && raw("n_harmonics") != "auto") n.n_harmonics = integer("n_harmonics");
  if (has("floquet_tol")) n.floquet_tol = number("floquet_tol");
  if (has("max_harmonics")) n.max_harmonics = integer("max_harmonics");
  return n;
}

SweepSpec ExperimentConfig::sweep() const {
  SweepSpec s;
  s.axis = has("sweep_axis") ? text("sweep_axis") : "";
  s.start = number("sweep_start");
  s.stop = number("sweep_stop");
  s.points = integer("sweep_points");
  s.log = text("sweep_scale") == "log";
  return s;
}

std::vector<std::pair<std::string, std::vector<double>>> RunResult::series() const {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  if (matrix) {
    std::vector<double> flat;
    for (const auto& row : matrix->values) flat.insert(flat.end(), row.begin(), row.end());
    out.emplace_back(matrix->value_label, std::move(flat));
    return out;
  }
  if (curves.empty()) return out;
  out.emplace_back(curves[0].y_label, curves[0].y);
  for (const auto& c : curves[0].columns) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

CavityFrame frame_of(const ExperimentConfig& c) {
  return c.has("cavity_frame") && c.text("cavity_frame") == "lab" ? CavityFrame::lab : CavityFrame::displaced;
}

Stationary solve_mono(const SystemParams& p, double detuning, double power, const SpaceConfig& space,
                      CavityFrame frame = CavityFrame::displaced) {
  return stationary(p, DriveSpec::monochromatic(detuning, power), space, frame);
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double rho_ee_asymptote(const SystemParams& params, double power_pw, const SpaceConfig& space) {
  const double at_max = solve_mono(params, 0.0, power_pw, space).population(Level::e);
  const double beyond = solve_mono(params, 0.0, 10.0 * power_pw, space).population(Level::e);
  if (!(std::abs(at_max - beyond) <= 1e-3 * beyond)) {
    throw RangeError("saturation: rho_ee not converged to its asymptote at " + format_number(power_pw) +
                     " pW (" + format_number(at_max) + " vs " + format_number(beyond) + " at 10x)");
  }
  return at_max;
}

Curve saturation_curve(const SystemParams& params, const std::vector<double>& power_grid_pw,
                       const InstrumentModel& instrument, const SpaceConfig& space, int workers) {
  instrument.validate();
  if (power_grid_pw.empty()) throw InvalidArgument("saturation_curve: empty power grid");
  for (size_t k = 0; k < power_grid_pw.size(); ++k) {
    if (!(power_grid_pw[k] > 0.0) || (k > 0 && !(power_grid_pw[k] > power_grid_pw[k - 1]))) {
      throw InvalidArgument("saturation_curve: powers must be positive and increasing");
    }
  }
  const double rho_inf = rho_ee_asymptote(params, power_grid_pw.back(), space);
  struct Point {
    double rho_ee = 0.0, transmission = 0.0;
  };
  const auto points = parallel_map(power_grid_pw.size(), workers, [&](size_t k) {
    const Stationary ss = solve_mono(params, 0.0, power_grid_pw[k], space);
    const double n = instrument.coherent_only ? std::norm(ss.field_mean()) : ss.photon_number();
    return Point{ss.population(Level::e), n / empty_cavity_photons(power_grid_pw[k], params)};
  });

  Curve out{"power_pw", "saturation_s", power_grid_pw, {}, {}, {}};
  std::vector<double> photons, transmission, rho_ee;
  const double per_pw = photons_per_lifetime(power_to_flux(1.0, params.lambda_nm), params.kappa);
  for (size_t k = 0; k < points.size(); ++k) {
    const double rho = points[k].rho_ee;
    // S is undefined once rho_ee reaches the asymptote
    out.y.push_back(rho < rho_inf ? 1.0 / (rho_inf / rho - 1.0) : kNaN);
    photons.push_back(per_pw * power_grid_pw[k]);
    transmission.push_back(points[k].transmission);
    rho_ee.push_back(rho);
  }
  out.columns = {{"photons_per_lifetime", photons}, {"transmission_norm", transmission}, {"rho_ee", rho_ee}};
  out.meta["rho_ee_asymptote"] = rho_inf;

  for (size_t k = 1; k < out.y.size(); ++k) {
    const double s0 = out.y[k - 1], s1 = out.y[k];
    if (s0 < 1.0 && s1 >= 1.0) {
      const double f = (std::log(1.0) - std::log(s0)) / (std::log(s1) - std::log(s0));
      const double p = std::exp(std::log(out.x[k - 1]) + f * (std::log(out.x[k]) - std::log(out.x[k - 1])));
      out.meta["s1_power_pw"] = p;
      out.meta["s1_photons_per_lifetime"] = per_pw * p;
      break;
    }
  }
  std::vector<double> lx, ly;
  for (size_t k = 0; k < out.x.size() && out.x[k] <= 10.0 * out.x.front() * (1 + 1e-12); ++k) {
    if (out.y[k] > 0.0) {
      lx.push_back(out.x[k]);
      ly.push_back(out.y[k]);
    }
  }
  if (lx.size() >= 2) out.meta["low_power_slope"] = log_slope(lx, ly);
  return out;
}

double saturation_power(const SystemParams& params, const SpaceConfig& space) {
  // rho_ee grows monotonically up to S = 1, well before any overshoot.
  double lo = 1e-6, hi = 1e3;
  const double half = 0.5 * rho_ee_asymptote(params, 1e7, space);
  auto rho = [&](double p) { return solve_mono(params, 0.0, p, space).population(Level::e); };
  while (rho(hi) < half) {
    hi *= 10.0;
    if (hi > 1e9) throw RangeError("saturation_power: S = 1 not reached below 1e9 pW");
  }
  for (int it = 0; it < 100 && hi / lo > 1.0 + 1e-10; ++it) {
    const double mid = std::sqrt(lo * hi);
    (rho(mid) < half ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

double switching_contrast(const SystemParams& params, const Tone& pump, const Tone& probe,
                          const SpaceConfig& space, const FloquetOptions& options) {
  const double t_off = probe_transmission(params, {pump.detuning, 0.0}, probe, space, options).transmission;
  if (t_off < 1e-12) {
    throw ContrastUnbounded("switching_contrast: pump-off transmission " + format_number(t_off) +
                            " below 1e-12");
  }
  const double t_on = probe_transmission(params, pump, probe, space, options).transmission;
  return 10.0 * std::log10(t_on / t_off);
}

double crossing_power(const std::vector<double>& power_grid, const std::vector<double>& transmission,
                      double level) {
  for (size_t k = 1; k < power_grid.size(); ++k) {
    if (transmission[k - 1] < level && transmission[k] >= level) {
      const double f = (level - transmission[k - 1]) / (transmission[k] - transmission[k - 1]);
      return std::exp(std::log(power_grid[k - 1]) + f * (std::log(power_grid[k]) - std::log(power_grid[k - 1])));
    }
  }
  return kNaN;
}

CurveMatrix switching_map(const SystemParams& params, const std::vector<double>& pump_detuning_grid_ghz,
                          const std::vector<double>& pump_power_grid_pw, const Tone& probe,
                          const SpaceConfig& space, const FloquetOptions& options, int workers) {
  CurveMatrix m{"pump_detuning_ghz", "pump_power_pw", "transmission", pump_detuning_grid_ghz,
                pump_power_grid_pw, {}, {}};
  const size_t cols = pump_power_grid_pw.size();
  const auto flat = parallel_map(pump_detuning_grid_ghz.size() * cols, workers, [&](size_t k) {
    const Tone pump{pump_detuning_grid_ghz[k / cols], pump_power_grid_pw[k % cols]};
    const auto r = probe_transmission(params, pump, probe, space, options);
    return std::make_pair(r.transmission, r.n_harmonics);
  });
  int max_nh = 0;
  for (size_t r = 0; r < pump_detuning_grid_ghz.size(); ++r) {
    std::vector<double> row;
    for (size_t c = 0; c < cols; ++c) {
      row.push_back(flat[r * cols + c].first);
      max_nh = std::max(max_nh, flat[r * cols + c].second);
    }
    m.meta["switch_power_pw_" + format_number(pump_detuning_grid_ghz[r])] =
        crossing_power(pump_power_grid_pw, row);
    m.values.push_back(std::move(row));
  }
  m.meta["max_n_harmonics"] = max_nh;
  return m;
}

TripletFit fit_triplet_ratio(const SystemParams& params, const Curve& observed,
                             const std::function<std::vector<double>(const SystemParams&)>& simulate,
                             double r_min, double r_max, double log_tol) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw InvalidArgument("fit_triplet_ratio: need 0 < r_min < r_max");
  observed.validate();
  TripletFit fit;
  auto objective = [&](double log_r) {
    SystemParams p = params;
    if (p.gamma_et > 0.0) p.gamma_tg = p.gamma_et / std::exp(log_r);
    const auto sim = simulate(p);
    if (sim.size() != observed.y.size()) throw InvalidArgument("fit_triplet_ratio: simulated length mismatch");
    double acc = 0.0;
    for (size_t k = 0; k < sim.size(); ++k) acc += (sim[k] - observed.y[k]) * (sim[k] - observed.y[k]);
    ++fit.evaluations;
    return acc;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(r_min), b = std::log(r_max);
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  while (b - a > log_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double best = 0.5 * (a + b);
  fit.ratio = std::exp(best);
  fit.residual = objective(best);
  const double edge = 10.0 * log_tol;
  fit.at_boundary = best - std::log(r_min) < edge || std::log(r_max) - best < edge;
  return fit;
}

TripletFit fit_triplet_ratio(const SystemParams& params, const Curve& observed, double r_min, double r_max,
                             const SpaceConfig& space, double asymptote_power_pw) {
  auto simulate = [&](const SystemParams& p) {
    const double rho_inf = rho_ee_asymptote(p, asymptote_power_pw, space);
    std::vector<double> s;
    for (double power : observed.x) {
      const double rho = solve_mono(p, 0.0, power, space).population(Level::e);
      s.push_back(1.0 / (rho_inf / rho - 1.0));
    }
    return s;
  };
  return fit_triplet_ratio(params, observed, simulate, r_min, r_max);
}

// ---------------------------------------------------------------------------
// Experiments

namespace {

void add_meta(RunResult& r, const std::map<std::string, double>& meta) {
  for (const auto& [k, v] : meta) r.scalars[k] = v;
}

RunResult run_transmission(const ExperimentConfig& c, const RunOptions& o) {
  RunResult r;
  const auto n = c.numerics();
  InstrumentModel ins = c.instrument();
  const SystemParams p = c.system();
  const auto grid = c.sweep().values();
  const double power = c.number("power_pw");
  const CavityFrame frame = frame_of(c);
  r.n_fock = n.n_fock;
  // transmission_scan works in the displaced frame; a lab-frame request
  // repeats the scan with the lab-frame solver.
  Curve curve;
  if (frame == CavityFrame::displaced) {
    curve = transmission_scan(p, power, grid, ins, n.space(), o.workers);
  } else {
    const double reference = empty_cavity_photons(power, p);
    auto scan = [&](double offset) {
      SystemParams shifted = p;
      shifted.delta_cavity += offset;
      Curve cc{"detuning_ghz", "transmission_norm", grid, {}, {}, {}};
      cc.y = parallel_map(grid.size(), o.workers, [&](size_t k) {
        const Stationary ss = solve_mono(shifted, grid[k], power, n.space(), CavityFrame::lab);
        return (ins.coherent_only ? std::norm(ss.field_mean()) : ss.photon_number()) / reference;
      });
      return cc;
    };
    curve = jitter_average(scan, ins.jitter_fwhm, ins.jitter_nodes);
    const auto peaks = find_peaks(curve);
    curve.meta["peak_count"] = static_cast<double>(peaks.size());
    for (size_t k = 0; k < peaks.size(); ++k) curve.meta["peak_" + std::to_string(k + 1) + "_ghz"] = peaks[k].position;
    if (peaks.size() >= 2) curve.meta["splitting_ghz"] = peaks.back().position - peaks.front().position;
    const double width = peak_fwhm(curve);
    if (std::isfinite(width)) curve.meta["fwhm_ghz"] = width;
  }
  add_meta(r, curve.meta);
  r.scalars["cooperativity"] = p.g > 0.0 ? cooperativity(p) : 0.0;
  r.scalars["photons_per_lifetime"] = photons_per_lifetime(power_to_flux(power, p.lambda_nm), p.kappa);
  r.curves.push_back(std::move(curve));
  return r;
}

RunResult run_ring_down(const ExperimentConfig& c, const RunOptions&) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  RingDownInitial init;
  init.cavity_photons = c.number("initial_photons");
  const auto grid = c.sweep().values();
  if (grid.front() != 0.0) throw ConfigError("ring-down time grid must start at 0 ps");
  Curve curve = ring_down_trace(p, init, grid, c.instrument(), n.space());
  r.n_fock = n.n_fock;
  add_meta(r, curve.meta);
  r.scalars["cavity_lifetime_ps"] = 1e3 / (kTwoPi * p.kappa);
  r.curves.push_back(std::move(curve));
  return r;
}

RunResult run_saturation(const ExperimentConfig& c, const RunOptions& o) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  const double target = c.number("target_s1_photons");
  const double p1 = power_for_photons_per_lifetime(1.0, p.kappa, p.lambda_nm);
  // Observed law S = N / N_1 over the decade below S = 1.
  Curve observed{"power_pw", "saturation_s", {}, {}, {}, {}};
  for (int k = 0; k <= 4; ++k) {
    const double photons = target * std::pow(10.0, -1.0 + 0.25 * k);
    observed.x.push_back(photons * p1);
    observed.y.push_back(photons / target);
  }
  const TripletFit fit =
      fit_triplet_ratio(p, observed, c.number("fit_ratio_min"), c.number("fit_ratio_max"), n.space());
  SystemParams fitted = p;
  if (p.gamma_et > 0.0) fitted.gamma_tg = p.gamma_et / fit.ratio;
  Curve curve = saturation_curve(fitted, c.sweep().values(), c.instrument(), n.space(), o.workers);
  r.n_fock = n.n_fock;
  add_meta(r, curve.meta);
  r.scalars["fitted_triplet_ratio"] = fit.ratio;
  r.scalars["fit_residual"] = fit.residual;
  r.scalars["fit_at_boundary"] = fit.at_boundary ? 1.0 : 0.0;
  r.scalars["fitted_gamma_tg"] = fitted.gamma_tg;
  r.scalars["cooperativity"] = cooperativity(p);
  r.curves.push_back(std::move(curve));
  return r;
}

RunResult run_g2(const ExperimentConfig& c, const RunOptions&) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  const DriveSpec drive = DriveSpec::monochromatic(c.number("detuning_ghz"), c.number("power_pw"));
  const auto tau = c.sweep().values();
  if (tau.front() != 0.0) throw ConfigError("g2 delay grid must start at 0 ns");
  CorrelationOptions co;
  co.frame = frame_of(c);
  const auto g2 = g2_correlation(p, drive, tau, n.space(), co);

  // Long-delay limit well beyond the slowest (triplet) timescale.
  const double slow = p.gamma_et + p.gamma_tg > 0.0 ? p.gamma_et + p.gamma_tg : p.gamma;
  const double long_delay = 50.0 / (kTwoPi * slow);
  co.propagator = Propagator::eigen;
  const double g2_long = g2_correlation(p, drive, {long_delay}, n.space(), co).front();

  const double target = c.number("g2_target");
  const double b = c.text("background_fraction") == "auto" ? background_for_peak(g2.front(), target)
                                                           : c.number("background_fraction");
  Curve curve{"tau_ns", "g2_ideal", tau, g2, {}, {{"g2_measured", g2_with_background(g2, b)}}};
  r.n_fock = n.n_fock;
  r.scalars["g2_zero_ideal"] = g2.front();
  r.scalars["g2_zero_measured"] = curve.columns[0].second.front();
  r.scalars["background_fraction"] = b;
  r.scalars["g2_long_delay"] = g2_long;
  r.scalars["long_delay_ns"] = long_delay;
  r.curves.push_back(std::move(curve));
  return r;
}

RunResult run_fwm(const ExperimentConfig& c, const RunOptions&) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  const double centre = c.number("detuning_ghz");
  const double sep = c.number("tone_separation_ghz");
  const double power = c.number("power_pw");
  const DriveSpec drive = DriveSpec::bichromatic({centre - 0.5 * sep, power}, {centre + 0.5 * sep, power});
  FloquetOptions fo = n.floquet();
  fo.frame = frame_of(c);
  const auto pss = periodic_steady_state(p, drive, n.space(), fo);
  const auto alpha = field_harmonics(pss);
  Curve curve = filtered_comb_spectrum(alpha, pss.beat_ghz, c.sweep().values(), c.instrument(), p.kappa);
  r.n_fock = n.n_fock;
  r.max_n_harmonics = pss.n_harmonics;
  r.max_residual = pss.residual;
  add_meta(r, curve.meta);
  r.scalars["fwm_efficiency"] = fwm_efficiency(alpha);
  r.scalars["beat_ghz"] = pss.beat_ghz;
  r.scalars["n_harmonics"] = pss.n_harmonics;
  const double main = std::norm(alpha.at(1)) + std::norm(alpha.at(-1));
  for (int k = -7; k <= 7; k += 2) {
    if (!alpha.count(k)) continue;
    const std::string tag = (k < 0 ? "m" : "p") + std::to_string(std::abs(k));
    r.scalars["line_frequency_ghz_" + tag] = k * pss.beat_ghz;
    r.scalars["line_ratio_" + tag] = 2.0 * std::norm(alpha.at(k)) / main;
  }
  r.curves.push_back(std::move(curve));
  return r;
}

double probe_power_of(const ExperimentConfig& c, const SystemParams& p, const SpaceConfig& space) {
  if (c.text("probe_power_pw") == "auto") return 0.1 * saturation_power(p, space);
  return c.number("probe_power_pw");
}

std::vector<double> pump_powers(const ExperimentConfig& c, const SystemParams& p, std::vector<double>* photons) {
  const double p1 = power_for_photons_per_lifetime(1.0, p.kappa, p.lambda_nm);
  *photons = c.sweep().values();
  std::vector<double> out;
  for (double x : *photons) out.push_back(x * p1);
  return out;
}

RunResult run_switching_curve(const ExperimentConfig& c, const RunOptions& o) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  const SpaceConfig space = n.space();
  FloquetOptions fo = n.floquet();
  fo.frame = frame_of(c);
  const double pump_detuning = c.number("pump_detuning_ghz");
  const Tone probe{c.number("probe_detuning_ghz"), probe_power_of(c, p, space)};
  std::vector<double> photons;
  const auto powers = pump_powers(c, p, &photons);

  const CurveMatrix row = switching_map(p, {pump_detuning}, powers, probe, space, fo, o.workers);
  const double t_off = probe_transmission(p, {pump_detuning, 0.0}, probe, space, fo).transmission;
  Curve curve{"pump_photons_per_lifetime", "transmission", photons, row.values[0], {}, {}};
  std::vector<double> contrast;
  for (double t : curve.y) contrast.push_back(10.0 * std::log10(t / t_off));
  curve.columns = {{"pump_power_pw", powers}, {"contrast_db", contrast}};

  const double op = c.number("operating_photons");
  const double p1 = power_for_photons_per_lifetime(1.0, p.kappa, p.lambda_nm);
  const Tone pump{pump_detuning, op * p1};
  const auto on = probe_transmission(p, pump, probe, space, fo);
  r.n_fock = n.n_fock;
  r.max_n_harmonics = std::max(static_cast<int>(row.meta.at("max_n_harmonics")), on.n_harmonics);
  r.scalars["probe_power_pw"] = probe.power;
  r.scalars["transmission_off"] = t_off;
  r.scalars["operating_pump_power_pw"] = pump.power;
  r.scalars["transmission_on"] = on.transmission;
  r.scalars["contrast_db"] = switching_contrast(p, pump, probe, space, fo);
  r.scalars["switch_photons_per_lifetime"] = crossing_power(photons, curve.y);
  r.scalars["cooperativity"] = cooperativity(p);
  r.curves.push_back(std::move(curve));
  return r;
}

RunResult run_switching_map(const ExperimentConfig& c, const RunOptions& o) {
  RunResult r;
  const auto n = c.numerics();
  const SystemParams p = c.system();
  const SpaceConfig space = n.space();
  FloquetOptions fo = n.floquet();
  fo.frame = frame_of(c);
  const Tone probe{c.number("probe_detuning_ghz"), probe_power_of(c, p, space)};
  std::vector<double> photons;
  const auto powers = pump_powers(c, p, &photons);

  SweepSpec rows_spec{"pump_detuning_ghz", c.number("row_start"), c.number("row_stop"), c.integer("row_points"),
                      false};
  std::vector<double> rows = rows_spec.values();
  // The dashed row of the single-curve experiment is always part of the map.
  const double dashed = c.number("pump_detuning_ghz");
  bool present = false;
  for (double& d : rows) {
    if (std::abs(d - dashed) < 1e-9) {
      d = dashed;
      present = true;
    }
  }
  if (!present) {
    rows.push_back(dashed);
    std::sort(rows.begin(), rows.end());
  }
  CurveMatrix m = switching_map(p, rows, powers, probe, space, fo, o.workers);
  r.n_fock = n.n_fock;
  r.max_n_harmonics = static_cast<int>(m.meta.at("max_n_harmonics"));
  m.meta.erase("max_n_harmonics");
  add_meta(r, m.meta);
  r.scalars["probe_power_pw"] = probe.power;
  r.matrix = std::move(m);
  return r;
}

RunResult run_custom(const ExperimentConfig& c, const RunOptions& o) {
  RunResult r;
  const auto sweep = c.sweep();
  static const std::set<std::string> fixed{"sweep_axis", "sweep_start", "sweep_stop", "sweep_points",
                                           "sweep_scale", "n_fock", "coherent_only", "cavity_frame"};
  if (!c.has(sweep.axis) || fixed.count(sweep.axis)) {
    throw ConfigError("custom: sweep_axis must name a physical key, got '" + sweep.axis + "'");
  }
  const auto grid = sweep.values();
  struct Point {
    double transmission, rho_ee, rho_tt, photons;
  };
  const auto n = c.numerics();
  const bool coherent = c.flag("coherent_only");
  const CavityFrame frame = frame_of(c);
  // consume every key once on the unswept config
  (void)c.system();
  (void)c.number("power_pw");
  (void)c.number("detuning_ghz");
  const auto points = parallel_map(grid.size(), o.workers, [&](size_t k) {
    ExperimentConfig point = c;
    point.set(sweep.axis, format_number(grid[k]));
    const SystemParams p = point.system();
    const double power = point.number("power_pw");
    const Stationary ss = solve_mono(p, point.number("detuning_ghz"), power, n.space(), frame);
    const double photons = coherent ? std::norm(ss.field_mean()) : ss.photon_number();
    const double reference = power > 0.0 ? empty_cavity_photons(power, p) : kNaN;
    return Point{photons / reference, ss.population(Level::e), ss.population(Level::t), ss.photon_number()};
  });
  Curve curve{sweep.axis, "transmission_norm", grid, {}, {}, {}};
  std::vector<double> ree, rtt, nph;
  for (const auto& pt : points) {
    curve.y.push_back(pt.transmission);
    ree.push_back(pt.rho_ee);
    rtt.push_back(pt.rho_tt);
    nph.push_back(pt.photons);
  }
  curve.columns = {{"rho_ee", ree}, {"rho_tt", rtt}, {"mean_photons", nph}};
  curve.validate();
  r.n_fock = n.n_fock;
  r.curves.push_back(std::move(curve));
  return r;
}

}  // namespace

RunResult run(const ExperimentConfig& config, const RunOptions& options) {
  RunResult r;
  switch (config.experiment()) {
    case Experiment::fig2a:
    case Experiment::fig2c: r = run_transmission(config, options); break;
    case Experiment::fig2b:
    case Experiment::fig2d: r = run_ring_down(config, options); break;
    case Experiment::fig2e: r = run_saturation(config, options); break;
    case Experiment::fig2f: r = run_g2(config, options); break;
    case Experiment::fig3: r = run_fwm(config, options); break;
    case Experiment::fig4a: r = run_switching_curve(config, options); break;
    case Experiment::fig4b: r = run_switching_map(config, options); break;
    case Experiment::custom: r = run_custom(config, options); break;
  }
  r.experiment = config.experiment();
  r.provenance.emplace_back("experiment", to_string(config.experiment()));
  r.provenance.emplace_back("code_version", kVersion);
  for (const auto& [k, v] : config.values()) r.provenance.emplace_back("config." + k, v);
  std::string overrides;
  for (const auto& k : config.overridden()) overrides += (overrides.empty() ? "" : ",") + k;
  r.provenance.emplace_back("overrides", overrides);
  r.provenance.emplace_back("numerics.n_fock", std::to_string(r.n_fock));
  r.provenance.emplace_back("numerics.max_n_harmonics", std::to_string(r.max_n_harmonics));
  if (r.max_residual) r.provenance.emplace_back("numerics.max_residual", format_number(*r.max_residual));
  return r;
}

std::string csv_text(const RunResult& result) {
  std::ostringstream out;
  if (result.matrix) {
    const auto& m = *result.matrix;
    out << m.row_label << ',' << m.col_label << ',' << m.value_label << '\n';
    for (size_t i = 0; i < m.rows.size(); ++i) {
      for (size_t j = 0; j < m.cols.size(); ++j) {
        out << format_number(m.rows[i]) << ',' << format_number(m.cols[j]) << ','
            << format_number(m.values[i][j]) << '\n';
      }
    }
    return out.str();
  }
  if (result.curves.empty()) return "";
  const Curve& c = result.curves.front();
  out << c.x_label << ',' << c.y_label;
  for (const auto& col : c.columns) out << ',' << col.first;
  out << '\n';
  for (size_t k = 0; k < c.x.size(); ++k) {
    out << format_number(c.x[k]) << ',' << format_number(c.y[k]);
    for (const auto& col : c.columns) out << ',' << format_number(col.second[k]);
    out << '\n';
  }
  return out.str();
}

std::string meta_text(const RunResult& result) {
  std::ostringstream out;
  for (const auto& [k, v] : result.provenance) out << k << '=' << v << '\n';
  for (const auto& [k, v] : result.scalars) out << "scalar." << k << '=' << format_number(v) << '\n';
  return out.str();
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_outputs(const RunResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string name = to_string(result.experiment);
  const std::string csv = csv_text(result);
  const std::string meta = meta_text(result);
  write_atomically(std::filesystem::path(dir) / (name + ".csv"), csv);
  write_atomically(std::filesystem::path(dir) / (name + ".meta.txt"), meta);
}

// ---------------------------------------------------------------------------

ConvergenceReport convergence_check(const ExperimentConfig& config, const RunOptions& options) {
  return convergence_check(config, run(config, options), options);
}

ConvergenceReport convergence_check(const ExperimentConfig& config, const RunResult& baseline,
                                    const RunOptions& options) {
  ConvergenceReport report;
  ExperimentConfig refined = config;
  const int n_fock = config.numerics().n_fock;
  report.n_fock = n_fock;
  report.n_fock_check = n_fock + 2;
  refined.set("n_fock", std::to_string(n_fock + 2));
  if (config.has("n_harmonics") && baseline.max_n_harmonics > 0) {
    report.n_harmonics_check = 2 * baseline.max_n_harmonics;
    refined.set("n_harmonics", std::to_string(report.n_harmonics_check));
  }
  const RunResult check = run(refined, options);
  const auto a = baseline.series();
  const auto b = check.series();
  for (size_t s = 0; s < a.size() && s < b.size(); ++s) {
    const auto& ya = a[s].second;
    const auto& yb = b[s].second;
    double scale = 0.0, diff = 0.0;
    bool mismatch = ya.size() != yb.size();
    for (size_t k = 0; !mismatch && k < ya.size(); ++k) {
      if (std::isfinite(ya[k]) != std::isfinite(yb[k])) {
        mismatch = true;
      } else if (std::isfinite(ya[k])) {
        scale = std::max(scale, std::abs(ya[k]));
        diff = std::max(diff, std::abs(ya[k] - yb[k]));
      }
    }
    const double change = mismatch ? std::numeric_limits<double>::infinity() : (scale > 0.0 ? diff / scale : diff);
    report.changes.emplace_back(a[s].first, change);
    report.worst = std::max(report.worst, change);
  }
  report.pass = report.worst < 1e-4;
  return report;
}

}  // namespace polsim
