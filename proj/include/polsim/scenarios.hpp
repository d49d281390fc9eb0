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

// Named experiment configurations, the pipelines behind them, parameter fits,
// convergence automation and the deterministic file output used by the CLI.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "polsim/floquet.hpp"
#include "polsim/instrument.hpp"
#include "polsim/model.hpp"

namespace polsim {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { fig2a, fig2b, fig2c, fig2d, fig2e, fig2f, fig3, fig4a, fig4b, custom };

std::string to_string(Experiment e);
/// Throws ConfigError for unknown names.
Experiment parse_experiment(const std::string& name);
std::vector<Experiment> named_experiments();  ///< every experiment except custom

struct SweepSpec {
  std::string axis;
  double start = 0.0;
  double stop = 0.0;
  int points = 1;
  bool log = false;

  std::vector<double> values() const;
};

struct Numerics {
  int n_fock = 6;
  std::optional<int> n_harmonics;  ///< unset = auto
  double floquet_tol = 1e-6;
  int max_harmonics = 41;

  SpaceConfig space() const { return build_space(n_fock); }
  FloquetOptions floquet() const;
};

/// Resolved key=value configuration of one experiment. Every experiment owns a
/// fixed key set with measured-parameter defaults; overrides may only touch those
/// keys. Typed accessors record which keys a pipeline consumed.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(Experiment experiment);
  static ExperimentConfig defaults(const std::string& name) { return ExperimentConfig(parse_experiment(name)); }

  Experiment experiment() const { return experiment_; }

  /// Throws ConfigError for keys the experiment does not define or values
  /// that do not parse as the key's type.
  void set(const std::string& key, const std::string& value);
  /// Flat key=value lines; blank lines and lines starting with '#' are ignored.
  void apply_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::set<std::string>& overridden() const { return overridden_; }
  const std::set<std::string>& consumed() const { return consumed_; }

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;

  SystemParams system() const;
  InstrumentModel instrument() const;
  Numerics numerics() const;
  SweepSpec sweep() const;

 private:
  const std::string& raw(const std::string& key) const;

  Experiment experiment_;
  std::map<std::string, std::string> values_;
  std::set<std::string> overridden_;
  mutable std::set<std::string> consumed_;
};

struct RunOptions {
  int workers = 1;  ///< does not change any output
};

struct RunResult {
  Experiment experiment = Experiment::custom;
  std::vector<Curve> curves;            ///< curves[0] is the CSV table (with extra columns)
  std::optional<CurveMatrix> matrix;    ///< written in long format instead, when present
  std::map<std::string, double> scalars;
  std::vector<std::pair<std::string, std::string>> provenance;
  int n_fock = 0;
  int max_n_harmonics = 0;   ///< largest harmonic truncation used, 0 if none
  std::optional<double> max_residual;  ///< harmonic-balance residual, when the pipeline has one

  /// Named numeric series of the CSV table (excluding the abscissa).
  std::vector<std::pair<std::string, std::vector<double>>> series() const;
};

/// Dispatches to the pipeline of config.experiment().
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// CSV header row plus data rows (%.12g) and the key=value sidecar text.
std::string csv_text(const RunResult& result);
std::string meta_text(const RunResult& result);
/// Writes <dir>/<experiment>.csv then <dir>/<experiment>.meta.txt, each via a
/// temporary file and rename.
void write_outputs(const RunResult& result, const std::string& dir);

// Pipelines -----------------------------------------------------------------

/// rho_ee at the largest power of the grid, checked against ten times that
/// power; throws RangeError when they differ by more than 0.1%.
double rho_ee_asymptote(const SystemParams& params, double power_pw, const SpaceConfig& space);

/// S(P) = (rho_ee(inf)/rho_ee(P) - 1)^-1 on the power grid. Extra columns:
/// photons_per_lifetime, transmission_norm, rho_ee. meta: rho_ee_asymptote,
/// s1_power_pw and s1_photons_per_lifetime (first crossing of S = 1),
/// low_power_slope (log-log, lowest decade).
Curve saturation_curve(const SystemParams& params, const std::vector<double>& power_grid_pw,
                       const InstrumentModel& instrument, const SpaceConfig& space, int workers = 1);

/// Power [pW] at which rho_ee falls to half its asymptote, i.e. S = 1.
double saturation_power(const SystemParams& params, const SpaceConfig& space);

/// 10 log10(T(pump on) / T(pump off)), both from probe_transmission.
/// Throws ContrastUnbounded when T(pump off) < 1e-12.
double switching_contrast(const SystemParams& params, const Tone& pump, const Tone& probe,
                          const SpaceConfig& space, const FloquetOptions& options = {});

/// Probe transmission on (pump detuning x pump power). meta:
/// switch_power_pw_<row> where T first reaches 0.5 (log interpolation).
CurveMatrix switching_map(const SystemParams& params, const std::vector<double>& pump_detuning_grid_ghz,
                          const std::vector<double>& pump_power_grid_pw, const Tone& probe,
                          const SpaceConfig& space, const FloquetOptions& options = {}, int workers = 1);

/// Pump power where a transmission row first reaches level (log-linear interpolation); NaN if never.
double crossing_power(const std::vector<double>& power_grid, const std::vector<double>& transmission,
                      double level = 0.5);

struct TripletFit {
  double ratio = 0.0;
  double residual = 0.0;
  bool at_boundary = false;
  int evaluations = 0;
};

/// Golden-section minimization over log r of the sum of squares between
/// simulate(params with gamma_tg = gamma_et / r) and observed.y. The channel is
/// not switched on when gamma_et = 0, which leaves the objective flat.
TripletFit fit_triplet_ratio(const SystemParams& params, const Curve& observed,
                             const std::function<std::vector<double>(const SystemParams&)>& simulate,
                             double r_min, double r_max, double log_tol = 1e-5);
/// Saturation form: observed is S versus power [pW]; the asymptote is taken at
/// asymptote_power_pw.
TripletFit fit_triplet_ratio(const SystemParams& params, const Curve& observed, double r_min, double r_max,
                             const SpaceConfig& space, double asymptote_power_pw = 1e7);

struct ConvergenceReport {
  std::vector<std::pair<std::string, double>> changes;  ///< max |dy| / max |y| per series
  double worst = 0.0;
  bool pass = false;
  int n_fock = 0;
  int n_fock_check = 0;
  int n_harmonics_check = 0;  ///< 0 for monochromatic experiments
};

/// Reruns the experiment at n_fock + 2 and, for two-tone experiments, at twice
/// the harmonic truncation; PASS iff every series changes by < 1e-4.
ConvergenceReport convergence_check(const ExperimentConfig& config, const RunOptions& options = {});
/// Same, reusing an existing baseline result.
ConvergenceReport convergence_check(const ExperimentConfig& config, const RunResult& baseline,
                                    const RunOptions& options = {});

}  // namespace polsim
