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

// Detection chain between the ideal quantum system and recorded data: cavity
// frequency jitter, detector response, scanning filter cavity and background.

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polsim/dynamics.hpp"
#include "polsim/model.hpp"

namespace polsim {

struct InstrumentModel {
  double jitter_fwhm = 0.90;        ///< Gaussian spread of nu_c, FWHM [GHz]
  double irf_fwhm = 80.0;           ///< detector response, FWHM [ps]
  double filter_fwhm = 0.03;        ///< scanning filter cavity [GHz]
  double background_fraction = 0.0;
  int jitter_nodes = 11;            ///< Gauss-Hermite nodes
  bool coherent_only = false;       ///< detect |<a>|^2 instead of <a^dag a>

  void validate() const;
};

struct Curve {
  std::string x_label;  ///< unit-suffixed column name
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::map<std::string, double> meta;
  /// Additional named series on the same x grid, written after y.
  std::vector<std::pair<std::string, std::vector<double>>> columns;

  /// Throws InvalidArgument unless x is strictly increasing and every series
  /// has |x| entries.
  void validate() const;
};

/// Values on a (row, column) grid, e.g. pump detuning x pump power.
struct CurveMatrix {
  std::string row_label;
  std::string col_label;
  std::string value_label;
  std::vector<double> rows;
  std::vector<double> cols;
  std::vector<std::vector<double>> values;  ///< values[row][col]
  std::map<std::string, double> meta;
};

/// Gauss-Hermite nodes and weights for E[f(X)], X ~ Normal(0, sigma); the
/// weights sum to 1.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_hermite(int n, double sigma);

/// Averages family(offset) over Gaussian cavity-frequency offsets of the given
/// FWHM. All curves returned by the family must share the same x grid.
Curve jitter_average(const std::function<Curve(double)>& family, double jitter_fwhm, int nodes = 11,
                     int workers = 1);

struct Peak {
  double position = 0.0;
  double height = 0.0;
};
/// Local maxima above min_relative * global maximum, refined by parabolic
/// interpolation, in increasing x.
std::vector<Peak> find_peaks(const Curve& curve, double min_relative = 0.1);
/// Full width at half maximum of the highest peak, linear interpolation.
double peak_fwhm(const Curve& curve);

/// Output flux kappa <a^dag a> versus laser detuning, normalized to the
/// resonant empty-cavity flux at the same power and averaged over jitter.
/// meta: peak_count, peak_<k>_ghz, splitting_ghz (two or more peaks), fwhm_ghz.
Curve transmission_scan(const SystemParams& params, double power_pw,
                        const std::vector<double>& detuning_grid_ghz, const InstrumentModel& instrument,
                        const SpaceConfig& space, int workers = 1);

struct RingDownInitial {
  double cavity_photons = 1.0;  ///< mean photon number of the coherent cavity state
  Level level = Level::g;
  std::optional<DensityMatrix> state;  ///< overrides the two fields above
};

struct DecayFit {
  double amplitude = 0.0;
  double decay_time_ps = 0.0;     ///< 1/e time of the envelope
  double modulation = 0.0;        ///< relative cosine amplitude (0 for a pure exponential)
  double frequency_ghz = 0.0;
  double phase = 0.0;
  double rms_residual = 0.0;
};

/// Gaussian IRF convolution on a uniform grid (signal taken as 0 before the
/// first sample). irf_fwhm_ps = 0 returns the input.
std::vector<double> convolve_irf(const std::vector<double>& t_ps, const std::vector<double>& y,
                                 double irf_fwhm_ps);

/// Levenberg-Marquardt fit of A e^{-t/tau} (1 + B cos(2pi f t + phi)), convolved
/// with the IRF, to a trace on a uniform ps grid. oscillating = false fixes B = 0.
DecayFit fit_ring_down(const std::vector<double>& t_ps, const std::vector<double>& y,
                       double irf_fwhm_ps, bool oscillating);

/// kappa <a^dag a>(t) [1/ns] after release of the initial state, convolved
/// with the IRF. meta: decay_time_ps, oscillation_ghz, modulation,
/// model_frequency_ghz (damped vacuum Rabi prediction).
Curve ring_down_trace(const SystemParams& params, const RingDownInitial& initial,
                      const std::vector<double>& t_grid_ps, const InstrumentModel& instrument,
                      const SpaceConfig& space);

/// Lorentzians of FWHM filter_fwhm centred at n * beat with integrated weight
/// kappa_ang |alpha_n|^2 [1/ns], evaluated on the filter detuning grid.
Curve filtered_comb_spectrum(const std::map<int, cplx>& harmonics, double beat_ghz,
                             const std::vector<double>& scan_grid_ghz, const InstrumentModel& instrument,
                             double kappa_ghz);

/// (|alpha_3|^2 + |alpha_-3|^2) / (|alpha_1|^2 + |alpha_-1|^2)
double fwm_efficiency(const std::map<int, cplx>& harmonics);

/// (g2 + 2b + b^2) / (1 + b)^2 for an uncorrelated Poissonian background of
/// relative flux b.
std::vector<double> g2_with_background(const std::vector<double>& g2_ideal, double background_fraction);

/// Unique b > 0 with g2_with_background(g2_zero, b) = target; requires
/// g2_zero > target > 1.
double background_for_peak(double g2_zero, double target);

}  // namespace polsim
