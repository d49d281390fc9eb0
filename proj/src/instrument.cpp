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

#include "polsim/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "polsim/errors.hpp"
#include "polsim/parallel.hpp"

namespace polsim {

namespace {

const double kFwhmToSigma = 1.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));

}  // namespace

void InstrumentModel::validate() const {
  if (!(jitter_fwhm >= 0.0) || !(irf_fwhm >= 0.0) || !(filter_fwhm >= 0.0) ||
      !(background_fraction >= 0.0)) {
    throw InvalidArgument("InstrumentModel: all widths and the background fraction must be >= 0");
  }
  if (jitter_nodes < 1) throw InvalidArgument("InstrumentModel: jitter_nodes must be >= 1");
}

void Curve::validate() const {
  if (x.size() != y.size()) throw InvalidArgument("Curve: x and y differ in length");
  for (const auto& [name, column] : columns) {
    if (column.size() != x.size()) throw InvalidArgument("Curve: column " + name + " differs in length");
  }
  for (size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw InvalidArgument("Curve: x must be strictly increasing");
  }
}

Quadrature gauss_hermite(int n, double sigma) {
  if (n < 1) throw InvalidArgument("gauss_hermite: n must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("gauss_hermite: sigma must be >= 0");
  if (sigma == 0.0) return {{0.0}, {1.0}};
  // Golub-Welsch on the Jacobi matrix of the physicists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  Quadrature q;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    q.nodes.push_back(std::sqrt(2.0) * sigma * es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    q.weights.push_back(v * v);
    total += v * v;
  }
  for (double& w : q.weights) w /= total;
  return q;
}

Curve jitter_average(const std::function<Curve(double)>& family, double jitter_fwhm, int nodes,
                     int workers) {
  if (!(jitter_fwhm >= 0.0)) throw InvalidArgument("jitter_average: jitter_fwhm must be >= 0");
  if (jitter_fwhm == 0.0) return family(0.0);
  const Quadrature q = gauss_hermite(nodes, jitter_fwhm * kFwhmToSigma);
  const auto curves = parallel_map(q.nodes.size(), workers, [&](size_t k) { return family(q.nodes[k]); });
  Curve out = curves.front();
  out.meta.clear();
  std::fill(out.y.begin(), out.y.end(), 0.0);
  for (size_t k = 0; k < curves.size(); ++k) {
    if (curves[k].x != out.x) throw InvalidArgument("jitter_average: family curves differ in their x grid");
    for (size_t j = 0; j < out.y.size(); ++j) out.y[j] += q.weights[k] * curves[k].y[j];
  }
  return out;
}

std::vector<Peak> find_peaks(const Curve& curve, double min_relative) {
  curve.validate();
  std::vector<Peak> out;
  const auto& x = curve.x;
  const auto& y = curve.y;
  if (y.size() < 3) return out;
  const double top = *std::max_element(y.begin(), y.end());
  for (size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1]) || y[i] < min_relative * top) continue;
    // vertex of the parabola through the three samples
    const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double c = (d12 - d01) / (x2 - x0);
    Peak p{x1, y1};
    if (c < 0.0) {
      const double b = d01 - c * (x0 + x1);
      p.position = std::clamp(-b / (2.0 * c), x0, x2);
      p.height = y1 + (p.position - x1) * (d01 + c * (p.position - x0));
    }
    out.push_back(p);
  }
  return out;
}

double peak_fwhm(const Curve& curve) {
  curve.validate();
  const auto& x = curve.x;
  const auto& y = curve.y;
  if (y.empty()) return std::numeric_limits<double>::quiet_NaN();
  const size_t top = static_cast<size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double half = 0.5 * y[top];
  auto cross = [&](size_t i, size_t j) {  // y[i] >= half > y[j]
    return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
  };
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = left;
  for (size_t i = top; i > 0; --i) {
    if (y[i - 1] < half) {
      left = cross(i, i - 1);
      break;
    }
  }
  for (size_t i = top; i + 1 < y.size(); ++i) {
    if (y[i + 1] < half) {
      right = cross(i, i + 1);
      break;
    }
  }
  return right - left;
}

Curve transmission_scan(const SystemParams& params, double power_pw,
                        const std::vector<double>& detuning_grid_ghz, const InstrumentModel& instrument,
                        const SpaceConfig& space, int workers) {
  instrument.validate();
  if (!(power_pw > 0.0)) throw InvalidArgument("transmission_scan: power must be > 0");
  const double reference = empty_cavity_photons(power_pw, params);

  auto scan = [&](double offset) {
    SystemParams shifted = params;
    shifted.delta_cavity += offset;
    Curve c{"detuning_ghz", "transmission_norm", detuning_grid_ghz, {}, {}, {}};
    c.y = parallel_map(detuning_grid_ghz.size(), workers, [&](size_t k) {
      const Stationary ss =
          stationary(shifted, DriveSpec::monochromatic(detuning_grid_ghz[k], power_pw), space);
      const double n = instrument.coherent_only ? std::norm(ss.field_mean()) : ss.photon_number();
      return n / reference;
    });
    return c;
  };
  Curve out = jitter_average(scan, instrument.jitter_fwhm, instrument.jitter_nodes);
  out.validate();

  const auto peaks = find_peaks(out);
  out.meta["peak_count"] = static_cast<double>(peaks.size());
  for (size_t k = 0; k < peaks.size(); ++k) {
    out.meta["peak_" + std::to_string(k + 1) + "_ghz"] = peaks[k].position;
  }
  if (peaks.size() >= 2) out.meta["splitting_ghz"] = peaks.back().position - peaks.front().position;
  const double width = peak_fwhm(out);
  if (std::isfinite(width)) out.meta["fwhm_ghz"] = width;
  out.meta["peak_transmission"] = *std::max_element(out.y.begin(), out.y.end());
  return out;
}

std::vector<double> convolve_irf(const std::vector<double>& t_ps, const std::vector<double>& y,
                                 double irf_fwhm_ps) {
  if (t_ps.size() != y.size()) throw InvalidArgument("convolve_irf: t and y differ in length");
  if (!(irf_fwhm_ps >= 0.0)) throw InvalidArgument("convolve_irf: irf_fwhm must be >= 0");
  if (irf_fwhm_ps == 0.0 || y.size() < 2) return y;
  const double dt = t_ps[1] - t_ps[0];
  for (size_t k = 1; k < t_ps.size(); ++k) {
    if (std::abs(t_ps[k] - t_ps[k - 1] - dt) > 1e-6 * dt) {
      throw InvalidArgument("convolve_irf: IRF convolution requires a uniform time grid");
    }
  }
  const double sigma = irf_fwhm_ps * kFwhmToSigma;
  const long half = static_cast<long>(std::ceil(6.0 * sigma / dt));
  std::vector<double> kernel(2 * half + 1);
  double total = 0.0;
  for (long k = -half; k <= half; ++k) {
    const double u = k * dt / sigma;
    kernel[k + half] = std::exp(-0.5 * u * u);
    total += kernel[k + half];
  }
  for (double& w : kernel) w /= total;
  const long n = static_cast<long>(y.size());
  std::vector<double> out(y.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long k = -half; k <= half; ++k) {
      const long j = i - k;
      if (j >= 0 && j < n) acc += kernel[k + half] * y[j];
    }
    out[i] = acc;
  }
  return out;
}

namespace {

// parameters: A, tau [ps], B, f [GHz], phi
std::vector<double> ring_down_model(const std::vector<double>& t_ps, const Eigen::VectorXd& p,
                                    double irf_fwhm_ps) {
  std::vector<double> m(t_ps.size());
  for (size_t k = 0; k < t_ps.size(); ++k) {
    const double t = t_ps[k];
    const double osc = p.size() > 2 ? p(2) * std::cos(kTwoPi * p(3) * t * 1e-3 + p(4)) : 0.0;
    m[k] = p(0) * std::exp(-t / p(1)) * (1.0 + osc);
  }
  return convolve_irf(t_ps, m, irf_fwhm_ps);
}

struct RingDownFunctor : Eigen::DenseFunctor<double> {
  const std::vector<double>& t;
  const std::vector<double>& y;
  double irf;
  double scale;
  RingDownFunctor(const std::vector<double>& t_, const std::vector<double>& y_, double irf_, int params,
                  double scale_)
      : Eigen::DenseFunctor<double>(params, static_cast<int>(t_.size())), t(t_), y(y_), irf(irf_),
        scale(scale_) {}
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& fvec) const {
    const auto m = ring_down_model(t, p, irf);
    for (size_t k = 0; k < t.size(); ++k) fvec(k) = (m[k] - y[k]) / scale;
    return 0;
  }
};

double rms(const std::vector<double>& t, const std::vector<double>& y, const Eigen::VectorXd& p,
           double irf) {
  const auto m = ring_down_model(t, p, irf);
  double acc = 0.0;
  for (size_t k = 0; k < y.size(); ++k) acc += (m[k] - y[k]) * (m[k] - y[k]);
  return std::sqrt(acc / static_cast<double>(y.size()));
}

// Envelope time constant from a log-linear regression over the samples above
// 1e-3 of the maximum.
double initial_decay_time(const std::vector<double>& t, const std::vector<double>& y) {
  const double top = *std::max_element(y.begin(), y.end());
  const size_t start = static_cast<size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (size_t k = start; k < y.size(); ++k) {
    if (y[k] < 1e-3 * top) continue;
    const double ly = std::log(y[k]);
    sx += t[k];
    sy += ly;
    sxx += t[k] * t[k];
    sxy += t[k] * ly;
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(slope < 0.0) || n < 2) return 0.25 * (t.back() - t.front());
  return -1.0 / slope;
}

}  // namespace

DecayFit fit_ring_down(const std::vector<double>& t_ps, const std::vector<double>& y,
                       double irf_fwhm_ps, bool oscillating) {
  if (t_ps.size() != y.size() || t_ps.size() < 8) {
    throw InvalidArgument("fit_ring_down: need at least 8 samples of equal-length t and y");
  }
  const double scale = *std::max_element(y.begin(), y.end());
  if (!(scale > 0.0)) throw InvalidArgument("fit_ring_down: trace has no positive signal");
  const double tau0 = initial_decay_time(t_ps, y);

  Eigen::VectorXd p;
  if (!oscillating) {
    p.resize(2);
    p << 1.0, tau0;
    const auto unit = ring_down_model(t_ps, p, irf_fwhm_ps);
    double num = 0, den = 0;
    for (size_t k = 0; k < y.size(); ++k) {
      num += unit[k] * y[k];
      den += unit[k] * unit[k];
    }
    p(0) = num / den;
  } else {
    // Frequency scan with the linear coefficients solved exactly at each f.
    const double t_span = t_ps.back() - t_ps.front();
    const double f_min = 0.5e3 / t_span;
    const double f_max = 0.25e3 / (t_ps[1] - t_ps[0]);
    double best = std::numeric_limits<double>::infinity();
    p.resize(5);
    for (double f = f_min; f <= f_max; f += 0.25 * f_min) {
      Eigen::MatrixXd basis(y.size(), 3);
      std::vector<double> b0(y.size()), b1(y.size()), b2(y.size());
      for (size_t k = 0; k < y.size(); ++k) {
        const double e = std::exp(-t_ps[k] / tau0);
        const double ph = kTwoPi * f * t_ps[k] * 1e-3;
        b0[k] = e;
        b1[k] = e * std::cos(ph);
        b2[k] = e * std::sin(ph);
      }
      b0 = convolve_irf(t_ps, b0, irf_fwhm_ps);
      b1 = convolve_irf(t_ps, b1, irf_fwhm_ps);
      b2 = convolve_irf(t_ps, b2, irf_fwhm_ps);
      for (size_t k = 0; k < y.size(); ++k) basis.row(k) << b0[k], b1[k], b2[k];
      const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), y.size());
      const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(yv);
      const double r = (basis * c - yv).squaredNorm();
      if (r < best && c(0) > 0.0) {
        best = r;
        const double amp = std::hypot(c(1), c(2));
        p << c(0), tau0, amp / c(0), f, std::atan2(-c(2), c(1));
      }
    }
  }

  RingDownFunctor functor(t_ps, y, irf_fwhm_ps, static_cast<int>(p.size()), scale);
  Eigen::NumericalDiff<RingDownFunctor> numdiff(functor);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<RingDownFunctor>> lm(numdiff);
  lm.setXtol(1e-12);
  lm.setFtol(1e-12);
  lm.setMaxfev(4000);
  lm.minimize(p);

  DecayFit fit;
  fit.amplitude = p(0);
  fit.decay_time_ps = p(1);
  if (oscillating) {
    // canonical form: B >= 0, phi in (-pi, pi]
    double b = p(2), phi = p(4);
    if (b < 0.0) {
      b = -b;
      phi += M_PI;
    }
    fit.modulation = b;
    fit.frequency_ghz = std::abs(p(3));
    if (p(3) < 0.0) phi = -phi;
    fit.phase = std::remainder(phi, kTwoPi);
  }
  fit.rms_residual = rms(t_ps, y, p, irf_fwhm_ps);
  return fit;
}

Curve ring_down_trace(const SystemParams& params, const RingDownInitial& initial,
                      const std::vector<double>& t_grid_ps, const InstrumentModel& instrument,
                      const SpaceConfig& space) {
  instrument.validate();
  if (!(initial.cavity_photons >= 0.0)) {
    throw InvalidArgument("ring_down_trace: cavity_photons must be >= 0");
  }
  const DensityMatrix rho0 =
      initial.state ? *initial.state
                    : DensityMatrix::coherent(space, initial.level, std::sqrt(initial.cavity_photons));
  std::vector<double> t_ns;
  t_ns.reserve(t_grid_ps.size());
  for (double t : t_grid_ps) t_ns.push_back(1e-3 * t);

  const auto h = hamiltonian_components(params, DriveSpec::monochromatic(0.0, 0.0), space);
  const Trajectory traj = evolve(rho0, h, collapse_ops(params, space), t_ns);
  const double kappa_ang = kTwoPi * params.kappa;
  std::vector<double> flux;
  flux.reserve(t_ns.size());
  for (const auto& n : traj.observables.at("n")) flux.push_back(kappa_ang * n.real());

  Curve out{"time_ps", "flux_per_ns", t_grid_ps, convolve_irf(t_grid_ps, flux, instrument.irf_fwhm), {}, {}};
  out.validate();
  const DecayFit fit = fit_ring_down(out.x, out.y, instrument.irf_fwhm, params.g > 0.0);
  out.meta["decay_time_ps"] = fit.decay_time_ps;
  out.meta["oscillation_ghz"] = fit.frequency_ghz;
  out.meta["modulation"] = fit.modulation;
  out.meta["fit_rms"] = fit.rms_residual;
  out.meta["model_frequency_ghz"] = damped_rabi_frequency(params);
  return out;
}

Curve filtered_comb_spectrum(const std::map<int, cplx>& harmonics, double beat_ghz,
                             const std::vector<double>& scan_grid_ghz, const InstrumentModel& instrument,
                             double kappa_ghz) {
  if (!(instrument.filter_fwhm > 0.0)) {
    throw InvalidArgument("filtered_comb_spectrum: filter_fwhm must be > 0");
  }
  const double w = instrument.filter_fwhm;
  const double kappa_ang = kTwoPi * kappa_ghz;
  Curve out{"filter_detuning_ghz", "power_density_per_ns_ghz", scan_grid_ghz,
            std::vector<double>(scan_grid_ghz.size(), 0.0), {}, {}};
  out.validate();
  double total = 0.0;
  for (const auto& [n, alpha] : harmonics) {
    const double weight = kappa_ang * std::norm(alpha);
    total += weight;
    const double centre = n * beat_ghz;
    for (size_t k = 0; k < out.x.size(); ++k) {
      const double u = out.x[k] - centre;
      out.y[k] += weight * (0.5 * w / M_PI) / (u * u + 0.25 * w * w);
    }
  }
  out.meta["total_weight_per_ns"] = total;
  return out;
}

double fwm_efficiency(const std::map<int, cplx>& harmonics) {
  for (int n : {-3, -1, 1, 3}) {
    if (!harmonics.count(n)) {
      throw InvalidArgument("fwm_efficiency: harmonic " + std::to_string(n) + " missing");
    }
  }
  const double main = std::norm(harmonics.at(1)) + std::norm(harmonics.at(-1));
  if (!(main > 0.0)) throw InvalidArgument("fwm_efficiency: main lines carry no power");
  return (std::norm(harmonics.at(3)) + std::norm(harmonics.at(-3))) / main;
}

std::vector<double> g2_with_background(const std::vector<double>& g2_ideal, double background_fraction) {
  if (!(background_fraction >= 0.0)) {
    throw InvalidArgument("g2_with_background: background fraction must be >= 0");
  }
  const double b = background_fraction;
  const double norm = (1.0 + b) * (1.0 + b);
  std::vector<double> out;
  out.reserve(g2_ideal.size());
  for (double g : g2_ideal) out.push_back((g + 2.0 * b + b * b) / norm);
  return out;
}

double background_for_peak(double g2_zero, double target) {
  if (!(target > 1.0) || !(g2_zero > target)) {
    throw RangeError("background_for_peak: need g2_zero > target > 1 for a positive background");
  }
  // (g + 2b + b^2) / (1 + b)^2 = T  <=>  (1 + b)^2 = (g - 1) / (T - 1)
  return std::sqrt((g2_zero - 1.0) / (target - 1.0)) - 1.0;
}

}  // namespace polsim
