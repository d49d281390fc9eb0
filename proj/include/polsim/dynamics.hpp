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

// Lindblad generator, stationary states, time evolution and two-time
// correlations.
//
// Superoperators act on column-stacked vec(rho), so that
// vec(A rho B) = (B^T (x) A) vec(rho).

#pragma once

#include <map>
#include <string>
#include <vector>

#include "polsim/hilbert.hpp"
#include "polsim/model.hpp"

namespace polsim {

using SuperOp = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;

struct Liouvillian {
  SpaceConfig space;
  SuperOp matrix;
};

/// L[rho] = -i[H, rho] + sum_c (c rho c^dag - {c^dag c, rho}/2).
/// Throws InvalidArgument if H is not Hermitian within 1e-12.
Liouvillian build_liouvillian(const Op& h, const std::vector<Op>& collapses);

/// Superoperator of rho -> -i (A rho - rho A) for a (not necessarily Hermitian) A.
SuperOp commutator_superop(const Op& a);
/// Superoperator of rho -> A rho.
SuperOp left_superop(const Op& a);

/// L(t) = L_0 + sum_m L_m e^{-i m 2pi beat t}.
struct LiouvillianComponents {
  SpaceConfig space;
  SuperOp static_part;
  std::map<int, SuperOp> sidebands;
  double beat_ghz = 0.0;
};

LiouvillianComponents liouvillian_components(const HamiltonianComponents& h,
                                             const std::vector<Op>& collapses);

/// Unique stationary state. Throws DegenerateSteadyState when the null space
/// of L has dimension > 1.
DensityMatrix steady_state(const Liouvillian& l);
/// Steady state under a monochromatic drive, expressed in the given cavity frame.
DensityMatrix steady_state(const SystemParams& params, const DriveSpec& drive,
                           const SpaceConfig& space, CavityFrame frame = CavityFrame::lab);

/// Everything derived from one monochromatic stationary solve.
struct Stationary {
  HamiltonianComponents h;
  std::vector<Op> collapses;
  Liouvillian l;
  DensityMatrix rho;
  Op field;  ///< cavity field a in the chosen frame

  cplx field_mean() const;       ///< <a>
  double photon_number() const;  ///< <a^dag a>
  double population(Level level) const { return rho.population(level); }
};

Stationary stationary(const SystemParams& params, const DriveSpec& drive, const SpaceConfig& space,
                      CavityFrame frame = CavityFrame::displaced);

/// ||L vec(rho)||_inf
double steady_state_residual(const Liouvillian& l, const DensityMatrix& rho);

/// Solves (L + shift) y = rhs on the traceless-or-fixed-trace subspace by
/// replacing the first diagonal row with Tr(y) = trace_value.
DenseVec solve_trace_replaced(const SuperOp& l, cplx shift, const DenseVec& rhs, cplx trace_value);

/// Dimension of the numerical null space of a dense-able Liouvillian.
int null_space_dimension(const Liouvillian& l, double tol = 1e-9);

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double min_step = 1e-9;  ///< ns
  double initial_step = 1e-3;
  long max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4) integration of dy/dt = L(t) y with dense
/// output at t_grid (ns, strictly increasing, t_grid[0] = t0).
std::vector<DenseVec> integrate(const LiouvillianComponents& l, const DenseVec& y0,
                                const std::vector<double>& t_grid, double t0 = 0.0,
                                const IntegratorOptions& options = {});

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::map<std::string, std::vector<cplx>> observables;  ///< "n", "a", "rho_ee", "rho_tt"
};

/// Integrates the master equation from rho0; positivity is monitored at
/// every sample and a violation below -1e-6 throws PositivityError.
Trajectory evolve(const DensityMatrix& rho0, const HamiltonianComponents& h,
                  const std::vector<Op>& collapses, const std::vector<double>& t_grid,
                  const IntegratorOptions& options = {});

enum class Propagator {
  runge_kutta,  ///< adaptive integration along the grid
  eigen,        ///< spectral decomposition of L; cheap for delays far beyond 1/gamma
};

struct CorrelationOptions {
  CavityFrame frame = CavityFrame::displaced;
  Propagator propagator = Propagator::runge_kutta;
};

/// g2(tau) = Tr[a^dag a e^{L tau}(a rho a^dag)] / <a^dag a>^2 under a
/// monochromatic drive; tau in ns, non-negative and increasing.
std::vector<double> g2_correlation(const SystemParams& params, const DriveSpec& drive,
                                   const std::vector<double>& tau_grid, const SpaceConfig& space,
                                   const CorrelationOptions& options = {});

struct EmissionSpectrum {
  double coherent_weight = 0.0;     ///< |<a>|^2
  std::vector<double> incoherent;   ///< per GHz, relative to the laser frame
  double mean_photons = 0.0;        ///< <a^dag a>
};

/// Coherent weight and incoherent emission spectrum of the cavity field,
/// the latter from the resolvent of L (Wiener-Khinchin of <da^dag(tau) da(0)>).
EmissionSpectrum emission_spectrum(const SystemParams& params, const DriveSpec& drive,
                                   const std::vector<double>& freq_grid_ghz,
                                   const SpaceConfig& space,
                                   CavityFrame frame = CavityFrame::displaced);

/// Single-excitation prediction of the ring-down beat frequency
/// 2 sqrt(g^2 - ((kappa - gamma)/4)^2) [GHz]; 0 when overdamped.
double damped_rabi_frequency(const SystemParams& params);

}  // namespace polsim
