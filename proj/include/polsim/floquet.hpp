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

// Periodic steady state under a two-tone drive by harmonic balance.
//
// In the frame rotating at the mean tone frequency the long-time state is
//   rho(t) = sum_n rho_n exp(-i n 2pi beat t),   beat = |nu_2 - nu_1| / 2,
// so that harmonic n of <a> radiates at frame + n * beat. The drive tones
// sit at n = +-1; four-wave mixing products at +-3, +-5, ...

#pragma once

#include <map>
#include <optional>

#include "polsim/dynamics.hpp"
#include "polsim/model.hpp"

namespace polsim {

struct PeriodicSteadyState {
  SpaceConfig space;
  double beat_ghz = 0.0;
  double frame_ghz = 0.0;
  int n_harmonics = 0;
  std::map<int, DenseMat> components;  ///< n in [-N_h, N_h]
  double residual = 0.0;               ///< max-norm residual of the stacked system
  CavityFrame cavity_frame = CavityFrame::lab;
  std::map<int, cplx> coherent_field;  ///< classical cavity harmonics split off in the displaced frame

  /// rho(t) assembled from the harmonics; t in ns.
  DensityMatrix at(double t) const;
};

struct FloquetOptions {
  /// Fixed truncation; unset selects N_h automatically (5, 10, 20, 40).
  std::optional<int> n_harmonics;
  int max_harmonics = 41;
  double convergence_tol = 1e-6;
  CavityFrame frame = CavityFrame::displaced;
};

/// Solves the stacked block system for all |n| <= n_harmonics.
PeriodicSteadyState periodic_steady_state(const SystemParams& params, const DriveSpec& drive,
                                          int n_harmonics, const SpaceConfig& space,
                                          CavityFrame frame = CavityFrame::displaced);
/// Auto-selected or fixed truncation according to options. Auto-selection
/// doubles N_h until every significant |alpha_n|^2 changes by less than
/// convergence_tol (relative); throws TruncationError beyond max_harmonics.
PeriodicSteadyState periodic_steady_state(const SystemParams& params, const DriveSpec& drive,
                                          const SpaceConfig& space, const FloquetOptions& options = {});

/// alpha_n = Tr(a rho_n), including the classical part in the displaced frame.
std::map<int, cplx> field_harmonics(const PeriodicSteadyState& pss);

/// Largest relative change of the significant |alpha_n|^2 between two solutions.
double harmonic_change(const std::map<int, cplx>& coarse, const std::map<int, cplx>& fine);

struct ProbeResult {
  double transmission = 0.0;   ///< |alpha_probe|^2 / |alpha_probe, empty cavity|^2
  int probe_harmonic = 0;
  int n_harmonics = 0;
};

/// Probe transmission under a second (pump) tone, normalized to the resonant
/// probe response of the empty cavity.
ProbeResult probe_transmission(const SystemParams& params, const Tone& pump, const Tone& probe,
                               const SpaceConfig& space, const FloquetOptions& options = {});

struct OracleReport {
  double residual = 0.0;  ///< max relative deviation of significant harmonics
  std::map<int, cplx> integrated;
  std::map<int, cplx> harmonic_balance;
};

/// Time-integration check of a periodic steady state: evolves the master
/// equation in the frame of pss from a warm start (time-averaged molecular
/// populations, empty cavity) through a transient of 20/gamma_ang plus 20 beat
/// periods, then Fourier-analyzes <a>(t) over the following 10 periods.
OracleReport verify_periodic_oracle(const SystemParams& params, const DriveSpec& drive,
                                    const PeriodicSteadyState& pss);

}  // namespace polsim
