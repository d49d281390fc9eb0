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

// Physical parameters of the molecule-cavity system and the operators built
// from them.
//
// Units at the API: ordinary frequencies in GHz, powers in pW, wavelength in
// nm. The conversion to angular units (rad/ns) happens only inside the
// operator builders of this module.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "polsim/hilbert.hpp"

namespace polsim {

struct SystemParams {
  double g = 0.77;              ///< coherent coupling g/2pi [GHz]
  double kappa = 1.3;           ///< cavity energy decay FWHM [GHz]
  double gamma = 0.04;          ///< total excited-state decay [GHz]
  double branching_beta = 0.3;  ///< zero-phonon-line branching ratio
  double gamma_et = 1e-5;       ///< intersystem crossing e -> t [GHz]
  double gamma_tg = 1e-5;       ///< triplet decay t -> g [GHz]
  double gamma_deph = 0.0;      ///< pure dephasing [GHz]
  double delta_cavity = 0.0;    ///< nu_c - nu_ref [GHz]
  double delta_molecule = 0.0;  ///< nu_m - nu_ref [GHz]
  double lambda_nm = 785.0;
  double eta_cpl = 1.0;  ///< power in-coupling efficiency

  /// gamma_et / gamma_tg, or 0 when there is no shelving.
  double triplet_ratio() const;
  /// Keeps gamma_et and sets gamma_tg = gamma_et / r. r = 0 switches the
  /// shelving channel off (gamma_et = 0).
  SystemParams with_triplet_ratio(double r) const;

  void validate() const;
};

struct Tone {
  double detuning = 0.0;  ///< relative to nu_ref [GHz]
  double power = 0.0;     ///< cavity-coupled optical power [pW]
};

struct DriveSpec {
  std::vector<Tone> tones;

  static DriveSpec monochromatic(double detuning, double power) { return {{{detuning, power}}}; }
  static DriveSpec bichromatic(Tone first, Tone second) { return {{first, second}}; }

  bool is_bichromatic() const { return tones.size() == 2; }
  void validate() const;
};

/// Picture in which the cavity mode is represented. In the displaced frame the
/// exact classical empty-cavity response beta(t) is split off (a = b + beta)
/// so the truncated Fock space only carries the molecule-radiated field; the
/// cavity drive then enters as a classical drive g beta(t) on the molecule.
enum class CavityFrame { lab, displaced };

struct Sideband {
  Op op;          ///< raising component, multiplies exp(-i 2pi k beat t)
  int harmonic;   ///< k
};

/// H(t) = h_static + sum_k (h_k e^{-i 2pi k beat t} + h_k^dagger e^{+i 2pi k beat t})
/// in a frame rotating at frame_ghz.
struct HamiltonianComponents {
  Op h_static;
  std::vector<Sideband> h_plus;
  double beat_ghz = 0.0;
  double frame_ghz = 0.0;
  CavityFrame cavity_frame = CavityFrame::lab;
  /// Harmonics beta_k of the classical cavity amplitude, beta(t) =
  /// sum_k beta_k e^{-i 2pi k beat t}; empty in the lab frame.
  std::map<int, cplx> coherent_field;

  /// Cavity field operator a expressed in this frame (b + beta_0 for static
  /// drives). Only meaningful without sidebands.
  Op field_operator() const;
};

/// Labeled Lindblad channel; op already carries sqrt(rate in rad/ns).
struct CollapseChannel {
  std::string name;
  Op op;
};

std::vector<CollapseChannel> collapse_set(const SystemParams& params, const SpaceConfig& space);
std::vector<Op> collapse_ops(const SystemParams& params, const SpaceConfig& space);

HamiltonianComponents hamiltonian_components(const SystemParams& params, const DriveSpec& drive,
                                             const SpaceConfig& space,
                                             CavityFrame frame = CavityFrame::lab);
/// Dense H(t) reconstructed from the harmonic components; t in ns.
DenseMat hamiltonian_at(const HamiltonianComponents& h, double t);

double cooperativity(const SystemParams& params);
double cooperativity(double g, double kappa, double gamma);

/// Photon flux [1/s] of an optical power [pW] at wavelength [nm].
double power_to_flux(double power_pw, double lambda_nm);
/// Flux [1/s] times the 1/e intensity lifetime 1/(2pi kappa).
double photons_per_lifetime(double flux, double kappa_ghz);
/// Inverse of photons_per_lifetime followed by power_to_flux: power [pW].
double power_for_photons_per_lifetime(double n_bar, double kappa_ghz, double lambda_nm);
/// Cavity drive amplitude eta [rad/ns] for a tone of the given power.
double drive_amplitude(double power_pw, const SystemParams& params);

/// Empty resonant cavity photon number 4 eta^2 / kappa^2 for the given power.
double empty_cavity_photons(double power_pw, const SystemParams& params);

}  // namespace polsim
