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

#include "polsim/model.hpp"

#include <cmath>

#include "polsim/errors.hpp"

namespace polsim {

namespace {

constexpr double kPlanck = 6.62607015e-34;  // J s
constexpr double kLightSpeed = 299792458.0;  // m / s

double angular(double ghz) { return kTwoPi * ghz; }

}  // namespace

double SystemParams::triplet_ratio() const {
  if (gamma_et == 0.0) return 0.0;
  return gamma_et / gamma_tg;
}

SystemParams SystemParams::with_triplet_ratio(double r) const {
  if (!(r >= 0.0)) throw InvalidArgument("with_triplet_ratio: ratio must be >= 0");
  SystemParams out = *this;
  if (r == 0.0) {
    out.gamma_et = 0.0;
    if (out.gamma_tg == 0.0) out.gamma_tg = 1e-5;
    return out;
  }
  if (out.gamma_et == 0.0) out.gamma_et = 1e-5;
  out.gamma_tg = out.gamma_et / r;
  return out;
}

void SystemParams::validate() const {
  if (!(kappa > 0.0)) throw InvalidArgument("SystemParams: kappa must be > 0");
  if (!(gamma > 0.0)) throw InvalidArgument("SystemParams: gamma must be > 0");
  if (g < 0.0 || gamma_et < 0.0 || gamma_tg < 0.0 || gamma_deph < 0.0) {
    throw InvalidArgument("SystemParams: rates must be >= 0");
  }
  if (!(branching_beta > 0.0 && branching_beta <= 1.0)) {
    throw InvalidArgument("SystemParams: branching_beta must lie in (0, 1]");
  }
  if (!(eta_cpl > 0.0 && eta_cpl <= 1.0)) {
    throw InvalidArgument("SystemParams: eta_cpl must lie in (0, 1]");
  }
  if (!(lambda_nm > 0.0)) throw InvalidArgument("SystemParams: lambda_nm must be > 0");
}

void DriveSpec::validate() const {
  if (tones.empty() || tones.size() > 2) {
    throw InvalidArgument("DriveSpec: expected one or two tones, got " + std::to_string(tones.size()));
  }
  for (const auto& t : tones) {
    if (!(t.power >= 0.0)) throw InvalidArgument("DriveSpec: tone power must be >= 0");
  }
  if (tones.size() == 2 && tones[0].detuning == tones[1].detuning) {
    throw InvalidArgument("DriveSpec: bichromatic tones must have distinct detunings");
  }
}

std::vector<CollapseChannel> collapse_set(const SystemParams& params, const SpaceConfig& space) {
  params.validate();
  std::vector<CollapseChannel> out;
  auto push = [&](const char* name, double rate_ghz, const Op& op) {
    if (rate_ghz > 0.0) out.push_back({name, scale(std::sqrt(angular(rate_ghz)), op)});
  };
  const Op sigma_ge = transition(space, Level::g, Level::e);
  push("cavity", params.kappa, annihilation(space));
  push("zpl", params.branching_beta * params.gamma, sigma_ge);
  push("red", (1.0 - params.branching_beta) * params.gamma, sigma_ge);
  push("isc_et", params.gamma_et, transition(space, Level::t, Level::e));
  push("isc_tg", params.gamma_tg, transition(space, Level::g, Level::t));
  push("dephasing", 2.0 * params.gamma_deph, transition(space, Level::e, Level::e));
  return out;
}

std::vector<Op> collapse_ops(const SystemParams& params, const SpaceConfig& space) {
  std::vector<Op> out;
  for (auto& c : collapse_set(params, space)) out.push_back(std::move(c.op));
  return out;
}

HamiltonianComponents hamiltonian_components(const SystemParams& params, const DriveSpec& drive,
                                             const SpaceConfig& space, CavityFrame frame) {
  params.validate();
  drive.validate();

  HamiltonianComponents out{zero_op(space), {}, 0.0, 0.0, frame, {}};
  const Op a = annihilation(space);
  const Op a_dag = creation(space);

  if (drive.is_bichromatic()) {
    out.frame_ghz = 0.5 * (drive.tones[0].detuning + drive.tones[1].detuning);
    out.beat_ghz = 0.5 * std::abs(drive.tones[1].detuning - drive.tones[0].detuning);
  } else {
    out.frame_ghz = drive.tones[0].detuning;
  }

  const double dc = angular(params.delta_cavity - out.frame_ghz);
  const double dm = angular(params.delta_molecule - out.frame_ghz);
  const double g = angular(params.g);
  const double half_kappa = 0.5 * angular(params.kappa);
  const Op sigma_ge = transition(space, Level::g, Level::e);
  const Op sigma_eg = dagger(sigma_ge);

  Op h = scale(dc, number(space)) + scale(dm, transition(space, Level::e, Level::e)) +
         scale(g, matmul(a_dag, sigma_ge) + matmul(a, sigma_eg));

  // Tone k contributes eta_k a^dag e^{-i k Omega t} (+ h.c.). In the displaced
  // frame the classical response beta_k = -i eta_k / (kappa/2 + i dc - i k Omega)
  // is removed from the cavity and drives the molecule as g beta_k sigma_eg.
  struct Component {
    int harmonic;
    double eta;
  };
  std::vector<Component> components;
  if (drive.is_bichromatic()) {
    for (const auto& tone : drive.tones) {
      const double ratio = (tone.detuning - out.frame_ghz) / out.beat_ghz;
      const int k = static_cast<int>(std::lround(ratio));
      if (std::abs(ratio - k) > 1e-9 || std::abs(k) != 1) {
        throw std::logic_error("hamiltonian_components: tone not at +-beat in the mean frame");
      }
      components.push_back({k, drive_amplitude(tone.power, params)});
    }
  } else {
    components.push_back({0, drive_amplitude(drive.tones[0].power, params)});
  }

  const double omega = angular(out.beat_ghz);
  for (const auto& c : components) {
    if (c.eta == 0.0) continue;
    if (frame == CavityFrame::lab) {
      if (c.harmonic == 0) {
        h = h + scale(c.eta, a + a_dag);
      } else {
        out.h_plus.push_back({scale(c.eta, a_dag), c.harmonic});
      }
      continue;
    }
    const cplx beta = cplx(0.0, -c.eta) / cplx(half_kappa, dc - c.harmonic * omega);
    out.coherent_field[c.harmonic] += beta;
    if (c.harmonic == 0) {
      h = h + scale(g * beta, sigma_eg) + scale(g * std::conj(beta), sigma_ge);
    } else {
      out.h_plus.push_back({scale(g * beta, sigma_eg), c.harmonic});
    }
  }
  out.h_static = h;
  return out;
}

Op HamiltonianComponents::field_operator() const {
  const SpaceConfig& space = h_static.space();
  const auto it = coherent_field.find(0);
  if (it == coherent_field.end()) return annihilation(space);
  return annihilation(space) + scale(it->second, identity(space));
}

DenseMat hamiltonian_at(const HamiltonianComponents& h, double t) {
  DenseMat out = h.h_static.dense();
  for (const auto& sb : h.h_plus) {
    const cplx phase = std::exp(cplx(0.0, -kTwoPi * sb.harmonic * h.beat_ghz * t));
    const DenseMat m = sb.op.dense();
    out += phase * m + std::conj(phase) * m.adjoint();
  }
  return out;
}

double cooperativity(double g, double kappa, double gamma) {
  if (!(kappa > 0.0) || !(gamma > 0.0)) {
    throw InvalidArgument("cooperativity: kappa and gamma must be > 0");
  }
  return 4.0 * g * g / (kappa * gamma);
}

double cooperativity(const SystemParams& params) {
  return cooperativity(params.g, params.kappa, params.gamma);
}

double power_to_flux(double power_pw, double lambda_nm) {
  if (power_pw < 0.0) throw InvalidArgument("power_to_flux: power must be >= 0");
  return power_pw * 1e-12 * lambda_nm * 1e-9 / (kPlanck * kLightSpeed);
}

double photons_per_lifetime(double flux, double kappa_ghz) {
  if (!(kappa_ghz > 0.0)) throw InvalidArgument("photons_per_lifetime: kappa must be > 0");
  return flux / (kTwoPi * kappa_ghz * 1e9);
}

double power_for_photons_per_lifetime(double n_bar, double kappa_ghz, double lambda_nm) {
  const double flux = n_bar * kTwoPi * kappa_ghz * 1e9;
  return flux * kPlanck * kLightSpeed / (lambda_nm * 1e-9) * 1e12;
}

double drive_amplitude(double power_pw, const SystemParams& params) {
  // eta = sqrt(eta_cpl * kappa * flux) / 2, everything in ns units
  const double flux_per_ns = power_to_flux(power_pw, params.lambda_nm) * 1e-9;
  return 0.5 * std::sqrt(params.eta_cpl * angular(params.kappa) * flux_per_ns);
}

double empty_cavity_photons(double power_pw, const SystemParams& params) {
  const double eta = drive_amplitude(power_pw, params);
  const double k = angular(params.kappa);
  return 4.0 * eta * eta / (k * k);
}

}  // namespace polsim
