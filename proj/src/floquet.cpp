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

#include "polsim/floquet.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "polsim/errors.hpp"

namespace polsim {

namespace {

// Harmonics weaker than this fraction of the strongest line are not part of
// the convergence and oracle comparisons.
constexpr double kSignificantPower = 1e-9;
constexpr double kSignificantAmplitude = 1e-3;

}  // namespace

DensityMatrix PeriodicSteadyState::at(double t) const {
  DenseMat rho = DenseMat::Zero(space.dim(), space.dim());
  for (const auto& [n, m] : components) {
    rho += std::exp(cplx(0.0, -kTwoPi * n * beat_ghz * t)) * m;
  }
  return {space, rho};
}

PeriodicSteadyState periodic_steady_state(const SystemParams& params, const DriveSpec& drive,
                                          int n_harmonics, const SpaceConfig& space,
                                          CavityFrame frame) {
  if (!drive.is_bichromatic()) {
    throw InvalidArgument("periodic_steady_state: two distinct tones required");
  }
  if (n_harmonics < 1) throw InvalidArgument("periodic_steady_state: n_harmonics must be >= 1");

  const auto h = hamiltonian_components(params, drive, space, frame);
  const auto lc = liouvillian_components(h, collapse_ops(params, space));
  const int d = space.dim();
  const long dd = static_cast<long>(d) * d;
  const int blocks = 2 * n_harmonics + 1;
  const long n_total = dd * blocks;
  const double omega = kTwoPi * h.beat_ghz;
  const long trace_row = static_cast<long>(n_harmonics) * dd;  // first diagonal row of block 0

  std::vector<Eigen::Triplet<cplx>> triplets;
  long nnz = lc.static_part.nonZeros() + dd;
  for (const auto& [m, s] : lc.sidebands) nnz += s.nonZeros();
  triplets.reserve(static_cast<size_t>(nnz * blocks + d));

  auto add_block = [&](const SuperOp& s, long row0, long col0) {
    for (int col = 0; col < s.outerSize(); ++col) {
      for (SuperOp::InnerIterator it(s, col); it; ++it) {
        const long row = row0 + it.row();
        if (row != trace_row) triplets.emplace_back(row, col0 + col, it.value());
      }
    }
  };

  // (L_0 + i n Omega) rho_n + sum_m L_m rho_{n-m} = 0
  for (int n = -n_harmonics; n <= n_harmonics; ++n) {
    const long row0 = static_cast<long>(n + n_harmonics) * dd;
    add_block(lc.static_part, row0, row0);
    if (n != 0) {
      for (long k = 0; k < dd; ++k) triplets.emplace_back(row0 + k, row0 + k, cplx(0.0, n * omega));
    }
    for (const auto& [m, s] : lc.sidebands) {
      const int src = n - m;
      if (std::abs(src) > n_harmonics) continue;
      add_block(s, row0, static_cast<long>(src + n_harmonics) * dd);
    }
  }
  for (int k = 0; k < d; ++k) triplets.emplace_back(trace_row, trace_row + k * d + k, 1.0);

  SuperOp a(n_total, n_total);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  DenseVec rhs = DenseVec::Zero(n_total);
  rhs(trace_row) = 1.0;

  Eigen::SparseLU<SuperOp, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw DegenerateSteadyState("periodic_steady_state: singular block system: " + lu.lastErrorMessage(),
                                -1);
  }
  const DenseVec x = lu.solve(rhs);
  if (!x.allFinite()) throw DegenerateSteadyState("periodic_steady_state: non-finite solution", -1);

  PeriodicSteadyState out;
  out.space = space;
  out.beat_ghz = h.beat_ghz;
  out.frame_ghz = h.frame_ghz;
  out.n_harmonics = n_harmonics;
  out.cavity_frame = frame;
  out.coherent_field = h.coherent_field;
  out.residual = (a * x - rhs).cwiseAbs().maxCoeff();
  if (out.residual > 1e-9) {
    throw DegenerateSteadyState("periodic_steady_state: block solve residual " +
                                    std::to_string(out.residual) + " exceeds 1e-9",
                                -1);
  }
  for (int n = -n_harmonics; n <= n_harmonics; ++n) {
    const long off = static_cast<long>(n + n_harmonics) * dd;
    out.components.emplace(n, Eigen::Map<const DenseMat>(x.data() + off, d, d));
  }
  return out;
}

std::map<int, cplx> field_harmonics(const PeriodicSteadyState& pss) {
  const Op a = annihilation(pss.space);
  std::map<int, cplx> out;
  for (const auto& [n, m] : pss.components) out[n] = expectation(a, DensityMatrix(pss.space, m));
  for (const auto& [n, beta] : pss.coherent_field) out[n] += beta;
  return out;
}

double harmonic_change(const std::map<int, cplx>& coarse, const std::map<int, cplx>& fine) {
  double peak = 0.0;
  for (const auto& [n, v] : fine) peak = std::max(peak, std::norm(v));
  const double floor = kSignificantPower * peak;
  double worst = 0.0;
  for (const auto& [n, v] : fine) {
    const double p_fine = std::norm(v);
    const auto it = coarse.find(n);
    const double p_coarse = it == coarse.end() ? 0.0 : std::norm(it->second);
    if (std::max(p_fine, p_coarse) < floor) continue;
    worst = std::max(worst, std::abs(p_fine - p_coarse) / std::max(p_fine, floor));
  }
  return worst;
}

PeriodicSteadyState periodic_steady_state(const SystemParams& params, const DriveSpec& drive,
                                          const SpaceConfig& space, const FloquetOptions& options) {
  if (options.n_harmonics) {
    return periodic_steady_state(params, drive, *options.n_harmonics, space, options.frame);
  }

  int n_h = 5;
  PeriodicSteadyState current = periodic_steady_state(params, drive, n_h, space, options.frame);
  auto current_lines = field_harmonics(current);
  // The cap bounds the selected truncation; the doubled check solve may exceed it.
  while (true) {
    const int doubled = 2 * n_h;
    PeriodicSteadyState finer = periodic_steady_state(params, drive, doubled, space, options.frame);
    auto finer_lines = field_harmonics(finer);
    if (harmonic_change(current_lines, finer_lines) < options.convergence_tol) return current;
    if (doubled > options.max_harmonics) {
      throw TruncationError("periodic_steady_state: harmonics not converged at N_h = " +
                            std::to_string(n_h) + " (cap " + std::to_string(options.max_harmonics) + ")");
    }
    n_h = doubled;
    current = std::move(finer);
    current_lines = std::move(finer_lines);
  }
}

ProbeResult probe_transmission(const SystemParams& params, const Tone& pump, const Tone& probe,
                               const SpaceConfig& space, const FloquetOptions& options) {
  if (!(probe.power > 0.0)) throw InvalidArgument("probe_transmission: probe power must be > 0");
  const DriveSpec drive = DriveSpec::bichromatic(pump, probe);
  const auto pss = periodic_steady_state(params, drive, space, options);
  const auto lines = field_harmonics(pss);
  ProbeResult out;
  out.probe_harmonic = probe.detuning > pss.frame_ghz ? 1 : -1;
  out.n_harmonics = pss.n_harmonics;
  out.transmission = std::norm(lines.at(out.probe_harmonic)) / empty_cavity_photons(probe.power, params);
  return out;
}

OracleReport verify_periodic_oracle(const SystemParams& params, const DriveSpec& drive,
                                    const PeriodicSteadyState& pss) {
  const SpaceConfig& space = pss.space;
  const auto h = hamiltonian_components(params, drive, space, pss.cavity_frame);

  // Warm start: time-averaged molecular populations, cavity in vacuum.
  const DensityMatrix rho_avg(space, pss.components.at(0));
  DenseMat init = DenseMat::Zero(space.dim(), space.dim());
  for (Level lv : {Level::g, Level::e, Level::t}) {
    const int k = space.index(lv, 0);
    init(k, k) = std::max(0.0, rho_avg.population(lv));
  }
  init /= init.trace();

  const double period = 1.0 / pss.beat_ghz;
  const double transient = 20.0 / (kTwoPi * params.gamma);
  const int per_period = std::max(64, 4 * pss.n_harmonics + 8);
  const int periods_analyzed = 10;
  const double t_start = transient + 20.0 * period;
  std::vector<double> grid{0.0};
  for (int j = 0; j < periods_analyzed * per_period; ++j) {
    grid.push_back(t_start + j * period / per_period);
  }
  const Trajectory traj = evolve(DensityMatrix(space, init), h, collapse_ops(params, space), grid);
  const auto& field = traj.observables.at("a");

  OracleReport report;
  report.harmonic_balance = field_harmonics(pss);
  const double omega = kTwoPi * pss.beat_ghz;
  const double samples = static_cast<double>(grid.size() - 1);
  for (int n = -pss.n_harmonics; n <= pss.n_harmonics; ++n) {
    cplx acc = 0.0;
    for (size_t j = 1; j < grid.size(); ++j) acc += field[j] * std::exp(cplx(0.0, n * omega * grid[j]));
    report.integrated[n] = acc / samples;
    const auto beta = pss.coherent_field.find(n);
    if (beta != pss.coherent_field.end()) report.integrated[n] += beta->second;
  }

  double peak = 0.0;
  for (const auto& [n, v] : report.harmonic_balance) peak = std::max(peak, std::abs(v));
  for (const auto& [n, v] : report.harmonic_balance) {
    if (std::abs(v) < kSignificantAmplitude * peak) continue;
    report.residual = std::max(report.residual, std::abs(report.integrated[n] - v) / std::abs(v));
  }
  return report;
}

}  // namespace polsim
