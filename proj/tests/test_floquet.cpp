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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "polsim/errors.hpp"
#include "polsim/floquet.hpp"
#include "test_support.hpp"

using namespace polsim;
using polsim::testing::max_abs;

namespace {

SystemParams fig3_params() {
  SystemParams p;
  p.g = 0.77;
  p.gamma_tg = p.gamma_et / 2.65;
  return p;
}

DriveSpec symmetric(double power) { return DriveSpec::bichromatic({-0.15, power}, {0.15, power}); }

// Excitation number of a basis index: photons plus one for |e>.
int excitation(const SpaceConfig& s, int index) {
  const int level = index / s.n_fock;
  return index % s.n_fock + (level == static_cast<int>(Level::e) ? 1 : 0);
}

// Classical linear response of the empty cavity to sideband k of amplitude eta.
cplx empty_response(const SystemParams& p, double eta, int k, double frame, double beat) {
  const double half_kappa = kTwoPi * p.kappa / 2;
  const double dc = kTwoPi * (p.delta_cavity - frame);
  return cplx(0, -1) * eta / cplx(half_kappa, dc - k * kTwoPi * beat);
}

}  // namespace

TEST_CASE("a silent second tone reduces to the monochromatic stationary state") {
  SystemParams p;
  p.gamma_et = 0.01;
  p.gamma_tg = 0.005;
  const auto space = build_space(4);
  const Tone active{-0.2, 50.0};
  const auto pss = periodic_steady_state(p, DriveSpec::bichromatic(active, {0.2, 0.0}), 6, space, CavityFrame::lab);
  const auto mono = steady_state(p, DriveSpec::monochromatic(active.detuning, active.power), space);
  // The mean frame rotates the tone frame, so an element that changes the
  // excitation number by k sits in harmonic -k; all other entries vanish.
  double worst = 0.0;
  for (const auto& [n, rho_n] : pss.components) {
    for (int i = 0; i < space.dim(); ++i) {
      for (int j = 0; j < space.dim(); ++j) {
        const bool carries = excitation(space, i) - excitation(space, j) == -n;
        const cplx expected = carries ? mono.matrix()(i, j) : cplx(0.0);
        worst = std::max(worst, std::abs(rho_n(i, j) - expected));
      }
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("empty cavity under two tones responds linearly") {
  SystemParams p;
  p.g = 0.0;
  p.delta_cavity = 0.05;
  const auto drive = DriveSpec::bichromatic({-0.15, 30.0}, {0.15, 80.0});
  const double eta1 = drive_amplitude(30.0, p), eta2 = drive_amplitude(80.0, p);

  const auto disp = periodic_steady_state(p, drive, 6, build_space(3), CavityFrame::displaced);
  const auto g0 = DensityMatrix::basis_state(disp.space, Level::g, 0);
  for (const auto& [n, rho_n] : disp.components) {
    CHECK(max_abs(rho_n - (n == 0 ? g0.matrix() : DenseMat::Zero(rho_n.rows(), rho_n.cols()))) < 1e-10);
  }

  const auto lab = periodic_steady_state(p, drive, 6, build_space(8), CavityFrame::lab);
  for (const auto* pss : {&disp, &lab}) {
    const auto alpha = field_harmonics(*pss);
    const cplx a_m = empty_response(p, eta1, -1, pss->frame_ghz, pss->beat_ghz);
    const cplx a_p = empty_response(p, eta2, 1, pss->frame_ghz, pss->beat_ghz);
    CHECK(std::abs(alpha.at(-1) - a_m) < 1e-8);
    CHECK(std::abs(alpha.at(1) - a_p) < 1e-8);
    for (const auto& [n, v] : alpha) {
      if (std::abs(n) != 1) CHECK(std::abs(v) < 1e-8);
    }
  }
  CHECK(verify_periodic_oracle(p, drive, disp).residual < 1e-6);
}

TEST_CASE("symmetric drive on resonance has no even field harmonics") {
  const auto p = fig3_params();
  const auto pss = periodic_steady_state(p, symmetric(425.0), 12, build_space(5));
  const auto alpha = field_harmonics(pss);
  double peak = 0.0;
  for (const auto& [n, v] : alpha) peak = std::max(peak, std::abs(v));
  for (const auto& [n, v] : alpha) {
    if (n % 2 == 0) CHECK(std::abs(v) < 1e-9);
  }
  // Tones dominate at +-1.
  CHECK(std::abs(alpha.at(1)) == doctest::Approx(peak));
  CHECK(std::abs(alpha.at(-1)) == doctest::Approx(peak));
  CHECK(std::abs(alpha.at(3)) > 0.0);
}

TEST_CASE("solver output is conjugation symmetric and solves the block system") {
  auto p = fig3_params();
  p.delta_molecule = 0.07;
  const auto pss = periodic_steady_state(p, DriveSpec::bichromatic({-0.1, 200.0}, {0.2, 600.0}), 10, build_space(4));
  CHECK(pss.residual < 1e-9);
  for (int n = 1; n <= pss.n_harmonics; ++n) {
    CHECK(max_abs(pss.components.at(-n) - pss.components.at(n).adjoint()) < 1e-9);
  }
  const auto rho_t = pss.at(1.234);
  CHECK(std::abs(rho_t.trace() - 1.0) < 1e-12);
  CHECK(rho_t.hermiticity_defect() < 1e-9);
}

TEST_CASE("automatic truncation meets the doubling contract") {
  const auto p = fig3_params();
  const auto space = build_space(6);
  for (double power : {425.0, 1700.0}) {
    CAPTURE(power);
    const auto pss = periodic_steady_state(p, symmetric(power), space);
    const auto doubled = periodic_steady_state(p, symmetric(power), 2 * pss.n_harmonics, space);
    CHECK(pss.n_harmonics <= 41);
    CHECK(harmonic_change(field_harmonics(pss), field_harmonics(doubled)) < 1e-6);
  }
  FloquetOptions starved;
  starved.max_harmonics = 5;
  CHECK_THROWS_AS(periodic_steady_state(p, symmetric(1700.0), space, starved), TruncationError);
}

TEST_CASE("third harmonic grows with the cube of the drive power") {
  const auto p = fig3_params();
  const auto space = build_space(5);
  std::vector<double> lx, ly;
  for (double power : {0.5, 1.0, 2.0, 4.0}) {
    const auto alpha = field_harmonics(periodic_steady_state(p, symmetric(power), 8, space));
    lx.push_back(std::log(power));
    ly.push_back(std::log(std::norm(alpha.at(3))));
  }
  const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
  double sxy = 0.0, sxx = 0.0;
  for (int k = 0; k < 4; ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  CHECK(sxy / sxx == doctest::Approx(3.0).epsilon(0.1 / 3));
}

TEST_CASE("harmonic balance matches time integration") {
  const auto p = fig3_params();
  const auto space = build_space(6);
  const auto pss = periodic_steady_state(p, symmetric(425.0), space);
  CHECK(verify_periodic_oracle(p, symmetric(425.0), pss).residual < 1e-4);
}

TEST_CASE("oracle deviation shrinks as the truncation is relaxed") {
  const auto p = fig3_params();
  const auto space = build_space(5);
  const auto drive = symmetric(1700.0);
  // Fixed line set, so that the comparison does not pick up new edge harmonics.
  auto deviation = [](const OracleReport& r) {
    double worst = 0.0;
    for (int n : {-3, -1, 1, 3}) {
      const cplx hb = r.harmonic_balance.count(n) ? r.harmonic_balance.at(n) : cplx(0.0);
      worst = std::max(worst, std::abs(hb - r.integrated.at(n)) / std::abs(r.integrated.at(n)));
    }
    return worst;
  };
  double previous = 1e300;
  for (int n_h : {3, 5, 9, 40}) {
    CAPTURE(n_h);
    const auto report = verify_periodic_oracle(p, drive, periodic_steady_state(p, drive, n_h, space));
    const double d = deviation(report);
    CHECK(d < previous);
    previous = d;
    if (n_h == 40) CHECK(report.residual < 1e-4);
  }
}

TEST_CASE("probe transmission under a pump") {
  SystemParams p;
  p.g = 0.63;
  p.gamma_tg = p.gamma_et / 100.0;
  const auto space = build_space(5);
  const Tone probe{0.0, 1.0};
  const double off = probe_transmission(p, {0.3, 0.0}, probe, space).transmission;
  CHECK(off < 0.05);
  for (double det : {-10.0, 10.0}) {
    const double far = probe_transmission(p, {det, 200.0}, probe, space).transmission;
    CHECK(far == doctest::Approx(off).epsilon(0.05));
  }
  const double on = probe_transmission(p, {0.3, 200.0}, probe, space).transmission;
  CHECK(on > 10.0 * off);
  CHECK_THROWS_AS(probe_transmission(p, {0.3, 1.0}, {0.0, 0.0}, space), InvalidArgument);
}
