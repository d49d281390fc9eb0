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

#include <algorithm>
#include <cmath>
#include <random>

#include "polsim/dynamics.hpp"
#include "polsim/errors.hpp"
#include "polsim/model.hpp"
#include "test_support.hpp"

using namespace polsim;
using polsim::testing::max_abs;

namespace {

// Independent constants for the flux oracle.
constexpr double kPlanck = 6.62607015e-34;
constexpr double kLightSpeed = 299792458.0;

double flux_oracle(double power_pw, double lambda_nm) {
  return power_pw * 1e-12 * lambda_nm * 1e-9 / (kPlanck * kLightSpeed);
}

const CollapseChannel* find_channel(const std::vector<CollapseChannel>& set, const std::string& name) {
  for (const auto& c : set) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// Rate encoded in a channel whose nonzero entries all have modulus sqrt(rate) * ladder factor.
double channel_rate(const CollapseChannel& c, const SpaceConfig& space) {
  const DenseMat m = c.op.dense();
  const DenseMat cdc = m.adjoint() * m;
  return cdc.trace().real() / space.n_fock / kTwoPi;
}

}  // namespace

TEST_CASE("default collapse set splits zero-phonon and red channels") {
  const auto space = build_space(3);
  SystemParams p;
  const auto set = collapse_set(p, space);
  CHECK(find_channel(set, "dephasing") == nullptr);
  const auto* zpl = find_channel(set, "zpl");
  const auto* red = find_channel(set, "red");
  REQUIRE(zpl != nullptr);
  REQUIRE(red != nullptr);
  CHECK(channel_rate(*zpl, space) == doctest::Approx(0.012).epsilon(1e-12));
  CHECK(channel_rate(*red, space) == doctest::Approx(0.028).epsilon(1e-12));
  const auto* cav = find_channel(set, "cavity");
  REQUIRE(cav != nullptr);
  // a^dag a summed over three molecular copies: 3 * (0 + 1 + 2) for n_fock = 3.
  const DenseMat m = cav->op.dense();
  CHECK((m.adjoint() * m).trace().real() / kTwoPi == doctest::Approx(1.3 * 9).epsilon(1e-12));
}

TEST_CASE("branching one leaves a single molecular decay channel") {
  const auto space = build_space(2);
  SystemParams p;
  p.branching_beta = 1.0;
  const auto set = collapse_set(p, space);
  CHECK(find_channel(set, "red") == nullptr);
  REQUIRE(find_channel(set, "zpl") != nullptr);
  CHECK(channel_rate(*find_channel(set, "zpl"), space) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("dephasing channel appears with rate 2 gamma_deph") {
  const auto space = build_space(2);
  SystemParams p;
  p.gamma_deph = 0.01;
  const auto set = collapse_set(p, space);
  const auto* d = find_channel(set, "dephasing");
  REQUIRE(d != nullptr);
  CHECK(channel_rate(*d, space) == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("each collapse operator acts on a single molecular block") {
  const auto space = build_space(3);
  SystemParams p;
  p.gamma_deph = 0.01;
  const int nf = space.n_fock;
  for (const auto& c : collapse_set(p, space)) {
    const DenseMat m = c.op.dense();
    int blocks = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (max_abs(m.block(i * nf, j * nf, nf, nf)) > 0.0) ++blocks;
      }
    }
    // The cavity channel is diagonal in the molecule (three blocks).
    CHECK(blocks == (c.name == "cavity" ? 3 : 1));
  }
}

TEST_CASE("undriven resonant Hamiltonian is pure Jaynes-Cummings") {
  const auto space = build_space(4);
  SystemParams p;
  const auto h = hamiltonian_components(p, DriveSpec::monochromatic(0.0, 0.0), space);
  CHECK(h.h_plus.empty());
  const Op a = annihilation(space);
  const Op sge = transition(space, Level::g, Level::e);
  const Op jc = scale(kTwoPi * p.g, creation(space) * sge + a * dagger(sge));
  CHECK(max_abs(h.h_static.dense() - jc.dense()) < 1e-12);
}

TEST_CASE("symmetric tones give beat 0.15 GHz and sidebands at +-1") {
  const auto space = build_space(3);
  SystemParams p;
  const auto drive = DriveSpec::bichromatic({-0.15, 100.0}, {0.15, 100.0});
  const auto h = hamiltonian_components(p, drive, space);
  CHECK(h.beat_ghz == doctest::Approx(0.15));
  CHECK(h.frame_ghz == doctest::Approx(0.0));
  REQUIRE(h.h_plus.size() == 2);
  std::vector<int> k{h.h_plus[0].harmonic, h.h_plus[1].harmonic};
  std::sort(k.begin(), k.end());
  CHECK(k == std::vector<int>{-1, 1});

  const double period = 1.0 / h.beat_ghz;
  for (double t : {0.0, period / 4, period / 2}) {
    const DenseMat ht = hamiltonian_at(h, t);
    CHECK(max_abs(ht - ht.adjoint()) < 1e-12);
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DenseMat ht = hamiltonian_at(h, u(rng));
    worst = std::max(worst, max_abs(ht - ht.adjoint()));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("displaced frame Hamiltonian is Hermitian and carries the classical field") {
  const auto space = build_space(3);
  SystemParams p;
  const auto drive = DriveSpec::bichromatic({-0.15, 425.0}, {0.15, 425.0});
  const auto h = hamiltonian_components(p, drive, space, CavityFrame::displaced);
  CHECK(h.coherent_field.size() == 2);
  for (double t : {0.0, 0.7, 2.3}) {
    const DenseMat ht = hamiltonian_at(h, t);
    CHECK(max_abs(ht - ht.adjoint()) < 1e-12);
  }
  // Empty-cavity response of one tone: beta = -i eta / (kappa/2 - i d) at d = +-beat.
  const double eta = drive_amplitude(425.0, p);
  const double k2 = kTwoPi * p.kappa / 2;
  const cplx expected = cplx(0, -1) * eta / cplx(k2, -kTwoPi * 0.15);
  CHECK(std::abs(h.coherent_field.at(1) - expected) < 1e-12 * std::abs(expected));
}

TEST_CASE("cooperativity") {
  CHECK(cooperativity(0.765, 1.3, 0.04) == doctest::Approx(45.0).epsilon(0.1 / 45));
  CHECK(cooperativity(0.63, 1.3, 0.04) == doctest::Approx(30.53).epsilon(1e-3));
  CHECK(cooperativity(0.0, 1.3, 0.04) == 0.0);
  CHECK(cooperativity(2.0 * 0.63, 1.3, 0.04) == doctest::Approx(4.0 * cooperativity(0.63, 1.3, 0.04)));
  CHECK_THROWS_AS(cooperativity(0.5, 0.0, 0.04), InvalidArgument);
}

TEST_CASE("power to flux and photons per lifetime") {
  CHECK(power_to_flux(425.0, 785.0) == doctest::Approx(1.68e9).epsilon(0.01));
  CHECK(power_to_flux(425.0, 785.0) == doctest::Approx(flux_oracle(425.0, 785.0)).epsilon(1e-12));
  CHECK(power_to_flux(1700.0, 785.0) == doctest::Approx(6.72e9).epsilon(0.01));
  CHECK(power_to_flux(0.0, 785.0) == 0.0);
  CHECK(photons_per_lifetime(1.68e9, 1.3) == doctest::Approx(0.21).epsilon(0.05));
  CHECK(photons_per_lifetime(0.0, 1.3) == 0.0);
  CHECK(power_for_photons_per_lifetime(0.24, 1.3, 785.0) == doctest::Approx(496.0).epsilon(0.01));
  CHECK(0.24 * kTwoPi * 1.3e9 == doctest::Approx(1.96e9).epsilon(0.01));
}

TEST_CASE("drive amplitude calibration") {
  SystemParams p;
  CHECK(drive_amplitude(0.0, p) == 0.0);
  CHECK(drive_amplitude(400.0, p) == doctest::Approx(2.0 * drive_amplitude(100.0, p)).epsilon(1e-12));

  p.g = 0.0;
  p.eta_cpl = 0.8;
  const auto space = build_space(10);
  const double power = 50.0;
  const auto rho = steady_state(p, DriveSpec::monochromatic(0.0, power), space);
  const double n = expectation(number(space), rho).real();
  const double kappa_ang = kTwoPi * p.kappa * 1e9;  // 1/s
  CHECK(kappa_ang * n / power_to_flux(power, p.lambda_nm) == doctest::Approx(p.eta_cpl).epsilon(1e-6));
}

TEST_CASE("triplet ratio round trip and parameter validation") {
  SystemParams p;
  const auto q = p.with_triplet_ratio(100.0);
  CHECK(q.gamma_et == p.gamma_et);
  CHECK(q.triplet_ratio() == doctest::Approx(100.0));
  CHECK(p.with_triplet_ratio(0.0).gamma_et == 0.0);
  p.kappa = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK_THROWS_AS(DriveSpec::bichromatic({0.1, 1.0}, {0.1, 1.0}).validate(), InvalidArgument);
}
