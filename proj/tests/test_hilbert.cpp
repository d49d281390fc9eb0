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

#include <Eigen/Eigenvalues>

#include "polsim/errors.hpp"
#include "polsim/hilbert.hpp"
#include "test_support.hpp"

using namespace polsim;
using polsim::testing::max_abs;

TEST_CASE("build_space dimensions and cutoff floor") {
  CHECK(build_space(5).dim() == 15);
  CHECK(build_space(2).dim() == 6);
  CHECK_THROWS_AS(build_space(1), InvalidArgument);
}

TEST_CASE("annihilation operator ladder") {
  const auto space = build_space(4);
  const Op a = annihilation(space);
  const DenseMat m = a.dense();
  for (int level = 0; level < 3; ++level) {
    const auto lv = static_cast<Level>(level);
    CHECK(m(space.index(lv, 1), space.index(lv, 2)).real() == doctest::Approx(std::sqrt(2.0)));
  }
  // a |g,0> = 0
  DenseVec vac = DenseVec::Zero(space.dim());
  vac(space.index(Level::g, 0)) = 1.0;
  CHECK((m * vac).norm() == 0.0);

  // a^dag a has eigenvalues 0..n_fock-1, each three-fold
  Eigen::SelfAdjointEigenSolver<DenseMat> es(number(space).dense());
  for (int k = 0; k < space.dim(); ++k) {
    CHECK(es.eigenvalues()(k) == doctest::Approx(static_cast<double>(k / 3)));
  }
}

TEST_CASE("molecular transition operators") {
  const auto space = build_space(3);
  const Op s_ge = transition(space, 0, 1);
  for (int n = 0; n < space.n_fock; ++n) {
    DenseVec e = DenseVec::Zero(space.dim());
    e(space.index(Level::e, n)) = 1.0;
    DenseVec g = DenseVec::Zero(space.dim());
    g(space.index(Level::g, n)) = 1.0;
    CHECK(max_abs(s_ge.dense() * e - g) == 0.0);
  }
  const Op p_ee = transition(space, 1, 1);
  CHECK(matmul(p_ee, p_ee) == p_ee);
  CHECK(dagger(s_ge) == transition(space, 1, 0));
  CHECK_THROWS_AS(transition(space, 3, 0), InvalidArgument);
  CHECK_THROWS_AS(transition(space, 0, -1), InvalidArgument);
}

TEST_CASE("tensor algebra identities") {
  std::mt19937_64 rng(7);
  const auto space = build_space(3);
  const Op id = identity(space);
  for (int trial = 0; trial < 20; ++trial) {
    const Op a = polsim::testing::random_op(space, rng);
    const Op b = polsim::testing::random_op(space, rng);
    CHECK(matmul(id, a) == a);
    CHECK(dagger(dagger(a)) == a);
    CHECK(max_abs(dagger(matmul(a, b)).dense() - matmul(dagger(b), dagger(a)).dense()) < 1e-14);
    CHECK(add(a, scale(-1.0, a)).nonzeros() == 0);
  }
  CHECK_THROWS_AS(add(identity(build_space(2)), identity(build_space(3))), InvalidArgument);
  CHECK_THROWS_AS(matmul(identity(build_space(2)), identity(build_space(3))), InvalidArgument);
}

TEST_CASE("canonical form removes duplicates and zeros") {
  const auto space = build_space(2);
  const Op a(space, {{1, 2, 1.0}, {1, 2, 2.0}, {0, 0, 0.0}, {0, 3, {0.0, 1.0}}});
  const auto entries = a.entries();
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].row == 0);
  CHECK(entries[1].value == cplx(3.0));
  CHECK_THROWS_AS(Op(space, {{6, 0, 1.0}}), InvalidArgument);
}

TEST_CASE("factor products match products of factors") {
  std::mt19937_64 rng(11);
  const auto space = build_space(4);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMat m1 = polsim::testing::random_matrix(3, 3, rng);
    const DenseMat m2 = polsim::testing::random_matrix(3, 3, rng);
    const DenseMat f1 = polsim::testing::random_matrix(4, 4, rng);
    const DenseMat f2 = polsim::testing::random_matrix(4, 4, rng);
    const Op lhs = matmul(product_op(space, m1, f1), product_op(space, m2, f2));
    const Op rhs = product_op(space, m1 * m2, f1 * f2);
    CHECK(max_abs(lhs.dense() - rhs.dense()) < 1e-14 * std::max(1.0, max_abs(rhs.dense())));
  }
}

TEST_CASE("serialization reproduces entries exactly") {
  std::mt19937_64 rng(3);
  for (int n_fock : {2, 3, 6}) {
    const auto space = build_space(n_fock);
    const Op a = polsim::testing::random_op(space, rng, 30);
    CHECK(deserialize(serialize(a)) == a);
  }
  CHECK_THROWS_AS(deserialize("nfock 3\n"), InvalidArgument);
  CHECK_THROWS_AS(deserialize("n_fock 3\n0 1 x y\n"), InvalidArgument);
}

TEST_CASE("expectation values") {
  const auto space = build_space(4);
  const auto rho_e0 = DensityMatrix::basis_state(space, Level::e, 0);
  CHECK(expectation(transition(space, Level::e, Level::e), rho_e0) == cplx(1.0));
  const auto vac = DensityMatrix::basis_state(space, Level::g, 0);
  CHECK(expectation(number(space), vac) == cplx(0.0));
  CHECK_THROWS_AS(expectation(number(build_space(3)), vac), InvalidArgument);

  // Im Tr(A rho) vanishes for Hermitian A on valid states.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = polsim::testing::random_density(space, rng);
    const DenseMat h = polsim::testing::random_hermitian(space.dim(), rng);
    std::vector<OpEntry> entries;
    for (int i = 0; i < space.dim(); ++i) {
      for (int j = 0; j < space.dim(); ++j) entries.push_back({i, j, h(i, j)});
    }
    CHECK(std::abs(expectation(Op(space, entries), rho).imag()) < 1e-12);
  }
}

TEST_CASE("density matrix invariants") {
  const auto space = build_space(3);
  std::mt19937_64 rng(9);
  const DensityMatrix rho = polsim::testing::random_density(space, rng);
  CHECK_NOTHROW(rho.validate());
  CHECK(rho.population(Level::g) + rho.population(Level::e) + rho.population(Level::t) ==
        doctest::Approx(1.0));

  const DensityMatrix bad(space, 2.0 * rho.matrix());
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  const auto coh = DensityMatrix::coherent(build_space(12), Level::g, 1.0);
  CHECK(expectation(number(coh.space()), coh).real() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(trace_distance(rho, rho) < 1e-14);
}
