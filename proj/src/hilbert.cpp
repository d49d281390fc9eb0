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

#include "polsim/hilbert.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "polsim/errors.hpp"

namespace polsim {

namespace {

void require_same_space(const SpaceConfig& a, const SpaceConfig& b, const char* where) {
  if (a != b) {
    throw InvalidArgument(std::string(where) + ": operands live on different spaces (n_fock " +
                          std::to_string(a.n_fock) + " vs " + std::to_string(b.n_fock) + ")");
  }
}

SparseMat canonical(SparseMat m) {
  m.prune(cplx(0.0, 0.0), 0.0);
  m.makeCompressed();
  return m;
}

}  // namespace

SpaceConfig build_space(int n_fock) {
  if (n_fock < 2) {
    throw InvalidArgument("build_space: n_fock must be >= 2, got " + std::to_string(n_fock));
  }
  return SpaceConfig{n_fock};
}

Op::Op(SpaceConfig space) : space_(space), matrix_(space.dim(), space.dim()) {}

Op::Op(SpaceConfig space, const std::vector<OpEntry>& entries)
    : space_(space), matrix_(space.dim(), space.dim()) {
  const int d = space.dim();
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.row < 0 || e.col < 0 || e.row >= d || e.col >= d) {
      throw InvalidArgument("Op: entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                            ") outside dimension " + std::to_string(d));
    }
    triplets.emplace_back(e.row, e.col, e.value);
  }
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_ = canonical(std::move(matrix_));
}

Op::Op(SpaceConfig space, SparseMat matrix) : space_(space), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space.dim() || matrix_.cols() != space.dim()) {
    throw InvalidArgument("Op: matrix shape does not match space dimension");
  }
  matrix_ = canonical(std::move(matrix_));
}

std::vector<OpEntry> Op::entries() const {
  std::vector<OpEntry> out;
  out.reserve(static_cast<size_t>(matrix_.nonZeros()));
  for (int r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMat::InnerIterator it(matrix_, r); it; ++it) {
      out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    }
  }
  return out;
}

bool Op::operator==(const Op& other) const {
  return space_ == other.space_ && entries() == other.entries();
}

Op zero_op(const SpaceConfig& space) { return Op(space); }

Op identity(const SpaceConfig& space) {
  std::vector<OpEntry> entries;
  for (int i = 0; i < space.dim(); ++i) entries.push_back({i, i, 1.0});
  return Op(space, entries);
}

Op annihilation(const SpaceConfig& space) {
  std::vector<OpEntry> entries;
  for (int level = 0; level < SpaceConfig::n_molecule_levels; ++level) {
    for (int n = 1; n < space.n_fock; ++n) {
      const int base = level * space.n_fock;
      entries.push_back({base + n - 1, base + n, std::sqrt(static_cast<double>(n))});
    }
  }
  return Op(space, entries);
}

Op creation(const SpaceConfig& space) { return dagger(annihilation(space)); }

Op number(const SpaceConfig& space) { return matmul(creation(space), annihilation(space)); }

Op transition(const SpaceConfig& space, int i, int j) {
  const int levels = SpaceConfig::n_molecule_levels;
  if (i < 0 || j < 0 || i >= levels || j >= levels) {
    throw InvalidArgument("transition: level index out of range (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
  }
  std::vector<OpEntry> entries;
  for (int n = 0; n < space.n_fock; ++n) {
    entries.push_back({i * space.n_fock + n, j * space.n_fock + n, 1.0});
  }
  return Op(space, entries);
}

Op product_op(const SpaceConfig& space, const DenseMat& molecule, const DenseMat& cavity) {
  const int levels = SpaceConfig::n_molecule_levels;
  if (molecule.rows() != levels || molecule.cols() != levels || cavity.rows() != space.n_fock ||
      cavity.cols() != space.n_fock) {
    throw InvalidArgument("product_op: factor shapes do not match the space");
  }
  std::vector<OpEntry> entries;
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      if (molecule(i, j) == cplx(0.0)) continue;
      for (int m = 0; m < space.n_fock; ++m) {
        for (int n = 0; n < space.n_fock; ++n) {
          const cplx v = molecule(i, j) * cavity(m, n);
          if (v != cplx(0.0)) entries.push_back({i * space.n_fock + m, j * space.n_fock + n, v});
        }
      }
    }
  }
  return Op(space, entries);
}

Op add(const Op& a, const Op& b) {
  require_same_space(a.space(), b.space(), "add");
  return Op(a.space(), SparseMat(a.matrix() + b.matrix()));
}

Op matmul(const Op& a, const Op& b) {
  require_same_space(a.space(), b.space(), "matmul");
  return Op(a.space(), SparseMat(a.matrix() * b.matrix()));
}

Op dagger(const Op& a) { return Op(a.space(), SparseMat(a.matrix().adjoint())); }

Op scale(cplx c, const Op& a) { return Op(a.space(), SparseMat(c * a.matrix())); }

double hermiticity_defect(const Op& a) {
  const SparseMat diff = a.matrix() - SparseMat(a.matrix().adjoint());
  double worst = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r) {
    for (SparseMat::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

std::string serialize(const Op& a) {
  std::string out = "n_fock " + std::to_string(a.space().n_fock) + "\n";
  char line[128];
  for (const auto& e : a.entries()) {
    std::snprintf(line, sizeof(line), "%d %d %.17g %.17g\n", e.row, e.col, e.value.real(),
                  e.value.imag());
    out += line;
  }
  return out;
}

Op deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string key;
  int n_fock = 0;
  if (!(in >> key >> n_fock) || key != "n_fock") {
    throw InvalidArgument("deserialize: missing n_fock header");
  }
  const SpaceConfig space = build_space(n_fock);
  std::vector<OpEntry> entries;
  int row = 0;
  int col = 0;
  double re = 0.0;
  double im = 0.0;
  while (in >> row >> col >> re >> im) entries.push_back({row, col, {re, im}});
  if (!in.eof()) throw InvalidArgument("deserialize: malformed entry line");
  return Op(space, entries);
}

DensityMatrix::DensityMatrix(SpaceConfig space, DenseMat matrix)
    : space_(space), matrix_(std::move(matrix)) {
  if (matrix_.rows() != space.dim() || matrix_.cols() != space.dim()) {
    throw InvalidArgument("DensityMatrix: shape does not match space dimension");
  }
}

DensityMatrix DensityMatrix::basis_state(const SpaceConfig& space, Level level, int n) {
  if (n < 0 || n >= space.n_fock) throw InvalidArgument("basis_state: Fock index out of range");
  DenseMat m = DenseMat::Zero(space.dim(), space.dim());
  const int k = space.index(level, n);
  m(k, k) = 1.0;
  return {space, m};
}

DensityMatrix DensityMatrix::coherent(const SpaceConfig& space, Level level, cplx alpha) {
  DenseVec psi = DenseVec::Zero(space.dim());
  cplx amp = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < space.n_fock; ++n) {
    if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
    psi(space.index(level, n)) = amp;
  }
  psi /= psi.norm();
  return {space, psi * psi.adjoint()};
}

DensityMatrix DensityMatrix::from_vector(const SpaceConfig& space, const DenseVec& vec_rho) {
  const int d = space.dim();
  if (vec_rho.size() != static_cast<long>(d) * d) {
    throw InvalidArgument("DensityMatrix::from_vector: length is not dim^2");
  }
  return {space, Eigen::Map<const DenseMat>(vec_rho.data(), d, d)};
}

DenseVec DensityMatrix::vectorized() const {
  return Eigen::Map<const DenseVec>(matrix_.data(), matrix_.size());
}

double DensityMatrix::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const DenseMat herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double DensityMatrix::population(Level level) const {
  double p = 0.0;
  for (int n = 0; n < space_.n_fock; ++n) {
    const int k = space_.index(level, n);
    p += matrix_(k, k).real();
  }
  return p;
}

void DensityMatrix::validate() const {
  if (hermiticity_defect() > 1e-10) throw InvalidArgument("DensityMatrix: not Hermitian");
  if (std::abs(trace() - cplx(1.0)) > 1e-9) throw InvalidArgument("DensityMatrix: trace != 1");
  if (min_eigenvalue() < -1e-8) throw InvalidArgument("DensityMatrix: negative eigenvalue");
}

cplx expectation(const Op& a, const DensityMatrix& rho) {
  if (a.space() != rho.space()) {
    throw InvalidArgument("expectation: operator and state live on different spaces");
  }
  // Tr(A rho) = sum_ij A_ij rho_ji
  cplx acc = 0.0;
  const SparseMat& m = a.matrix();
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMat::InnerIterator it(m, r); it; ++it) acc += it.value() * rho.matrix()(it.col(), r);
  }
  return acc;
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_space(a.space(), b.space(), "trace_distance");
  DenseMat diff = a.matrix() - b.matrix();
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<DenseMat> solver(diff, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace polsim
