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

// Operator algebra on |molecule> (x) |Fock>, molecule in {g, e, t}.
//
// Basis ordering: index = level * n_fock + n, i.e. the molecular factor is
// the slow index. Level ordering is fixed as g = 0, e = 1, t = 2.

#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace polsim {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using SparseColMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor>;
using DenseMat = Eigen::MatrixXcd;
using DenseVec = Eigen::VectorXcd;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class Level : int { g = 0, e = 1, t = 2 };

struct SpaceConfig {
  static constexpr int n_molecule_levels = 3;
  int n_fock = 2;

  int dim() const { return n_molecule_levels * n_fock; }
  int index(Level level, int n) const { return static_cast<int>(level) * n_fock + n; }
  bool operator==(const SpaceConfig&) const = default;
};

SpaceConfig build_space(int n_fock);

struct OpEntry {
  int row;
  int col;
  cplx value;
  bool operator==(const OpEntry&) const = default;
};

/// Sparse operator in canonical form: row-major, sorted, no duplicate
/// (row, col) pairs and no stored exact zeros.
class Op {
 public:
  explicit Op(SpaceConfig space);
  Op(SpaceConfig space, const std::vector<OpEntry>& entries);
  Op(SpaceConfig space, SparseMat matrix);

  const SpaceConfig& space() const { return space_; }
  const SparseMat& matrix() const { return matrix_; }
  DenseMat dense() const { return DenseMat(matrix_); }
  std::vector<OpEntry> entries() const;
  long nonzeros() const { return matrix_.nonZeros(); }

  bool operator==(const Op& other) const;

 private:
  SpaceConfig space_;
  SparseMat matrix_;
};

Op zero_op(const SpaceConfig& space);
Op identity(const SpaceConfig& space);
/// Cavity annihilation operator a (identity on the molecule).
Op annihilation(const SpaceConfig& space);
Op creation(const SpaceConfig& space);
Op number(const SpaceConfig& space);
/// |i><j| on the molecule, identity on the cavity.
Op transition(const SpaceConfig& space, int i, int j);
inline Op transition(const SpaceConfig& space, Level i, Level j) {
  return transition(space, static_cast<int>(i), static_cast<int>(j));
}
/// Kronecker product molecule (3x3) (x) cavity (n_fock x n_fock).
Op product_op(const SpaceConfig& space, const DenseMat& molecule, const DenseMat& cavity);

Op add(const Op& a, const Op& b);
Op matmul(const Op& a, const Op& b);
Op dagger(const Op& a);
Op scale(cplx c, const Op& a);

inline Op operator+(const Op& a, const Op& b) { return add(a, b); }
inline Op operator-(const Op& a, const Op& b) { return add(a, scale(-1.0, b)); }
inline Op operator*(const Op& a, const Op& b) { return matmul(a, b); }
inline Op operator*(cplx c, const Op& a) { return scale(c, a); }

/// Max-norm of A - A^dagger.
double hermiticity_defect(const Op& a);

/// Line-oriented text form: "n_fock <n>" then "row col re im" per entry,
/// values printed with round-trip precision.
std::string serialize(const Op& a);
Op deserialize(const std::string& text);

/// Dense density matrix. Construction does not validate; call validate()
/// or check the individual invariants.
class DensityMatrix {
 public:
  DensityMatrix(SpaceConfig space, DenseMat matrix);

  static DensityMatrix basis_state(const SpaceConfig& space, Level level, int n);
  /// |level> (x) coherent state of amplitude alpha, renormalized within the cutoff.
  static DensityMatrix coherent(const SpaceConfig& space, Level level, cplx alpha);
  static DensityMatrix from_vector(const SpaceConfig& space, const DenseVec& vec_rho);

  const SpaceConfig& space() const { return space_; }
  const DenseMat& matrix() const { return matrix_; }
  /// Column-stacked vec(rho).
  DenseVec vectorized() const;

  cplx trace() const { return matrix_.trace(); }
  double hermiticity_defect() const;
  double min_eigenvalue() const;
  /// Population of a molecular level, traced over the cavity.
  double population(Level level) const;

  /// Throws InvalidArgument unless Hermitian (1e-10), unit trace (1e-9)
  /// and positive (-1e-8).
  void validate() const;

 private:
  SpaceConfig space_;
  DenseMat matrix_;
};

cplx expectation(const Op& a, const DensityMatrix& rho);
/// Trace-norm distance ||a - b||_1 for Hermitian arguments.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace polsim
