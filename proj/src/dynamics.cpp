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

#include "polsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "polsim/errors.hpp"

namespace polsim {

namespace {

SuperOp kron(const SparseMat& a, const SparseMat& b) {
  SuperOp out = Eigen::kroneckerProduct(SuperOp(a), SuperOp(b));
  out.makeCompressed();
  return out;
}

SparseMat sparse_identity(int d) {
  SparseMat id(d, d);
  id.setIdentity();
  return id;
}

}  // namespace

SuperOp left_superop(const Op& a) {
  return kron(sparse_identity(a.space().dim()), a.matrix());
}

SuperOp commutator_superop(const Op& a) {
  const SparseMat id = sparse_identity(a.space().dim());
  const cplx i(0.0, 1.0);
  SuperOp out = -i * kron(id, a.matrix()) + i * kron(SparseMat(a.matrix().transpose()), id);
  out.prune(cplx(0.0), 0.0);
  return out;
}

namespace {

SuperOp dissipator(const std::vector<Op>& collapses, const SpaceConfig& space) {
  const int d = space.dim();
  const SparseMat id = sparse_identity(d);
  SuperOp out(d * d, d * d);
  for (const auto& c : collapses) {
    if (c.space() != space) throw InvalidArgument("build_liouvillian: collapse operator space mismatch");
    const SparseMat cdc = c.matrix().adjoint() * c.matrix();
    out += kron(SparseMat(c.matrix().conjugate()), c.matrix());
    out -= 0.5 * kron(id, cdc);
    out -= 0.5 * kron(SparseMat(cdc.transpose()), id);
  }
  return out;
}

}  // namespace

Liouvillian build_liouvillian(const Op& h, const std::vector<Op>& collapses) {
  if (hermiticity_defect(h) > 1e-12) {
    throw InvalidArgument("build_liouvillian: Hamiltonian is not Hermitian");
  }
  SuperOp l = commutator_superop(h) + dissipator(collapses, h.space());
  l.prune(cplx(0.0), 0.0);
  l.makeCompressed();
  return {h.space(), std::move(l)};
}

LiouvillianComponents liouvillian_components(const HamiltonianComponents& h,
                                             const std::vector<Op>& collapses) {
  LiouvillianComponents out;
  out.space = h.h_static.space();
  out.static_part = build_liouvillian(h.h_static, collapses).matrix;
  out.beat_ghz = h.beat_ghz;
  for (const auto& sb : h.h_plus) {
    auto add_to = [&](int m, const SuperOp& s) {
      auto it = out.sidebands.find(m);
      if (it == out.sidebands.end()) {
        out.sidebands.emplace(m, s);
      } else {
        it->second += s;
      }
    };
    add_to(sb.harmonic, commutator_superop(sb.op));
    add_to(-sb.harmonic, commutator_superop(dagger(sb.op)));
  }
  return out;
}

DenseVec solve_trace_replaced(const SuperOp& l, cplx shift, const DenseVec& rhs, cplx trace_value) {
  const long n = l.rows();
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<size_t>(l.nonZeros() + n + d));
  for (int col = 0; col < l.outerSize(); ++col) {
    for (SuperOp::InnerIterator it(l, col); it; ++it) {
      if (it.row() != 0) triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  }
  if (shift != cplx(0.0)) {
    for (int k = 1; k < n; ++k) triplets.emplace_back(k, k, shift);
  }
  for (int k = 0; k < d; ++k) triplets.emplace_back(0, k * d + k, 1.0);
  SuperOp a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  DenseVec b = rhs;
  b(0) = trace_value;

  Eigen::SparseLU<SuperOp, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw DegenerateSteadyState("trace-replaced Liouvillian is singular: " + lu.lastErrorMessage(), -1);
  }
  DenseVec x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw DegenerateSteadyState("trace-replaced solve failed", -1);
  }
  // One refinement step; the slow triplet rates make the system ill conditioned.
  x += lu.solve(b - a * x);
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((a * x - b).cwiseAbs().maxCoeff() > 1e-8 * scale * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw DegenerateSteadyState("trace-replaced system is numerically singular", -1);
  }
  // A consistent right-hand side hides a rank defect; probe the inverse with a
  // fixed generic vector instead.
  DenseVec probe(n);
  for (long k = 0; k < n; ++k) probe(k) = cplx(std::cos(1.0 + 0.7 * k), std::sin(0.3 + 1.3 * k));
  const DenseVec z = lu.solve(probe);
  double a_norm = 0.0;
  for (int col = 0; col < a.outerSize(); ++col) {
    double s = 0.0;
    for (SuperOp::InnerIterator it(a, col); it; ++it) s += std::abs(it.value());
    a_norm = std::max(a_norm, s);
  }
  if (!z.allFinite() || z.cwiseAbs().maxCoeff() * a_norm > 1e12) {
    throw DegenerateSteadyState("trace-replaced system is numerically singular", -1);
  }
  return x;
}

int null_space_dimension(const Liouvillian& l, double tol) {
  const DenseMat dense(l.matrix);
  Eigen::BDCSVD<DenseMat> svd(dense);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s(0));
  int count = 0;
  for (long k = 0; k < s.size(); ++k) count += s(k) < cutoff ? 1 : 0;
  return count;
}

DensityMatrix steady_state(const Liouvillian& l) {
  const long n = l.matrix.rows();
  DenseVec x;
  try {
    x = solve_trace_replaced(l.matrix, 0.0, DenseVec::Zero(n), 1.0);
  } catch (const DegenerateSteadyState&) {
    // Only the small cases are worth a dense rank computation.
    const int dim = n <= 1600 ? null_space_dimension(l) : -1;
    throw DegenerateSteadyState(
        "steady_state: stationary state is not unique (null-space dimension " +
            (dim > 0 ? std::to_string(dim) : std::string(">= 2")) + ")",
        dim);
  }
  return DensityMatrix::from_vector(l.space, x);
}

DensityMatrix steady_state(const SystemParams& params, const DriveSpec& drive,
                           const SpaceConfig& space, CavityFrame frame) {
  if (drive.is_bichromatic()) {
    throw InvalidArgument("steady_state: bichromatic drive has no stationary state; use floquet");
  }
  const auto h = hamiltonian_components(params, drive, space, frame);
  return steady_state(build_liouvillian(h.h_static, collapse_ops(params, space)));
}

double steady_state_residual(const Liouvillian& l, const DensityMatrix& rho) {
  return (l.matrix * rho.vectorized()).cwiseAbs().maxCoeff();
}

namespace {

// Dormand-Prince 5(4) tableau with Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

class Rhs {
 public:
  explicit Rhs(const LiouvillianComponents& l) : l_(l) {}

  void operator()(double t, const DenseVec& y, DenseVec& out) const {
    out.noalias() = l_.static_part * y;
    for (const auto& [m, s] : l_.sidebands) {
      const cplx phase = std::exp(cplx(0.0, -kTwoPi * m * l_.beat_ghz * t));
      out.noalias() += phase * (s * y);
    }
  }

 private:
  const LiouvillianComponents& l_;
};

}  // namespace

std::vector<DenseVec> integrate(const LiouvillianComponents& l, const DenseVec& y0,
                                const std::vector<double>& t_grid, double t0,
                                const IntegratorOptions& options) {
  if (t_grid.empty()) return {};
  if (t_grid.front() < t0) throw InvalidArgument("integrate: t_grid starts before t0");
  for (size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) throw InvalidArgument("integrate: t_grid must be strictly increasing");
  }

  const Rhs rhs(l);
  const long n = y0.size();
  std::vector<DenseVec> out;
  out.reserve(t_grid.size());

  DenseVec y = y0;
  DenseVec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  double t = t0;
  size_t next = 0;
  while (next < t_grid.size() && t_grid[next] == t) out.push_back(y), ++next;
  if (next == t_grid.size()) return out;

  rhs(t, y, k1);
  double h = std::min(options.initial_step, t_grid.back() - t);
  long steps = 0;
  while (next < t_grid.size()) {
    if (++steps > options.max_steps) throw StiffnessError("integrate: step budget exhausted");
    if (h < options.min_step) {
      throw StiffnessError("integrate: step size collapsed below " + std::to_string(options.min_step) +
                           " ns at t = " + std::to_string(t));
    }
    h = std::min(h, t_grid.back() - t);

    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, ynew, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (long i = 0; i < n; ++i) {
      const double sc = options.atol + options.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      const double r = std::abs(err(i)) / sc;
      sum += r * r;
    }
    const double norm = std::sqrt(sum / static_cast<double>(n));

    const bool accept = std::isfinite(norm) && norm <= 1.0;
    if (accept) {
      const double t_new = t + h;
      // Dense output on [t, t_new].
      if (t_grid[next] <= t_new) {
        const DenseVec ydiff = ynew - y;
        const DenseVec bspl = h * k1 - ydiff;
        const DenseVec r4 = ydiff - h * k7 - bspl;
        const DenseVec r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next < t_grid.size() && t_grid[next] <= t_new) {
          const double theta = (t_grid[next] - t) / h;
          const double theta1 = 1.0 - theta;
          out.push_back(y + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5))));
          ++next;
        }
      }
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);
    }
    double fac = 0.2;
    if (std::isfinite(norm)) fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h *= accept ? fac : std::min(fac, 1.0);
  }
  return out;
}

Trajectory evolve(const DensityMatrix& rho0, const HamiltonianComponents& h,
                  const std::vector<Op>& collapses, const std::vector<double>& t_grid,
                  const IntegratorOptions& options) {
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw InvalidArgument("evolve: t_grid must start at 0");
  }
  const auto l = liouvillian_components(h, collapses);
  const auto vecs = integrate(l, rho0.vectorized(), t_grid, 0.0, options);

  const SpaceConfig& space = rho0.space();
  const Op a = annihilation(space);
  const Op n_op = number(space);
  Trajectory traj;
  traj.times = t_grid;
  for (size_t k = 0; k < vecs.size(); ++k) {
    DensityMatrix rho = DensityMatrix::from_vector(space, vecs[k]);
    const double min_eig = rho.min_eigenvalue();
    if (min_eig < -1e-6) {
      throw PositivityError("evolve: density matrix lost positivity (min eigenvalue " +
                            std::to_string(min_eig) + ") at t = " + std::to_string(t_grid[k]) + " ns");
    }
    traj.observables["n"].push_back(expectation(n_op, rho));
    traj.observables["a"].push_back(expectation(a, rho));
    traj.observables["rho_ee"].push_back(rho.population(Level::e));
    traj.observables["rho_tt"].push_back(rho.population(Level::t));
    traj.states.push_back(std::move(rho));
  }
  return traj;
}

cplx Stationary::field_mean() const { return expectation(field, rho); }

double Stationary::photon_number() const {
  return expectation(matmul(dagger(field), field), rho).real();
}

Stationary stationary(const SystemParams& params, const DriveSpec& drive, const SpaceConfig& space,
                      CavityFrame frame) {
  if (drive.is_bichromatic()) throw InvalidArgument("stationary: monochromatic drive required");
  auto h = hamiltonian_components(params, drive, space, frame);
  auto collapses = collapse_ops(params, space);
  Liouvillian l = build_liouvillian(h.h_static, collapses);
  DensityMatrix rho = steady_state(l);
  Op field = h.field_operator();
  return {std::move(h), std::move(collapses), std::move(l), std::move(rho), std::move(field)};
}

std::vector<double> g2_correlation(const SystemParams& params, const DriveSpec& drive,
                                   const std::vector<double>& tau_grid, const SpaceConfig& space,
                                   const CorrelationOptions& options) {
  if (drive.is_bichromatic()) throw InvalidArgument("g2_correlation: monochromatic drive required");
  for (size_t k = 0; k < tau_grid.size(); ++k) {
    if (tau_grid[k] < 0.0 || (k > 0 && !(tau_grid[k] > tau_grid[k - 1]))) {
      throw InvalidArgument("g2_correlation: tau_grid must be non-negative and increasing");
    }
  }
  const Stationary ss = stationary(params, drive, space, options.frame);
  const double n_ss = ss.photon_number();
  if (n_ss < 1e-14) {
    throw UndefinedCorrelation("g2_correlation: steady-state photon number below 1e-14");
  }
  const SparseMat& a = ss.field.matrix();
  // Normalized to unit trace: under weak drive a rho a^dag is far below the
  // integrator's absolute tolerance.
  const DenseMat x0 = a * ss.rho.matrix() * a.adjoint() / n_ss;
  const DenseVec x0v = Eigen::Map<const DenseVec>(x0.data(), x0.size());
  const Op n_op = matmul(dagger(ss.field), ss.field);
  // Tr(N X) = sum_ij N_ji X_ij, i.e. a row vector acting on vec(X)
  const DenseMat n_dense = n_op.dense();
  const DenseVec n_row = Eigen::Map<const DenseVec>(DenseMat(n_dense.transpose()).data(), x0.size());
  const double norm = n_ss;

  std::vector<double> out;
  out.reserve(tau_grid.size());
  if (options.propagator == Propagator::eigen) {
    const DenseMat l_dense = DenseMat(ss.l.matrix);
    Eigen::ComplexEigenSolver<DenseMat> es(l_dense);
    if (es.info() != Eigen::Success) throw NumericalError("g2_correlation: eigendecomposition failed");
    const DenseMat& v = es.eigenvectors();
    const DenseVec coeff = v.partialPivLu().solve(x0v);
    const DenseVec weights = (n_row.transpose() * v).transpose().cwiseProduct(coeff);
    for (double tau : tau_grid) {
      cplx acc = 0.0;
      for (int k = 0; k < weights.size(); ++k) acc += weights(k) * std::exp(es.eigenvalues()(k) * tau);
      out.push_back(acc.real() / norm);
    }
    return out;
  }

  std::vector<double> grid = tau_grid;
  const bool prepend = grid.empty() || grid.front() != 0.0;
  if (prepend) grid.insert(grid.begin(), 0.0);
  LiouvillianComponents lc{space, ss.l.matrix, {}, 0.0};
  IntegratorOptions tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-13;
  const auto xs = integrate(lc, x0v, grid, 0.0, tight);
  for (size_t k = prepend ? 1 : 0; k < xs.size(); ++k) out.push_back((n_row.transpose() * xs[k]).value().real() / norm);
  return out;
}

EmissionSpectrum emission_spectrum(const SystemParams& params, const DriveSpec& drive,
                                   const std::vector<double>& freq_grid_ghz,
                                   const SpaceConfig& space, CavityFrame frame) {
  if (drive.is_bichromatic()) throw InvalidArgument("emission_spectrum: monochromatic drive required");
  const Stationary ss = stationary(params, drive, space, frame);

  const cplx alpha = ss.field_mean();
  EmissionSpectrum out;
  out.coherent_weight = std::norm(alpha);
  out.mean_photons = ss.photon_number();
  out.incoherent.assign(freq_grid_ghz.size(), 0.0);
  if (out.mean_photons - out.coherent_weight < 1e-15) return out;

  // x = (a - <a>) rho; y = -(L - i w)^{-1} x; S(nu) = 2 Re Tr(a^dag y)
  const DenseMat& rho = ss.rho.matrix();
  const DenseMat x = ss.field.matrix() * rho - alpha * rho;
  const DenseVec xv = Eigen::Map<const DenseVec>(x.data(), x.size());
  const Op a_dag = dagger(ss.field);
  for (size_t k = 0; k < freq_grid_ghz.size(); ++k) {
    const cplx shift(0.0, -kTwoPi * freq_grid_ghz[k]);
    const DenseVec y = solve_trace_replaced(ss.l.matrix, shift, -xv, 0.0);
    out.incoherent[k] = 2.0 * expectation(a_dag, DensityMatrix::from_vector(space, y)).real();
  }
  return out;
}

double damped_rabi_frequency(const SystemParams& params) {
  const double q = (params.kappa - params.gamma) / 4.0;
  const double disc = params.g * params.g - q * q;
  return disc > 0.0 ? 2.0 * std::sqrt(disc) : 0.0;
}

}  // namespace polsim
