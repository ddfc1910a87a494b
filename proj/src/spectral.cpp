// Copyright 2026 The kgdsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgdsel/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kgdsel/errors.hpp"

namespace kgdsel {

namespace {

double effective_dimension_raw(const Eigen::VectorXd& eigenvalues, double lambda_n) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double s = eigenvalues(i);
    if (s > 0.0) sum += s / (s + lambda_n);
  }
  return sum;
}

double w_from_nd(double nd, double n, double t) {
  return std::sqrt(t) / n + std::sqrt(std::max(nd, 1.0)) * (1.0 + std::sqrt(t / n)) / std::sqrt(n);
}

double u_from_nd(double nd, double n, double t, double delta) {
  const double inner = 1.0 + 8.0 * std::log(64.0 / delta) * std::sqrt(t / n) * std::max(1.0, nd);
  const double a = std::log(inner) * t / n;
  return a + std::sqrt(a);
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence level delta must lie in (0, 1)");
}

void check_n(const Spectrum& spectrum, int n) {
  if (n < 1) throw std::invalid_argument("sample count must be positive");
  if (spectrum.size() != n) throw std::invalid_argument("sample count does not match spectrum size");
}

}  // namespace

Spectrum eigendecompose(const KernelMatrix& matrix) { return eigendecompose(matrix.entries); }

Spectrum eigendecompose(const Eigen::MatrixXd& symmetric) {
  if (symmetric.rows() != symmetric.cols()) throw std::invalid_argument("eigendecompose needs a square matrix");
  const Eigen::Index n = symmetric.rows();
  if (n == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigendecomposition did not converge (n=" << n << ", frobenius norm=" << symmetric.norm()
        << ", max |entry|=" << symmetric.cwiseAbs().maxCoeff() << ")";
    throw NumericError(msg.str());
  }
  // Eigen returns ascending order.
  Spectrum out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  const double top = std::max(out.eigenvalues(0), 0.0);
  const double bottom = out.eigenvalues(n - 1);
  if (bottom < -kPsdTolerance * top && bottom < -1e-300) {
    std::ostringstream msg;
    msg << "matrix is not positive semi-definite: min eigenvalue " << bottom << ", max eigenvalue " << top
        << ", condition estimate " << (bottom != 0.0 ? std::abs(top / bottom) : 0.0);
    throw NumericError(msg.str());
  }
  out.eigenvalues = out.eigenvalues.cwiseMax(0.0);
  return out;
}

double empirical_effective_dimension(const Spectrum& spectrum, int n, double lambda) {
  check_n(spectrum, n);
  if (!(lambda > 0.0)) throw std::invalid_argument("regularization parameter lambda must be positive");
  return effective_dimension_raw(spectrum.eigenvalues, lambda * n);
}

double variance_proxy_w(const Spectrum& spectrum, int n, int t) {
  check_n(spectrum, n);
  if (t < 1) throw std::invalid_argument("iteration index t must be >= 1");
  const double nd = effective_dimension_raw(spectrum.eigenvalues, static_cast<double>(n) / t);
  return w_from_nd(nd, n, t);
}

double concentration_u(const Spectrum& spectrum, int n, int t, double delta) {
  check_n(spectrum, n);
  check_delta(delta);
  if (t < 1) throw std::invalid_argument("iteration index t must be >= 1");
  const double nd = effective_dimension_raw(spectrum.eigenvalues, static_cast<double>(n) / t);
  return u_from_nd(nd, n, t, delta);
}

double concentration_constant(double kappa) {
  const double k2 = kappa * kappa + 1.0;
  return std::max(k2 / 3.0, 2.0 * std::sqrt(k2));
}

SuddenStopHorizon sudden_stop_horizon(const Spectrum& spectrum, int n, double kappa, double delta) {
  check_n(spectrum, n);
  check_delta(delta);
  const double c1 = concentration_constant(kappa);
  // U is non-decreasing in t, so the admissible set is a prefix of [1, n].
  int last_ok = 0;
  for (int t = 1; t <= n; ++t) {
    const double nd = effective_dimension_raw(spectrum.eigenvalues, static_cast<double>(n) / t);
    if (c1 * u_from_nd(nd, n, t, delta) > 0.5) break;
    last_ok = t;
  }
  if (last_ok == 0) return {1, true};
  return {last_ok, false};
}

double local_rademacher(const Spectrum& spectrum, int n, double epsilon) {
  check_n(spectrum, n);
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double eps2 = epsilon * epsilon;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) sum += std::min(spectrum.eigenvalues(i) / n, eps2);
  return std::sqrt(sum / n);
}

SpectralTables::SpectralTables(const Spectrum& spectrum, int n, double kappa, double delta, int t_max)
    : n_(n), t_max_(t_max), delta_(delta), kappa_(kappa) {
  check_n(spectrum, n);
  check_delta(delta);
  if (t_max < 1) throw std::invalid_argument("spectral tables need t_max >= 1");
  nd_.resize(static_cast<std::size_t>(t_max));
  w_.resize(nd_.size());
  u_.resize(nd_.size());
  for (int t = 1; t <= t_max; ++t) {
    const double nd = effective_dimension_raw(spectrum.eigenvalues, static_cast<double>(n) / t);
    const auto k = static_cast<std::size_t>(t - 1);
    nd_[k] = nd;
    w_[k] = w_from_nd(nd, n, t);
    u_[k] = u_from_nd(nd, n, t, delta);
  }
  const auto horizon = sudden_stop_horizon(spectrum, n, kappa, delta);
  sudden_stop_ = std::min(horizon.value, t_max);
  sudden_stop_degenerate_ = horizon.bound_violated_at_one;
}

void SpectralTables::write_csv(std::ostream& out) const {
  out << "t,N_D,W,U\n";
  const auto old = out.precision(17);
  for (int t = 1; t <= t_max_; ++t) out << t << ',' << effective_dimension(t) << ',' << w(t) << ',' << u(t) << '\n';
  out.precision(old);
}

}  // namespace kgdsel
