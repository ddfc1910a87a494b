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

#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "kgdsel/kernel.hpp"

namespace kgdsel {

/// Eigenpairs of a kernel matrix, eigenvalues sorted in decreasing order.
/// Eigenvalues inside the PSD tolerance band are clipped to zero.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // column i pairs with eigenvalues(i)

  Eigen::Index size() const { return eigenvalues.size(); }
  double max_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
};

/// Relative PSD tolerance: min eigenvalue must be >= -kPsdTolerance * max eigenvalue.
inline constexpr double kPsdTolerance = 1e-8;

/// Throws NumericError on non-convergence or when the matrix is not PSD
/// within tolerance.
Spectrum eigendecompose(const KernelMatrix& matrix);
Spectrum eigendecompose(const Eigen::MatrixXd& symmetric);

/// N_D(lambda) = sum_i s_i / (s_i + lambda n), s_i eigenvalues of the Gram matrix.
double empirical_effective_dimension(const Spectrum& spectrum, int n, double lambda);

/// Variance proxy W_{D,t}.
double variance_proxy_w(const Spectrum& spectrum, int n, int t);

/// Concentration term U_{D,t,delta}; max{1, N_D} is applied inside the log.
double concentration_u(const Spectrum& spectrum, int n, int t, double delta);

/// max{(kappa^2 + 1)/3, 2 sqrt(kappa^2 + 1)}.
double concentration_constant(double kappa);

struct SuddenStopHorizon {
  int value = 1;
  bool bound_violated_at_one = false;  // even t = 1 fails; value defaults to 1
};

/// Largest t in [1, n] with C1* U_{D,t,delta} <= 1/2.
SuddenStopHorizon sudden_stop_horizon(const Spectrum& spectrum, int n, double kappa, double delta);

/// Local empirical Rademacher complexity [(1/n) sum_i min(s_i / n, eps^2)]^{1/2}.
/// The eigenvalues are rescaled to operator scale (Gram / n).
double local_rademacher(const Spectrum& spectrum, int n, double epsilon);

/// All per-t spectral scalars for t = 1..t_max, computed in one pass.
class SpectralTables {
 public:
  SpectralTables(const Spectrum& spectrum, int n, double kappa, double delta, int t_max);

  int n() const { return n_; }
  int t_max() const { return t_max_; }
  double delta() const { return delta_; }
  double kappa() const { return kappa_; }

  // 1-based t in [1, t_max].
  double effective_dimension(int t) const { return nd_.at(static_cast<std::size_t>(t - 1)); }
  double w(int t) const { return w_.at(static_cast<std::size_t>(t - 1)); }
  double u(int t) const { return u_.at(static_cast<std::size_t>(t - 1)); }

  /// Clamped to [1, t_max].
  int sudden_stop() const { return sudden_stop_; }
  bool sudden_stop_degenerate() const { return sudden_stop_degenerate_; }

  /// CSV columns: t,N_D,W,U
  void write_csv(std::ostream& out) const;

 private:
  int n_;
  int t_max_;
  double delta_;
  double kappa_;
  std::vector<double> nd_;
  std::vector<double> w_;
  std::vector<double> u_;
  int sudden_stop_ = 1;
  bool sudden_stop_degenerate_ = false;
};

}  // namespace kgdsel
