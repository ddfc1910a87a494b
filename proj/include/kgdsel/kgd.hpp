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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kgdsel/kernel.hpp"
#include "kgdsel/spectral.hpp"

namespace kgdsel {

struct KgdConfig {
  double step_size = 1.0;
  int max_iterations = 0;
  /// Keep c_t and K c_t for every t. Every selector except ESR needs them;
  /// turn off for large n to retain only the norm sequences.
  bool keep_coefficients = true;
  /// Require step_size * sigma_max / n <= 1 (instead of <= 2) and warn when
  /// step_size exceeds 1 / kappa.
  bool strict = false;
};

/// Throws std::invalid_argument when the step size is not admissible for a
/// Gram matrix with largest eigenvalue `sigma_max` over `n` samples. Returns
/// warnings (possibly empty).
std::vector<std::string> check_step_size(const KgdConfig& config, double sigma_max, int n, double kappa);

/// Per-iteration record of a KGD run started from c_0 = 0.
struct KgdTrace {
  int n = 0;
  int max_iterations = 0;
  double step_size = 0.0;

  /// c_t and fitted values K c_t for t = 0..max_iterations (empty in streaming mode).
  std::vector<Eigen::VectorXd> coefficients;
  std::vector<Eigen::VectorXd> fitted;
  /// c_{max_iterations}; always kept.
  Eigen::VectorXd final_coefficients;

  /// Index t in [0, max_iterations]: |f_{t+1} - f_t|_D and |f_{t+1} - f_t|_K.
  Eigen::VectorXd inc_empirical;
  Eigen::VectorXd inc_rkhs;
  /// Index t in [0, max_iterations]: |y - K c_t|_2.
  Eigen::VectorXd residual_l2;

  std::vector<std::string> warnings;

  bool has_coefficients() const { return !coefficients.empty(); }

  /// CSV columns: t,inc_empirical,inc_rkhs,residual_l2
  void write_csv(std::ostream& out) const;
};

/// One gradient step c - (step/n)(K c - y).
Eigen::VectorXd kgd_step(const Eigen::VectorXd& c, const KernelMatrix& matrix, const Eigen::VectorXd& y,
                         double step_size);

/// Runs t = 0..max_iterations. `sigma_max` is the largest eigenvalue of the
/// Gram matrix and is used for the step-size check.
KgdTrace run_kgd(const KernelMatrix& matrix, const Eigen::VectorXd& y, const KgdConfig& config, double sigma_max);

/// Same, with sigma_max estimated by power iteration.
KgdTrace run_kgd(const KernelMatrix& matrix, const Eigen::VectorXd& y, const KgdConfig& config);

/// Largest eigenvalue of a PSD matrix by power iteration.
double largest_eigenvalue(const Eigen::MatrixXd& psd);

/// Gradient-descent filter g_t(u) = (1 - (1 - step u)^t) / u, with g_t(0) = t * step.
double gd_filter(double u, double step_size, int t);

/// Closed-form c_t = (1/n) V diag(g_t(s_i / n)) V^T y.
Eigen::VectorXd spectral_solution(const Spectrum& spectrum, const Eigen::VectorXd& y, double step_size, int t);

/// sqrt(dc^T K (K/n + lambda I) dc) = sqrt(|df|_D^2 + lambda |df|_K^2).
double weighted_rkhs_norm(const KernelMatrix& matrix, const Eigen::VectorXd& dc, double lambda);

/// f(x'_j) = sum_i c_i K(x_i, x'_j).
Eigen::VectorXd predict(const KernelSpec& spec, const PointMatrix& train_inputs, const Eigen::VectorXd& c,
                        const PointMatrix& query_inputs);

}  // namespace kgdsel
