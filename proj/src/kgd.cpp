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

#include "kgdsel/kgd.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kgdsel {

std::vector<std::string> check_step_size(const KgdConfig& config, double sigma_max, int n, double kappa) {
  if (!(config.step_size > 0.0) || !std::isfinite(config.step_size))
    throw std::invalid_argument("step size must be positive and finite");
  if (config.max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");
  const double radius = sigma_max / n;
  const double bound = config.strict ? 1.0 : 2.0;
  if (config.step_size * radius > bound * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "inadmissible step size " << config.step_size << ": sigma_max/n = " << radius << " requires step <= "
        << bound / radius << (config.strict ? " (strict mode)" : "");
    throw std::invalid_argument(msg.str());
  }
  std::vector<std::string> warnings;
  if (config.strict && config.step_size > 1.0 / kappa) {
    std::ostringstream msg;
    msg << "step size " << config.step_size << " exceeds 1/kappa = " << 1.0 / kappa;
    warnings.push_back(msg.str());
  }
  return warnings;
}

Eigen::VectorXd kgd_step(const Eigen::VectorXd& c, const KernelMatrix& matrix, const Eigen::VectorXd& y,
                         double step_size) {
  const Eigen::Index n = matrix.size();
  if (c.size() != n || y.size() != n)
    throw std::invalid_argument("kgd_step: coefficient/output length does not match the kernel matrix");
  return c - (step_size / static_cast<double>(n)) * (matrix.entries * c - y);
}

KgdTrace run_kgd(const KernelMatrix& matrix, const Eigen::VectorXd& y, const KgdConfig& config, double sigma_max) {
  const Eigen::Index n = matrix.size();
  if (n == 0) throw std::invalid_argument("run_kgd: empty kernel matrix");
  if (y.size() != n) throw std::invalid_argument("run_kgd: output length does not match the kernel matrix");

  KgdTrace trace;
  trace.warnings = check_step_size(config, sigma_max, static_cast<int>(n), matrix.kappa);
  trace.n = static_cast<int>(n);
  trace.max_iterations = config.max_iterations;
  trace.step_size = config.step_size;

  const int t_max = config.max_iterations;
  const auto len = static_cast<Eigen::Index>(t_max) + 1;
  trace.inc_empirical.resize(len);
  trace.inc_rkhs.resize(len);
  trace.residual_l2.resize(len);
  if (config.keep_coefficients) {
    trace.coefficients.reserve(static_cast<std::size_t>(len));
    trace.fitted.reserve(static_cast<std::size_t>(len));
  }

  const double scale = config.step_size / static_cast<double>(n);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd fit = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd dc(n);
  Eigen::VectorXd dfit(n);
  // c_{t+1} - c_t = (step/n)(y - K c_t), so K c_t is carried along and each
  // step costs one matrix-vector product.
  for (int t = 0; t <= t_max; ++t) {
    dc = y - fit;
    trace.residual_l2(t) = dc.norm();
    if (config.keep_coefficients) {
      trace.coefficients.push_back(c);
      trace.fitted.push_back(fit);
    }
    dc *= scale;
    dfit.noalias() = matrix.entries * dc;
    trace.inc_rkhs(t) = std::sqrt(std::max(0.0, dc.dot(dfit)));
    trace.inc_empirical(t) = dfit.norm() / sqrt_n;
    if (t < t_max) {
      c += dc;
      fit += dfit;
    }
  }
  trace.final_coefficients = std::move(c);
  return trace;
}

KgdTrace run_kgd(const KernelMatrix& matrix, const Eigen::VectorXd& y, const KgdConfig& config) {
  return run_kgd(matrix, y, config, largest_eigenvalue(matrix.entries));
}

double largest_eigenvalue(const Eigen::MatrixXd& psd) {
  const Eigen::Index n = psd.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  Eigen::VectorXd w(n);
  for (int iter = 0; iter < 300; ++iter) {
    w.noalias() = psd * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (std::abs(next - estimate) <= 1e-13 * std::abs(next)) return next;
    estimate = next;
  }
  // Slow convergence means a small spectral gap; fall back to a dense solve.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(psd, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double gd_filter(double u, double step_size, int t) {
  if (t <= 0) return 0.0;
  if (u == 0.0) return t * step_size;
  const double x = step_size * u;
  if (x < 1.0) return -std::expm1(t * std::log1p(-x)) / u;
  return (1.0 - std::pow(1.0 - x, t)) / u;
}

Eigen::VectorXd spectral_solution(const Spectrum& spectrum, const Eigen::VectorXd& y, double step_size, int t) {
  const Eigen::Index n = spectrum.size();
  if (y.size() != n) throw std::invalid_argument("spectral_solution: output length does not match spectrum");
  if (t < 0) throw std::invalid_argument("spectral_solution: t must be non-negative");
  Eigen::VectorXd z = spectrum.eigenvectors.transpose() * y;
  const double dn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) *= gd_filter(spectrum.eigenvalues(i) / dn, step_size, t) / dn;
  return spectrum.eigenvectors * z;
}

double weighted_rkhs_norm(const KernelMatrix& matrix, const Eigen::VectorXd& dc, double lambda) {
  if (dc.size() != matrix.size()) throw std::invalid_argument("weighted_rkhs_norm: length mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("weighted_rkhs_norm: lambda must be positive");
  const Eigen::VectorXd kdc = matrix.entries * dc;
  const double value = kdc.squaredNorm() / static_cast<double>(matrix.size()) + lambda * dc.dot(kdc);
  return std::sqrt(std::max(0.0, value));
}

Eigen::VectorXd predict(const KernelSpec& spec, const PointMatrix& train_inputs, const Eigen::VectorXd& c,
                        const PointMatrix& query_inputs) {
  if (c.size() != train_inputs.rows())
    throw std::invalid_argument("predict: coefficient length does not match the training set");
  return cross_kernel(spec, query_inputs, train_inputs) * c;
}

void KgdTrace::write_csv(std::ostream& out) const {
  out << "t,inc_empirical,inc_rkhs,residual_l2\n";
  const auto old = out.precision(17);
  for (int t = 0; t <= max_iterations; ++t)
    out << t << ',' << inc_empirical(t) << ',' << inc_rkhs(t) << ',' << residual_l2(t) << '\n';
  out.precision(old);
}

}  // namespace kgdsel
