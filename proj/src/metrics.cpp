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

#include "kgdsel/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "kgdsel/csv.hpp"
#include "kgdsel/errors.hpp"

namespace kgdsel {

namespace {

double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace

ErrorReport test_errors(const Eigen::VectorXd& predictions, const Eigen::VectorXd& clean_targets) {
  if (predictions.size() != clean_targets.size())
    throw std::invalid_argument("test_errors: predictions and targets differ in length");
  if (predictions.size() == 0) throw std::invalid_argument("test_errors: empty test set");
  const Eigen::VectorXd dev = predictions - clean_targets;
  return {rms(dev), dev.cwiseAbs().maxCoeff(), static_cast<int>(dev.size())};
}

std::vector<BiasVarianceRecord> bias_variance_curves(const Dataset& data, const KernelSpec& spec,
                                                     const KgdConfig& config, const Dataset& test) {
  if (!data.clean_targets) throw UnsupportedOperation("bias/variance curves need clean training targets");
  if (test.size() == 0) throw std::invalid_argument("bias/variance curves need a non-empty test set");
  const Eigen::VectorXd& target = test.clean_targets ? *test.clean_targets : test.outputs;

  const KernelMatrix matrix = build_kernel_matrix(spec, data.inputs);
  KgdConfig cfg = config;
  cfg.keep_coefficients = true;
  const double sigma_max = largest_eigenvalue(matrix.entries);
  const KgdTrace noisy = run_kgd(matrix, data.outputs, cfg, sigma_max);
  const KgdTrace clean = run_kgd(matrix, *data.clean_targets, cfg, sigma_max);
  const Eigen::MatrixXd cross = cross_kernel(spec, test.inputs, data.inputs);

  std::vector<BiasVarianceRecord> out;
  out.reserve(noisy.coefficients.size());
  for (int t = 0; t <= cfg.max_iterations; ++t) {
    const auto k = static_cast<std::size_t>(t);
    const Eigen::VectorXd f_noisy = cross * noisy.coefficients[k];
    const Eigen::VectorXd f_clean = cross * clean.coefficients[k];
    out.push_back({t, rms(f_clean - target), rms(f_noisy - f_clean), rms(f_noisy - target)});
  }
  return out;
}

void write_bias_variance_csv(std::ostream& out, const std::vector<BiasVarianceRecord>& records) {
  out << "t,bias,variance,total\n";
  for (const auto& r : records)
    out << r.t << ',' << csv::format_double(r.bias) << ',' << csv::format_double(r.variance) << ','
        << csv::format_double(r.total) << '\n';
}

}  // namespace kgdsel
