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

#include "kgdsel/datagen.hpp"
#include "kgdsel/kernel.hpp"
#include "kgdsel/kgd.hpp"

namespace kgdsel {

struct ErrorReport {
  double l2 = 0.0;    // root mean squared error
  double linf = 0.0;  // max absolute error
  int n_test = 0;
};

ErrorReport test_errors(const Eigen::VectorXd& predictions, const Eigen::VectorXd& clean_targets);

struct BiasVarianceRecord {
  int t = 0;
  double bias = 0.0;
  double variance = 0.0;
  double total = 0.0;
};

/// Runs KGD on the noisy outputs and on the clean targets of `data` and
/// reports, for t = 0..config.max_iterations and in the test-sample L2 norm:
/// bias = |clean run - target|, variance = |noisy run - clean run| and
/// total = |noisy run - target|. Targets are `test.clean_targets` when
/// present, else `test.outputs`.
std::vector<BiasVarianceRecord> bias_variance_curves(const Dataset& data, const KernelSpec& spec,
                                                     const KgdConfig& config, const Dataset& test);

/// CSV columns: t,bias,variance,total
void write_bias_variance_csv(std::ostream& out, const std::vector<BiasVarianceRecord>& records);

}  // namespace kgdsel
