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

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "kgdsel/datagen.hpp"
#include "kgdsel/kernel.hpp"
#include "kgdsel/kgd.hpp"
#include "kgdsel/selectors.hpp"
#include "kgdsel/spectral.hpp"

namespace kgdsel {

/// Two-phase search: a coarse scan over {0} and {2^e : e in [min, max]},
/// then a uniform scan with spacing `final_step` between the neighbours of
/// the best coarse value. The spacing is doubled until at most
/// `max_refine_points` remain.
struct LogUniformSearch {
  int min_exponent = -6;
  int max_exponent = 7;
  double final_step = 1.0 / 1024.0;
  int max_refine_points = 4096;
  bool include_zero = true;
};

using ConstantCandidates = std::variant<ConstantGrid, LogUniformSearch>;

/// {step, 2 step, ..., count step}.
ConstantGrid uniform_grid(double step, int count);

struct ConstantScore {
  double constant = 0.0;
  int t = 0;
  double validation_mse = 0.0;
};

struct ConstantSearchResult {
  double best_constant = 0.0;
  int best_t = 0;
  double best_mse = 0.0;
  /// Every evaluated candidate, in evaluation order.
  std::vector<ConstantScore> scores;
};

using SelectForConstant = std::function<int(double constant)>;
using ValidationLoss = std::function<double(int t)>;

/// Minimizes validation loss over the candidates. Exact ties go to the
/// larger constant.
ConstantSearchResult search_constant(const ConstantCandidates& candidates, const SelectForConstant& select,
                                     const ValidationLoss& loss);

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> validation;
};

/// Draws `subsample_size` of `n` indices without replacement and splits them
/// with round(ratio * L) (clamped to [1, L - 1]) going to training.
SplitIndices subsample_split(int n, int subsample_size, double ratio, std::uint64_t seed);

/// Validation MSE of a KGD trace, memoized per t.
class ValidationScorer {
 public:
  ValidationScorer(const KernelSpec& spec, const Dataset& train, const Dataset& validation, const KgdTrace& trace);
  double mse(int t);

 private:
  Eigen::MatrixXd cross_;
  Eigen::VectorXd targets_;
  const KgdTrace* trace_;
  std::vector<std::optional<double>> cache_;
};

/// Gram matrix, spectrum, spectral tables and KGD trace of one dataset.
struct KgdProblem {
  KernelMatrix matrix;
  Spectrum spectrum;
  SpectralTables tables;
  KgdTrace trace;
};

/// Builds a KgdProblem; the tables cover t = 1..max(1, config.max_iterations).
KgdProblem solve_problem(const Dataset& data, const KernelSpec& spec, const KgdConfig& config, double delta);

/// Everything a comparison rule may read when asked for a stopping time.
struct RuleInputs {
  const Dataset& data;
  const KgdProblem& problem;
  double step_size;
  double delta;
  double kappa;
  double noise_std;  // estimated from the data
};

struct RuleOptions {
  double lepskii_q = 2.0;
  /// Comparison horizon for the balancing principle; 0 means t_max.
  int balancing_horizon = 0;
  /// BSP search horizon; 0 means t_max.
  int bsp_horizon = 0;
};

/// Stopping time of a constant-driven rule (bp, lp, esr, dp, aic, bic, bsp)
/// on one problem. Returns a callable so that per-problem precomputation is
/// shared across constants.
std::function<SelectionResult(double)> make_rule(Rule rule, const RuleInputs& inputs, const RuleOptions& options);

struct TunedOptions {
  ConstantCandidates constants = uniform_grid(0.05, 24);
  int subsample_size = 0;  // 0 means n
  double split_ratio = 0.7;
  double delta = 0.05;
  RuleOptions rule;
};

struct TunedResult {
  SelectionResult selection;
  Eigen::VectorXd coefficients;
  ConstantSearchResult search;
};

/// Tunes the rule's constant on a train/validation split of a subsample,
/// then applies the rule with that constant to the full data.
TunedResult tuned_select(Rule rule, const Dataset& data, const KernelSpec& spec, const KgdConfig& config,
                         const TunedOptions& options, std::uint64_t seed);

/// Same, but with the full-data problem supplied by the caller.
TunedResult tuned_select(Rule rule, const Dataset& data, const KgdProblem& full, const KernelSpec& spec,
                         const KgdConfig& config, const TunedOptions& options, std::uint64_t seed);

}  // namespace kgdsel
