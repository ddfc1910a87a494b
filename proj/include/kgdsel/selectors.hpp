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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kgdsel/datagen.hpp"
#include "kgdsel/kernel.hpp"
#include "kgdsel/kgd.hpp"
#include "kgdsel/spectral.hpp"

namespace kgdsel {

enum class Rule {
  kBaseline,       // bs
  kHoldout,        // ho
  kBalancing,      // bp
  kLepskii,        // lp
  kEarlyStopping,  // esr
  kDiscrepancy,    // dp
  kAic,            // aic
  kBic,            // bic
  kBsp,            // bsp
  kHss,            // hss
};

std::string rule_name(Rule rule);
std::optional<Rule> parse_rule(std::string_view name);

struct SelectionResult {
  Rule rule = Rule::kBsp;
  int t_selected = 0;
  std::optional<double> constant_used;
  /// The rule found no admissible t and fell back to its horizon.
  bool hit_horizon = false;
  std::map<std::string, double> diagnostics;
};

/// {"rule", "t", "constant", "hit_horizon", "diagnostics"}
nlohmann::json to_json(const SelectionResult& result);

/// Candidate constants, kept in descending order. All strictly positive and finite.
class ConstantGrid {
 public:
  explicit ConstantGrid(std::vector<double> values);

  /// {c0 q^k : k = 0..count}; defaults 100, 9/10, 20.
  static ConstantGrid geometric(double c0 = 100.0, double q = 0.9, int count = 20);

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

// --- Backward selection ----------------------------------------------------

/// t |f_{t+1} - f_t|_D + sqrt(t) |f_{t+1} - f_t|_K.
double bsp_statistic(const KgdTrace& trace, int t);

/// log^2(16 / delta), the factor a strict reading of the rule multiplies in.
double bsp_log_factor(double delta);

/// Theoretical lower bound 32 sqrt(2) (1 + step) (kappa M + gamma) for the
/// BSP constant. M and gamma describe the noise and are unobservable in
/// practice; this is a reference value, not a default.
double bsp_reference_constant(double step_size, double kappa, double noise_m, double noise_gamma);

/// Largest t in [1, horizon] with bsp_statistic(t) >= constant * W_t (times
/// bsp_log_factor when `include_log_factor`). Falls back to `horizon` with
/// hit_horizon = true when no t qualifies.
SelectionResult bsp_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int horizon,
                           bool include_log_factor = false);

// --- Comparison rules ------------------------------------------------------

/// argmin over t in [0, t_max] of |f_t - f_rho|_D^2; needs clean targets.
SelectionResult baseline_select(const KgdTrace& trace, const std::optional<Eigen::VectorXd>& clean_targets);

struct HoldoutResult {
  SelectionResult selection;
  std::vector<int> train_indices;
  std::vector<int> validation_indices;
  /// c_{t_HO} of the model trained on the training half.
  Eigen::VectorXd coefficients;
  std::vector<double> validation_curve;  // t = 0..t_max
};

/// 1:1 random split; picks argmin of validation MSE over t in [0, t_max].
HoldoutResult holdout_select(const Dataset& data, const KernelSpec& spec, const KgdConfig& config,
                             std::uint64_t seed);

/// log^4(16 / delta).
double bp_log_factor(double delta);

/// Smallest t in [1, horizon] with |f_t' - f_t|_D <= constant W_t' log^4(16/delta)
/// for every t' in (t, horizon]. `horizon` <= 0 means trace.max_iterations.
SelectionResult bp_select(const KgdTrace& trace, const SpectralTables& tables, double constant, double delta,
                          int horizon = 0);

/// Per-t worst ratio max_{t'>t} |f_t' - f_t|_D / (W_t' log^4(16/delta)),
/// so that bp_select(C) is the first t whose ratio is <= C. Built once and
/// reused across candidate constants.
class BalancingProfile {
 public:
  BalancingProfile(const KgdTrace& trace, const SpectralTables& tables, double delta, int horizon = 0);
  SelectionResult select(double constant) const;

 private:
  std::vector<double> worst_ratio_;  // index t - 1
  int horizon_ = 0;
};

/// Geometric times ceil(q^i / kappa^2), deduplicated, capped at
/// tables.t_max(), and filtered by
/// t <= max{n / (100 kappa^2 L^2), n / (3 kappa^2 (N_D(1/t) + 1))},
/// L = 2 log(8 log n / (delta log q)). Throws ConfigError when empty.
std::vector<int> lepskii_grid(const SpectralTables& tables, double q, double delta, double kappa);

/// sqrt(t) (N_D(1/t) + 1) / sqrt(n).
double lepskii_w_star(const SpectralTables& tables, int t);

/// Pairwise statistics over the Lepskii grid, reused across constants.
class LepskiiProfile {
 public:
  LepskiiProfile(const KgdTrace& trace, const SpectralTables& tables, double q, double delta, double kappa);
  SelectionResult select(double constant) const;
  const std::vector<int>& grid() const { return grid_; }

 private:
  std::vector<int> grid_;
  std::vector<double> w_star_;
  std::vector<std::vector<double>> stat_;  // stat_[i][j], j > i
};

/// Smallest grid time t whose weighted distance to every later grid time t'
/// is <= constant * W*_{t'}. Needs coefficients in the trace.
SelectionResult lp_select(const KgdTrace& trace, const SpectralTables& tables, const KernelMatrix& matrix,
                          double constant, double q, double delta, double kappa);

/// The constant suggested for the early-stopping rule, 2e.
double esr_default_constant();

/// First t in [1, t_max] with R(1/sqrt(t step)) > constant / (noise_std t step).
SelectionResult esr_select(const Spectrum& spectrum, int n, double step_size, double noise_std, double constant,
                           int t_max);

/// First t in [0, t_max] with |y - K c_t|_2 <= constant * noise_std * sqrt(n).
SelectionResult dp_select(const KgdTrace& trace, double noise_std_estimate, double constant, int n);

/// argmin over t in [1, t_max] of |y - K c_t|_2 + constant W_t.
SelectionResult aic_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int n);

/// argmin over t in [1, t_max] of |y - K c_t|_2 + constant W_t log n.
SelectionResult bic_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int n);

/// First-difference noise estimate sigma^2 = sum (y_(i+1) - y_(i))^2 / (2(n-1)),
/// ordering points by x for d = 1 and by a Morton (Z-order) key for d > 1.
double estimate_noise_std(const Eigen::VectorXd& y, const PointMatrix& inputs);

}  // namespace kgdsel
