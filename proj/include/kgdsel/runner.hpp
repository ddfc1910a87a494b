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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgdsel/datagen.hpp"
#include "kgdsel/hss.hpp"
#include "kgdsel/metrics.hpp"
#include "kgdsel/selectors.hpp"
#include "kgdsel/tuning.hpp"

namespace kgdsel {

enum class ExperimentKind { kSim1, kSim2, kSim3, kRealData, kDumpSpectral };

/// Config names: sim1_constant_sweep, sim2_method_comparison,
/// sim3_covariate_shift, realdata, dump_spectral.
std::string experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(const std::string& name);

struct RealDataConfig {
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  GeomagneticValue value = GeomagneticValue::kTotalIntensity;
  double noise_std = 500.0;
  double truncation = 2.0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kSim2;
  std::vector<int> sizes{1000};
  std::vector<int> dims{1};
  std::vector<Rule> methods{Rule::kHoldout, Rule::kHss};
  int trials = 10;
  std::uint64_t seed = 0;
  double noise_std = 0.6;
  int test_size = 500;
  /// Step size per dimension.
  std::map<int, double> step_sizes{{1, 1.0}, {3, 3.0}};
  /// Kernel name; empty picks sobolev_min for d = 1 and wendland_3d for d = 3.
  std::string kernel;
  double kernel_width = 1.0;
  bool strict_step_size = false;
  /// 0 means |D|.
  int max_iterations = 0;
  double delta = 0.05;

  // HSS.
  double hss_subsample_fraction = 1.0;
  double split_ratio = 0.7;
  ConstantCandidates hss_constants = LogUniformSearch{};
  HorizonPolicy constant_pass_horizon = HorizonPolicy::kMaxIterations;
  HorizonPolicy final_pass_horizon = HorizonPolicy::kMaxIterations;

  // Comparison rules.
  ConstantCandidates rule_constants = uniform_grid(0.05, 24);
  std::map<Rule, double> fixed_constants;
  double lepskii_q = 2.0;
  int balancing_horizon = 0;
  double bsp_constant = 1.0;

  // Simulation 1.
  std::vector<double> sweep_constants;
  HorizonPolicy sweep_horizon = HorizonPolicy::kMaxIterations;
  bool bias_variance = true;

  // Simulation 3.
  std::vector<double> shift_levels{1.1, 1.2, 1.3, 1.4, 1.5};
  double kde_bandwidth = 0.05;
  int quadrature_order = 64;

  std::optional<RealDataConfig> realdata;

  int workers = 1;
};

/// Default sweep: 0, k/8 for k = 1..64, 16, 64, 256 and 1e12.
std::vector<double> default_sweep_constants();

/// Parses and validates. Every problem found is reported in one ConfigError.
/// Relative CSV paths are resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& j, ExperimentKind kind, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind);
void validate_config(const ExperimentConfig& config);
/// Every semantic problem with `config`; empty when valid.
std::vector<std::string> config_problems(const ExperimentConfig& config);

/// Kernel used for dimension d under `config`.
KernelSpec kernel_for(const ExperimentConfig& config, int d);

struct ResultRow {
  std::string method;
  int d = 0;
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int t_selected = 0;
  std::optional<double> constant_used;
  double l2 = 0.0;
  double linf = 0.0;
  double wall_time_s = 0.0;
  double peak_mem_mb = 0.0;
};

struct SummaryRow {
  std::string method;
  int d = 0;
  int n = 0;
  int count = 0;
  double t_mean = 0.0;
  double t_std = 0.0;
  double l2_mean = 0.0;
  double l2_std = 0.0;
  double linf_mean = 0.0;
  double linf_std = 0.0;
  double wall_time_mean = 0.0;
  double peak_mem_max = 0.0;
};

struct SweepRow {
  int d = 0;
  int n = 0;
  int trial = 0;
  double constant = 0.0;
  int t_selected = 0;
  bool hit_horizon = false;
  int horizon = 0;
  double l2 = 0.0;
  double linf = 0.0;
};

struct BiasVarianceRow {
  int d = 0;
  int n = 0;
  int trial = 0;
  BiasVarianceRecord record;
};

struct ShiftRow {
  std::string method;
  int d = 0;
  int n = 0;
  int trial = 0;
  double b = 1.0;
  /// KL divergence between training and test inputs (first coordinate for d > 1).
  double kl = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  /// 100 (err_b - err_1) / err_1 against the unshifted test set.
  double l2_degradation_pct = 0.0;
  double linf_degradation_pct = 0.0;
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<SweepRow> sweep;
  std::vector<BiasVarianceRow> bias_variance;
  std::vector<ShiftRow> shift;
};

ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Sweeps BSP over config.sweep_constants (falling back to the default
/// sweep) on each (d, n, trial).
std::vector<SweepRow> sweep_constant(const ExperimentConfig& config);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

inline constexpr const char* kResultsHeader =
    "method,d,n,trial,seed,t_selected,constant_used,l2,linf,wall_time_s,peak_mem_mb";

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Inverse of write_results_csv; throws IngestionError on schema violations.
std::vector<ResultRow> read_results_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_bias_variance_rows_csv(std::ostream& out, const std::vector<BiasVarianceRow>& rows);
void write_shift_csv(std::ostream& out, const std::vector<ShiftRow>& rows);

/// results.csv and summary.csv, plus curves_sweep.csv, curves_bias_variance.csv
/// and shift.csv when non-empty. Creates `dir` if needed.
void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir);

/// spectral_d{d}_n{n}.csv (t,N_D,W,U) and trace_d{d}_n{n}.csv for trial 0 of
/// every (d, n).
void dump_spectral(const ExperimentConfig& config, const std::filesystem::path& dir);

}  // namespace kgdsel
