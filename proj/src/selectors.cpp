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

#include "kgdsel/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kgdsel/errors.hpp"
#include "kgdsel/random.hpp"

namespace kgdsel {

namespace {

constexpr std::pair<Rule, std::string_view> kRuleNames[] = {
    {Rule::kBaseline, "bs"}, {Rule::kHoldout, "ho"},      {Rule::kBalancing, "bp"},
    {Rule::kLepskii, "lp"},  {Rule::kEarlyStopping, "esr"}, {Rule::kDiscrepancy, "dp"},
    {Rule::kAic, "aic"},     {Rule::kBic, "bic"},          {Rule::kBsp, "bsp"},
    {Rule::kHss, "hss"},
};

void check_constant(double constant) {
  if (!(constant >= 0.0) || std::isnan(constant)) throw std::invalid_argument("selection constant must be >= 0");
}

void require_fitted(const KgdTrace& trace, const char* rule) {
  if (!trace.has_coefficients())
    throw std::invalid_argument(std::string(rule) + " needs a trace with retained coefficients");
}

void require_tables(const KgdTrace& trace, const SpectralTables& tables, int horizon) {
  if (horizon > trace.max_iterations)
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds the trace length " +
                                std::to_string(trace.max_iterations));
  if (horizon > tables.t_max())
    throw std::invalid_argument("horizon " + std::to_string(horizon) + " exceeds the spectral tables (t_max " +
                                std::to_string(tables.t_max()) + ")");
}

double empirical_distance(const KgdTrace& trace, int a, int b) {
  const auto& fa = trace.fitted[static_cast<std::size_t>(a)];
  const auto& fb = trace.fitted[static_cast<std::size_t>(b)];
  return (fb - fa).norm() / std::sqrt(static_cast<double>(trace.n));
}

SelectionResult information_criterion(Rule rule, const KgdTrace& trace, const SpectralTables& tables,
                                      double constant, double penalty_scale) {
  check_constant(constant);
  const int t_max = trace.max_iterations;
  if (t_max < 1) throw std::invalid_argument("information criteria need max_iterations >= 1");
  require_tables(trace, tables, t_max);
  int best = 1;
  double best_score = trace.residual_l2(1) + constant * penalty_scale * tables.w(1);
  for (int t = 2; t <= t_max; ++t) {
    const double score = trace.residual_l2(t) + constant * penalty_scale * tables.w(t);
    if (score < best_score) {
      best_score = score;
      best = t;
    }
  }
  SelectionResult out{rule, best, constant, false, {}};
  out.diagnostics["score"] = best_score;
  out.diagnostics["residual_l2"] = trace.residual_l2(best);
  return out;
}

}  // namespace

std::string rule_name(Rule rule) {
  for (const auto& [r, name] : kRuleNames)
    if (r == rule) return std::string(name);
  return "unknown";
}

std::optional<Rule> parse_rule(std::string_view name) {
  for (const auto& [r, n] : kRuleNames)
    if (n == name) return r;
  return std::nullopt;
}

nlohmann::json to_json(const SelectionResult& result) {
  nlohmann::json j;
  j["rule"] = rule_name(result.rule);
  j["t"] = result.t_selected;
  j["constant"] = result.constant_used ? nlohmann::json(*result.constant_used) : nlohmann::json(nullptr);
  j["hit_horizon"] = result.hit_horizon;
  j["diagnostics"] = nlohmann::json::object();
  for (const auto& [key, value] : result.diagnostics) j["diagnostics"][key] = value;
  return j;
}

ConstantGrid::ConstantGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("constant grid must not be empty");
  for (const double v : values_)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("constant grid values must be positive and finite");
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

ConstantGrid ConstantGrid::geometric(double c0, double q, int count) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("geometric grid ratio must lie in (0, 1)");
  if (count < 0) throw std::invalid_argument("geometric grid count must be non-negative");
  std::vector<double> v;
  double c = c0;
  for (int k = 0; k <= count; ++k, c *= q) v.push_back(c);
  return ConstantGrid(std::move(v));
}

double bsp_statistic(const KgdTrace& trace, int t) {
  return t * trace.inc_empirical(t) + std::sqrt(static_cast<double>(t)) * trace.inc_rkhs(t);
}

double bsp_log_factor(double delta) {
  const double l = std::log(16.0 / delta);
  return l * l;
}

double bsp_reference_constant(double step_size, double kappa, double noise_m, double noise_gamma) {
  return 32.0 * std::numbers::sqrt2 * (1.0 + step_size) * (kappa * noise_m + noise_gamma);
}

SelectionResult bsp_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int horizon,
                           bool include_log_factor) {
  if (horizon < 1) throw std::invalid_argument("BSP horizon must be >= 1");
  check_constant(constant);
  require_tables(trace, tables, horizon);
  const double scale = constant * (include_log_factor ? bsp_log_factor(tables.delta()) : 1.0);
  SelectionResult out{Rule::kBsp, horizon, constant, true, {}};
  for (int t = horizon; t >= 1; --t) {
    if (bsp_statistic(trace, t) >= scale * tables.w(t)) {
      out.t_selected = t;
      out.hit_horizon = false;
      break;
    }
  }
  out.diagnostics["horizon"] = horizon;
  out.diagnostics["statistic"] = bsp_statistic(trace, out.t_selected);
  out.diagnostics["threshold"] = scale * tables.w(out.t_selected);
  return out;
}

SelectionResult baseline_select(const KgdTrace& trace, const std::optional<Eigen::VectorXd>& clean_targets) {
  if (!clean_targets) throw UnsupportedOperation("baseline selection needs clean targets (synthetic data only)");
  require_fitted(trace, "baseline selection");
  if (clean_targets->size() != trace.n) throw std::invalid_argument("clean target length does not match the trace");
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= trace.max_iterations; ++t) {
    const double err = (trace.fitted[static_cast<std::size_t>(t)] - *clean_targets).squaredNorm() / trace.n;
    if (err < best_err) {
      best_err = err;
      best = t;
    }
  }
  SelectionResult out{Rule::kBaseline, best, std::nullopt, false, {}};
  out.diagnostics["empirical_error"] = best_err;
  return out;
}

HoldoutResult holdout_select(const Dataset& data, const KernelSpec& spec, const KgdConfig& config,
                             std::uint64_t seed) {
  const int n = data.size();
  if (n < 2) throw std::invalid_argument("hold-out needs at least two samples");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "holdout-split"));
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto n_train = static_cast<std::ptrdiff_t>(n / 2);

  HoldoutResult out;
  out.train_indices.assign(perm.begin(), perm.begin() + n_train);
  out.validation_indices.assign(perm.begin() + n_train, perm.end());
  const Dataset train = data.subset(out.train_indices);
  const Dataset validation = data.subset(out.validation_indices);

  const KernelMatrix matrix = build_kernel_matrix(spec, train.inputs);
  KgdConfig cfg = config;
  cfg.keep_coefficients = true;
  const KgdTrace trace = run_kgd(matrix, train.outputs, cfg);
  const Eigen::MatrixXd cross = cross_kernel(spec, validation.inputs, train.inputs);

  int best = 0;
  double best_mse = std::numeric_limits<double>::infinity();
  out.validation_curve.reserve(trace.coefficients.size());
  for (int t = 0; t <= trace.max_iterations; ++t) {
    const double mse =
        (cross * trace.coefficients[static_cast<std::size_t>(t)] - validation.outputs).squaredNorm() /
        validation.size();
    out.validation_curve.push_back(mse);
    if (mse < best_mse) {
      best_mse = mse;
      best = t;
    }
  }
  out.selection = {Rule::kHoldout, best, std::nullopt, false, {}};
  out.selection.diagnostics["validation_mse"] = best_mse;
  out.selection.diagnostics["train_size"] = static_cast<double>(train.size());
  out.coefficients = trace.coefficients[static_cast<std::size_t>(best)];
  return out;
}

double bp_log_factor(double delta) {
  const double l = std::log(16.0 / delta);
  return l * l * l * l;
}

SelectionResult bp_select(const KgdTrace& trace, const SpectralTables& tables, double constant, double delta,
                          int horizon) {
  check_constant(constant);
  require_fitted(trace, "balancing principle");
  if (horizon <= 0) horizon = trace.max_iterations;
  if (horizon < 1) throw std::invalid_argument("balancing principle needs horizon >= 1");
  require_tables(trace, tables, horizon);
  const double scale = constant * bp_log_factor(delta);
  for (int t = 1; t <= horizon; ++t) {
    bool ok = true;
    for (int tp = t + 1; tp <= horizon && ok; ++tp) ok = empirical_distance(trace, t, tp) <= scale * tables.w(tp);
    if (ok) return {Rule::kBalancing, t, constant, t == horizon, {{"horizon", horizon}}};
  }
  return {Rule::kBalancing, horizon, constant, true, {{"horizon", horizon}}};
}

BalancingProfile::BalancingProfile(const KgdTrace& trace, const SpectralTables& tables, double delta, int horizon) {
  require_fitted(trace, "balancing principle");
  if (horizon <= 0) horizon = trace.max_iterations;
  if (horizon < 1) throw std::invalid_argument("balancing principle needs horizon >= 1");
  require_tables(trace, tables, horizon);
  horizon_ = horizon;
  const double factor = bp_log_factor(delta);
  worst_ratio_.assign(static_cast<std::size_t>(horizon), 0.0);
  for (int t = 1; t < horizon; ++t) {
    double worst = 0.0;
    for (int tp = t + 1; tp <= horizon; ++tp)
      worst = std::max(worst, empirical_distance(trace, t, tp) / (tables.w(tp) * factor));
    worst_ratio_[static_cast<std::size_t>(t - 1)] = worst;
  }
}

SelectionResult BalancingProfile::select(double constant) const {
  check_constant(constant);
  for (int t = 1; t <= horizon_; ++t)
    if (worst_ratio_[static_cast<std::size_t>(t - 1)] <= constant)
      return {Rule::kBalancing, t, constant, t == horizon_, {{"horizon", horizon_}}};
  return {Rule::kBalancing, horizon_, constant, true, {{"horizon", horizon_}}};
}

std::vector<int> lepskii_grid(const SpectralTables& tables, double q, double delta, double kappa) {
  if (!(q > 1.0)) throw std::invalid_argument("Lepskii grid ratio q must exceed 1");
  const int n = tables.n();
  if (n < 2) throw ConfigError({"Lepskii principle needs at least two samples"});
  const double k2 = kappa * kappa;
  const double l = 2.0 * std::log(8.0 * std::log(static_cast<double>(n)) / (delta * std::log(q)));
  const double cap_fixed = n / (100.0 * k2 * l * l);

  std::vector<int> grid;
  for (int i = 0;; ++i) {
    const double raw = std::pow(q, i) / k2;
    const double t_real = std::max(1.0, std::ceil(raw - 1e-9));
    if (t_real > tables.t_max()) break;
    const int t = static_cast<int>(t_real);
    if (!grid.empty() && grid.back() == t) continue;
    const double cap_dim = n / (3.0 * k2 * (tables.effective_dimension(t) + 1.0));
    if (t <= std::max(cap_fixed, cap_dim)) grid.push_back(t);
  }
  if (grid.empty()) {
    std::ostringstream msg;
    msg << "Lepskii grid is empty: no t = ceil(q^i/kappa^2) <= t_max " << tables.t_max()
        << " satisfies t <= max{n/(100 kappa^2 L^2) = " << cap_fixed << ", n/(3 kappa^2 (N_D(1/t)+1))}";
    throw ConfigError({msg.str()});
  }
  return grid;
}

double lepskii_w_star(const SpectralTables& tables, int t) {
  return std::sqrt(static_cast<double>(t)) * (tables.effective_dimension(t) + 1.0) /
         std::sqrt(static_cast<double>(tables.n()));
}

LepskiiProfile::LepskiiProfile(const KgdTrace& trace, const SpectralTables& tables, double q, double delta,
                               double kappa)
    : grid_(lepskii_grid(tables, q, delta, kappa)) {
  require_fitted(trace, "Lepskii principle");
  require_tables(trace, tables, grid_.back());
  const std::size_t m = grid_.size();
  const double n = trace.n;
  w_star_.resize(m);
  stat_.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) w_star_[j] = lepskii_w_star(tables, grid_[j]);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ti = static_cast<std::size_t>(grid_[i]);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto tj = static_cast<std::size_t>(grid_[j]);
      // K dc equals the difference of fitted values.
      const Eigen::VectorXd dc = trace.coefficients[tj] - trace.coefficients[ti];
      const Eigen::VectorXd kdc = trace.fitted[tj] - trace.fitted[ti];
      const double v = kdc.squaredNorm() / n + dc.dot(kdc) / grid_[j];
      stat_[i][j] = std::sqrt(std::max(0.0, v));
    }
  }
}

SelectionResult LepskiiProfile::select(double constant) const {
  check_constant(constant);
  const std::size_t m = grid_.size();
  for (std::size_t i = 0; i < m; ++i) {
    bool ok = true;
    for (std::size_t j = i + 1; j < m && ok; ++j) ok = stat_[i][j] <= constant * w_star_[j];
    if (ok) {
      SelectionResult out{Rule::kLepskii, grid_[i], constant, i + 1 == m, {}};
      out.diagnostics["grid_size"] = static_cast<double>(m);
      return out;
    }
  }
  return {Rule::kLepskii, grid_.back(), constant, true, {{"grid_size", static_cast<double>(m)}}};
}

SelectionResult lp_select(const KgdTrace& trace, const SpectralTables& tables, const KernelMatrix& matrix,
                          double constant, double q, double delta, double kappa) {
  check_constant(constant);
  require_fitted(trace, "Lepskii principle");
  if (matrix.size() != trace.n) throw std::invalid_argument("kernel matrix does not match the trace");
  const auto grid = lepskii_grid(tables, q, delta, kappa);
  require_tables(trace, tables, grid.back());
  const std::size_t m = grid.size();
  for (std::size_t i = 0; i < m; ++i) {
    bool ok = true;
    for (std::size_t j = i + 1; j < m && ok; ++j) {
      const Eigen::VectorXd dc = trace.coefficients[static_cast<std::size_t>(grid[j])] -
                                 trace.coefficients[static_cast<std::size_t>(grid[i])];
      ok = weighted_rkhs_norm(matrix, dc, 1.0 / grid[j]) <= constant * lepskii_w_star(tables, grid[j]);
    }
    if (ok) return {Rule::kLepskii, grid[i], constant, i + 1 == m, {{"grid_size", static_cast<double>(m)}}};
  }
  return {Rule::kLepskii, grid.back(), constant, true, {{"grid_size", static_cast<double>(m)}}};
}

double esr_default_constant() { return 2.0 * std::numbers::e; }

SelectionResult esr_select(const Spectrum& spectrum, int n, double step_size, double noise_std, double constant,
                           int t_max) {
  if (!(noise_std > 0.0)) throw std::invalid_argument("early stopping rule needs a positive noise level");
  if (!(step_size > 0.0)) throw std::invalid_argument("early stopping rule needs a positive step size");
  check_constant(constant);
  if (t_max < 1) throw std::invalid_argument("early stopping rule needs t_max >= 1");
  for (int t = 1; t <= t_max; ++t) {
    const double eta = t * step_size;
    const double complexity = local_rademacher(spectrum, n, 1.0 / std::sqrt(eta));
    if (complexity > constant / (noise_std * eta)) {
      SelectionResult out{Rule::kEarlyStopping, t, constant, false, {}};
      out.diagnostics["noise_std"] = noise_std;
      out.diagnostics["rademacher"] = complexity;
      return out;
    }
  }
  return {Rule::kEarlyStopping, t_max, constant, true, {{"noise_std", noise_std}}};
}

SelectionResult dp_select(const KgdTrace& trace, double noise_std_estimate, double constant, int n) {
  if (!(noise_std_estimate >= 0.0)) throw std::invalid_argument("noise estimate must be non-negative");
  check_constant(constant);
  const double threshold = constant * noise_std_estimate * std::sqrt(static_cast<double>(n));
  for (int t = 0; t <= trace.max_iterations; ++t) {
    if (trace.residual_l2(t) <= threshold)
      return {Rule::kDiscrepancy, t, constant, false, {{"threshold", threshold}, {"noise_std", noise_std_estimate}}};
  }
  return {Rule::kDiscrepancy,
          trace.max_iterations,
          constant,
          true,
          {{"threshold", threshold}, {"noise_std", noise_std_estimate}}};
}

SelectionResult aic_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int /*n*/) {
  return information_criterion(Rule::kAic, trace, tables, constant, 1.0);
}

SelectionResult bic_select(const KgdTrace& trace, const SpectralTables& tables, double constant, int n) {
  return information_criterion(Rule::kBic, trace, tables, constant, std::log(static_cast<double>(n)));
}

double estimate_noise_std(const Eigen::VectorXd& y, const PointMatrix& inputs) {
  const Eigen::Index n = y.size();
  if (n < 3) throw std::invalid_argument("noise estimation needs at least three samples");
  if (inputs.rows() != n) throw std::invalid_argument("noise estimation: inputs and outputs differ in length");
  const Eigen::Index d = inputs.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  if (d == 1) {
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return inputs(a, 0) < inputs(b, 0); });
  } else {
    const int bits = static_cast<int>(std::min<Eigen::Index>(21, 63 / d));
    const double levels = std::ldexp(1.0, bits) - 1.0;
    const Eigen::RowVectorXd lo = inputs.colwise().minCoeff();
    const Eigen::RowVectorXd hi = inputs.colwise().maxCoeff();
    std::vector<std::uint64_t> key(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::uint64_t k = 0;
      for (int b = bits - 1; b >= 0; --b) {
        for (Eigen::Index c = 0; c < d; ++c) {
          const double span = hi(c) - lo(c);
          const double unit = span > 0.0 ? (inputs(i, c) - lo(c)) / span : 0.0;
          const auto q = static_cast<std::uint64_t>(std::llround(unit * levels));
          k = (k << 1) | ((q >> b) & 1U);
        }
      }
      key[static_cast<std::size_t>(i)] = k;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return key[static_cast<std::size_t>(a)] < key[static_cast<std::size_t>(b)]; });
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const double diff = y(order[i]) - y(order[i - 1]);
    sum += diff * diff;
  }
  return std::sqrt(sum / (2.0 * static_cast<double>(n - 1)));
}

}  // namespace kgdsel
