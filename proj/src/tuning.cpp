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

#include "kgdsel/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>

#include "kgdsel/random.hpp"

namespace kgdsel {

namespace {

std::vector<double> coarse_candidates(const LogUniformSearch& s) {
  std::vector<double> out;
  if (s.include_zero) out.push_back(0.0);
  for (int e = s.min_exponent; e <= s.max_exponent; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::vector<double> refine_candidates(double lo, double hi, const LogUniformSearch& s) {
  double step = s.final_step;
  while ((hi - lo) / step + 1.0 > s.max_refine_points) step *= 2.0;
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

// Better means lower loss, or equal loss and larger constant.
bool better(const ConstantScore& a, const ConstantScore& b) {
  if (a.validation_mse != b.validation_mse) return a.validation_mse < b.validation_mse;
  return a.constant > b.constant;
}

}  // namespace

ConstantGrid uniform_grid(double step, int count) {
  if (!(step > 0.0) || count < 1) throw std::invalid_argument("uniform grid needs step > 0 and count >= 1");
  std::vector<double> v;
  for (int k = 1; k <= count; ++k) v.push_back(step * k);
  return ConstantGrid(std::move(v));
}

ConstantSearchResult search_constant(const ConstantCandidates& candidates, const SelectForConstant& select,
                                     const ValidationLoss& loss) {
  ConstantSearchResult result;
  auto evaluate = [&](double c) {
    for (const auto& s : result.scores)
      if (s.constant == c) return s;
    const int t = select(c);
    const ConstantScore score{c, t, loss(t)};
    result.scores.push_back(score);
    return score;
  };
  auto best_of = [&](const std::vector<double>& values) {
    std::optional<ConstantScore> best;
    for (const double c : values) {
      const ConstantScore s = evaluate(c);
      if (!best || better(s, *best)) best = s;
    }
    return *best;
  };

  ConstantScore best;
  if (const auto* grid = std::get_if<ConstantGrid>(&candidates)) {
    best = best_of(grid->values());
  } else {
    const auto& s = std::get<LogUniformSearch>(candidates);
    if (s.min_exponent > s.max_exponent) throw std::invalid_argument("log-uniform search: min_exponent > max_exponent");
    if (!(s.final_step > 0.0) || s.max_refine_points < 2)
      throw std::invalid_argument("log-uniform search: final_step must be positive, max_refine_points >= 2");
    const auto coarse = coarse_candidates(s);
    const ConstantScore coarse_best = best_of(coarse);
    const auto pos = static_cast<std::size_t>(std::find(coarse.begin(), coarse.end(), coarse_best.constant) - coarse.begin());
    const double lo = pos > 0 ? coarse[pos - 1] : coarse[pos];
    const double hi = pos + 1 < coarse.size() ? coarse[pos + 1] : coarse[pos];
    best = best_of(refine_candidates(lo, hi, s));
    if (better(coarse_best, best)) best = coarse_best;
  }
  result.best_constant = best.constant;
  result.best_t = best.t;
  result.best_mse = best.validation_mse;
  return result;
}

SplitIndices subsample_split(int n, int subsample_size, double ratio, std::uint64_t seed) {
  if (subsample_size < 2) throw std::invalid_argument("subsample must hold at least two points to split");
  if (subsample_size > n) throw std::invalid_argument("subsample size exceeds the sample size");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must lie in (0, 1)");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "subsample-split"));
  std::shuffle(perm.begin(), perm.end(), rng);
  const int n_train = std::clamp(static_cast<int>(std::lround(ratio * subsample_size)), 1, subsample_size - 1);
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.validation.assign(perm.begin() + n_train, perm.begin() + subsample_size);
  return out;
}

ValidationScorer::ValidationScorer(const KernelSpec& spec, const Dataset& train, const Dataset& validation,
                                   const KgdTrace& trace)
    : cross_(cross_kernel(spec, validation.inputs, train.inputs)),
      targets_(validation.outputs),
      trace_(&trace),
      cache_(static_cast<std::size_t>(trace.max_iterations + 1)) {
  if (!trace.has_coefficients()) throw std::invalid_argument("validation scoring needs retained coefficients");
}

double ValidationScorer::mse(int t) {
  auto& slot = cache_.at(static_cast<std::size_t>(t));
  if (!slot)
    slot = (cross_ * trace_->coefficients[static_cast<std::size_t>(t)] - targets_).squaredNorm() /
           static_cast<double>(targets_.size());
  return *slot;
}

KgdProblem solve_problem(const Dataset& data, const KernelSpec& spec, const KgdConfig& config, double delta) {
  KernelMatrix matrix = build_kernel_matrix(spec, data.inputs);
  Spectrum spectrum = eigendecompose(matrix);
  SpectralTables tables(spectrum, data.size(), matrix.kappa, delta, std::max(1, config.max_iterations));
  KgdTrace trace = run_kgd(matrix, data.outputs, config, spectrum.max_eigenvalue());
  return {std::move(matrix), std::move(spectrum), std::move(tables), std::move(trace)};
}

std::function<SelectionResult(double)> make_rule(Rule rule, const RuleInputs& in, const RuleOptions& options) {
  const KgdProblem& p = in.problem;
  const int n = in.data.size();
  switch (rule) {
    case Rule::kBsp: {
      const int horizon = options.bsp_horizon > 0 ? options.bsp_horizon : p.trace.max_iterations;
      return [&p, horizon](double c) { return bsp_select(p.trace, p.tables, c, horizon); };
    }
    case Rule::kBalancing: {
      auto profile = std::make_shared<BalancingProfile>(p.trace, p.tables, in.delta, options.balancing_horizon);
      return [profile](double c) { return profile->select(c); };
    }
    case Rule::kLepskii: {
      auto profile = std::make_shared<LepskiiProfile>(p.trace, p.tables, options.lepskii_q, in.delta, in.kappa);
      return [profile](double c) { return profile->select(c); };
    }
    case Rule::kEarlyStopping: {
      const double beta = in.step_size;
      const double tau = in.noise_std;
      return [&p, n, beta, tau](double c) {
        return esr_select(p.spectrum, n, beta, tau, c, p.trace.max_iterations);
      };
    }
    case Rule::kDiscrepancy: {
      const double sigma = in.noise_std;
      return [&p, n, sigma](double c) { return dp_select(p.trace, sigma, c, n); };
    }
    case Rule::kAic:
      return [&p, n](double c) { return aic_select(p.trace, p.tables, c, n); };
    case Rule::kBic:
      return [&p, n](double c) { return bic_select(p.trace, p.tables, c, n); };
    default:
      throw std::invalid_argument("rule '" + rule_name(rule) + "' has no tunable constant");
  }
}

TunedResult tuned_select(Rule rule, const Dataset& data, const KernelSpec& spec, const KgdConfig& config,
                         const TunedOptions& options, std::uint64_t seed) {
  const KgdProblem full = solve_problem(data, spec, config, options.delta);
  return tuned_select(rule, data, full, spec, config, options, seed);
}

TunedResult tuned_select(Rule rule, const Dataset& data, const KgdProblem& full, const KernelSpec& spec,
                         const KgdConfig& config, const TunedOptions& options, std::uint64_t seed) {
  const int n = data.size();
  const int subsample = options.subsample_size > 0 ? options.subsample_size : n;
  const SplitIndices split = subsample_split(n, subsample, options.split_ratio, seed);
  const Dataset train = data.subset(split.train);
  const Dataset validation = data.subset(split.validation);

  KgdConfig sub_config = config;
  sub_config.keep_coefficients = true;
  const KgdProblem sub = solve_problem(train, spec, sub_config, options.delta);
  const double kappa = spec.kappa();

  const RuleInputs sub_inputs{train, sub, config.step_size, options.delta, kappa,
                              estimate_noise_std(train.outputs, train.inputs)};
  auto sub_rule = make_rule(rule, sub_inputs, options.rule);
  ValidationScorer scorer(spec, train, validation, sub.trace);
  TunedResult out;
  out.search = search_constant(
      options.constants, [&](double c) { return sub_rule(c).t_selected; }, [&](int t) { return scorer.mse(t); });

  const RuleInputs full_inputs{data, full, config.step_size, options.delta, kappa,
                               estimate_noise_std(data.outputs, data.inputs)};
  out.selection = make_rule(rule, full_inputs, options.rule)(out.search.best_constant);
  out.selection.diagnostics["validation_mse"] = out.search.best_mse;
  out.selection.diagnostics["noise_std"] = full_inputs.noise_std;
  if (full.trace.has_coefficients())
    out.coefficients = full.trace.coefficients[static_cast<std::size_t>(out.selection.t_selected)];
  return out;
}

}  // namespace kgdsel
