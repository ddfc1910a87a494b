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

#include "kgdsel/hss.hpp"

#include <algorithm>
#include <stdexcept>

namespace kgdsel {

HssResult hss_select(const Dataset& data, const KernelSpec& spec, const KgdConfig& config, const HssOptions& options,
                     std::uint64_t seed) {
  const KgdProblem full = solve_problem(data, spec, config, options.delta);
  return hss_select(data, full, spec, config, options, seed);
}

HssResult hss_select(const Dataset& data, const KgdProblem& full, const KernelSpec& spec, const KgdConfig& config,
                     const HssOptions& options, std::uint64_t seed) {
  const int n = data.size();
  const int subsample = options.subsample_size > 0 ? options.subsample_size : n;
  if (config.max_iterations < 1) throw std::invalid_argument("HSS needs max_iterations >= 1");
  if (!full.trace.has_coefficients()) throw std::invalid_argument("HSS needs a full-data trace with coefficients");

  const SplitIndices split = subsample_split(n, subsample, options.split_ratio, seed);
  const Dataset train = data.subset(split.train);
  const Dataset validation = data.subset(split.validation);
  KgdConfig sub_config = config;
  sub_config.keep_coefficients = true;
  const KgdProblem sub = solve_problem(train, spec, sub_config, options.delta);

  const int sudden_stop = full.tables.sudden_stop();
  auto horizon_for = [&](HorizonPolicy policy, int t_max) {
    return policy == HorizonPolicy::kSuddenStop ? std::min(sudden_stop, t_max) : t_max;
  };
  const int constant_horizon = horizon_for(options.constant_pass_horizon, sub.trace.max_iterations);
  const int final_horizon = horizon_for(options.final_pass_horizon, full.trace.max_iterations);

  ValidationScorer scorer(spec, train, validation, sub.trace);
  HssResult out;
  out.sudden_stop = sudden_stop;
  out.search = search_constant(
      options.constants,
      [&](double c) { return bsp_select(sub.trace, sub.tables, c, constant_horizon).t_selected; },
      [&](int t) { return scorer.mse(t); });

  out.selection = bsp_select(full.trace, full.tables, out.search.best_constant, final_horizon);
  out.selection.rule = Rule::kHss;
  out.selection.diagnostics["validation_mse"] = out.search.best_mse;
  out.selection.diagnostics["sudden_stop"] = sudden_stop;
  out.selection.diagnostics["constant_pass_horizon"] = constant_horizon;
  out.coefficients = full.trace.coefficients[static_cast<std::size_t>(out.selection.t_selected)];
  return out;
}

}  // namespace kgdsel
