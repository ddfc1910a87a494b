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

#include "kgdsel/datagen.hpp"
#include "kgdsel/kernel.hpp"
#include "kgdsel/kgd.hpp"
#include "kgdsel/selectors.hpp"
#include "kgdsel/tuning.hpp"

namespace kgdsel {

/// Upper end of a BSP search range.
enum class HorizonPolicy {
  kSuddenStop,     // T computed from the full-data spectrum
  kMaxIterations,  // the trace length (|D| in the usual setup)
};

struct HssOptions {
  ConstantCandidates constants = ConstantGrid::geometric();
  int subsample_size = 0;  // L; 0 means n
  double split_ratio = 0.7;
  double delta = 0.05;
  HorizonPolicy constant_pass_horizon = HorizonPolicy::kSuddenStop;
  HorizonPolicy final_pass_horizon = HorizonPolicy::kMaxIterations;
};

struct HssResult {
  SelectionResult selection;
  /// c_t of the full-data run at the selected t.
  Eigen::VectorXd coefficients;
  ConstantSearchResult search;
  int sudden_stop = 0;
};

/// Hybrid selection: BSP constants are scored by the validation error of the
/// BSP-selected iterate on a split subsample, and the winning constant is
/// reapplied to the full data. `config.max_iterations` sets the trace length
/// of both runs.
HssResult hss_select(const Dataset& data, const KernelSpec& spec, const KgdConfig& config, const HssOptions& options,
                     std::uint64_t seed);

/// Same, with the full-data problem supplied by the caller.
HssResult hss_select(const Dataset& data, const KgdProblem& full, const KernelSpec& spec, const KgdConfig& config,
                     const HssOptions& options, std::uint64_t seed);

}  // namespace kgdsel
