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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kgdsel/errors.hpp"
#include "kgdsel/runner.hpp"

namespace kgdsel {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, const char*> kExperimentNames[] = {
    {ExperimentKind::kSim1, "sim1_constant_sweep"},
    {ExperimentKind::kSim2, "sim2_method_comparison"},
    {ExperimentKind::kSim3, "sim3_covariate_shift"},
    {ExperimentKind::kRealData, "realdata"},
    {ExperimentKind::kDumpSpectral, "dump_spectral"},
};

// Reads typed fields from one JSON object, collecting problems instead of
// throwing and flagging keys it was never asked about.
class FieldReader {
 public:
  FieldReader(const json& j, std::string prefix, std::vector<std::string>& problems)
      : j_(j), prefix_(std::move(prefix)), problems_(problems) {
    if (!j_.is_object()) problems_.push_back(label("") + "must be an object");
  }

  ~FieldReader() {
    if (!j_.is_object()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) problems_.push_back(label(key) + ": unknown field");
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return false;
    try {
      out = j_.at(key).get<T>();
      return true;
    } catch (const json::exception&) {
      problems_.push_back(label(key) + ": wrong type (got " + j_.at(key).dump() + ")");
      return false;
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    if (!j_.is_object() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  std::string label(const std::string& key) const {
    if (key.empty()) return prefix_.empty() ? "config " : prefix_ + " ";
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  std::vector<std::string>& problems() { return problems_; }

 private:
  const json& j_;
  std::string prefix_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

std::optional<HorizonPolicy> parse_horizon(const std::string& name) {
  if (name == "sudden_stop") return HorizonPolicy::kSuddenStop;
  if (name == "max_iterations") return HorizonPolicy::kMaxIterations;
  return std::nullopt;
}

void read_horizon(FieldReader& r, const std::string& key, HorizonPolicy& out) {
  std::string name;
  if (!r.get(key, name)) return;
  if (auto p = parse_horizon(name))
    out = *p;
  else
    r.problems().push_back(r.label(key) + ": expected \"sudden_stop\" or \"max_iterations\", got \"" + name + "\"");
}

void read_candidates(const json& j, const std::string& prefix, std::vector<std::string>& problems,
                     ConstantCandidates& out) {
  FieldReader r(j, prefix, problems);
  std::string type;
  if (!r.get("type", type)) {
    problems.push_back(r.label("type") + ": required (log_uniform, uniform, geometric or list)");
    return;
  }
  try {
    if (type == "log_uniform") {
      LogUniformSearch s;
      r.get("min_exponent", s.min_exponent);
      r.get("max_exponent", s.max_exponent);
      r.get("final_step", s.final_step);
      r.get("max_refine_points", s.max_refine_points);
      r.get("include_zero", s.include_zero);
      if (s.min_exponent > s.max_exponent) problems.push_back(r.label("min_exponent") + ": exceeds max_exponent");
      if (!(s.final_step > 0.0)) problems.push_back(r.label("final_step") + ": must be positive");
      if (s.max_refine_points < 2) problems.push_back(r.label("max_refine_points") + ": must be >= 2");
      out = s;
    } else if (type == "uniform") {
      double step = 0.05;
      int count = 24;
      r.get("step", step);
      r.get("count", count);
      out = uniform_grid(step, count);
    } else if (type == "geometric") {
      double c0 = 100.0, q = 0.9;
      int count = 20;
      r.get("c0", c0);
      r.get("q", q);
      r.get("count", count);
      out = ConstantGrid::geometric(c0, q, count);
    } else if (type == "list") {
      std::vector<double> values;
      if (!r.get("values", values)) problems.push_back(r.label("values") + ": required for type list");
      out = ConstantGrid(values);
    } else {
      problems.push_back(r.label("type") + ": unknown candidate type \"" + type + "\"");
    }
  } catch (const std::invalid_argument& e) {
    problems.push_back(prefix + ": " + e.what());
  }
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, name] : kExperimentNames)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kExperimentNames)
    if (name == n) return k;
  return std::nullopt;
}

std::vector<double> default_sweep_constants() {
  std::vector<double> v{0.0};
  for (int k = 1; k <= 64; ++k) v.push_back(k / 8.0);
  for (const double c : {16.0, 64.0, 256.0, 1e12}) v.push_back(c);
  return v;
}

ExperimentConfig parse_config(const json& j, ExperimentKind kind, const std::filesystem::path& base_dir) {
  std::vector<std::string> problems;
  ExperimentConfig c;
  c.experiment = kind;
  if (kind == ExperimentKind::kSim1) c.methods = {Rule::kBaseline};
  if (kind == ExperimentKind::kRealData) {
    c.methods = {Rule::kBaseline, Rule::kHoldout, Rule::kHss};
    c.trials = 5;
    c.dims = {3};
    c.sizes = {};
    c.kernel = "wendland_3d";
    c.hss_subsample_fraction = 0.8;
  }
  {
    FieldReader r(j, "", problems);
    std::string name;
    if (r.get("experiment", name)) {
      const auto parsed = parse_experiment(name);
      if (!parsed)
        problems.push_back("experiment: unknown experiment \"" + name + "\"");
      else if (*parsed != kind && kind != ExperimentKind::kDumpSpectral)
        problems.push_back("experiment: config is for \"" + name + "\" but the command runs \"" +
                           experiment_name(kind) + "\"");
    }
    r.get("sizes", c.sizes);
    r.get("dims", c.dims);
    std::vector<std::string> method_names;
    if (r.get("methods", method_names)) {
      c.methods.clear();
      for (const auto& m : method_names) {
        if (auto rule = parse_rule(m))
          c.methods.push_back(*rule);
        else
          problems.push_back("methods: unknown method \"" + m + "\"");
      }
    }
    r.get("trials", c.trials);
    r.get("seed", c.seed);
    r.get("noise_std", c.noise_std);
    r.get("test_size", c.test_size);
    std::map<std::string, double> steps;
    if (r.get("step_sizes", steps)) {
      for (const auto& [key, value] : steps) {
        try {
          c.step_sizes[std::stoi(key)] = value;
        } catch (const std::exception&) {
          problems.push_back("step_sizes: key \"" + key + "\" is not a dimension");
        }
      }
    }
    r.get("kernel", c.kernel);
    r.get("kernel_width", c.kernel_width);
    r.get("strict_step_size", c.strict_step_size);
    r.get("max_iterations", c.max_iterations);
    r.get("delta", c.delta);
    r.get("workers", c.workers);

    if (const json* h = r.child("hss")) {
      FieldReader hr(*h, "hss", problems);
      hr.get("subsample_fraction", c.hss_subsample_fraction);
      hr.get("split_ratio", c.split_ratio);
      if (const json* cand = hr.child("constants")) read_candidates(*cand, "hss.constants", problems, c.hss_constants);
      read_horizon(hr, "constant_pass_horizon", c.constant_pass_horizon);
      read_horizon(hr, "final_pass_horizon", c.final_pass_horizon);
    }
    if (const json* rules = r.child("rules")) {
      FieldReader rr(*rules, "rules", problems);
      if (const json* cand = rr.child("constants"))
        read_candidates(*cand, "rules.constants", problems, c.rule_constants);
      std::map<std::string, double> fixed;
      if (rr.get("fixed_constants", fixed)) {
        for (const auto& [name, value] : fixed) {
          if (auto rule = parse_rule(name))
            c.fixed_constants[*rule] = value;
          else
            problems.push_back("rules.fixed_constants: unknown method \"" + name + "\"");
        }
      }
      rr.get("lepskii_q", c.lepskii_q);
      rr.get("balancing_horizon", c.balancing_horizon);
      rr.get("bsp_constant", c.bsp_constant);
    }
    if (const json* s = r.child("sweep")) {
      FieldReader sr(*s, "sweep", problems);
      sr.get("constants", c.sweep_constants);
      read_horizon(sr, "horizon", c.sweep_horizon);
      sr.get("bias_variance", c.bias_variance);
    }
    if (const json* s = r.child("shift")) {
      FieldReader sr(*s, "shift", problems);
      sr.get("levels", c.shift_levels);
      sr.get("kde_bandwidth", c.kde_bandwidth);
      sr.get("quadrature_order", c.quadrature_order);
    }
    if (const json* rd = r.child("realdata")) {
      FieldReader rr(*rd, "realdata", problems);
      RealDataConfig real;
      std::string train, test, value;
      if (!rr.get("train_csv", train)) problems.push_back("realdata.train_csv: required");
      if (!rr.get("test_csv", test)) problems.push_back("realdata.test_csv: required");
      real.train_csv = base_dir / train;
      real.test_csv = base_dir / test;
      if (rr.get("value", value)) {
        try {
          real.value = parse_geomagnetic_value(value);
        } catch (const std::exception&) {
          problems.push_back("realdata.value: expected total_intensity or declination, got \"" + value + "\"");
        }
      }
      rr.get("noise_std", real.noise_std);
      rr.get("truncation", real.truncation);
      c.realdata = real;
    }
  }
  const auto semantic = config_problems(c);
  problems.insert(problems.end(), semantic.begin(), semantic.end());
  if (!problems.empty()) throw ConfigError(problems);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file " + path.string()});
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError({"config file " + path.string() + " is not valid JSON: " + e.what()});
  }
  return parse_config(j, kind, path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  if (auto problems = config_problems(c); !problems.empty()) throw ConfigError(std::move(problems));
}

std::vector<std::string> config_problems(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  const bool real = c.experiment == ExperimentKind::kRealData;
  if (c.trials < 1) problems.push_back("trials: must be >= 1");
  if (c.methods.empty() && c.experiment != ExperimentKind::kDumpSpectral) problems.push_back("methods: must be non-empty");
  if (!real) {
    if (c.sizes.empty()) problems.push_back("sizes: must be non-empty");
    for (const int n : c.sizes)
      if (n < 4) problems.push_back("sizes: every n must be >= 4 (got " + std::to_string(n) + ")");
  }
  if (c.dims.empty()) problems.push_back("dims: must be non-empty");
  for (const int d : c.dims) {
    if (!real && d != 1 && d != 3)
      problems.push_back("dims: synthetic targets exist for d = 1 and d = 3 only (got " + std::to_string(d) + ")");
    if (!c.step_sizes.count(d)) problems.push_back("step_sizes: no step size for d = " + std::to_string(d));
  }
  for (const auto& [d, beta] : c.step_sizes)
    if (!(beta > 0.0)) problems.push_back("step_sizes: step for d = " + std::to_string(d) + " must be positive");
  if (!(c.noise_std >= 0.0)) problems.push_back("noise_std: must be >= 0");
  if (c.test_size < 1) problems.push_back("test_size: must be >= 1");
  if (c.max_iterations < 0) problems.push_back("max_iterations: must be >= 0 (0 means |D|)");
  if (!(c.delta > 0.0 && c.delta < 1.0)) problems.push_back("delta: must lie in (0, 1)");
  if (c.workers < 1) problems.push_back("workers: must be >= 1");
  if (!(c.hss_subsample_fraction > 0.0 && c.hss_subsample_fraction <= 1.0))
    problems.push_back("hss.subsample_fraction: must lie in (0, 1]");
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) problems.push_back("hss.split_ratio: must lie in (0, 1)");
  if (!(c.lepskii_q > 1.0)) problems.push_back("rules.lepskii_q: must exceed 1");
  if (!(c.bsp_constant >= 0.0)) problems.push_back("rules.bsp_constant: must be >= 0");
  for (const auto& [rule, value] : c.fixed_constants)
    if (!(value >= 0.0)) problems.push_back("rules.fixed_constants." + rule_name(rule) + ": must be >= 0");
  for (const double v : c.sweep_constants)
    if (!(v >= 0.0)) problems.push_back("sweep.constants: values must be >= 0");
  for (const double b : c.shift_levels)
    if (!(b >= 1.0)) problems.push_back("shift.levels: every b must be >= 1");
  if (!(c.kde_bandwidth > 0.0)) problems.push_back("shift.kde_bandwidth: must be positive");
  if (c.quadrature_order < 1) problems.push_back("shift.quadrature_order: must be >= 1");
  if (!c.kernel.empty()) {
    for (const int d : c.dims) {
      try {
        KernelSpec::from_name(c.kernel, d, c.kernel_width);
      } catch (const std::invalid_argument& e) {
        problems.push_back("kernel: " + std::string(e.what()));
      }
    }
  }
  if (real) {
    if (!c.realdata) {
      problems.push_back("realdata: section required for the realdata experiment");
    } else {
      if (!(c.realdata->noise_std >= 0.0)) problems.push_back("realdata.noise_std: must be >= 0");
      if (!(c.realdata->truncation > 0.0)) problems.push_back("realdata.truncation: must be positive");
    }
    if (c.dims != std::vector<int>{3}) problems.push_back("dims: the realdata experiment is three-dimensional");
  }
  return problems;
}

}  // namespace kgdsel
