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

#include "kgdsel/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <tuple>

#include "kgdsel/csv.hpp"
#include "kgdsel/errors.hpp"
#include "kgdsel/random.hpp"
#include "kgdsel/resources.hpp"

namespace kgdsel {

namespace {

struct Task {
  int d = 0;
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
};

struct Fitted {
  SelectionResult selection;
  PointMatrix basis;
  Eigen::VectorXd coefficients;
};

struct TrialOutput {
  std::vector<ResultRow> rows;
  std::vector<SweepRow> sweep;
  std::vector<BiasVarianceRow> bias_variance;
  std::vector<ShiftRow> shift;
};

// Data shared by every task of a real-data run.
struct RealDataInputs {
  Dataset train;
  Dataset test;
};

Target target_for(int d) { return d == 1 ? Target::kG1 : Target::kG2; }

KgdConfig kgd_config(const ExperimentConfig& cfg, int d, int n) {
  KgdConfig k;
  k.step_size = cfg.step_sizes.at(d);
  k.max_iterations = cfg.max_iterations > 0 ? cfg.max_iterations : n;
  k.keep_coefficients = true;
  k.strict = cfg.strict_step_size;
  return k;
}

int horizon_of(HorizonPolicy policy, const KgdProblem& p) {
  return policy == HorizonPolicy::kSuddenStop ? p.tables.sudden_stop() : p.trace.max_iterations;
}

Fitted fit_method(Rule rule, const Dataset& train, const KernelSpec& spec, const ExperimentConfig& cfg,
                  const KgdConfig& kgd, std::uint64_t seed) {
  const std::uint64_t tuning_seed = derive_seed(seed, "tuning");
  switch (rule) {
    case Rule::kBaseline: {
      const KernelMatrix matrix = build_kernel_matrix(spec, train.inputs);
      const KgdTrace trace = run_kgd(matrix, train.outputs, kgd);
      SelectionResult sel = baseline_select(trace, train.clean_targets);
      return {sel, train.inputs, trace.coefficients[static_cast<std::size_t>(sel.t_selected)]};
    }
    case Rule::kHoldout: {
      HoldoutResult ho = holdout_select(train, spec, kgd, derive_seed(seed, "holdout"));
      return {ho.selection, train.subset(ho.train_indices).inputs, std::move(ho.coefficients)};
    }
    case Rule::kHss: {
      HssOptions opts;
      opts.constants = cfg.hss_constants;
      opts.subsample_size = std::max(2, static_cast<int>(std::lround(cfg.hss_subsample_fraction * train.size())));
      opts.split_ratio = cfg.split_ratio;
      opts.delta = cfg.delta;
      opts.constant_pass_horizon = cfg.constant_pass_horizon;
      opts.final_pass_horizon = cfg.final_pass_horizon;
      HssResult hss = hss_select(train, spec, kgd, opts, tuning_seed);
      return {hss.selection, train.inputs, std::move(hss.coefficients)};
    }
    case Rule::kBsp: {
      const KgdProblem p = solve_problem(train, spec, kgd, cfg.delta);
      SelectionResult sel = bsp_select(p.trace, p.tables, cfg.bsp_constant, horizon_of(cfg.final_pass_horizon, p));
      return {sel, train.inputs, p.trace.coefficients[static_cast<std::size_t>(sel.t_selected)]};
    }
    default:
      break;
  }
  RuleOptions rule_options;
  rule_options.lepskii_q = cfg.lepskii_q;
  rule_options.balancing_horizon = cfg.balancing_horizon;
  if (const auto it = cfg.fixed_constants.find(rule); it != cfg.fixed_constants.end()) {
    const KgdProblem p = solve_problem(train, spec, kgd, cfg.delta);
    const RuleInputs inputs{train, p, kgd.step_size, cfg.delta, spec.kappa(),
                            estimate_noise_std(train.outputs, train.inputs)};
    SelectionResult sel = make_rule(rule, inputs, rule_options)(it->second);
    return {sel, train.inputs, p.trace.coefficients[static_cast<std::size_t>(sel.t_selected)]};
  }
  TunedOptions opts;
  opts.constants = cfg.rule_constants;
  opts.split_ratio = cfg.split_ratio;
  opts.delta = cfg.delta;
  opts.rule = rule_options;
  TunedResult tuned = tuned_select(rule, train, spec, kgd, opts, tuning_seed);
  return {tuned.selection, train.inputs, std::move(tuned.coefficients)};
}

ErrorReport evaluate(const Fitted& f, const KernelSpec& spec, const Dataset& test) {
  const Eigen::VectorXd pred = cross_kernel(spec, test.inputs, f.basis) * f.coefficients;
  return test_errors(pred, test.clean_targets ? *test.clean_targets : test.outputs);
}

std::vector<double> first_column(const PointMatrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, 0);
  return out;
}

std::vector<SweepRow> sweep_trial(const ExperimentConfig& cfg, const Task& task, const Dataset& train,
                                  const Dataset& test, const KernelSpec& spec, const KgdConfig& kgd) {
  const KgdProblem p = solve_problem(train, spec, kgd, cfg.delta);
  const int horizon = horizon_of(cfg.sweep_horizon, p);
  const Eigen::MatrixXd cross = cross_kernel(spec, test.inputs, train.inputs);
  const Eigen::VectorXd& target = test.clean_targets ? *test.clean_targets : test.outputs;
  const auto constants = cfg.sweep_constants.empty() ? default_sweep_constants() : cfg.sweep_constants;
  std::vector<SweepRow> out;
  for (const double c : constants) {
    const SelectionResult sel = bsp_select(p.trace, p.tables, c, horizon);
    const ErrorReport err = test_errors(cross * p.trace.coefficients[static_cast<std::size_t>(sel.t_selected)], target);
    out.push_back({task.d, task.n, task.trial, c, sel.t_selected, sel.hit_horizon, horizon, err.l2, err.linf});
  }
  return out;
}

TrialOutput run_trial(const ExperimentConfig& cfg, const Task& task, const RealDataInputs* real) {
  TrialOutput out;
  const KernelSpec spec = kernel_for(cfg, task.d);
  Dataset train, test;
  if (real) {
    train = add_truncated_gaussian_noise(real->train, cfg.realdata->noise_std, cfg.realdata->truncation,
                                         derive_seed(task.seed, "realdata-noise"));
    test = real->test;
  } else {
    train = gen_dataset(target_for(task.d), task.n, cfg.noise_std, derive_seed(task.seed, "train"));
    test = gen_testset(target_for(task.d), cfg.test_size, derive_seed(task.seed, "test"));
  }
  const KgdConfig kgd = kgd_config(cfg, task.d, train.size());

  std::vector<Dataset> shifted;
  std::vector<double> kl;
  if (cfg.experiment == ExperimentKind::kSim3) {
    const auto train_x = first_column(train.inputs);
    for (const double b : cfg.shift_levels) {
      const ShiftConfig shift{b, cfg.kde_bandwidth, cfg.quadrature_order};
      shifted.push_back(gen_shifted_testset(target_for(task.d), cfg.test_size, shift, derive_seed(task.seed, "test")));
      kl.push_back(kl_divergence(train_x, first_column(shifted.back().inputs), shift));
    }
  }

  const bool measure_memory = cfg.workers == 1;
  for (const Rule rule : cfg.methods) {
    if (measure_memory) reset_peak_memory();
    const auto start = std::chrono::steady_clock::now();
    const Fitted fitted = fit_method(rule, train, spec, cfg, kgd, task.seed);
    const ErrorReport err = evaluate(fitted, spec, test);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rows.push_back({rule_name(rule), task.d, train.size(), task.trial, task.seed, fitted.selection.t_selected,
                        fitted.selection.constant_used, err.l2, err.linf, wall, peak_memory_mb()});
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      const ErrorReport e = evaluate(fitted, spec, shifted[k]);
      auto pct = [](double now, double base) { return base > 0.0 ? 100.0 * (now - base) / base : 0.0; };
      out.shift.push_back({rule_name(rule), task.d, train.size(), task.trial, cfg.shift_levels[k], kl[k], e.l2, e.linf,
                           pct(e.l2, err.l2), pct(e.linf, err.linf)});
    }
  }

  if (cfg.experiment == ExperimentKind::kSim1) {
    out.sweep = sweep_trial(cfg, task, train, test, spec, kgd);
    if (cfg.bias_variance && task.trial == 0) {
      for (const auto& rec : bias_variance_curves(train, spec, kgd, test))
        out.bias_variance.push_back({task.d, task.n, task.trial, rec});
    }
  }
  return out;
}

std::vector<Task> make_tasks(const ExperimentConfig& cfg, const RealDataInputs* real) {
  std::vector<Task> tasks;
  const std::vector<int> sizes = real ? std::vector<int>{real->train.size()} : cfg.sizes;
  for (const int d : cfg.dims)
    for (const int n : sizes)
      for (int trial = 0; trial < cfg.trials; ++trial)
        tasks.push_back({d, n, trial, cfg.seed + static_cast<std::uint64_t>(trial)});
  return tasks;
}

std::optional<RealDataInputs> load_real(const ExperimentConfig& cfg) {
  if (cfg.experiment != ExperimentKind::kRealData) return std::nullopt;
  RealDataInputs real;
  real.train = load_geomagnetic_csv(cfg.realdata->train_csv, cfg.realdata->value);
  real.test = load_geomagnetic_csv(cfg.realdata->test_csv, cfg.realdata->value, &real.train.meta.input_ranges);
  return real;
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), count);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) { return csv::format_double(v); }

template <typename Row>
void write_file(const std::filesystem::path& path, void (*writer)(std::ostream&, const std::vector<Row>&),
                const std::vector<Row>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out, rows);
}

}  // namespace

KernelSpec kernel_for(const ExperimentConfig& config, int d) {
  if (!config.kernel.empty()) return KernelSpec::from_name(config.kernel, d, config.kernel_width);
  if (d == 1) return KernelSpec::sobolev_min();
  if (d == 3) return KernelSpec::wendland_3d();
  return KernelSpec::gaussian(config.kernel_width, d);
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto real = load_real(config);
  const auto tasks = make_tasks(config, real ? &*real : nullptr);
  std::vector<TrialOutput> results(tasks.size());
  parallel_for(tasks.size(), config.workers,
               [&](std::size_t i) { results[i] = run_trial(config, tasks[i], real ? &*real : nullptr); });

  ExperimentOutput out;
  for (auto& r : results) {
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    out.sweep.insert(out.sweep.end(), r.sweep.begin(), r.sweep.end());
    out.bias_variance.insert(out.bias_variance.end(), r.bias_variance.begin(), r.bias_variance.end());
    out.shift.insert(out.shift.end(), r.shift.begin(), r.shift.end());
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.method, a.d, a.n, a.trial) < std::tie(b.method, b.d, b.n, b.trial);
  });
  std::sort(out.shift.begin(), out.shift.end(), [](const ShiftRow& a, const ShiftRow& b) {
    return std::tie(a.method, a.d, a.n, a.b, a.trial) < std::tie(b.method, b.d, b.n, b.b, b.trial);
  });
  out.summary = summarize(out.rows);
  return out;
}

std::vector<SweepRow> sweep_constant(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<SweepRow> out;
  for (const Task& task : make_tasks(config, nullptr)) {
    const Target target = target_for(task.d);
    const Dataset train = gen_dataset(target, task.n, config.noise_std, derive_seed(task.seed, "train"));
    const Dataset test = gen_testset(target, config.test_size, derive_seed(task.seed, "test"));
    auto rows = sweep_trial(config, task, train, test, kernel_for(config, task.d), kgd_config(config, task.d, task.n));
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<std::string, int, int>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{r.method, r.d, r.n}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> t, l2, linf, wall;
    double mem = 0.0;
    for (const ResultRow* r : members) {
      t.push_back(r->t_selected);
      l2.push_back(r->l2);
      linf.push_back(r->linf);
      wall.push_back(r->wall_time_s);
      mem = std::max(mem, r->peak_mem_mb);
    }
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), static_cast<int>(members.size()), mean(t),
                   stddev(t), mean(l2), stddev(l2), mean(linf), stddev(linf), mean(wall), mem});
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows)
    out << r.method << ',' << r.d << ',' << r.n << ',' << r.trial << ',' << r.seed << ',' << r.t_selected << ','
        << (r.constant_used ? fmt(*r.constant_used) : "") << ',' << fmt(r.l2) << ',' << fmt(r.linf) << ','
        << fmt(r.wall_time_s) << ',' << fmt(r.peak_mem_mb) << '\n';
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw IngestionError("results header must be exactly \"" + std::string(kResultsHeader) + "\"");
  std::vector<ResultRow> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    if (f.size() != 11) throw IngestionError("expected 11 fields, got " + std::to_string(f.size()), row);
    auto num = [&](std::size_t i) {
      const auto v = csv::parse_double(f[i]);
      if (!v) throw IngestionError("field " + std::to_string(i + 1) + " is not a number: \"" + f[i] + "\"", row);
      return *v;
    };
    auto integer = [&](std::size_t i) {
      const double v = num(i);
      if (v != std::floor(v)) throw IngestionError("field " + std::to_string(i + 1) + " is not an integer", row);
      return v;
    };
    ResultRow r;
    r.method = f[0];
    r.d = static_cast<int>(integer(1));
    r.n = static_cast<int>(integer(2));
    r.trial = static_cast<int>(integer(3));
    try {
      r.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw IngestionError("seed is not an unsigned integer: \"" + f[4] + "\"", row);
    }
    r.t_selected = static_cast<int>(integer(5));
    if (!f[6].empty()) r.constant_used = num(6);
    r.l2 = num(7);
    r.linf = num(8);
    r.wall_time_s = num(9);
    r.peak_mem_mb = num(10);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "method,d,n,count,t_mean,t_std,l2_mean,l2_std,linf_mean,linf_std,wall_time_mean_s,peak_mem_max_mb\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.d << ',' << r.n << ',' << r.count << ',' << fmt(r.t_mean) << ',' << fmt(r.t_std) << ','
        << fmt(r.l2_mean) << ',' << fmt(r.l2_std) << ',' << fmt(r.linf_mean) << ',' << fmt(r.linf_std) << ','
        << fmt(r.wall_time_mean) << ',' << fmt(r.peak_mem_max) << '\n';
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "d,n,trial,constant,t_selected,hit_horizon,horizon,l2,linf\n";
  for (const auto& r : rows)
    out << r.d << ',' << r.n << ',' << r.trial << ',' << fmt(r.constant) << ',' << r.t_selected << ','
        << (r.hit_horizon ? 1 : 0) << ',' << r.horizon << ',' << fmt(r.l2) << ',' << fmt(r.linf) << '\n';
}

void write_bias_variance_rows_csv(std::ostream& out, const std::vector<BiasVarianceRow>& rows) {
  out << "d,n,trial,t,bias,variance,total\n";
  for (const auto& r : rows)
    out << r.d << ',' << r.n << ',' << r.trial << ',' << r.record.t << ',' << fmt(r.record.bias) << ','
        << fmt(r.record.variance) << ',' << fmt(r.record.total) << '\n';
}

void write_shift_csv(std::ostream& out, const std::vector<ShiftRow>& rows) {
  out << "method,d,n,trial,b,kl,l2,linf,l2_degradation_pct,linf_degradation_pct\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.d << ',' << r.n << ',' << r.trial << ',' << fmt(r.b) << ',' << fmt(r.kl) << ','
        << fmt(r.l2) << ',' << fmt(r.linf) << ',' << fmt(r.l2_degradation_pct) << ','
        << fmt(r.linf_degradation_pct) << '\n';
}

void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "results.csv", &write_results_csv, output.rows);
  write_file(dir / "summary.csv", &write_summary_csv, output.summary);
  if (!output.sweep.empty()) write_file(dir / "curves_sweep.csv", &write_sweep_csv, output.sweep);
  if (!output.bias_variance.empty())
    write_file(dir / "curves_bias_variance.csv", &write_bias_variance_rows_csv, output.bias_variance);
  if (!output.shift.empty()) write_file(dir / "shift.csv", &write_shift_csv, output.shift);
}

void dump_spectral(const ExperimentConfig& config, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const int d : config.dims) {
    for (const int n : config.sizes) {
      const Dataset train = gen_dataset(target_for(d), n, config.noise_std, derive_seed(config.seed, "train"));
      const KgdProblem p = solve_problem(train, kernel_for(config, d), kgd_config(config, d, n), config.delta);
      const std::string tag = "_d" + std::to_string(d) + "_n" + std::to_string(n) + ".csv";
      std::ofstream spectral(dir / ("spectral" + tag));
      p.tables.write_csv(spectral);
      std::ofstream trace(dir / ("trace" + tag));
      p.trace.write_csv(trace);
    }
  }
}

}  // namespace kgdsel
