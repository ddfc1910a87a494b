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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kgdsel/errors.hpp"
#include "kgdsel/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "JSON experiment configuration")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", opts.seed, "base seed (overrides the config)");
  cmd->add_option("--workers", opts.workers, "concurrent trials (overrides the config)")->check(CLI::PositiveNumber);
}

kgdsel::ExperimentConfig resolve(const CommonOptions& opts, kgdsel::ExperimentKind kind) {
  kgdsel::ExperimentConfig cfg = opts.config.empty() ? kgdsel::parse_config(nlohmann::json::object(), kind)
                                                     : kgdsel::load_config(opts.config, kind);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.workers) cfg.workers = *opts.workers;
  kgdsel::validate_config(cfg);
  return cfg;
}

int run(kgdsel::ExperimentKind kind, const CommonOptions& opts) {
  const kgdsel::ExperimentConfig cfg = resolve(opts, kind);
  if (kind == kgdsel::ExperimentKind::kDumpSpectral) {
    kgdsel::dump_spectral(cfg, opts.out);
    std::cout << "wrote spectral tables to " << opts.out << '\n';
    return 0;
  }
  const kgdsel::ExperimentOutput output = kgdsel::run_experiment(cfg);
  kgdsel::write_outputs(output, opts.out);
  kgdsel::write_summary_csv(std::cout, output.summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iteration-count selection for kernel gradient descent"};
  app.require_subcommand(1);
  const std::pair<const char*, kgdsel::ExperimentKind> commands[] = {
      {"sim1", kgdsel::ExperimentKind::kSim1},
      {"sim2", kgdsel::ExperimentKind::kSim2},
      {"sim3", kgdsel::ExperimentKind::kSim3},
      {"realdata", kgdsel::ExperimentKind::kRealData},
      {"dump-spectral", kgdsel::ExperimentKind::kDumpSpectral},
  };
  CommonOptions opts;
  std::optional<kgdsel::ExperimentKind> chosen;
  for (const auto& [name, kind] : commands) {
    CLI::App* cmd = app.add_subcommand(name, kgdsel::experiment_name(kind));
    add_common(cmd, opts);
    cmd->callback([&chosen, kind = kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return run(*chosen, opts);
  } catch (const kgdsel::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const kgdsel::IngestionError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const kgdsel::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
