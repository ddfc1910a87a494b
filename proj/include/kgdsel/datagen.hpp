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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgdsel/kernel.hpp"

namespace kgdsel {

enum class Target {
  kG1,  // piecewise-linear tent on [0, 1], d = 1
  kG2,  // compactly supported radial bump, d = 3
};

int target_dimension(Target target);
std::string target_name(Target target);
Target parse_target(const std::string& name);

/// x on [0, 0.5], 1 - x beyond.
double target_g1(double x);

/// (1 - r)^6 (35 r^2 + 18 r + 3) for r = |x|_2 <= 1, else 0.
double target_g2(std::span<const double> x);

double evaluate_target(Target target, std::span<const double> x);

struct DatasetMeta {
  std::string target_id;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  double shift_b = 1.0;
  /// Per-column (min, max) of the raw coordinates for min-max normalized data.
  std::vector<std::pair<double, double>> input_ranges;
};

struct Dataset {
  PointMatrix inputs;
  Eigen::VectorXd outputs;
  std::optional<Eigen::VectorXd> clean_targets;
  DatasetMeta meta;

  int size() const { return static_cast<int>(inputs.rows()); }
  int dimension() const { return static_cast<int>(inputs.cols()); }

  Dataset subset(std::span<const int> indices) const;
};

/// Inputs i.i.d. uniform on [0,1]^d, outputs = target + N(0, noise_std^2).
Dataset gen_dataset(Target target, int n, double noise_std, std::uint64_t seed);

struct ShiftConfig {
  double b = 1.0;               // test inputs uniform on [0, b]^d
  double kde_bandwidth = 0.05;
  int quadrature_order = 64;
};

/// Noise-free test set with inputs uniform on [0, b]^d.
Dataset gen_shifted_testset(Target target, int m, const ShiftConfig& shift, std::uint64_t seed);

/// Unshifted test set (b = 1).
Dataset gen_testset(Target target, int m, std::uint64_t seed);

/// Gaussian-KDE density estimate at `x`.
double kde_density(std::span<const double> samples, double bandwidth, double x);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

/// D_KL(P || Q) between Gaussian KDEs of the two 1-d samples, integrated by
/// Gauss-Legendre quadrature over [min - 3h, max + 3h] of the pooled samples.
double kl_divergence(std::span<const double> p_samples, std::span<const double> q_samples, const ShiftConfig& cfg);

enum class GeomagneticValue { kTotalIntensity, kDeclination };

std::string geomagnetic_column(GeomagneticValue value);
GeomagneticValue parse_geomagnetic_value(const std::string& name);

/// Reads columns phi, theta, h and the chosen value column. Inputs are mapped
/// to [-1, 1]^3 per column; pass `ranges` to reuse a training set's mapping.
/// Outputs (and clean targets) keep their native units.
Dataset load_geomagnetic_csv(const std::filesystem::path& path, GeomagneticValue value,
                             const std::vector<std::pair<double, double>>* ranges = nullptr);
Dataset read_geomagnetic_csv(std::istream& in, GeomagneticValue value,
                             const std::vector<std::pair<double, double>>* ranges = nullptr);

/// Inverse of the min-max mapping recorded in `data.meta.input_ranges`.
PointMatrix denormalize_inputs(const Dataset& data);

/// Adds N(0, sigma^2) noise resampled until inside +-truncation*sigma. The
/// pre-noise outputs become the clean targets when none are present.
Dataset add_truncated_gaussian_noise(const Dataset& data, double sigma, double truncation, std::uint64_t seed);

/// Columns x1..xd,y[,clean].
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace kgdsel
