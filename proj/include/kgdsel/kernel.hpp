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

#include <span>
#include <string>

#include <Eigen/Dense>

namespace kgdsel {

/// One sample per row. Row-major so each point is a contiguous span.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelFamily {
  kSobolevMin,   // 1 + min(x, x'), d = 1
  kWendland3d,   // (1-u)^4 (4u+1) on u = |x - x'| <= 1, d = 3
  kGaussian,     // exp(-|x - x'|^2 / (2 w^2)), any d
};

class KernelSpec {
 public:
  static KernelSpec sobolev_min();
  static KernelSpec wendland_3d();
  static KernelSpec gaussian(double width, int dimension);

  /// Parses "sobolev_min", "wendland_3d" or "gaussian".
  static KernelSpec from_name(const std::string& name, int dimension, double width = 1.0);

  KernelFamily family() const { return family_; }
  int dimension() const { return dimension_; }
  double width() const { return width_; }
  std::string name() const;

  /// sqrt(sup K(x,x)) over the family's nominal domain; an analytic constant.
  double kappa() const;

 private:
  KernelSpec(KernelFamily family, int dimension, double width);

  KernelFamily family_;
  int dimension_;
  double width_;
};

/// Radial profile of the compactly supported kernel; zero for u > 1.
double wendland_profile(double u);

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

struct KernelMatrix {
  Eigen::MatrixXd entries;
  double kappa = 1.0;

  Eigen::Index size() const { return entries.rows(); }
};

/// Gram matrix over the rows of `inputs`. The upper triangle is computed and
/// mirrored so the result is exactly symmetric.
KernelMatrix build_kernel_matrix(const KernelSpec& spec, const PointMatrix& inputs);

/// Rectangular matrix with entry (i, j) = K(rows_i, cols_j).
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const PointMatrix& rows, const PointMatrix& cols);

}  // namespace kgdsel
