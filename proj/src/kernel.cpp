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

#include "kgdsel/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kgdsel {

KernelSpec::KernelSpec(KernelFamily family, int dimension, double width)
    : family_(family), dimension_(dimension), width_(width) {
  if (dimension < 1) throw std::invalid_argument("kernel dimension must be positive");
  if (family == KernelFamily::kSobolevMin && dimension != 1)
    throw std::invalid_argument("sobolev_min kernel is only defined for dimension 1");
  if (family == KernelFamily::kWendland3d && dimension != 3)
    throw std::invalid_argument("wendland_3d kernel is only defined for dimension 3");
  if (family == KernelFamily::kGaussian && !(width > 0.0 && std::isfinite(width)))
    throw std::invalid_argument("gaussian kernel width must be positive and finite");
}

KernelSpec KernelSpec::sobolev_min() { return KernelSpec(KernelFamily::kSobolevMin, 1, 0.0); }

KernelSpec KernelSpec::wendland_3d() { return KernelSpec(KernelFamily::kWendland3d, 3, 0.0); }

KernelSpec KernelSpec::gaussian(double width, int dimension) {
  return KernelSpec(KernelFamily::kGaussian, dimension, width);
}

KernelSpec KernelSpec::from_name(const std::string& name, int dimension, double width) {
  if (name == "sobolev_min") {
    if (dimension != 1) throw std::invalid_argument("sobolev_min requires dimension 1");
    return sobolev_min();
  }
  if (name == "wendland_3d") {
    if (dimension != 3) throw std::invalid_argument("wendland_3d requires dimension 3");
    return wendland_3d();
  }
  if (name == "gaussian") return gaussian(width, dimension);
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

std::string KernelSpec::name() const {
  switch (family_) {
    case KernelFamily::kSobolevMin:
      return "sobolev_min";
    case KernelFamily::kWendland3d:
      return "wendland_3d";
    case KernelFamily::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

double KernelSpec::kappa() const {
  // sobolev_min: sup_{x in [0,1]} 1 + x = 2.
  return family_ == KernelFamily::kSobolevMin ? std::sqrt(2.0) : 1.0;
}

double wendland_profile(double u) {
  if (u >= 1.0) return 0.0;
  const double a = 1.0 - u;
  const double a2 = a * a;
  return a2 * a2 * (4.0 * u + 1.0);
}

namespace {

double squared_distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

double eval_unchecked(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  switch (spec.family()) {
    case KernelFamily::kSobolevMin:
      return 1.0 + std::min(x[0], y[0]);
    case KernelFamily::kWendland3d:
      return wendland_profile(std::sqrt(squared_distance(x, y)));
    case KernelFamily::kGaussian:
      return std::exp(-squared_distance(x, y) / (2.0 * spec.width() * spec.width()));
  }
  return 0.0;
}

std::span<const double> row_span(const PointMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

void check_columns(const KernelSpec& spec, const PointMatrix& m, const char* what) {
  if (m.cols() != spec.dimension())
    throw std::invalid_argument(std::string(what) + " has " + std::to_string(m.cols()) +
                                " columns, kernel expects " + std::to_string(spec.dimension()));
}

}  // namespace

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
  const auto d = static_cast<std::size_t>(spec.dimension());
  if (x.size() != d || y.size() != d)
    throw std::invalid_argument("kernel argument dimension mismatch: expected " + std::to_string(d));
  return eval_unchecked(spec, x, y);
}

KernelMatrix build_kernel_matrix(const KernelSpec& spec, const PointMatrix& inputs) {
  if (inputs.rows() == 0) throw std::invalid_argument("cannot build a kernel matrix over zero points");
  check_columns(spec, inputs, "input matrix");
  const Eigen::Index n = inputs.rows();
  KernelMatrix out{Eigen::MatrixXd(n, n), spec.kappa()};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto xj = row_span(inputs, j);
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double value = eval_unchecked(spec, row_span(inputs, i), xj);
      out.entries(i, j) = value;
      out.entries(j, i) = value;
    }
  }
  return out;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const PointMatrix& rows, const PointMatrix& cols) {
  check_columns(spec, rows, "row point set");
  check_columns(spec, cols, "column point set");
  Eigen::MatrixXd out(rows.rows(), cols.rows());
  for (Eigen::Index j = 0; j < cols.rows(); ++j) {
    const auto xj = row_span(cols, j);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out(i, j) = eval_unchecked(spec, row_span(rows, i), xj);
  }
  return out;
}

}  // namespace kgdsel
