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

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "kgdsel/kernel.hpp"
#include "kgdsel/spectral.hpp"

using namespace kgdsel;

namespace {

PointMatrix uniform_points(int n, int d, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, scale);
  PointMatrix m(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("sobolev_min evaluates 1 + min") {
  const auto k = KernelSpec::sobolev_min();
  const std::array x{0.3}, y{0.7};
  CHECK(eval_kernel(k, x, y) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK(eval_kernel(k, y, x) == doctest::Approx(1.3).epsilon(1e-15));
}

TEST_CASE("wendland_3d profile values") {
  const auto k = KernelSpec::wendland_3d();
  const std::array x{0.2, 0.4, 0.1};
  CHECK(eval_kernel(k, x, x) == 1.0);
  const std::array y{0.2 + 0.5, 0.4, 0.1};
  CHECK(eval_kernel(k, x, y) == doctest::Approx(std::pow(0.5, 4) * 3.0).epsilon(1e-14));
  CHECK(wendland_profile(0.5) == doctest::Approx(0.1875));
  const std::array far{2.0, 0.4, 0.1};
  CHECK(eval_kernel(k, x, far) == 0.0);
  CHECK(wendland_profile(1.0) == 0.0);
  CHECK(wendland_profile(1.5) == 0.0);
}

TEST_CASE("kernel specs validate family and dimension") {
  CHECK_THROWS_AS(KernelSpec::from_name("sobolev_min", 3), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::from_name("wendland_3d", 1), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::from_name("laplace", 1), std::invalid_argument);
  CHECK(KernelSpec::sobolev_min().kappa() == doctest::Approx(std::sqrt(2.0)));
  CHECK(KernelSpec::wendland_3d().kappa() == 1.0);
  CHECK(KernelSpec::gaussian(0.3, 4).kappa() == 1.0);
  CHECK(KernelSpec::from_name("gaussian", 2, 0.5).name() == "gaussian");
}

TEST_CASE("eval_kernel rejects dimension mismatch") {
  const std::array x{0.1, 0.2};
  const std::array y{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(eval_kernel(KernelSpec::wendland_3d(), x, y), std::invalid_argument);
  CHECK_THROWS_AS(eval_kernel(KernelSpec::gaussian(1.0, 3), x, y), std::invalid_argument);
}

TEST_CASE("single point Gram matrix") {
  PointMatrix x(1, 1);
  x(0, 0) = 0.5;
  const auto m = build_kernel_matrix(KernelSpec::sobolev_min(), x);
  REQUIRE(m.size() == 1);
  CHECK(m.entries(0, 0) == 1.5);
  CHECK(m.kappa == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("separated wendland points give the identity") {
  PointMatrix x(3, 3);
  x << 0, 0, 0, 2, 0, 0, 0, 2, 0;
  const auto m = build_kernel_matrix(KernelSpec::wendland_3d(), x);
  CHECK(m.entries == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(build_kernel_matrix(KernelSpec::sobolev_min(), PointMatrix(0, 1)), std::invalid_argument);
  CHECK_THROWS_AS(build_kernel_matrix(KernelSpec::wendland_3d(), uniform_points(4, 2, 1)), std::invalid_argument);
}

TEST_CASE("Gram matrices are exactly symmetric, match pairwise evaluation and are PSD") {
  const std::array specs{KernelSpec::sobolev_min(), KernelSpec::wendland_3d(), KernelSpec::gaussian(0.4, 2)};
  for (const auto& spec : specs) {
    for (unsigned seed = 0; seed < 10; ++seed) {
      const int n = 8 + static_cast<int>(seed) * 3;
      const PointMatrix x = uniform_points(n, spec.dimension(), seed);
      const auto m = build_kernel_matrix(spec, x);
      CHECK((m.entries.array() == m.entries.transpose().array()).all());
      double max_diff = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double direct = spec.family() == KernelFamily::kSobolevMin
                                    ? 1.0 + std::min(x(i, 0), x(j, 0))
                                    : eval_kernel(spec, {x.row(i).data(), static_cast<std::size_t>(x.cols())},
                                                  {x.row(j).data(), static_cast<std::size_t>(x.cols())});
          max_diff = std::max(max_diff, std::abs(m.entries(i, j) - direct));
        }
      CHECK(max_diff <= 1e-15);
      CHECK(m.entries.diagonal().maxCoeff() <= m.kappa * m.kappa + 1e-15);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * es.eigenvalues().maxCoeff());
    }
  }
}

TEST_CASE("cross kernel agrees with the Gram matrix on identical inputs") {
  const auto spec = KernelSpec::wendland_3d();
  const PointMatrix x = uniform_points(12, 3, 7);
  const auto m = build_kernel_matrix(spec, x);
  CHECK((cross_kernel(spec, x, x) - m.entries).cwiseAbs().maxCoeff() == 0.0);
  const PointMatrix q = uniform_points(5, 3, 8);
  const Eigen::MatrixXd c = cross_kernel(spec, q, x);
  CHECK(c.rows() == 5);
  CHECK(c.cols() == 12);
  CHECK(c(2, 3) == eval_kernel(spec, {q.row(2).data(), 3}, {x.row(3).data(), 3}));
}
