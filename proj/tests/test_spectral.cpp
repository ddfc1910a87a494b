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

#include <cmath>
#include <random>
#include <sstream>

#include "kgdsel/datagen.hpp"
#include "kgdsel/errors.hpp"
#include "kgdsel/kernel.hpp"
#include "kgdsel/spectral.hpp"

using namespace kgdsel;

namespace {

Eigen::MatrixXd random_psd(int n, unsigned seed, int rank = -1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const int r = rank < 0 ? n : rank;
  Eigen::MatrixXd a(n, r);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r; ++j) a(i, j) = g(rng);
  Eigen::MatrixXd k = a * a.transpose();
  return 0.5 * (k + k.transpose());
}

// Eigenvalue-free oracles.
double trace_by_solves(const Eigen::MatrixXd& k, double lambda) {
  const auto n = k.rows();
  const Eigen::MatrixXd a = lambda * n * Eigen::MatrixXd::Identity(n, n) + k;
  return a.ldlt().solve(k).trace();
}

double w_oracle(double nd, double n, double t) {
  return std::sqrt(t) / n + std::sqrt(std::max(nd, 1.0)) * (1.0 + std::sqrt(t / n)) / std::sqrt(n);
}

double u_oracle(double nd, double n, double t, double delta) {
  const double a = std::log(1.0 + 8.0 * std::log(64.0 / delta) * std::sqrt(t / n) * std::max(1.0, nd)) / (n / t);
  return a + std::sqrt(a);
}

Spectrum eigenvalues_only(const Eigen::VectorXd& values) {
  Spectrum s;
  s.eigenvalues = values;
  return s;
}

}  // namespace

TEST_CASE("identity and diagonal decompositions") {
  const Spectrum id = eigendecompose(Eigen::MatrixXd::Identity(4, 4));
  CHECK((id.eigenvalues.array() - 1.0).abs().maxCoeff() < 1e-15);

  Eigen::MatrixXd d = Eigen::Vector3d(2.0, 3.0, 1.0).asDiagonal();
  const Spectrum s = eigendecompose(d);
  CHECK(s.eigenvalues(0) == doctest::Approx(3.0));
  CHECK(s.eigenvalues(1) == doctest::Approx(2.0));
  CHECK(s.eigenvalues(2) == doctest::Approx(1.0));
  // Columns are signed unit axes: e2, e1, e3.
  CHECK(std::abs(s.eigenvectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.eigenvectors(0, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(s.eigenvectors(2, 2)) == doctest::Approx(1.0));
}

TEST_CASE("random PSD reconstruction, ordering and orthogonality") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd k = random_psd(10, seed, seed % 2 ? 4 : -1);
    const Spectrum s = eigendecompose(k);
    for (Eigen::Index i = 1; i < s.size(); ++i) CHECK(s.eigenvalues(i) <= s.eigenvalues(i - 1));
    CHECK(s.eigenvalues.minCoeff() >= 0.0);
    const Eigen::MatrixXd rec = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    CHECK((rec - k).norm() <= 1e-8 * k.norm());
    CHECK((s.eigenvectors.transpose() * s.eigenvectors - Eigen::MatrixXd::Identity(10, 10)).norm() < 1e-10);
  }
}

TEST_CASE("indefinite matrices are rejected with diagnostics") {
  Eigen::MatrixXd m = Eigen::Vector3d(1.0, 0.5, -0.2).asDiagonal();
  try {
    eigendecompose(m);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("min eigenvalue") != std::string::npos);
  }
}

TEST_CASE("effective dimension examples and trace identity") {
  const Spectrum id = eigendecompose(Eigen::MatrixXd::Identity(4, 4));
  CHECK(empirical_effective_dimension(id, 4, 0.25) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(empirical_effective_dimension(id, 4, 1e12) < 1e-6);
  CHECK_THROWS_AS(empirical_effective_dimension(id, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(empirical_effective_dimension(id, 4, -1.0), std::invalid_argument);

  for (unsigned seed = 0; seed < 20; ++seed) {
    const Eigen::MatrixXd k = random_psd(10 + static_cast<int>(seed), 100 + seed);
    const Spectrum s = eigendecompose(k);
    const int n = static_cast<int>(k.rows());
    for (const double lambda : {1e-3, 0.1, 2.0}) {
      const double direct = trace_by_solves(k, lambda);
      CHECK(std::abs(empirical_effective_dimension(s, n, lambda) - direct) <= 1e-8 * direct);
    }
  }
}

TEST_CASE("effective dimension is bounded by rank and decreasing in lambda") {
  for (unsigned seed = 0; seed < 10; ++seed) {
    const int rank = 3 + static_cast<int>(seed % 4);
    const Spectrum s = eigendecompose(random_psd(12, seed, rank));
    double prev = std::numeric_limits<double>::infinity();
    for (double lambda = 1e-6; lambda < 1e6; lambda *= 3.0) {
      const double nd = empirical_effective_dimension(s, 12, lambda);
      CHECK(nd >= 0.0);
      CHECK(nd <= rank + 1e-9);
      CHECK(nd < prev);
      prev = nd;
    }
  }
}

TEST_CASE("W and U by hand and against the formulas") {
  const Spectrum id = eigendecompose(Eigen::MatrixXd::Identity(4, 4));
  CHECK(variance_proxy_w(id, 4, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(variance_proxy_w(id, 4, 4) >= variance_proxy_w(id, 4, 1));
  CHECK_THROWS_AS(variance_proxy_w(id, 4, 0), std::invalid_argument);

  const Spectrum s = eigendecompose(random_psd(10, 5));
  for (int t = 1; t <= 10; ++t) {
    const double nd = trace_by_solves(random_psd(10, 5), 1.0 / t);
    CHECK(variance_proxy_w(s, 10, t) == doctest::Approx(w_oracle(nd, 10, t)).epsilon(1e-10));
    CHECK(concentration_u(s, 10, t, 0.05) == doctest::Approx(u_oracle(nd, 10, t, 0.05)).epsilon(1e-10));
  }
}

TEST_CASE("U at large n is small and grows as delta shrinks") {
  const Spectrum big = eigenvalues_only(Eigen::VectorXd::Ones(1000000));
  CHECK(concentration_u(big, 1000000, 1, 0.05) < 0.01);
  const Spectrum s = eigendecompose(random_psd(10, 9));
  CHECK(concentration_u(s, 10, 3, 0.05) > concentration_u(s, 10, 3, 0.5));
  CHECK_THROWS_AS(concentration_u(s, 10, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(concentration_u(s, 10, 3, 1.0), std::invalid_argument);
}

TEST_CASE("W and U are non-decreasing in t on random spectra") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const int n = 10 + static_cast<int>(seed) * 2;
    const Spectrum s = eigendecompose(random_psd(n, 300 + seed, seed % 3 ? -1 : 2));
    for (int t = 2; t <= n; ++t) {
      CHECK(variance_proxy_w(s, n, t) >= variance_proxy_w(s, n, t - 1));
      CHECK(concentration_u(s, n, t, 0.05) >= concentration_u(s, n, t - 1, 0.05));
    }
  }
}

TEST_CASE("sudden-stop horizon matches a brute-force scan") {
  const auto data = gen_dataset(Target::kG1, 400, 0.6, 11);
  const auto m = build_kernel_matrix(KernelSpec::sobolev_min(), data.inputs);
  const Spectrum s = eigendecompose(m);
  const double c1 = std::max(3.0 / 3.0, 2.0 * std::sqrt(3.0));
  CHECK(concentration_constant(std::sqrt(2.0)) == doctest::Approx(c1));
  int brute = 0;
  for (int t = 1; t <= 400; ++t)
    if (c1 * concentration_u(s, 400, t, 0.05) <= 0.5) brute = t;
  const auto h = sudden_stop_horizon(s, 400, std::sqrt(2.0), 0.05);
  CHECK(h.value == brute);
  CHECK_FALSE(h.bound_violated_at_one);
  CHECK(sudden_stop_horizon(s, 400, std::sqrt(2.0), 0.5).value >=
        sudden_stop_horizon(s, 400, std::sqrt(2.0), 0.01).value);
}

TEST_CASE("sudden-stop horizon is interior on n = 2000 Sobolev data") {
  const auto data = gen_dataset(Target::kG1, 2000, 0.6, 3);
  const Spectrum s = eigendecompose(build_kernel_matrix(KernelSpec::sobolev_min(), data.inputs));
  const auto h = sudden_stop_horizon(s, 2000, std::sqrt(2.0), 0.05);
  CHECK(h.value >= 1);
  CHECK(h.value < 2000);
}

TEST_CASE("zero spectrum gives the largest horizon of any spectrum") {
  // With N_D = 0 the max{1, N_D} clip leaves U at its smallest value, so T
  // is the horizon of the N-free bound, not n.
  const int n = 200;
  const Spectrum zero = eigenvalues_only(Eigen::VectorXd::Zero(n));
  const double c1 = concentration_constant(1.0);
  int brute = 0;
  for (int t = 1; t <= n; ++t)
    if (c1 * u_oracle(0.0, n, t, 0.05) <= 0.5) brute = t;
  const auto h = sudden_stop_horizon(zero, n, 1.0, 0.05);
  CHECK(h.value == std::max(brute, 1));
  for (unsigned seed = 0; seed < 5; ++seed)
    CHECK(sudden_stop_horizon(eigendecompose(random_psd(n, seed)), n, 1.0, 0.05).value <= h.value);
}

TEST_CASE("degenerate horizon at t = 1 is flagged") {
  const Spectrum s = eigendecompose(random_psd(5, 1));
  const auto h = sudden_stop_horizon(s, 5, 1.0, 0.05);
  CHECK(h.value == 1);
  CHECK(h.bound_violated_at_one);
}

TEST_CASE("local Rademacher complexity") {
  const Eigen::MatrixXd k = random_psd(10, 42);
  const Spectrum s = eigendecompose(k);
  const double top = s.eigenvalues(0) / 10.0;
  CHECK(local_rademacher(s, 10, std::sqrt(top) * 1.01) ==
        doctest::Approx(std::sqrt(k.trace() / 10.0 / 10.0)).epsilon(1e-12));
  CHECK(local_rademacher(s, 10, 1e-9) <= 1e-9);
  CHECK_THROWS_AS(local_rademacher(s, 10, 0.0), std::invalid_argument);
  double prev = 0.0;
  for (double eps = 1e-4; eps < 10.0; eps *= 1.7) {
    double brute = 0.0;
    for (int i = 0; i < 10; ++i) brute += std::min(s.eigenvalues(i) / 10.0, eps * eps);
    const double r = local_rademacher(s, 10, eps);
    CHECK(r == doctest::Approx(std::sqrt(brute / 10.0)).epsilon(1e-13));
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("spectral tables agree with the free functions") {
  const Spectrum s = eigendecompose(random_psd(15, 77));
  const SpectralTables tables(s, 15, 1.0, 0.05, 30);
  for (int t = 1; t <= 30; ++t) {
    CHECK(tables.effective_dimension(t) == doctest::Approx(empirical_effective_dimension(s, 15, 1.0 / t)));
    CHECK(tables.w(t) == doctest::Approx(variance_proxy_w(s, 15, t)));
    CHECK(tables.u(t) == doctest::Approx(concentration_u(s, 15, t, 0.05)));
  }
  CHECK(tables.sudden_stop() >= 1);
  CHECK(tables.sudden_stop() <= 30);
  std::ostringstream csv;
  tables.write_csv(csv);
  CHECK(csv.str().rfind("t,N_D,W,U\n", 0) == 0);
  CHECK_THROWS_AS(SpectralTables(s, 14, 1.0, 0.05, 3), std::invalid_argument);
  CHECK_THROWS_AS(SpectralTables(s, 15, 1.0, 0.05, 0), std::invalid_argument);
}
