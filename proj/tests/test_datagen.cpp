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
#include <numbers>
#include <random>
#include <sstream>

#include "kgdsel/datagen.hpp"
#include "kgdsel/errors.hpp"

using namespace kgdsel;

namespace {

double sample_std(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

std::vector<double> uniform_sample(int m, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> out(static_cast<std::size_t>(m));
  for (auto& v : out) v = u(rng);
  return out;
}

double g2_at_radius(double r) {
  const std::array<double, 3> x{r / std::sqrt(3.0), r / std::sqrt(3.0), r / std::sqrt(3.0)};
  return target_g2(x);
}

}  // namespace

TEST_CASE("target functions") {
  CHECK(target_g1(0.25) == 0.25);
  CHECK(target_g1(0.5) == 0.5);
  CHECK(target_g1(0.75) == 0.25);
  CHECK(target_g1(std::nextafter(0.5, 1.0)) == doctest::Approx(0.5));

  CHECK(target_g2(std::array{0.0, 0.0, 0.0}) == 3.0);
  CHECK(target_g2(std::array{1.0, 0.0, 0.0}) == 0.0);
  CHECK(target_g2(std::array{0.0, 0.6, 0.8}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(target_g2(std::array{0.5, 0.0, 0.0}) == 0.32421875);
  CHECK(target_g2(std::array{0.0, 0.3, 0.4}) == doctest::Approx(0.32421875).epsilon(1e-14));
  CHECK(target_g2(std::array{0.9, 0.9, 0.0}) == 0.0);
  CHECK(target_g2(std::array{1.0, 1.0, 1.0}) == 0.0);

  // Smooth at the support boundary: value and radial slope vanish from both sides.
  const double h = 1e-4;
  CHECK(std::abs(g2_at_radius(1.0)) <= 1e-15);
  CHECK(std::abs((g2_at_radius(1.0) - g2_at_radius(1.0 - h)) / h) <= 1e-5);
  CHECK(std::abs((g2_at_radius(1.0 + h) - g2_at_radius(1.0)) / h) <= 1e-5);

  CHECK(evaluate_target(Target::kG1, std::array{0.8}) == doctest::Approx(0.2));
  CHECK_THROWS_AS(evaluate_target(Target::kG1, std::array{0.1, 0.2}), std::invalid_argument);
  CHECK(target_dimension(Target::kG1) == 1);
  CHECK(target_dimension(Target::kG2) == 3);
  CHECK(parse_target(target_name(Target::kG2)) == Target::kG2);
  CHECK_THROWS_AS(parse_target("g3"), std::invalid_argument);
}

TEST_CASE("gen_dataset") {
  const Dataset a = gen_dataset(Target::kG2, 200, 0.6, 17);
  CHECK(a.size() == 200);
  CHECK(a.dimension() == 3);
  CHECK(a.inputs.minCoeff() >= 0.0);
  CHECK(a.inputs.maxCoeff() < 1.0);
  REQUIRE(a.clean_targets);
  for (int i = 0; i < a.size(); ++i) {
    const Eigen::RowVector3d row = a.inputs.row(i);
    CHECK((*a.clean_targets)(i) == target_g2(std::span<const double>(row.data(), 3)));
  }
  CHECK(a.meta.target_id == "g2");
  CHECK(a.meta.noise_std == 0.6);
  CHECK(a.meta.seed == 17);

  const Dataset b = gen_dataset(Target::kG2, 200, 0.6, 17);
  CHECK(a.inputs == b.inputs);
  CHECK(a.outputs == b.outputs);
  CHECK(gen_dataset(Target::kG2, 200, 0.6, 18).outputs != a.outputs);

  const Dataset clean = gen_dataset(Target::kG1, 50, 0.0, 3);
  CHECK(clean.outputs == *clean.clean_targets);

  const Dataset big = gen_dataset(Target::kG1, 100000, 0.6, 5);
  const double s = sample_std(big.outputs - *big.clean_targets);
  CHECK(s >= 0.594);
  CHECK(s <= 0.606);

  CHECK_THROWS_AS(gen_dataset(Target::kG1, 0, 0.6, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_dataset(Target::kG1, 5, -1.0, 1), std::invalid_argument);

  const std::vector<int> idx{4, 0, 4};
  const Dataset sub = a.subset(idx);
  CHECK(sub.size() == 3);
  CHECK(sub.inputs.row(0) == a.inputs.row(4));
  CHECK(sub.outputs(1) == a.outputs(0));
  CHECK((*sub.clean_targets)(2) == (*a.clean_targets)(4));
  const std::vector<int> bad{200};
  CHECK_THROWS_AS(a.subset(bad), std::out_of_range);
}

TEST_CASE("shifted test sets") {
  const Dataset plain = gen_testset(Target::kG1, 300, 9);
  ShiftConfig unit;
  const Dataset same = gen_shifted_testset(Target::kG1, 300, unit, 9);
  CHECK(plain.inputs == same.inputs);
  CHECK(plain.outputs == same.outputs);
  CHECK(plain.outputs == *plain.clean_targets);

  ShiftConfig wide;
  wide.b = 1.5;
  const Dataset s = gen_shifted_testset(Target::kG1, 60000, wide, 2);
  CHECK(s.meta.shift_b == 1.5);
  CHECK(s.inputs.maxCoeff() <= 1.5);
  const double frac = (s.inputs.array() > 1.0).cast<double>().mean();
  CHECK(frac == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  for (int i = 0; i < 50; ++i) CHECK(s.outputs(i) == target_g1(s.inputs(i, 0)));
  CHECK(gen_shifted_testset(Target::kG1, 100, wide, 2).inputs == gen_shifted_testset(Target::kG1, 100, wide, 2).inputs);

  const Dataset s3 = gen_shifted_testset(Target::kG2, 500, wide, 3);
  CHECK(s3.dimension() == 3);
  CHECK(s3.inputs.maxCoeff() > 1.0);
  wide.b = 0.9;
  CHECK_THROWS_AS(gen_shifted_testset(Target::kG1, 10, wide, 0), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  for (int order : {1, 2, 5, 16, 64}) {
    const auto [nodes, weights] = gauss_legendre(order);
    REQUIRE(static_cast<int>(nodes.size()) == order);
    for (int p = 0; p <= 2 * order - 1 && p <= 20; ++p) {
      double sum = 0.0;
      for (int i = 0; i < order; ++i) sum += weights[static_cast<std::size_t>(i)] * std::pow(nodes[static_cast<std::size_t>(i)], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("KDE density") {
  const std::vector<double> one{0.3};
  CHECK(kde_density(one, 0.1, 0.3) == doctest::Approx(1.0 / (0.1 * std::sqrt(2.0 * std::numbers::pi))));
  const std::vector<double> pts = uniform_sample(50, 1.0, 1);
  double integral = 0.0;
  for (int i = 0; i < 4000; ++i) integral += kde_density(pts, 0.05, -1.0 + (i + 0.5) * 3.0 / 4000) * 3.0 / 4000;
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("KL divergence calibration") {
  const ShiftConfig cfg;
  const auto p = uniform_sample(5000, 1.0, 11);
  const auto q = uniform_sample(5000, 1.5, 12);
  const double forward = kl_divergence(p, q, cfg);
  CHECK(std::abs(forward - std::log(1.5)) <= 0.08);
  CHECK(kl_divergence(p, p, cfg) <= 0.01);
  CHECK(kl_divergence(p, p, cfg) >= 0.0);
  const double backward = kl_divergence(q, p, cfg);
  CHECK(std::abs(backward - forward) > 0.05);
  CHECK(std::isfinite(backward));

  const auto p2 = uniform_sample(3000, 1.0, 13);
  CHECK(kl_divergence(p, p2, cfg) >= 0.0);
  CHECK(kl_divergence(p, p2, cfg) <= 0.02);

  const std::vector<double> single{0.5};
  const std::vector<double> flat{0.5, 0.5, 0.5};
  CHECK_THROWS_AS(kl_divergence(single, q, cfg), std::invalid_argument);
  CHECK_THROWS_AS(kl_divergence(p, flat, cfg), std::invalid_argument);
}

TEST_CASE("geomagnetic CSV ingestion") {
  const std::string text =
      "id,phi,theta,h,total_intensity,declination\n"
      "a,10,100,0.5,45000,-3\n"
      "b,-20,140,1.5,47000,2\n"
      "\n"
      "c,40,120,1.0,46000,0.5\n";
  std::istringstream in(text);
  const Dataset d = read_geomagnetic_csv(in, GeomagneticValue::kTotalIntensity);
  REQUIRE(d.size() == 3);
  CHECK(d.dimension() == 3);
  CHECK(d.inputs.col(0).minCoeff() == -1.0);
  CHECK(d.inputs.col(0).maxCoeff() == 1.0);
  CHECK(d.inputs(1, 0) == -1.0);
  CHECK(d.inputs(2, 0) == 1.0);
  CHECK(d.inputs(0, 0) == doctest::Approx(0.0));
  CHECK(d.inputs(0, 1) == -1.0);
  CHECK(d.inputs(1, 1) == 1.0);
  CHECK(d.inputs(2, 2) == doctest::Approx(0.0));
  CHECK(d.outputs(1) == 47000.0);
  REQUIRE(d.clean_targets);

  const PointMatrix raw = denormalize_inputs(d);
  const Eigen::Matrix3d expected{{10, 100, 0.5}, {-20, 140, 1.5}, {40, 120, 1.0}};
  CHECK((raw - expected).cwiseAbs().maxCoeff() <= 1e-12);

  std::istringstream decl(text);
  const Dataset dd = read_geomagnetic_csv(decl, GeomagneticValue::kDeclination);
  CHECK(dd.outputs(0) == -3.0);
  CHECK(dd.meta.target_id == geomagnetic_column(GeomagneticValue::kDeclination));

  std::istringstream reuse("phi,theta,h,total_intensity\n25,120,1.0,1\n");
  const Dataset r = read_geomagnetic_csv(reuse, GeomagneticValue::kTotalIntensity, &d.meta.input_ranges);
  CHECK(r.inputs(0, 0) == doctest::Approx(0.5));
  CHECK(r.inputs(0, 1) == doctest::Approx(0.0));

  SUBCASE("missing column is named") {
    std::istringstream bad("phi,theta,total_intensity\n1,2,3\n");
    try {
      read_geomagnetic_csv(bad, GeomagneticValue::kTotalIntensity);
      FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
      CHECK(std::string(e.what()).find("'h'") != std::string::npos);
      CHECK_FALSE(e.row());
    }
  }
  SUBCASE("bad rows report their index") {
    std::istringstream bad("phi,theta,h,total_intensity\n1,2,3,4\n1,2,x,4\n");
    try {
      read_geomagnetic_csv(bad, GeomagneticValue::kTotalIntensity);
      FAIL("expected an ingestion error");
    } catch (const IngestionError& e) {
      CHECK(e.row() == 2u);
    }
    std::istringstream short_row("phi,theta,h,total_intensity\n1,2,3\n");
    CHECK_THROWS_AS(read_geomagnetic_csv(short_row, GeomagneticValue::kTotalIntensity), IngestionError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_geomagnetic_csv(empty, GeomagneticValue::kTotalIntensity), IngestionError);
    std::istringstream header_only("phi,theta,h,total_intensity\n");
    CHECK_THROWS_AS(read_geomagnetic_csv(header_only, GeomagneticValue::kTotalIntensity), IngestionError);
    CHECK_THROWS_AS(load_geomagnetic_csv("/nonexistent/geomag.csv", GeomagneticValue::kTotalIntensity),
                    IngestionError);
  }
  CHECK_THROWS_AS(parse_geomagnetic_value("inclination"), std::invalid_argument);
}

TEST_CASE("geomagnetic fixture file") {
  const Dataset d = load_geomagnetic_csv(std::string(KGDSEL_FIXTURES) + "/geomag_sample.csv",
                                         GeomagneticValue::kDeclination);
  CHECK(d.size() >= 20);
  CHECK(d.inputs.minCoeff() == -1.0);
  CHECK(d.inputs.maxCoeff() == 1.0);
}

TEST_CASE("truncated Gaussian noise") {
  Dataset base = gen_dataset(Target::kG1, 200000, 0.0, 1);
  base.clean_targets.reset();
  const Dataset noisy = add_truncated_gaussian_noise(base, 3.0, 2.0, 4);
  REQUIRE(noisy.clean_targets);
  CHECK(*noisy.clean_targets == base.outputs);
  const Eigen::VectorXd e = noisy.outputs - base.outputs;
  CHECK(e.cwiseAbs().maxCoeff() <= 6.0);
  const double ratio = sample_std(e) / 3.0;
  CHECK(ratio < 1.0);
  CHECK(ratio >= 0.85);
  CHECK(ratio <= 0.95);
  CHECK(noisy.meta.noise_std == 3.0);

  const Dataset loose = add_truncated_gaussian_noise(base, 1.0, 0.5, 4);
  CHECK((loose.outputs - base.outputs).cwiseAbs().maxCoeff() <= 0.5);

  const Dataset same = add_truncated_gaussian_noise(base, 0.0, 2.0, 4);
  CHECK(same.outputs == base.outputs);
  CHECK(add_truncated_gaussian_noise(base, 3.0, 2.0, 4).outputs == noisy.outputs);
  CHECK_THROWS_AS(add_truncated_gaussian_noise(base, -1.0, 2.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(add_truncated_gaussian_noise(base, 1.0, 0.0, 4), std::invalid_argument);
}

TEST_CASE("dataset CSV export") {
  const Dataset d = gen_dataset(Target::kG1, 3, 0.1, 2);
  std::ostringstream out;
  write_dataset_csv(out, d);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,y,clean");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto first = line.substr(0, line.find(','));
    CHECK(std::stod(first) == d.inputs(rows, 0));
    ++rows;
  }
  CHECK(rows == 3);
}
