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

#include "kgdsel/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

#include <boost/math/special_functions/legendre.hpp>

#include "kgdsel/csv.hpp"
#include "kgdsel/errors.hpp"
#include "kgdsel/random.hpp"

namespace kgdsel {

int target_dimension(Target target) { return target == Target::kG1 ? 1 : 3; }

std::string target_name(Target target) { return target == Target::kG1 ? "g1" : "g2"; }

Target parse_target(const std::string& name) {
  if (name == "g1") return Target::kG1;
  if (name == "g2") return Target::kG2;
  throw std::invalid_argument("unknown target '" + name + "' (expected g1 or g2)");
}

double target_g1(double x) { return x <= 0.5 ? x : 1.0 - x; }

double target_g2(std::span<const double> x) {
  double r2 = 0.0;
  for (const double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  if (r > 1.0) return 0.0;
  const double a = 1.0 - r;
  const double a3 = a * a * a;
  return a3 * a3 * (35.0 * r2 + 18.0 * r + 3.0);
}

double evaluate_target(Target target, std::span<const double> x) {
  if (static_cast<int>(x.size()) != target_dimension(target))
    throw std::invalid_argument("target " + target_name(target) + " evaluated at a point of wrong dimension");
  return target == Target::kG1 ? target_g1(x[0]) : target_g2(x);
}

Dataset Dataset::subset(std::span<const int> indices) const {
  Dataset out;
  out.meta = meta;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), inputs.cols());
  out.outputs.resize(static_cast<Eigen::Index>(indices.size()));
  if (clean_targets) out.clean_targets = Eigen::VectorXd(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(indices[k]);
    if (i < 0 || i >= inputs.rows()) throw std::out_of_range("dataset subset index out of range");
    const auto r = static_cast<Eigen::Index>(k);
    out.inputs.row(r) = inputs.row(i);
    out.outputs(r) = outputs(i);
    if (clean_targets) (*out.clean_targets)(r) = (*clean_targets)(i);
  }
  return out;
}

namespace {

Dataset sample_uniform_cube(Target target, int n, double upper, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample size must be at least 1");
  const int d = target_dimension(target);
  std::mt19937_64 rng(derive_seed(seed, "inputs"));
  std::uniform_real_distribution<double> uniform(0.0, upper);
  Dataset data;
  data.inputs.resize(n, d);
  data.outputs.resize(n);
  Eigen::VectorXd clean(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) data.inputs(i, k) = uniform(rng);
    clean(i) = evaluate_target(target, {data.inputs.data() + static_cast<std::ptrdiff_t>(i) * d,
                                        static_cast<std::size_t>(d)});
  }
  data.outputs = clean;
  data.clean_targets = std::move(clean);
  data.meta.target_id = target_name(target);
  data.meta.seed = seed;
  return data;
}

}  // namespace

Dataset gen_dataset(Target target, int n, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be non-negative");
  Dataset data = sample_uniform_cube(target, n, 1.0, seed);
  data.meta.noise_std = noise_std;
  if (noise_std > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, "noise"));
    std::normal_distribution<double> noise(0.0, noise_std);
    for (int i = 0; i < n; ++i) data.outputs(i) += noise(rng);
  }
  return data;
}

Dataset gen_shifted_testset(Target target, int m, const ShiftConfig& shift, std::uint64_t seed) {
  if (!(shift.b >= 1.0)) throw std::invalid_argument("shift parameter b must be >= 1");
  Dataset data = sample_uniform_cube(target, m, shift.b, seed);
  data.meta.shift_b = shift.b;
  return data;
}

Dataset gen_testset(Target target, int m, std::uint64_t seed) { return gen_shifted_testset(target, m, {}, seed); }

double kde_density(std::span<const double> samples, double bandwidth, double x) {
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (const double s : samples) {
    const double z = (x - s) / bandwidth;
    sum += std::exp(-0.5 * z * z);
  }
  return norm * sum;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("quadrature order must be positive");
  const auto zeros = boost::math::legendre_p_zeros<double>(order);  // non-negative half
  std::vector<double> nodes;
  std::vector<double> weights;
  for (const double x : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(order, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes.push_back(x);
    weights.push_back(w);
    if (x != 0.0) {
      nodes.push_back(-x);
      weights.push_back(w);
    }
  }
  return {nodes, weights};
}

double kl_divergence(std::span<const double> p_samples, std::span<const double> q_samples, const ShiftConfig& cfg) {
  if (p_samples.size() < 2 || q_samples.size() < 2)
    throw std::invalid_argument("kl_divergence needs at least two samples per distribution");
  if (!(cfg.kde_bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  const auto [pmin, pmax] = std::minmax_element(p_samples.begin(), p_samples.end());
  const auto [qmin, qmax] = std::minmax_element(q_samples.begin(), q_samples.end());
  if (*pmin == *pmax || *qmin == *qmax)
    throw std::invalid_argument("kl_divergence: degenerate sample (all points identical)");

  constexpr double kFloor = 1e-12;
  const double h = cfg.kde_bandwidth;
  const double lo = std::min(*pmin, *qmin) - 3.0 * h;
  const double hi = std::max(*pmax, *qmax) + 3.0 * h;
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  const auto [nodes, weights] = gauss_legendre(cfg.quadrature_order);
  double total = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double x = mid + half * nodes[k];
    const double p = std::max(kde_density(p_samples, h, x), kFloor);
    const double q = std::max(kde_density(q_samples, h, x), kFloor);
    total += weights[k] * p * std::log(p / q);
  }
  return std::max(0.0, half * total);
}

std::string geomagnetic_column(GeomagneticValue value) {
  return value == GeomagneticValue::kTotalIntensity ? "total_intensity" : "declination";
}

GeomagneticValue parse_geomagnetic_value(const std::string& name) {
  if (name == "total_intensity") return GeomagneticValue::kTotalIntensity;
  if (name == "declination") return GeomagneticValue::kDeclination;
  throw std::invalid_argument("unknown geomagnetic value column '" + name + "'");
}

Dataset load_geomagnetic_csv(const std::filesystem::path& path, GeomagneticValue value,
                             const std::vector<std::pair<double, double>>* ranges) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  return read_geomagnetic_csv(in, value, ranges);
}

Dataset read_geomagnetic_csv(std::istream& in, GeomagneticValue value,
                             const std::vector<std::pair<double, double>>* ranges) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("empty CSV: missing header");
  const auto header = csv::split_line(line);
  const std::vector<std::string> wanted = {"phi", "theta", "h", geomagnetic_column(value)};
  std::vector<std::size_t> columns;
  for (const auto& name : wanted) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IngestionError("missing required column '" + name + "'");
    columns.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<std::array<double, 4>> rows;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++row_index;
    const auto fields = csv::split_line(line);
    std::array<double, 4> row{};
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] >= fields.size())
        throw IngestionError("row has too few fields for column '" + wanted[k] + "'", row_index);
      const auto parsed = csv::parse_double(fields[columns[k]]);
      if (!parsed || !std::isfinite(*parsed))
        throw IngestionError("unparsable value '" + fields[columns[k]] + "' in column '" + wanted[k] + "'",
                             row_index);
      row[k] = *parsed;
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw IngestionError("CSV has a header but no data rows");

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.inputs.resize(n, 3);
  data.outputs.resize(n);
  data.meta.target_id = geomagnetic_column(value);
  if (ranges) {
    if (ranges->size() != 3) throw std::invalid_argument("normalization ranges must cover 3 columns");
    data.meta.input_ranges = *ranges;
  } else {
    for (int k = 0; k < 3; ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& r : rows) {
        lo = std::min(lo, r[static_cast<std::size_t>(k)]);
        hi = std::max(hi, r[static_cast<std::size_t>(k)]);
      }
      data.meta.input_ranges.emplace_back(lo, hi);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (int k = 0; k < 3; ++k) {
      const auto [lo, hi] = data.meta.input_ranges[static_cast<std::size_t>(k)];
      // A constant column maps to the centre of [-1, 1].
      data.inputs(i, k) = hi > lo ? 2.0 * (r[static_cast<std::size_t>(k)] - lo) / (hi - lo) - 1.0 : 0.0;
    }
    data.outputs(i) = r[3];
  }
  data.clean_targets = data.outputs;
  return data;
}

PointMatrix denormalize_inputs(const Dataset& data) {
  if (static_cast<int>(data.meta.input_ranges.size()) != data.dimension())
    throw std::invalid_argument("dataset carries no normalization ranges");
  PointMatrix out(data.inputs.rows(), data.inputs.cols());
  for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) {
    const auto [lo, hi] = data.meta.input_ranges[static_cast<std::size_t>(k)];
    out.col(k) = ((data.inputs.col(k).array() + 1.0) * (0.5 * (hi - lo)) + lo).matrix();
  }
  return out;
}

Dataset add_truncated_gaussian_noise(const Dataset& data, double sigma, double truncation, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
  if (!(truncation > 0.0)) throw std::invalid_argument("truncation must be positive");
  Dataset out = data;
  if (!out.clean_targets) out.clean_targets = data.outputs;
  out.meta.noise_std = sigma;
  out.meta.seed = seed;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(derive_seed(seed, "truncated-noise"));
  std::normal_distribution<double> normal(0.0, sigma);
  const double limit = truncation * sigma;
  for (Eigen::Index i = 0; i < out.outputs.size(); ++i) {
    double e = normal(rng);
    while (std::abs(e) > limit) e = normal(rng);
    out.outputs(i) += e;
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (int k = 0; k < data.dimension(); ++k) out << 'x' << (k + 1) << ',';
  out << 'y' << (data.clean_targets ? ",clean" : "") << '\n';
  for (Eigen::Index i = 0; i < data.inputs.rows(); ++i) {
    for (Eigen::Index k = 0; k < data.inputs.cols(); ++k) out << csv::format_double(data.inputs(i, k)) << ',';
    out << csv::format_double(data.outputs(i));
    if (data.clean_targets) out << ',' << csv::format_double((*data.clean_targets)(i));
    out << '\n';
  }
}

}  // namespace kgdsel
