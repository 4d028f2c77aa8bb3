// Copyright 2026 The mfac Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "mfac/kernels.hpp"
#include "mfac/optim.hpp"
#include "support.hpp"

using namespace mfac;

namespace {

// Straightforward SE-ARD entry, the definition the kernels must reproduce.
double se_ard(const Eigen::MatrixXd& A, Eigen::Index i, const Eigen::MatrixXd& B, Eigen::Index j, double s2,
              const std::vector<double>& ls) {
  double r2 = 0.0;
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    const double z = (A(i, k) - B(j, k)) / ls[static_cast<std::size_t>(k)];
    r2 += z * z;
  }
  return s2 * std::exp(-0.5 * r2);
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd M(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = u(rng);
  }
  return M;
}

}  // namespace

TEST_CASE("pattern search finds the maximum of a smooth bowl") {
  const Objective f = [](std::span<const double> x) {
    return -(x[0] - 0.3) * (x[0] - 0.3) - 2.0 * (x[1] - 0.8) * (x[1] - 0.8);
  };
  const std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
  PatternSearchOptions opts;
  opts.max_evals = 2000;
  const auto r = pattern_search_max(f, {0.9, 0.1}, lo, hi, opts);
  CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(r.evals <= opts.max_evals);
}

TEST_CASE("pattern search respects bounds and the eval cap") {
  const Objective f = [](std::span<const double> x) { return x[0]; };
  const std::vector<double> lo{0.0}, hi{1.0};
  PatternSearchOptions opts;
  opts.max_evals = 7;
  const auto r = pattern_search_max(f, {2.0}, lo, hi, opts);
  CHECK(r.x[0] <= 1.0);
  CHECK(r.evals <= 7);
}

TEST_CASE("pattern search never moves onto excluded points") {
  // -inf marks a forbidden band; start outside it.
  const Objective f = [](std::span<const double> x) {
    if (x[0] > 0.4 && x[0] < 0.6) return -std::numeric_limits<double>::infinity();
    return x[0];
  };
  const std::vector<double> lo{0.0}, hi{1.0};
  const auto r = pattern_search_max(f, {0.1}, lo, hi, PatternSearchOptions{});
  CHECK(std::isfinite(r.value));
  CHECK_FALSE((r.x[0] > 0.4 && r.x[0] < 0.6));
}

TEST_CASE("halton points are deterministic, in range and well spread") {
  const auto a = halton_points(64, 3, 11);
  CHECK(a == halton_points(64, 3, 11));
  CHECK_FALSE(a == halton_points(64, 3, 12));
  for (const auto& p : a) {
    for (double v : p) CHECK((v >= 0.0 && v < 1.0));
  }
  // First coordinate is a shifted van der Corput sequence starting at index 1:
  // its first 63 entries occupy 63 distinct 1/64 bins.
  std::set<int> bins;
  for (std::size_t i = 0; i < 63; ++i) bins.insert(static_cast<int>(a[i][0] * 64));
  CHECK(bins.size() == 63);
  const auto skipped = halton_points(4, 3, 11, 60);
  for (std::size_t i = 0; i < 4; ++i) CHECK(skipped[i] == a[60 + i]);
}

TEST_CASE("mix_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a) {
    for (std::uint64_t b = 0; b < 5; ++b) seen.insert(mix_seed(a, b, 0));
  }
  CHECK(seen.size() == 100);
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
}

TEST_CASE("covariance kernels match the definition and agree bit for bit") {
  std::mt19937_64 rng(3);
  const std::vector<double> ls{0.3, 1.7, 0.05};
  const Eigen::MatrixXd A = random_matrix(rng, 37, 3);
  const Eigen::MatrixXd B = random_matrix(rng, 23, 3);
  const auto cs = kernels::serial::cross_covariance(A, B, 1.3, ls);
  const auto co = kernels::omp::cross_covariance(A, B, 1.3, ls);
  REQUIRE(cs.rows() == 37);
  REQUIRE(cs.cols() == 23);
  for (Eigen::Index i = 0; i < 37; ++i) {
    for (Eigen::Index j = 0; j < 23; ++j) {
      CHECK(cs(i, j) == doctest::Approx(se_ard(A, i, B, j, 1.3, ls)).epsilon(1e-14));
      CHECK(cs(i, j) == co(i, j));
    }
  }
  const auto ks = kernels::serial::covariance(A, 0.7, ls);
  const auto ko = kernels::omp::covariance(A, 0.7, ls);
  CHECK(ks == ko);
  CHECK(ks.isApprox(ks.transpose(), 0.0));
  for (Eigen::Index i = 0; i < 37; ++i) CHECK(ks(i, i) == 0.7);
}

TEST_CASE("multistart and batch prediction agree across policies") {
  const Objective f = [](std::span<const double> x) { return std::sin(7.0 * x[0]) * std::cos(3.0 * x[1]); };
  const auto starts = halton_points(16, 2, 4);
  const std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
  const auto rs = kernels::serial::multistart_maximize(f, starts, lo, hi, PatternSearchOptions{});
  const auto ro = kernels::omp::multistart_maximize(f, starts, lo, hi, PatternSearchOptions{});
  REQUIRE(rs.size() == ro.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    CHECK(rs[i].x == ro[i].x);
    CHECK(rs[i].value == ro[i].value);
    CHECK(rs[i].evals == ro[i].evals);
  }
  const std::size_t best = kernels::best_index(rs);
  for (const auto& r : rs) CHECK(r.value <= rs[best].value);

  std::mt19937_64 rng(8);
  const Eigen::MatrixXd Q = random_matrix(rng, 101, 2);
  const PointPredictor p = [](std::span<const double> x) { return std::make_pair(x[0] + x[1], x[0] * x[1]); };
  CHECK(kernels::serial::predict_points(p, Q) == kernels::omp::predict_points(p, Q));
}

TEST_CASE("best_index prefers the earliest of equal values and skips non-finite ones") {
  std::vector<LocalResult> r(4);
  r[0].value = -std::numeric_limits<double>::infinity();
  r[1].value = 2.0;
  r[2].value = 2.0;
  r[3].value = std::nan("");
  CHECK(kernels::best_index(r) == 1);
  r[1].value = r[2].value = -std::numeric_limits<double>::infinity();
  CHECK(kernels::best_index(r) == r.size());
}

TEST_CASE("default policy can be switched") {
  const ExecPolicy before = default_policy();
  set_default_policy(ExecPolicy::serial);
  CHECK(default_policy() == ExecPolicy::serial);
  set_default_policy(ExecPolicy::parallel);
  CHECK(default_policy() == ExecPolicy::parallel);
  set_default_policy(before);
}
