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

#include <Eigen/Cholesky>
#include <cmath>

#include "mfac/error.hpp"
#include "mfac/mf_surrogate.hpp"
#include "support.hpp"

using namespace mfac;

namespace {

double lf_fn(std::span<const double> x) { return std::sin(3.0 * x[0]) + 2.0 + 0.5 * x[0] * x[0] * x[0]; }

std::vector<TrainingPoint> sample(int n, const std::function<double(double)>& f) {
  std::vector<TrainingPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) / n;
    pts.push_back({{x}, f(x), 0.0});
  }
  return pts;
}

// Normal-equations solution for y = sum_c r_c phi_c(x) lf(x) + sum_c d_c phi_c(x), phi = 1, x, x^2.
std::vector<double> normal_equations_1d(const std::vector<TrainingPoint>& pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd A(n, 6);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = pts[i].x[0];
    const double lf = lf_fn(pts[i].x);
    const double phi[3] = {1.0, x, x * x};
    for (int c = 0; c < 3; ++c) {
      A(i, c) = phi[c] * lf;
      A(i, 3 + c) = phi[c];
    }
    y(i) = pts[i].y;
  }
  const Eigen::VectorXd c = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  return {c.data(), c.data() + 6};
}

}  // namespace

TEST_CASE("exact linear bridge recovers scale and shift") {
  const LowerMean lower = lf_fn;
  BridgeFitOptions opts;
  opts.fit_residual_gp = false;
  for (auto [a, b] : {std::pair{2.5, -1.0}, std::pair{-0.7, 3.3}, std::pair{1.0, 0.0}}) {
    const auto hf = sample(6, [&](double x) { return a * lf_fn(std::vector<double>{x}) + b; });
    const Bridge br = fit_bridge(lower, hf, opts);
    CHECK(br.status == BridgeStatus::ok);
    CHECK(std::abs(br.rho.coeffs()[0] - a) <= 1e-8);
    CHECK(std::abs(br.delta.coeffs()[0] - b) <= 1e-8);
    CHECK(br.rss <= 1e-16);
  }
}

TEST_CASE("quadratic bridge matches the normal-equations oracle") {
  const LowerMean lower = lf_fn;
  const auto hf = sample(12, [](double x) { return (1.0 + x) * lf_fn(std::vector<double>{x}) + x * x; });
  BridgeFitOptions opts;
  opts.degree = 2;
  opts.fit_residual_gp = false;
  const Bridge br = fit_bridge(lower, hf, opts);
  const auto oracle = normal_equations_1d(hf);
  REQUIRE(br.degree == 2);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(br.rho.coeffs()[c] - oracle[c]) <= 1e-8);
    CHECK(std::abs(br.delta.coeffs()[c] - oracle[3 + c]) <= 1e-8);
  }
  // The generating coefficients are (1, 1, 0) and (0, 0, 1).
  CHECK(std::abs(br.rho.coeffs()[1] - 1.0) <= 1e-6);
  CHECK(std::abs(br.delta.coeffs()[2] - 1.0) <= 1e-6);
}

TEST_CASE("rank deficiency falls back to lower degree, then to a pure shift") {
  const LowerMean lower = lf_fn;
  BridgeFitOptions opts;
  opts.fit_residual_gp = false;
  opts.degree = 2;
  // Three points cannot determine six coefficients.
  const auto three = sample(3, [](double x) { return 2.0 * lf_fn(std::vector<double>{x}) + 1.0; });
  const Bridge reduced = fit_bridge(lower, three, opts);
  CHECK(reduced.status == BridgeStatus::reduced_degree);
  CHECK(reduced.degree == 0);
  CHECK(reduced.rho.coeffs()[0] == doctest::Approx(2.0));

  // A single point: only the shift is identifiable.
  const std::vector<TrainingPoint> one{{{0.4}, 7.0, 0.0}};
  opts.degree = 0;
  const Bridge shift = fit_bridge(lower, one, opts);
  CHECK(shift.status == BridgeStatus::shift_only);
  CHECK(shift.rho.coeffs()[0] == 1.0);
  CHECK(shift.delta.coeffs()[0] == doctest::Approx(7.0 - lf_fn(std::vector<double>{0.4})));
  CHECK(shift.residual_var == 0.0);

  // Constant low fidelity: the scale column duplicates the shift column.
  const LowerMean flat = [](std::span<const double>) { return 4.0; };
  const auto hf = sample(5, [](double x) { return x; });
  const Bridge degenerate = fit_bridge(flat, hf, opts);
  CHECK(degenerate.status == BridgeStatus::shift_only);
}

TEST_CASE("residual GP only with three or more points; otherwise sample variance") {
  const LowerMean lower = lf_fn;
  BridgeFitOptions opts;
  opts.degree = 0;
  std::vector<TrainingPoint> two{{{0.1}, 1.0, 0.0}, {{0.9}, 5.0, 0.0}};
  const Bridge b2 = fit_bridge(lower, two, opts);
  CHECK_FALSE(b2.residual_gp.has_value());
  std::vector<TrainingPoint> three = two;
  three.push_back({{0.5}, 0.0, 0.0});
  const Bridge b3 = fit_bridge(lower, three, opts);
  CHECK(b3.residual_gp.has_value());

  opts.fit_residual_gp = false;
  const Bridge b3v = fit_bridge(lower, three, opts);
  std::vector<double> r;
  for (const auto& p : three) r.push_back(p.y - (b3v.rho(p.x) * lf_fn(p.x) + b3v.delta(p.x)));
  const double m = (r[0] + r[1] + r[2]) / 3.0;
  const double s2 = ((r[0] - m) * (r[0] - m) + (r[1] - m) * (r[1] - m) + (r[2] - m) * (r[2] - m)) / 2.0;
  CHECK(b3v.residual_var == doctest::Approx(s2).epsilon(1e-12));
  CHECK_THROWS_AS(fit_bridge(lower, std::vector<TrainingPoint>{}, opts), MissingData);
}

TEST_CASE("automatic bridge degree") {
  CHECK(auto_bridge_degree(3, 1) == 0);
  CHECK(auto_bridge_degree(4, 1) == 1);
  CHECK(auto_bridge_degree(5, 2) == 0);
  CHECK(auto_bridge_degree(6, 2) == 1);
}

TEST_CASE("hierarchical prediction composes base GP and bridges") {
  const Domain d = Domain::unit(1);
  Eigen::MatrixXd X(3, 1);
  X << 0.1, 0.5, 0.9;
  const std::vector<double> y{1.0, 2.0, 0.5};
  const GpModel base = condition_gp(X, y, {}, GpHyper{{1.0, {0.3}, 1e-6}, 1.0, 0.5});
  Bridge b;
  b.rho = Polynomial(1, 1, {2.0, -1.0});
  b.delta = Polynomial::constant(1, 0.3);
  b.residual_var = 0.04;
  TrustPrior t1;
  t1.coeffs = {0.01, 0.0, 0.0};
  const MfSurrogate s(d, base, {b}, {TrustPrior{}, t1});
  const std::vector<double> u{0.37};
  const auto p0 = base.predict(u);
  const double rho = 2.0 - 0.37;
  const auto m1 = s.predict_model(u, 1);
  CHECK(m1.mean == doctest::Approx(rho * p0.mean + 0.3).epsilon(1e-14));
  CHECK(m1.variance == doctest::Approx(rho * rho * p0.variance + 0.04).epsilon(1e-14));
  CHECK(s.predict_unit(u, 1).variance == doctest::Approx(m1.variance + 0.01).epsilon(1e-14));
  // Trust is only added at the queried level.
  CHECK(s.predict_unit(u, 0).variance == doctest::Approx(p0.variance).epsilon(1e-14));
  CHECK_THROWS_AS(s.predict_model(u, 2), InvalidArgument);
}

TEST_CASE("recursive training, freezing and empty levels") {
  const Domain d({0.0}, {2.0});
  std::vector<std::vector<TrainingPoint>> data(2);
  for (int i = 0; i < 8; ++i) {
    const double u = (i + 0.5) / 8.0;
    data[0].push_back({{u}, std::sin(4.0 * u), 0.0});
  }
  for (double u : {0.2, 0.6, 0.9}) data[1].push_back({{u}, 2.0 * std::sin(4.0 * u) + 0.1 * u, 0.0});
  SurrogateFitOptions opts;
  opts.seed = 4;
  const auto trust = std::vector<TrustPrior>(2);
  const MfSurrogate s = fit_mf_surrogate(d, data, trust, opts);
  CHECK(s.levels() == 2);
  CHECK(s.bridges()[0].residual_gp.has_value());

  const SurrogateHyper h = s.hyper();
  SurrogateFitOptions frozen;
  frozen.frozen = &h;
  data[1].push_back({{0.4}, 2.0 * std::sin(1.6) + 0.04, 0.0});
  const MfSurrogate s2 = fit_mf_surrogate(d, data, trust, frozen);
  CHECK(s2.hyper().base == h.base);
  for (int q = 0; q <= 20; ++q) {
    const std::vector<double> u{q / 20.0};
    CHECK(s2.predict_model(u, 1).variance <= s.predict_model(u, 1).variance + 1e-12);
  }

  data[1].clear();
  CHECK_THROWS_AS(fit_mf_surrogate(d, data, trust, opts), MissingData);
  opts.empty_level_variance = 3.0;
  const MfSurrogate s3 = fit_mf_surrogate(d, data, trust, opts);
  const std::vector<double> u{0.3};
  CHECK(s3.predict_model(u, 1).mean == doctest::Approx(s3.predict_model(u, 0).mean));
  CHECK(s3.predict_model(u, 1).variance == doctest::Approx(s3.predict_model(u, 0).variance + 3.0));

  data[0].clear();
  CHECK_THROWS_AS(fit_mf_surrogate(d, data, trust, opts), MissingData);
}

TEST_CASE("placeholders collapse variance at the inserted point") {
  const Domain d = Domain::unit(1);
  std::vector<std::vector<TrainingPoint>> data(2);
  for (double u : {0.0, 0.3, 0.7, 1.0}) data[0].push_back({{u}, u * u, 0.0});
  for (double u : {0.1, 0.5, 0.8}) data[1].push_back({{u}, 2.0 * u * u - 0.2 * u, 0.0});
  MfSurrogate s = fit_mf_surrogate(d, data, std::vector<TrustPrior>(2), SurrogateFitOptions{});
  const std::vector<double> u{0.45};
  const double before0 = s.predict_model(u, 0).variance;
  const double mean0 = s.predict_model(u, 0).mean;
  s.add_placeholder(u, 0);
  CHECK(s.predict_model(u, 0).variance < before0);
  CHECK(s.predict_model(u, 0).mean == doctest::Approx(mean0).epsilon(1e-6));
}
