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

#include "mfac/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mfac/error.hpp"
#include "mfac/optim.hpp"

namespace mfac {

namespace {

struct Factorization {
  Eigen::MatrixXd L;
  double jitter = 0.0;
};

// Cholesky of K + diag(noise + extra + jitter). A positive diagonal is tried
// as is first; the jitter ladder 1e-10, 1e-9, ..., 1e-4 only rescues
// failures, so well-posed noise-free fits interpolate to rounding error.
Factorization factorize(const Eigen::MatrixXd& K, double noise_var, const Eigen::VectorXd& extra) {
  const Eigen::Index n = K.rows();
  const bool try_plain = noise_var > 0.0 || (n > 0 && extra.minCoeff() > 0.0);
  for (double jitter = try_plain ? 0.0 : kInitialJitter; jitter <= kMaxJitter * 1.000001;
       jitter = jitter == 0.0 ? kInitialJitter : jitter * 10.0) {
    Eigen::MatrixXd A = K;
    for (Eigen::Index i = 0; i < n; ++i) A(i, i) += noise_var + extra(i) + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i) ok = std::isfinite(L(i, i)) && L(i, i) > 0.0;
    if (ok) return {std::move(L), jitter};
  }
  throw IllConditioned("regularized kernel matrix is not positive definite after jitter escalation to " +
                       std::to_string(kMaxJitter));
}

Eigen::VectorXd noise_vector(std::span<const double> obs_noise, Eigen::Index n, double scale) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (obs_noise.empty()) return v;
  if (static_cast<Eigen::Index>(obs_noise.size()) != n) {
    throw InvalidArgument("obs_noise length does not match the number of observations");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(obs_noise[i] >= 0.0)) throw InvalidArgument("observation noise variance must be non-negative");
    v(i) = obs_noise[i] * scale;
  }
  return v;
}

double lml_from_factor(const Eigen::MatrixXd& L, const Eigen::VectorXd& y, Eigen::VectorXd* alpha_out) {
  const auto tri = L.triangularView<Eigen::Lower>();
  Eigen::VectorXd alpha = tri.solve(y);
  tri.transpose().solveInPlace(alpha);
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) logdet_half += std::log(L(i, i));
  const double n = static_cast<double>(y.size());
  const double lml = -0.5 * y.dot(alpha) - logdet_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
  if (alpha_out != nullptr) *alpha_out = std::move(alpha);
  return lml;
}

void check_inputs(const Eigen::MatrixXd& X, std::span<const double> y) {
  if (X.rows() == 0) throw InvalidArgument("GP needs at least one training point");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw InvalidArgument("GP training inputs and targets differ in length");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw InvalidArgument("GP targets must be finite");
  }
}

}  // namespace

std::pair<double, double> standardization(std::span<const double> y) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / static_cast<double>(y.size()));
  if (!(sd >= 1e-12)) sd = 1.0;
  return {mean, sd};
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) throw InvalidArgument("ragged point list");
    for (std::size_t j = 0; j < dim; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return M;
}

double log_marginal_likelihood(const KernelParams& params, const Eigen::MatrixXd& X, std::span<const double> y,
                               std::span<const double> obs_noise, ExecPolicy policy) {
  check_inputs(X, y);
  if (params.lengthscales.size() != static_cast<std::size_t>(X.cols())) {
    throw InvalidArgument("lengthscale count does not match input dimension");
  }
  const Eigen::MatrixXd K = kernels::covariance(X, params.signal_var, params.lengthscales, policy);
  const auto fac = factorize(K, params.noise_var, noise_vector(obs_noise, X.rows(), 1.0));
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return lml_from_factor(fac.L, yv, nullptr);
}

GpModel condition_gp(const Eigen::MatrixXd& X, std::span<const double> y, std::span<const double> obs_noise,
                     const GpHyper& hyper) {
  check_inputs(X, y);
  if (hyper.params.lengthscales.size() != static_cast<std::size_t>(X.cols())) {
    throw InvalidArgument("lengthscale count does not match input dimension");
  }
  GpModel m;
  m.hyper_ = hyper;
  m.X_ = X;
  m.y_.resize(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) m.y_(i) = (y[i] - hyper.y_mean) / hyper.y_std;
  m.obs_noise_ = noise_vector(obs_noise, X.rows(), 1.0 / (hyper.y_std * hyper.y_std));
  const Eigen::MatrixXd K =
      kernels::covariance(X, hyper.params.signal_var, hyper.params.lengthscales, ExecPolicy::serial);
  auto fac = factorize(K, hyper.params.noise_var, m.obs_noise_);
  m.chol_ = std::move(fac.L);
  m.jitter_ = fac.jitter;
  m.lml_ = lml_from_factor(m.chol_, m.y_, &m.alpha_);
  return m;
}

GpModel fit_gp(const Eigen::MatrixXd& X, std::span<const double> y, const GpFitOptions& opts,
               std::span<const double> obs_noise) {
  check_inputs(X, y);
  if (!(opts.noise_floor >= 0.0)) throw InvalidArgument("noise_floor must be non-negative");
  const Eigen::Index n = X.rows();
  const std::size_t d = static_cast<std::size_t>(X.cols());
  if (d == 0) throw InvalidArgument("GP inputs need at least one dimension");

  if (opts.noise_floor == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if ((X.row(i) - X.row(j)).squaredNorm() > 1e-24) continue;
        const bool known_noise = !obs_noise.empty() && obs_noise[i] + obs_noise[j] > 0.0;
        if (!known_noise && std::abs(y[i] - y[j]) > 1e-12 * (1.0 + std::abs(y[i]))) {
          throw IllConditioned("duplicate training points " + std::to_string(j) + " and " + std::to_string(i) +
                               " have conflicting targets; raise the noise floor above zero");
        }
      }
    }
  }

  const auto [y_mean, y_std] = standardization(y);
  std::vector<double> ys(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ys[i] = (y[i] - y_mean) / y_std;
  const double inv_var = 1.0 / (y_std * y_std);
  std::vector<double> noise_std;
  if (!obs_noise.empty()) {
    noise_std.resize(obs_noise.size());
    for (std::size_t i = 0; i < obs_noise.size(); ++i) noise_std[i] = obs_noise[i] * inv_var;
  }
  const double noise_lo = std::min(std::max(kMinNoiseVar, opts.noise_floor * inv_var), kMaxNoiseVar);

  // theta = [log signal_var, log lengthscale_1..d, log noise_var]
  const std::size_t p = d + 2;
  std::vector<double> lower(p), upper(p);
  lower[0] = std::log(kMinSignalVar);
  upper[0] = std::log(kMaxSignalVar);
  for (std::size_t j = 0; j < d; ++j) {
    lower[1 + j] = std::log(kMinLengthscale);
    upper[1 + j] = std::log(kMaxLengthscale);
  }
  // A zero floor declares the targets noise-free: pin the noise at the
  // numerical minimum so the model interpolates.
  lower[p - 1] = std::log(noise_lo);
  upper[p - 1] = opts.noise_floor == 0.0 ? lower[p - 1] : std::log(kMaxNoiseVar);

  auto unpack = [&](std::span<const double> theta) {
    KernelParams kp;
    kp.signal_var = std::exp(theta[0]);
    kp.lengthscales.resize(d);
    for (std::size_t j = 0; j < d; ++j) kp.lengthscales[j] = std::exp(theta[1 + j]);
    kp.noise_var = std::max(std::exp(theta[p - 1]), noise_lo);
    return kp;
  };

  const Objective objective = [&](std::span<const double> theta) {
    try {
      return log_marginal_likelihood(unpack(theta), X, ys, noise_std, ExecPolicy::serial);
    } catch (const IllConditioned&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  // Starts cover a plausible sub-box; the search itself may leave it.
  const double start_noise_hi = std::max(10.0 * noise_lo, 1e-1);
  auto starts = halton_points(static_cast<std::size_t>(opts.n_starts), p, opts.seed);
  for (auto& s : starts) {
    s[0] = std::log(0.1) + s[0] * (std::log(10.0) - std::log(0.1));
    for (std::size_t j = 0; j < d; ++j) s[1 + j] = std::log(0.05) + s[1 + j] * (std::log(2.0) - std::log(0.05));
    s[p - 1] = std::log(noise_lo) + s[p - 1] * (upper[p - 1] > lower[p - 1] ? std::log(start_noise_hi) - std::log(noise_lo) : 0.0);
  }
  PatternSearchOptions ps;
  ps.initial_step = 1.0;
  ps.min_step = 1e-3;
  ps.max_evals = opts.max_evals_per_start;
  const auto results = kernels::multistart_maximize(objective, starts, lower, upper, ps, opts.policy);
  const std::size_t best = kernels::best_index(results);
  if (best == results.size()) {
    throw IllConditioned("no hyperparameter start produced a factorizable kernel matrix");
  }
  GpHyper hyper{unpack(results[best].x), y_mean, y_std};
  return condition_gp(X, y, obs_noise, hyper);
}

Prediction GpModel::predict(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw InvalidArgument("query has " + std::to_string(x.size()) + " coordinates, model expects " +
                          std::to_string(dim()));
  }
  const auto& kp = hyper_.params;
  const Eigen::Index n = X_.rows();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < X_.cols(); ++j) {
      const double z = (x[j] - X_(i, j)) / kp.lengthscales[j];
      r2 += z * z;
    }
    k(i) = kp.signal_var * std::exp(-0.5 * r2);
  }
  const double mean_s = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double var_s = std::max(kp.signal_var - v.squaredNorm(), 0.0);
  return {hyper_.y_mean + hyper_.y_std * mean_s, hyper_.y_std * hyper_.y_std * var_s};
}

std::vector<Prediction> GpModel::predict_many(const Eigen::MatrixXd& Q, ExecPolicy policy) const {
  const auto raw = kernels::predict_points(
      [this](std::span<const double> x) {
        const auto p = predict(x);
        return std::pair{p.mean, p.variance};
      },
      Q, policy);
  std::vector<Prediction> out;
  out.reserve(raw.size());
  for (const auto& [m, v] : raw) out.push_back({m, v});
  return out;
}

GpModel GpModel::with_observation(std::span<const double> x, double y, double noise_var) const {
  if (x.size() != dim()) throw InvalidArgument("observation dimension does not match the model");
  Eigen::MatrixXd X2(X_.rows() + 1, X_.cols());
  X2.topRows(X_.rows()) = X_;
  for (Eigen::Index j = 0; j < X_.cols(); ++j) X2(X_.rows(), j) = x[j];
  std::vector<double> y2(static_cast<std::size_t>(y_.size()) + 1);
  std::vector<double> n2(y2.size());
  const double var_scale = hyper_.y_std * hyper_.y_std;
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    y2[i] = hyper_.y_mean + hyper_.y_std * y_(i);
    n2[i] = obs_noise_(i) * var_scale;
  }
  y2.back() = y;
  n2.back() = noise_var;
  return condition_gp(X2, y2, n2, hyper_);
}

}  // namespace mfac
