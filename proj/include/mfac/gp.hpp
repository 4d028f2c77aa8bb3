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

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "mfac/kernels.hpp"

namespace mfac {

/// Squared-exponential ARD hyperparameters, in standardized target units.
struct KernelParams {
  double signal_var = 1.0;
  std::vector<double> lengthscales;
  double noise_var = 1e-6;

  bool operator==(const KernelParams&) const = default;
};

inline constexpr double kMinLengthscale = 1e-3;
inline constexpr double kMaxLengthscale = 1e3;
inline constexpr double kMinSignalVar = 1e-8;
inline constexpr double kMaxSignalVar = 1e6;
inline constexpr double kMinNoiseVar = 1e-12;
inline constexpr double kMaxNoiseVar = 1e3;
inline constexpr double kInitialJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Hyperparameters plus the target standardization they were fitted under.
/// Conditioning on new data with a frozen GpHyper keeps the predictive
/// variance monotone.
struct GpHyper {
  KernelParams params;
  double y_mean = 0.0;
  double y_std = 1.0;

  bool operator==(const GpHyper&) const = default;
};

struct GpFitOptions {
  double noise_floor = 0.0;  // lower bound on fitted noise, objective units squared
  std::uint64_t seed = 0;
  int n_starts = 8;
  int max_evals_per_start = 300;
  ExecPolicy policy = default_policy();
};

/// Fitted GP regression model. Immutable once built; predict is const and
/// safe to call concurrently.
class GpModel {
 public:
  GpModel() = default;

  Prediction predict(std::span<const double> x) const;
  std::vector<Prediction> predict_many(const Eigen::MatrixXd& Q, ExecPolicy policy = default_policy()) const;

  /// Same hyperparameters and standardization, one more observation.
  GpModel with_observation(std::span<const double> x, double y, double noise_var = 0.0) const;

  const KernelParams& params() const { return hyper_.params; }
  const GpHyper& hyper() const { return hyper_; }
  double y_mean() const { return hyper_.y_mean; }
  double y_std() const { return hyper_.y_std; }
  std::size_t dim() const { return static_cast<std::size_t>(X_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(X_.rows()); }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& y_standardized() const { return y_; }
  const Eigen::VectorXd& obs_noise() const { return obs_noise_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  // Log marginal likelihood of the standardized targets under params().
  double log_marginal_likelihood() const { return lml_; }

  friend GpModel condition_gp(const Eigen::MatrixXd& X, std::span<const double> y, std::span<const double> obs_noise,
                              const GpHyper& hyper);

 private:
  GpHyper hyper_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;          // standardized targets
  Eigen::VectorXd obs_noise_;  // per-point extra noise, standardized units
  Eigen::MatrixXd chol_;       // lower factor of K + (noise_var + obs_noise + jitter) I
  Eigen::VectorXd alpha_;
  double jitter_ = kInitialJitter;
  double lml_ = 0.0;
};

/// Maximizes the log marginal likelihood over log-hyperparameters by pattern
/// search from n_starts quasi-random starts. `obs_noise` optionally gives a
/// known per-observation noise variance in objective units.
GpModel fit_gp(const Eigen::MatrixXd& X, std::span<const double> y, const GpFitOptions& opts,
               std::span<const double> obs_noise = {});

/// Builds the model for fixed hyperparameters and standardization.
GpModel condition_gp(const Eigen::MatrixXd& X, std::span<const double> y, std::span<const double> obs_noise,
                     const GpHyper& hyper);

/// Gaussian log marginal likelihood of y (taken as given, no standardization)
/// under params. Throws IllConditioned if the jitter ladder is exhausted.
double log_marginal_likelihood(const KernelParams& params, const Eigen::MatrixXd& X, std::span<const double> y,
                               std::span<const double> obs_noise = {}, ExecPolicy policy = ExecPolicy::serial);

// Target standardization used by fit_gp: population mean and std, std := 1
// below 1e-12.
std::pair<double, double> standardization(std::span<const double> y);

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, std::size_t dim);

}  // namespace mfac
