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

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mfac/domain.hpp"
#include "mfac/gp.hpp"
#include "mfac/polynomial.hpp"

namespace mfac {

/// One training sample in surrogate space: normalized coordinates and a
/// target already converted to the maximization convention.
struct TrainingPoint {
  std::vector<double> x;
  double y = 0.0;
  double noise_var = 0.0;
};

enum class BridgeStatus { ok, reduced_degree, shift_only };

/// Autoregressive link from level l to l+1:
///   y_{l+1}(x) = rho(x) * y_l(x) + delta(x) [+ residual GP]
struct Bridge {
  Polynomial rho;
  Polynomial delta;
  int degree = 0;
  std::optional<GpModel> residual_gp;
  // Residual variance used when no residual GP is fitted.
  double residual_var = 0.0;
  BridgeStatus status = BridgeStatus::ok;
  double rss = 0.0;
};

/// Frozen bridge state for conditioning without refitting.
struct BridgeHyper {
  Polynomial rho;
  Polynomial delta;
  int degree = 0;
  std::optional<GpHyper> residual;
  double residual_var = 0.0;
  BridgeStatus status = BridgeStatus::ok;
};

struct SurrogateHyper {
  GpHyper base;
  std::vector<BridgeHyper> bridges;
};

struct BridgeFitOptions {
  int degree = 0;
  bool fit_residual_gp = true;
  double noise_floor = 1e-8;
  std::uint64_t seed = 0;
  ExecPolicy policy = default_policy();
};

using LowerMean = std::function<double(std::span<const double>)>;

/// Least-squares fit of rho and delta (same degree) to the high-fidelity
/// targets, then an optional residual GP when at least 3 points exist.
/// Rank-deficient designs fall back to degree 0, then to rho = 1.
Bridge fit_bridge(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const BridgeFitOptions& opts);

/// Recomputes residuals against frozen coefficients and conditions the
/// frozen residual GP on them.
Bridge condition_bridge(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const BridgeHyper& frozen);

double residual_sum_of_squares(const LowerMean& lower_mean, std::span<const TrainingPoint> hf, const Polynomial& rho,
                               const Polynomial& delta);

/// The fidelity hierarchy: a GP on level 0 and one bridge per level above it.
class MfSurrogate {
 public:
  MfSurrogate(Domain domain, GpModel base, std::vector<Bridge> bridges, std::vector<TrustPrior> trust);

  std::size_t levels() const { return bridges_.size() + 1; }
  const Domain& domain() const { return domain_; }
  const GpModel& base() const { return base_; }
  const std::vector<Bridge>& bridges() const { return bridges_; }
  const std::vector<TrustPrior>& trust() const { return trust_; }

  /// Model mean and variance without the trust term.
  Prediction predict_model(std::span<const double> unit_x, int level) const;
  /// predict_model plus the queried level's trust variance.
  Prediction predict_unit(std::span<const double> unit_x, int level) const;

  /// Inserts the model's own mean at unit_x as a noise-free observation of
  /// `level`. Used on scratch copies while building a batch.
  void add_placeholder(std::span<const double> unit_x, int level);

  SurrogateHyper hyper() const;

 private:
  void check_level(int level) const;

  Domain domain_;
  GpModel base_;
  std::vector<Bridge> bridges_;
  std::vector<TrustPrior> trust_;
};

/// mf_predict in problem units.
Prediction mf_predict(const MfSurrogate& s, const DesignPoint& x, int level);

struct SurrogateFitOptions {
  double noise_floor = 1e-8;
  std::uint64_t seed = 0;
  // Per bridge: 0, 1, 2, or -1 for automatic (1 when >= 2(d+1) points, else 0).
  std::vector<int> bridge_degrees;
  ExecPolicy policy = default_policy();
  const SurrogateHyper* frozen = nullptr;
  // When set, a level without data gets rho = 1, delta = 0 and this
  // residual variance instead of raising MissingData.
  std::optional<double> empty_level_variance;
};

int auto_bridge_degree(std::size_t n_points, std::size_t dim);

/// Recursive training: level 0 GP first, then bridges upward in level order.
MfSurrogate fit_mf_surrogate(const Domain& domain, const std::vector<std::vector<TrainingPoint>>& per_level,
                             const std::vector<TrustPrior>& trust, const SurrogateFitOptions& opts);

}  // namespace mfac
