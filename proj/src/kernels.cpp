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

#include "mfac/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string_view>

namespace mfac {

namespace {

ExecPolicy initial_policy() {
  const char* env = std::getenv("MFAC_SERIAL");
  return (env != nullptr && std::string_view(env) != "0") ? ExecPolicy::serial : ExecPolicy::parallel;
}

std::atomic<ExecPolicy>& policy_slot() {
  static std::atomic<ExecPolicy> slot{initial_policy()};
  return slot;
}

}  // namespace

ExecPolicy default_policy() { return policy_slot().load(); }
void set_default_policy(ExecPolicy policy) { policy_slot().store(policy); }

namespace kernels {

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_var,
                                 std::span<const double> ls, ExecPolicy policy) {
  return policy == ExecPolicy::parallel ? omp::cross_covariance(A, B, signal_var, ls)
                                        : serial::cross_covariance(A, B, signal_var, ls);
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& X, double signal_var, std::span<const double> ls,
                           ExecPolicy policy) {
  return policy == ExecPolicy::parallel ? omp::covariance(X, signal_var, ls) : serial::covariance(X, signal_var, ls);
}

std::vector<LocalResult> multistart_maximize(const Objective& f, const std::vector<std::vector<double>>& starts,
                                             std::span<const double> lower, std::span<const double> upper,
                                             const PatternSearchOptions& opts, ExecPolicy policy) {
  return policy == ExecPolicy::parallel ? omp::multistart_maximize(f, starts, lower, upper, opts)
                                        : serial::multistart_maximize(f, starts, lower, upper, opts);
}

std::size_t best_index(const std::vector<LocalResult>& results) {
  std::size_t best = results.size();
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!std::isfinite(results[i].value)) continue;
    if (best == results.size() || results[i].value > results[best].value) best = i;
  }
  return best;
}

std::vector<std::pair<double, double>> predict_points(const PointPredictor& predict, const Eigen::MatrixXd& Q,
                                                      ExecPolicy policy) {
  return policy == ExecPolicy::parallel ? omp::predict_points(predict, Q) : serial::predict_points(predict, Q);
}

}  // namespace kernels
}  // namespace mfac
