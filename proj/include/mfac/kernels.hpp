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

// Data-parallel hot loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both must produce
// bit-identical results so campaigns stay deterministic under any thread count.

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

#include "mfac/optim.hpp"

namespace mfac {

enum class ExecPolicy { serial, parallel };

ExecPolicy default_policy();
void set_default_policy(ExecPolicy policy);

using PointPredictor = std::function<std::pair<double, double>(std::span<const double>)>;

namespace kernels {

// Squared-exponential ARD kernel matrix between the rows of A and of B.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_var,
                                 std::span<const double> lengthscales, ExecPolicy policy);
// Symmetric kernel matrix of X with itself.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& X, double signal_var, std::span<const double> lengthscales,
                           ExecPolicy policy);

// One pattern search per start point; results keep start order.
std::vector<LocalResult> multistart_maximize(const Objective& f, const std::vector<std::vector<double>>& starts,
                                             std::span<const double> lower, std::span<const double> upper,
                                             const PatternSearchOptions& opts, ExecPolicy policy);

// Index of the best result; earliest index wins ties. Returns npos-like
// results.size() when no result is finite.
std::size_t best_index(const std::vector<LocalResult>& results);

// Applies `predict` to every row of Q.
std::vector<std::pair<double, double>> predict_points(const PointPredictor& predict, const Eigen::MatrixXd& Q,
                                                      ExecPolicy policy);

namespace serial {
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_var,
                                 std::span<const double> lengthscales);
Eigen::MatrixXd covariance(const Eigen::MatrixXd& X, double signal_var, std::span<const double> lengthscales);
std::vector<LocalResult> multistart_maximize(const Objective& f, const std::vector<std::vector<double>>& starts,
                                             std::span<const double> lower, std::span<const double> upper,
                                             const PatternSearchOptions& opts);
std::vector<std::pair<double, double>> predict_points(const PointPredictor& predict, const Eigen::MatrixXd& Q);
}  // namespace serial

namespace omp {
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_var,
                                 std::span<const double> lengthscales);
Eigen::MatrixXd covariance(const Eigen::MatrixXd& X, double signal_var, std::span<const double> lengthscales);
std::vector<LocalResult> multistart_maximize(const Objective& f, const std::vector<std::vector<double>>& starts,
                                             std::span<const double> lower, std::span<const double> upper,
                                             const PatternSearchOptions& opts);
std::vector<std::pair<double, double>> predict_points(const PointPredictor& predict, const Eigen::MatrixXd& Q);
}  // namespace omp

}  // namespace kernels
}  // namespace mfac
