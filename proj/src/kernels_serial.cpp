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

#include <cmath>

#include "mfac/kernels.hpp"

namespace mfac::kernels::serial {

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double signal_var,
                                 std::span<const double> ls) {
  const Eigen::Index d = A.cols();
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double z = (A(i, k) - B(j, k)) / ls[k];
        r2 += z * z;
      }
      K(i, j) = signal_var * std::exp(-0.5 * r2);
    }
  }
  return K;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& X, double signal_var, std::span<const double> ls) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = signal_var;
    for (Eigen::Index j = 0; j < i; ++j) {
      double r2 = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double z = (X(i, k) - X(j, k)) / ls[k];
        r2 += z * z;
      }
      K(i, j) = K(j, i) = signal_var * std::exp(-0.5 * r2);
    }
  }
  return K;
}

std::vector<LocalResult> multistart_maximize(const Objective& f, const std::vector<std::vector<double>>& starts,
                                             std::span<const double> lower, std::span<const double> upper,
                                             const PatternSearchOptions& opts) {
  std::vector<LocalResult> out;
  out.reserve(starts.size());
  for (const auto& s : starts) out.push_back(pattern_search_max(f, s, lower, upper, opts));
  return out;
}

std::vector<std::pair<double, double>> predict_points(const PointPredictor& predict, const Eigen::MatrixXd& Q) {
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(Q.rows()));
  std::vector<double> row(static_cast<std::size_t>(Q.cols()));
  for (Eigen::Index i = 0; i < Q.rows(); ++i) {
    for (Eigen::Index k = 0; k < Q.cols(); ++k) row[k] = Q(i, k);
    out[i] = predict(row);
  }
  return out;
}

}  // namespace mfac::kernels::serial
