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

#include <cstddef>
#include <span>
#include <vector>

namespace mfac {

/// Total-degree (<= 2) polynomial over normalized coordinates.
///
/// Monomials are ordered as: 1, x_0 .. x_{d-1}, then x_i * x_j for i <= j in
/// row-major order. Coefficient vectors in configuration files and
/// checkpoints use the same order.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::size_t dim, int degree, std::vector<double> coeffs);

  static Polynomial constant(std::size_t dim, double value);
  static std::size_t term_count(std::size_t dim, int degree);
  static std::vector<double> basis(std::span<const double> x, int degree);

  double operator()(std::span<const double> x) const;

  std::size_t dim() const { return dim_; }
  int degree() const { return degree_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  std::size_t dim_ = 0;
  int degree_ = 0;
  std::vector<double> coeffs_{0.0};
};

}  // namespace mfac
