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

#include "mfac/polynomial.hpp"

#include <string>

#include "mfac/error.hpp"

namespace mfac {

std::size_t Polynomial::term_count(std::size_t dim, int degree) {
  switch (degree) {
    case 0:
      return 1;
    case 1:
      return 1 + dim;
    case 2:
      return 1 + dim + dim * (dim + 1) / 2;
    default:
      throw InvalidArgument("polynomial degree must be 0, 1 or 2, got " + std::to_string(degree));
  }
}

std::vector<double> Polynomial::basis(std::span<const double> x, int degree) {
  std::vector<double> out;
  out.reserve(term_count(x.size(), degree));
  out.push_back(1.0);
  if (degree >= 1) {
    for (double v : x) out.push_back(v);
  }
  if (degree >= 2) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
    }
  }
  return out;
}

Polynomial::Polynomial(std::size_t dim, int degree, std::vector<double> coeffs)
    : dim_(dim), degree_(degree), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != term_count(dim, degree)) {
    throw InvalidArgument("polynomial of degree " + std::to_string(degree) + " in " +
                          std::to_string(dim) + " dimensions needs " +
                          std::to_string(term_count(dim, degree)) + " coefficients, got " +
                          std::to_string(coeffs_.size()));
  }
}

Polynomial Polynomial::constant(std::size_t dim, double value) { return Polynomial(dim, 0, {value}); }

double Polynomial::operator()(std::span<const double> x) const {
  if (degree_ > 0 && x.size() != dim_) {
    throw InvalidArgument("polynomial expects " + std::to_string(dim_) + " coordinates, got " +
                          std::to_string(x.size()));
  }
  const auto phi = basis(x, degree_);
  double sum = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) sum += coeffs_[k] * phi[k];
  return sum;
}

}  // namespace mfac
