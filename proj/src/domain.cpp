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

#include "mfac/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mfac/error.hpp"

namespace mfac {

Domain::Domain(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw InvalidArgument("domain must have at least one dimension");
  if (lower_.size() != upper_.size()) {
    throw InvalidArgument("domain bounds disagree in length: " + std::to_string(lower_.size()) +
                          " lower vs " + std::to_string(upper_.size()) + " upper");
  }
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(std::isfinite(lower_[j]) && std::isfinite(upper_[j]) && lower_[j] < upper_[j])) {
      throw InvalidArgument("domain dimension " + std::to_string(j) + " needs finite lower < upper");
    }
  }
}

Domain Domain::unit(std::size_t dim) {
  return Domain(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

bool Domain::contains(const DesignPoint& p) const {
  if (p.dim() != dim()) return false;
  for (std::size_t j = 0; j < dim(); ++j) {
    if (!(p.coords[j] >= lower_[j] && p.coords[j] <= upper_[j])) return false;
  }
  return true;
}

void Domain::check(const DesignPoint& p) const {
  if (p.dim() != dim()) {
    throw DomainViolation("point has " + std::to_string(p.dim()) + " coordinates, domain has " +
                          std::to_string(dim()));
  }
  for (std::size_t j = 0; j < dim(); ++j) {
    if (!(p.coords[j] >= lower_[j] && p.coords[j] <= upper_[j])) {
      throw DomainViolation("coordinate " + std::to_string(j) + " = " + std::to_string(p.coords[j]) +
                            " outside [" + std::to_string(lower_[j]) + ", " +
                            std::to_string(upper_[j]) + "]");
    }
  }
}

DesignPoint Domain::normalize(const DesignPoint& p) const {
  check(p);
  DesignPoint out{std::vector<double>(dim())};
  for (std::size_t j = 0; j < dim(); ++j) {
    out.coords[j] = (p.coords[j] - lower_[j]) / (upper_[j] - lower_[j]);
  }
  return out;
}

DesignPoint Domain::denormalize(const DesignPoint& u) const {
  if (u.dim() != dim()) {
    throw DomainViolation("unit point has " + std::to_string(u.dim()) + " coordinates, domain has " +
                          std::to_string(dim()));
  }
  DesignPoint out{std::vector<double>(dim())};
  for (std::size_t j = 0; j < dim(); ++j) {
    if (!(u.coords[j] >= 0.0 && u.coords[j] <= 1.0)) {
      throw DomainViolation("unit coordinate " + std::to_string(j) + " outside [0, 1]");
    }
    // Pin the endpoints so round trips through the bounds are exact.
    if (u.coords[j] == 0.0) {
      out.coords[j] = lower_[j];
    } else if (u.coords[j] == 1.0) {
      out.coords[j] = upper_[j];
    } else {
      out.coords[j] = std::clamp(lower_[j] + u.coords[j] * (upper_[j] - lower_[j]), lower_[j], upper_[j]);
    }
  }
  return out;
}

DesignPoint normalize(const DesignPoint& point, const Domain& domain) { return domain.normalize(point); }
DesignPoint denormalize(const DesignPoint& unit_point, const Domain& domain) {
  return domain.denormalize(unit_point);
}

std::vector<DesignPoint> lhs_design(std::size_t n, const Domain& domain, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("lhs_design needs n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<DesignPoint> unit(n, DesignPoint{std::vector<double>(domain.dim())});
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < domain.dim(); ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      // Keep the coordinate strictly inside its bin; uniform_real_distribution
      // may round up to 1.0 on some implementations.
      const double u = std::min(jitter(rng), std::nextafter(1.0, 0.0));
      unit[i].coords[j] = (static_cast<double>(perm[i]) + u) / static_cast<double>(n);
    }
  }
  std::vector<DesignPoint> out;
  out.reserve(n);
  for (auto& u : unit) out.push_back(domain.denormalize(u));
  return out;
}

namespace {

// Probe points for positivity and max-walltime checks: the 5^d grid for small
// d, otherwise corners plus center.
std::vector<std::vector<double>> probe_points(std::size_t dim) {
  std::vector<std::vector<double>> pts;
  if (dim <= 4) {
    constexpr int kSteps = 5;
    std::size_t total = 1;
    for (std::size_t j = 0; j < dim; ++j) total *= kSteps;
    for (std::size_t k = 0; k < total; ++k) {
      std::vector<double> p(dim);
      std::size_t r = k;
      for (std::size_t j = 0; j < dim; ++j) {
        p[j] = static_cast<double>(r % kSteps) / (kSteps - 1);
        r /= kSteps;
      }
      pts.push_back(std::move(p));
    }
    return pts;
  }
  const std::size_t corners = std::size_t{1} << std::min<std::size_t>(dim, 12);
  for (std::size_t k = 0; k < corners; ++k) {
    std::vector<double> p(dim, 0.0);
    for (std::size_t j = 0; j < dim && j < 12; ++j) p[j] = (k >> j) & 1U ? 1.0 : 0.0;
    pts.push_back(std::move(p));
  }
  pts.emplace_back(dim, 0.5);
  return pts;
}

}  // namespace

double CostModel::scale(std::span<const double> u) const {
  if (!multiplier) return 1.0;
  const double m = (*multiplier)(u);
  if (!(m > 0.0)) throw InvalidArgument("cost multiplier is non-positive at a query point");
  return m;
}

double CostModel::cost(std::span<const double> u) const { return base_cost * scale(u); }
double CostModel::walltime_at(std::span<const double> u) const { return walltime * scale(u); }

double CostModel::max_walltime(std::size_t dim) const {
  if (!multiplier) return walltime;
  double best = 0.0;
  for (const auto& p : probe_points(dim)) best = std::max(best, walltime_at(p));
  return best;
}

void CostModel::validate(std::size_t dim) const {
  if (!(base_cost > 0.0) || !std::isfinite(base_cost)) throw ConfigError("base_cost must be positive");
  if (!(walltime > 0.0) || !std::isfinite(walltime)) throw ConfigError("walltime must be positive");
  if (!multiplier) return;
  if (multiplier->degree() > 0 && multiplier->dim() != dim) {
    throw ConfigError("cost multiplier dimension does not match the domain");
  }
  for (const auto& p : probe_points(dim)) {
    if (!((*multiplier)(p) > 0.0)) throw ConfigError("cost multiplier must be positive over the domain");
  }
}

double TrustFeature::operator()(const DesignPoint& raw, const Domain& domain) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::coordinate:
      return raw.coords.at(index);
    case Kind::normalized_coordinate:
      return (raw.coords.at(index) - domain.lower()[index]) / (domain.upper()[index] - domain.lower()[index]);
  }
  return 0.0;
}

void TrustPrior::validate(const Domain& domain) const {
  for (double c : coeffs) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("trust coefficients must be finite and non-negative");
  }
  if (feature.kind != TrustFeature::Kind::none && feature.index >= domain.dim()) {
    throw ConfigError("trust feature index " + std::to_string(feature.index) + " out of range");
  }
  // Minimum of c1 + c2 k + c3 k^2 over the feature's range.
  double lo = 0.0;
  double hi = 0.0;
  if (feature.kind == TrustFeature::Kind::coordinate) {
    lo = domain.lower()[feature.index];
    hi = domain.upper()[feature.index];
  } else if (feature.kind == TrustFeature::Kind::normalized_coordinate) {
    hi = 1.0;
  }
  auto eval = [&](double k) { return coeffs[0] + coeffs[1] * k + coeffs[2] * k * k; };
  double lowest = std::min(eval(lo), eval(hi));
  if (coeffs[2] > 0.0) {
    const double vertex = -coeffs[1] / (2.0 * coeffs[2]);
    if (vertex > lo && vertex < hi) lowest = std::min(lowest, eval(vertex));
  }
  if (lowest < 0.0) throw ConfigError("trust variance is negative somewhere in the domain");
}

double trust_variance(const TrustPrior& prior, const DesignPoint& raw, const Domain& domain) {
  const double k = prior.feature(raw, domain);
  const double v = prior.coeffs[0] + prior.coeffs[1] * k + prior.coeffs[2] * k * k;
  return std::max(v, 0.0);
}

bool Feasibility::admits(std::span<const double> u) const {
  for (const auto& c : constraints) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < c.coeffs.size() && j < u.size(); ++j) lhs += c.coeffs[j] * u[j];
    if (lhs > c.bound) return false;
  }
  return true;
}

void Hierarchy::validate(const Domain& domain) const {
  if (levels.empty()) throw ConfigError("hierarchy needs at least one fidelity level");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto& lv = levels[l];
    if (lv.index != static_cast<int>(l)) {
      throw ConfigError("fidelity level indices must be contiguous 0..L-1; level '" + lv.name +
                        "' has index " + std::to_string(lv.index) + " at position " + std::to_string(l));
    }
    if (lv.queue_name.empty()) throw ConfigError("level '" + lv.name + "' has no queue name");
    lv.cost.validate(domain.dim());
    lv.trust.validate(domain);
    for (const auto& c : lv.feasibility.constraints) {
      if (c.coeffs.size() != domain.dim()) {
        throw ConfigError("feasibility constraint of level '" + lv.name + "' has wrong dimension");
      }
    }
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

}  // namespace mfac
