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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfac/polynomial.hpp"

namespace mfac {

using TaskId = std::uint64_t;

/// A point in problem units, one coordinate per design dimension.
struct DesignPoint {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  bool operator==(const DesignPoint&) const = default;
};

/// Axis-aligned design box. Construction validates lower[j] < upper[j].
class Domain {
 public:
  Domain() = default;
  Domain(std::vector<double> lower, std::vector<double> upper);
  static Domain unit(std::size_t dim);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  bool contains(const DesignPoint& p) const;
  // Throws DomainViolation naming the first offending coordinate.
  void check(const DesignPoint& p) const;

  DesignPoint normalize(const DesignPoint& p) const;
  DesignPoint denormalize(const DesignPoint& unit_point) const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

DesignPoint normalize(const DesignPoint& point, const Domain& domain);
DesignPoint denormalize(const DesignPoint& unit_point, const Domain& domain);

/// Latin hypercube design: per dimension, each of the n equal bins of [0, 1]
/// holds exactly one normalized coordinate. Deterministic given the seed.
std::vector<DesignPoint> lhs_design(std::size_t n, const Domain& domain, std::uint64_t seed);

enum class Direction { maximize, minimize };

/// Cost of one evaluation. The optional multiplier is a polynomial over
/// normalized coordinates scaling both cost and walltime.
struct CostModel {
  double base_cost = 1.0;
  double walltime = 1.0;
  std::optional<Polynomial> multiplier;

  double cost(std::span<const double> unit_coords) const;
  double walltime_at(std::span<const double> unit_coords) const;
  // Largest walltime over a dense probe of the unit box (corners included).
  double max_walltime(std::size_t dim) const;
  // Throws ConfigError if the multiplier is non-positive anywhere on the probe.
  void validate(std::size_t dim) const;

 private:
  double scale(std::span<const double> unit_coords) const;
};

/// Scalar feature kappa(x) a trust prior is expressed in.
struct TrustFeature {
  enum class Kind { none, coordinate, normalized_coordinate };
  Kind kind = Kind::none;
  std::size_t index = 0;

  double operator()(const DesignPoint& raw, const Domain& domain) const;
};

/// Expert-supplied variance inflation c1 + c2*kappa + c3*kappa^2, in squared
/// objective units.
struct TrustPrior {
  std::array<double, 3> coeffs{0.0, 0.0, 0.0};
  TrustFeature feature;

  bool is_zero() const { return coeffs[0] == 0.0 && coeffs[1] == 0.0 && coeffs[2] == 0.0; }
  void validate(const Domain& domain) const;
};

double trust_variance(const TrustPrior& prior, const DesignPoint& raw, const Domain& domain);

/// Known feasibility region: every constraint a . x_unit <= b must hold.
struct LinearConstraint {
  std::vector<double> coeffs;
  double bound = 0.0;
};

struct Feasibility {
  std::vector<LinearConstraint> constraints;

  bool admits(std::span<const double> unit_coords) const;
  bool empty() const { return constraints.empty(); }
};

struct FidelityLevel {
  int index = 0;
  std::string name;
  CostModel cost;
  TrustPrior trust;
  Feasibility feasibility;
  std::string queue_name;
};

/// Ordered lowest to highest fidelity; indices must be 0..L-1.
struct Hierarchy {
  std::vector<FidelityLevel> levels;

  std::size_t size() const { return levels.size(); }
  const FidelityLevel& operator[](std::size_t i) const { return levels[i]; }
  void validate(const Domain& domain) const;
};

struct Observation {
  DesignPoint point;
  int level = 0;
  double value = 0.0;  // objective units; NaN when infeasible
  double noise_var = 0.0;
  bool feasible = true;
  TaskId task_id = 0;
  double walltime_actual = 0.0;

  bool operator==(const Observation&) const = default;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mfac
