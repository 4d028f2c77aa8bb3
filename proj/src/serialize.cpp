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

#include "mfac/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mfac/error.hpp"

namespace mfac {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

void to_json(json& j, const DesignPoint& p) { j = p.coords; }
void from_json(const json& j, DesignPoint& p) { p.coords = j.get<std::vector<double>>(); }

void to_json(json& j, const Observation& o) {
  j = json{{"point", o.point},
           {"level", o.level},
           {"value", number_or_null(o.value)},
           {"noise_var", o.noise_var},
           {"feasible", o.feasible},
           {"task_id", o.task_id},
           {"walltime_actual", o.walltime_actual}};
}

void from_json(const json& j, Observation& o) {
  o.point = j.at("point").get<DesignPoint>();
  o.level = j.at("level").get<int>();
  o.value = number_from(j.at("value"));
  o.noise_var = j.at("noise_var").get<double>();
  o.feasible = j.at("feasible").get<bool>();
  o.task_id = j.at("task_id").get<TaskId>();
  o.walltime_actual = j.at("walltime_actual").get<double>();
}

void to_json(json& j, const Polynomial& p) {
  j = json{{"dim", p.dim()}, {"degree", p.degree()}, {"coeffs", p.coeffs()}};
}

void from_json(const json& j, Polynomial& p) {
  p = Polynomial(j.at("dim").get<std::size_t>(), j.at("degree").get<int>(), j.at("coeffs").get<std::vector<double>>());
}

void to_json(json& j, const KernelParams& k) {
  j = json{{"signal_var", k.signal_var}, {"lengthscales", k.lengthscales}, {"noise_var", k.noise_var}};
}

void from_json(const json& j, KernelParams& k) {
  k.signal_var = j.at("signal_var").get<double>();
  k.lengthscales = j.at("lengthscales").get<std::vector<double>>();
  k.noise_var = j.at("noise_var").get<double>();
}

void to_json(json& j, const GpHyper& h) {
  j = json{{"params", h.params}, {"y_mean", h.y_mean}, {"y_std", h.y_std}};
}

void from_json(const json& j, GpHyper& h) {
  h.params = j.at("params").get<KernelParams>();
  h.y_mean = j.at("y_mean").get<double>();
  h.y_std = j.at("y_std").get<double>();
}

std::string to_string(BridgeStatus s) {
  switch (s) {
    case BridgeStatus::ok:
      return "ok";
    case BridgeStatus::reduced_degree:
      return "reduced_degree";
    case BridgeStatus::shift_only:
      return "shift_only";
  }
  return "ok";
}

BridgeStatus bridge_status_from(const std::string& s) {
  if (s == "ok") return BridgeStatus::ok;
  if (s == "reduced_degree") return BridgeStatus::reduced_degree;
  if (s == "shift_only") return BridgeStatus::shift_only;
  throw IntegrityError("unknown bridge status '" + s + "'");
}

void to_json(json& j, const BridgeHyper& b) {
  j = json{{"rho", b.rho},
           {"delta", b.delta},
           {"degree", b.degree},
           {"residual", b.residual ? json(*b.residual) : json(nullptr)},
           {"residual_var", b.residual_var},
           {"status", to_string(b.status)}};
}

void from_json(const json& j, BridgeHyper& b) {
  b.rho = j.at("rho").get<Polynomial>();
  b.delta = j.at("delta").get<Polynomial>();
  b.degree = j.at("degree").get<int>();
  if (j.at("residual").is_null()) {
    b.residual.reset();
  } else {
    b.residual = j.at("residual").get<GpHyper>();
  }
  b.residual_var = j.at("residual_var").get<double>();
  b.status = bridge_status_from(j.at("status").get<std::string>());
}

void to_json(json& j, const SurrogateHyper& s) { j = json{{"base", s.base}, {"bridges", s.bridges}}; }

void from_json(const json& j, SurrogateHyper& s) {
  s.base = j.at("base").get<GpHyper>();
  s.bridges = j.at("bridges").get<std::vector<BridgeHyper>>();
}

void to_json(json& j, const CandidateTask& c) {
  j = json{{"m", c.m},
           {"level", c.level},
           {"point", c.point},
           {"acq_value", c.acq_value},
           {"cost", c.cost},
           {"walltime", c.walltime},
           {"benefit", c.benefit}};
}

void from_json(const json& j, CandidateTask& c) {
  c.m = j.at("m").get<int>();
  c.level = j.at("level").get<int>();
  c.point = j.at("point").get<DesignPoint>();
  c.acq_value = j.at("acq_value").get<double>();
  c.cost = j.at("cost").get<double>();
  c.walltime = j.at("walltime").get<double>();
  c.benefit = j.at("benefit").get<double>();
}

void to_json(json& j, const BudgetState& b) {
  j = json{{"T_remaining", b.T_remaining}, {"B_remaining", b.B_remaining}, {"I", b.I}, {"i", b.i},
           {"T_i", b.T_i},                 {"B_i", b.B_i},                 {"terminated", b.terminated}};
}

void from_json(const json& j, BudgetState& b) {
  b.T_remaining = j.at("T_remaining").get<double>();
  b.B_remaining = j.at("B_remaining").get<double>();
  b.I = j.at("I").get<int>();
  b.i = j.at("i").get<int>();
  b.T_i = j.at("T_i").get<double>();
  b.B_i = j.at("B_i").get<double>();
  b.terminated = j.at("terminated").get<bool>();
}

std::string digest_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mfac
