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

// nlohmann::json conversions for the value types that cross file
// boundaries (journal, result store, checkpoints, reports). Non-finite
// doubles are written as null and read back as NaN.

#include <json.hpp>
#include <string>

#include "mfac/acquisition.hpp"
#include "mfac/allocator.hpp"
#include "mfac/domain.hpp"
#include "mfac/gp.hpp"
#include "mfac/mf_surrogate.hpp"

namespace mfac {

using json = nlohmann::json;

json number_or_null(double v);
double number_from(const json& j);

void to_json(json& j, const DesignPoint& p);
void from_json(const json& j, DesignPoint& p);
void to_json(json& j, const Observation& o);
void from_json(const json& j, Observation& o);
void to_json(json& j, const Polynomial& p);
void from_json(const json& j, Polynomial& p);
void to_json(json& j, const KernelParams& k);
void from_json(const json& j, KernelParams& k);
void to_json(json& j, const GpHyper& h);
void from_json(const json& j, GpHyper& h);
void to_json(json& j, const BridgeHyper& b);
void from_json(const json& j, BridgeHyper& b);
void to_json(json& j, const SurrogateHyper& s);
void from_json(const json& j, SurrogateHyper& s);
void to_json(json& j, const CandidateTask& c);
void from_json(const json& j, CandidateTask& c);
void to_json(json& j, const BudgetState& b);
void from_json(const json& j, BudgetState& b);

std::string to_string(BridgeStatus s);
BridgeStatus bridge_status_from(const std::string& s);

/// FNV-1a 64-bit digest, hex encoded.
std::string digest_hex(const std::string& bytes);

}  // namespace mfac
