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

#include <filesystem>
#include <string>
#include <vector>

#include "mfac/driver.hpp"
#include "mfac/serialize.hpp"

namespace mfac {

inline constexpr int kConfigSchemaVersion = 1;

struct Diagnostic {
  std::string key;  // dotted path, e.g. campaign.budget.resource
  std::string message;
};

/// Parses configuration text. Syntax errors raise ConfigError with
/// "origin:line:column: message".
json parse_config_text(const std::string& text, const std::string& origin);

/// Schema and cross-field checks. Relative problem files resolve against
/// base_dir. An empty result means the config is valid.
std::vector<Diagnostic> validate_config(const json& config, const std::filesystem::path& base_dir);

/// Replaces a {"file": ...} problem reference by its inline contents so the
/// result is self-contained. Throws ConfigError.
json resolve_config(const json& config, const std::filesystem::path& base_dir);

/// Builds the campaign from a resolved, valid config. Throws ConfigError.
CampaignConfig campaign_from_json(const json& resolved);

struct LoadedConfig {
  json resolved;
  CampaignConfig campaign;
};

/// Read, validate, resolve. Throws ConfigError carrying every diagnostic.
LoadedConfig load_config(const std::filesystem::path& path);

std::string format_diagnostics(const std::vector<Diagnostic>& diagnostics);

}  // namespace mfac
