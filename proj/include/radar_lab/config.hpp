// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radar_lab/mc_harness.hpp"

namespace radar_lab {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Fully resolved run configuration. `campaign` carries everything the
// estimator, harness and analysis need; `resolved` is the normalized JSON
// document it was built from (what the manifest records and hashes).
struct RunConfig {
    std::string name;
    CampaignConfig campaign;
    std::optional<NodeGeometry> geometry;  // single-node scenario derived from geometry
    std::optional<TargetState> target;
    nlohmann::json resolved;
};

// Accepts a config document or a run manifest (uses its "config" member).
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

std::vector<std::string> preset_names();
// Desk scale unless full_scale is set.
nlohmann::json preset_json(const std::string& name, bool full_scale = false);

// Deterministic clutter coefficients: c_l = g * rho^(l-1) * exp(j phi_l),
// g chosen so that ||c||^2 equals |b|^2 * 10^(ratio_db/10).
std::vector<cplx> clutter_profile(cplx b, int n_taps, double power_rel_dpi_db, double decay, std::uint64_t seed);

// 64-bit FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const nlohmann::json& resolved);

}  // namespace radar_lab
