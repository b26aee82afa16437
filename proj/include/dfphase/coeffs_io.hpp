// Copyright 2026 The dfphase Authors
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

#pragma once

#include <string>

#include <json.hpp>

#include "dfphase/engine_core.hpp"

namespace dfphase {

/// Flat JSON object with one key per coefficient. `c7` is written for
/// reference and checked against c11 and the Wiebe shape when read back.
nlohmann::json coefficients_to_json(const ModelCoefficients& c);
ModelCoefficients coefficients_from_json(const nlohmann::json& j);

void save_coefficients(const std::string& path, const ModelCoefficients& c);
ModelCoefficients load_coefficients(const std::string& path);

}  // namespace dfphase
