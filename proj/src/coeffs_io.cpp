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

#include "dfphase/coeffs_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dfphase {

nlohmann::json coefficients_to_json(const ModelCoefficients& c) {
  nlohmann::json j = nlohmann::json::object();
  const auto p = c.parameters();
  for (std::size_t i = 0; i < p.size(); ++i) j[ModelCoefficients::parameter_names()[i]] = p[i];
  j["wiebe_a"] = c.wiebe_a;
  j["wiebe_b"] = c.wiebe_b;
  j["c7"] = c.c7();
  return j;
}

ModelCoefficients coefficients_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::runtime_error("coefficients: expected a JSON object");
  ModelCoefficients c;
  auto p = c.parameters();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const char* name = ModelCoefficients::parameter_names()[i];
    if (!j.contains(name)) throw std::runtime_error(std::string("coefficients: missing '") + name + "'");
    p[i] = j.at(name).get<double>();
  }
  c = c.with_parameters(p);
  c.wiebe_a = j.value("wiebe_a", c.wiebe_a);
  c.wiebe_b = j.value("wiebe_b", c.wiebe_b);
  c.validate();
  if (j.contains("c7")) {
    const double c7 = j.at("c7").get<double>();
    if (std::abs(c7 - c.c7()) > 1e-9 * std::abs(c.c7())) {
      throw std::runtime_error("coefficients: c7 inconsistent with c11 and the Wiebe shape");
    }
  }
  return c;
}

void save_coefficients(const std::string& path, const ModelCoefficients& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << coefficients_to_json(c).dump(2) << '\n';
}

ModelCoefficients load_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient file " + path);
  return coefficients_from_json(nlohmann::json::parse(in));
}

}  // namespace dfphase
