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

#include "dfphase/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dfphase/coeffs_io.hpp"

namespace dfphase {

using nlohmann::json;

namespace {

const std::set<std::string>& known_schedule_keys() {
  static const std::set<std::string> keys = {"speed", "phi_di", "phi_ng", "egr", "x_r",
                                             "p_ivc", "t_ivc",  "p_man",  "t_man"};
  return keys;
}

json schedule_to_json(const Schedule& s) {
  json arr = json::array();
  for (const auto& b : s.breakpoints()) {
    arr.push_back({{"t", b.t}, {"value", b.value}, {"ramp_s", b.ramp_s}});
  }
  return arr;
}

Schedule schedule_from_json(const json& j, const std::string& key) {
  if (!j.is_array()) throw std::runtime_error("scenario: schedule '" + key + "' must be an array");
  std::vector<Breakpoint> bps;
  for (const auto& e : j) {
    Breakpoint b;
    b.t = e.at("t").get<double>();
    b.value = e.at("value").get<double>();
    b.ramp_s = e.value("ramp_s", 0.0);
    bps.push_back(b);
  }
  return Schedule(std::move(bps));
}

json plant_to_json(const PlantConfig& p) {
  return {{"plant_poly_exp", p.plant_poly_exp},
          {"quad_step", p.quad_step},
          {"soi_resolution", p.soi_resolution},
          {"egr_lag_cycles", p.egr_lag_cycles},
          {"ca50_noise_halfwidth", p.ca50_noise_halfwidth},
          {"rng_seed", p.rng_seed},
          {"coeffs", coefficients_to_json(p.coeffs)}};
}

PlantConfig plant_from_json(const json& j) {
  PlantConfig p;
  p.plant_poly_exp = j.value("plant_poly_exp", p.plant_poly_exp);
  p.quad_step = j.value("quad_step", p.quad_step);
  p.soi_resolution = j.value("soi_resolution", p.soi_resolution);
  p.egr_lag_cycles = j.value("egr_lag_cycles", p.egr_lag_cycles);
  p.ca50_noise_halfwidth = j.value("ca50_noise_halfwidth", p.ca50_noise_halfwidth);
  p.rng_seed = j.value("rng_seed", p.rng_seed);
  if (j.contains("coeffs")) p.coeffs = coefficients_from_json(j.at("coeffs"));
  return p;
}

}  // namespace

Schedule::Schedule(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const auto& b = breakpoints_[i];
    if (!std::isfinite(b.t) || !std::isfinite(b.value) || b.t < 0.0) {
      throw DomainError("schedule: breakpoint times must be finite and >= 0");
    }
    if (!(b.ramp_s >= 0.0)) throw DomainError("schedule: ramp windows must be >= 0");
    if (i > 0 && b.t < breakpoints_[i - 1].t) {
      throw DomainError("schedule: breakpoints must be sorted by time");
    }
  }
}

double Schedule::value_at(double t) const {
  if (breakpoints_.empty()) throw DomainError("schedule: no breakpoints");
  double value = breakpoints_.front().value;
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    const auto& b = breakpoints_[i];
    if (t <= b.t + kTimeEpsilon) break;
    if (b.ramp_s > 0.0 && t < b.t + b.ramp_s) {
      return value + (b.value - value) * (t - b.t) / b.ramp_s;
    }
    value = b.value;
  }
  return value;
}

std::string to_string(ControllerKind kind) {
  return kind == ControllerKind::kAdaptive ? "adaptive" : "feedforward";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  if (s == "adaptive") return ControllerKind::kAdaptive;
  if (s == "feedforward") return ControllerKind::kFeedforward;
  throw std::runtime_error("scenario: unknown controller '" + s + "'");
}

void Scenario::validate() const {
  if (!(duration_s >= 0.0)) throw DomainError("scenario: duration must be >= 0");
  plant.validate();
  for (const auto& [key, s] : schedules) {
    if (!known_schedule_keys().contains(key)) {
      throw DomainError("scenario: unknown schedule '" + key + "'");
    }
    if (s.empty()) throw DomainError("scenario: schedule '" + key + "' is empty");
  }
  for (const char* key : {"speed", "phi_di", "phi_ng", "egr"}) {
    if (!schedules.contains(key)) throw DomainError(std::string("scenario: missing schedule '") + key + "'");
  }
  if (!schedules.contains("p_ivc") && !schedules.contains("p_man")) {
    throw DomainError("scenario: need a p_ivc or p_man schedule");
  }
  if (!schedules.contains("t_ivc") && !schedules.contains("t_man")) {
    throw DomainError("scenario: need a t_ivc or t_man schedule");
  }
  if (reference.empty()) throw DomainError("scenario: missing reference");
  if (!(measurement_filter_gain > 0.0 && measurement_filter_gain <= 1.0)) {
    throw DomainError("scenario: measurement_filter_gain must lie in (0, 1]");
  }
}

OperatingPoint Scenario::operating_point_at(double t) const {
  auto at = [&](const char* key) { return schedules.at(key).value_at(t); };
  OperatingPoint op;
  op.speed = at("speed");
  op.phi_di = at("phi_di");
  op.phi_ng = at("phi_ng");
  op.egr = at("egr");
  op.x_r = schedules.contains("x_r") ? at("x_r") : kMeanResidualFraction;
  op.p_ivc = schedules.contains("p_ivc") ? at("p_ivc") : kIvcPressureGain * at("p_man");
  op.t_ivc = schedules.contains("t_ivc") ? at("t_ivc") : at("t_man") + kIvcTemperatureRise;
  return op;
}

std::vector<double> Scenario::segment_boundaries() const {
  std::vector<double> times;
  auto collect = [&](const Schedule& s) {
    for (const auto& b : s.breakpoints()) {
      if (b.t > kTimeEpsilon) times.push_back(b.t);
    }
  };
  for (const auto& [key, s] : schedules) collect(s);
  collect(reference);
  std::sort(times.begin(), times.end());
  std::vector<double> out;
  for (double t : times) {
    if (out.empty() || t - out.back() > kTimeEpsilon) out.push_back(t);
  }
  return out;
}

Scenario parse_scenario(const std::string& json_text) {
  const json j = json::parse(json_text);
  Scenario s;
  s.name = j.value("name", std::string{});
  s.duration_s = j.at("duration_s").get<double>();
  s.controller = controller_kind_from_string(j.at("controller").get<std::string>());
  s.measurement_filter_gain = j.value("measurement_filter_gain", 1.0);
  if (j.contains("plant")) s.plant = plant_from_json(j.at("plant"));
  for (const auto& [key, value] : j.at("schedules").items()) {
    s.schedules[key] = schedule_from_json(value, key);
  }
  s.reference = schedule_from_json(j.at("reference"), "reference");
  s.validate();
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["duration_s"] = s.duration_s;
  j["controller"] = to_string(s.controller);
  j["measurement_filter_gain"] = s.measurement_filter_gain;
  j["plant"] = plant_to_json(s.plant);
  json schedules = json::object();
  for (const auto& [key, sched] : s.schedules) schedules[key] = schedule_to_json(sched);
  j["schedules"] = schedules;
  j["reference"] = schedule_to_json(s.reference);
  return j.dump(2);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Scenario benchmark_case(int number, ControllerKind controller) {
  constexpr double kChange = 5.0;
  constexpr double kRamp = 0.5;
  auto ramp = [&](double from, double to) {
    return Schedule({{0.0, from, 0.0}, {kChange, to, kRamp}});
  };

  Scenario s;
  s.name = "case" + std::to_string(number);
  s.duration_s = 10.0;
  s.controller = controller;
  s.plant.ca50_noise_halfwidth = 0.0;
  s.schedules["speed"] = Schedule::constant(1200.0);
  s.schedules["phi_di"] = Schedule::constant(0.4);
  s.schedules["phi_ng"] = Schedule::constant(0.4);
  s.schedules["egr"] = Schedule::constant(0.25);
  s.schedules["x_r"] = Schedule::constant(0.035);
  s.schedules["p_man"] = Schedule::constant(2.0);
  s.schedules["t_man"] = Schedule::constant(300.0);
  s.reference = Schedule::constant(8.0);

  switch (number) {
    case 1:
      s.reference = Schedule({{0.0, 8.0, 0.0}, {kChange, 10.0, 0.0}});
      break;
    case 2:
      s.schedules["speed"] = ramp(1200.0, 1500.0);
      break;
    case 3:
      s.schedules["phi_ng"] = ramp(0.3, 0.5);
      break;
    case 4:
      s.schedules["egr"] = ramp(0.0, 0.5);
      break;
    case 5:
      s.schedules["speed"] = ramp(1200.0, 1500.0);
      s.schedules["phi_ng"] = ramp(0.3, 0.5);
      break;
    case 6:
      s.schedules["speed"] = ramp(1200.0, 1500.0);
      s.schedules["phi_ng"] = ramp(0.3, 0.5);
      s.schedules["egr"] = ramp(0.0, 0.5);
      break;
    default:
      throw DomainError("benchmark_case: case number must be 1..6");
  }
  return s;
}

}  // namespace dfphase
