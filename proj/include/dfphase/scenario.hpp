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

#include <map>
#include <string>
#include <vector>

#include "dfphase/engine_core.hpp"
#include "dfphase/plant.hpp"

namespace dfphase {

/// Times closer than this to a breakpoint count as lying on it.
inline constexpr double kTimeEpsilon = 1e-9;

/// Piecewise-linear trajectory. Each breakpoint's value takes over after
/// time `t`, reached linearly over `ramp_s` seconds (a step when 0). The
/// first breakpoint's value also holds before its time.
struct Breakpoint {
  double t = 0.0;
  double value = 0.0;
  double ramp_s = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Breakpoint> breakpoints);

  static Schedule constant(double value) { return Schedule({{0.0, value, 0.0}}); }

  double value_at(double t) const;
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  bool empty() const { return breakpoints_.empty(); }

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<Breakpoint> breakpoints_;
};

enum class ControllerKind { kAdaptive, kFeedforward };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& s);

/// Intake manifold conditions mapped to IVC conditions:
/// P_IVC = 1.45 P_man, T_IVC = T_man + 90 K.
inline constexpr double kIvcPressureGain = 1.45;
inline constexpr double kIvcTemperatureRise = 90.0;

/// Closed-loop simulation setup. Schedule keys: speed, phi_di, phi_ng, egr,
/// x_r (optional), and either p_ivc/t_ivc or manifold p_man/t_man.
struct Scenario {
  std::string name;
  double duration_s = 10.0;
  ControllerKind controller = ControllerKind::kAdaptive;
  double measurement_filter_gain = 1.0;
  PlantConfig plant;
  std::map<std::string, Schedule> schedules;
  Schedule reference;

  void validate() const;

  /// Scheduled (sensed) operating point at time t.
  OperatingPoint operating_point_at(double t) const;

  /// Interior breakpoint times (> 0) of every schedule, sorted, deduplicated.
  std::vector<double> segment_boundaries() const;

  bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// The six benchmark cases: 1 reference step, 2 speed ramp, 3 NG ramp,
/// 4 EGR ramp, 5 speed + NG ramp, 6 speed + NG + EGR ramp. Each lasts 10 s
/// with its change at 5 s (ramps over 0.5 s).
Scenario benchmark_case(int number, ControllerKind controller);

}  // namespace dfphase
