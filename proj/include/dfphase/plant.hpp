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

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>

#include "dfphase/engine_core.hpp"

namespace dfphase {

/// Knock integral never reached 1 before the misfire limit.
class MisfireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Crank angle past which a charge that has not ignited counts as a misfire.
inline constexpr double kMisfireAngle = 60.0;

/// Plant ground-truth coefficients: the published set with c5 raised so that
/// a 1.30 polytrope gives ignition delays of a few CAD over the sweep box.
ModelCoefficients default_plant_coefficients();

struct PlantConfig {
  EngineGeometry geom = EngineGeometry::reference_engine();
  ModelCoefficients coeffs = default_plant_coefficients();
  double plant_poly_exp = 1.30;
  double quad_step = 0.1;             // CAD
  double soi_resolution = 0.1;        // CAD
  int egr_lag_cycles = 3;
  double ca50_noise_halfwidth = 0.5;  // CAD
  std::uint64_t rng_seed = 1;

  void validate() const;

  bool operator==(const PlantConfig&) const = default;
};

struct CycleRecord {
  int cycle_index = 0;
  double time_s = 0.0;
  OperatingPoint op;  // as seen by the cylinder
  bool fired = false;
  double soi_commanded = 0.0;
  double soi_applied = 0.0;
  double soc = 0.0;
  double bd = 0.0;
  double ca50_actual = 0.0;
  double ca50_measured = 0.0;
  double ca50_ref = 0.0;
  std::optional<double> alpha_hat;
  std::optional<double> beta_hat;
};

/// Crank angle at which the knock integral from SOI reaches 1.
double knock_integral_soc(const OperatingPoint& op, double soi,
                          const PlantConfig& cfg);

/// Knock integral accumulated from `soi` to `theta` with the plant's
/// quadrature rule (trapezoid on a grid anchored at SOI, linear integrand
/// within the final partial step).
double knock_integral_value(const OperatingPoint& op, double soi, double theta,
                            const PlantConfig& cfg);

/// Cumulative Wiebe burned fraction.
double wiebe_fraction(double theta, double soc, double bd,
                      const ModelCoefficients& c);

/// SOC from the full quadrature minus SOC from the frozen-state model, both
/// using the plant's polytropic exponent.
double simplification_gap(const OperatingPoint& op, double soi,
                          const PlantConfig& cfg);

/// Round-half-away-from-zero to the actuator resolution.
double quantize_soi(double command, double resolution);

struct CombustionResult {
  double soc;
  double bd;
  double ca50;
};

/// Noise-free combustion for one cycle at a fixed cylinder state.
CombustionResult evaluate_combustion(const OperatingPoint& op, double soi,
                                     const PlantConfig& cfg);

/// Duration of one four-stroke cycle in seconds.
inline double cycle_period(double speed_rpm) { return 120.0 / speed_rpm; }

/// Number of cycles at the start of a run with no fuel injected.
inline constexpr int kUnfueledCycles = 2;

/// Cycle-by-cycle engine. Intake-side state (EGR, IVC pressure/temperature,
/// residuals) reaches the cylinder through a first-order lag; speed and fuel
/// quantities act in the same cycle.
class Plant {
 public:
  explicit Plant(PlantConfig cfg);

  /// Advances one cycle. `scheduled` holds the commanded operating point for
  /// this cycle; `ca50_ref` is stored verbatim in the record.
  CycleRecord step(double soi_command, const OperatingPoint& scheduled,
                   double ca50_ref = 0.0);

  const PlantConfig& config() const { return cfg_; }
  int cycle() const { return cycle_; }
  double time() const { return time_; }

 private:
  PlantConfig cfg_;
  int cycle_ = 0;
  double time_ = 0.0;
  std::optional<OperatingPoint> intake_;
  std::mt19937_64 rng_;
};

}  // namespace dfphase
