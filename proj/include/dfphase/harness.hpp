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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfphase/calib.hpp"
#include "dfphase/plant.hpp"
#include "dfphase/scenario.hpp"

namespace dfphase {

/// Band around a segment's final mean inside which the output counts as settled.
inline constexpr double kSettleBand = 0.15;
/// Trailing cycles of a segment used for steady-state statistics.
inline constexpr std::size_t kSteadyStateWindow = 20;

struct SegmentSummary {
  double t_start = 0.0;
  double t_end = 0.0;
  int first_cycle = 0;
  int last_cycle = 0;
  std::size_t cycles = 0;
  double final_value = 0.0;       // mean actual CA50 over the steady window
  int settling_cycles = 0;        // from first_cycle
  double overshoot = 0.0;         // CAD beyond final value, >= 0
  double ss_error_min = 0.0;      // actual - reference over the steady window
  double ss_error_max = 0.0;
  double ss_error_mean = 0.0;
  double max_abs_error = 0.0;     // whole segment
};

struct ScenarioSummary {
  std::vector<SegmentSummary> segments;
};

struct ScenarioResult {
  std::vector<CycleRecord> records;
  ScenarioSummary summary;
  std::optional<std::string> aborted;  // misfire message; records are partial
};

/// Runs the scenario cycle by cycle. The controller sees the scheduled
/// operating point and the reference sampled one cycle earlier.
ScenarioResult run_scenario(const Scenario& scenario, const ModelCoefficients& controller_coeffs);

/// Segment statistics over fired cycles.
ScenarioSummary summarize(const std::vector<CycleRecord>& records,
                          const std::vector<double>& boundaries);

void write_cycles_csv(std::ostream& os, const std::vector<CycleRecord>& records);
nlohmann::json summary_to_json(const ScenarioSummary& summary);

enum class Quantity { kNone, kPIvc, kTIvc, kEgr, kPhiDi, kPhiNg, kXr };

std::string to_string(Quantity q);

struct Perturbation {
  Quantity quantity = Quantity::kNone;
  double delta = 0.0;
  bool relative = false;  // delta is a fraction of the value when true
};

struct SensitivitySpec {
  std::vector<Perturbation> perturbations;

  /// Baseline plus +/- P_IVC 0.05 bar, T_IVC 5 K, EGR 0.05, diesel and NG
  /// equivalence ratio 10 %, residual fraction 0.03.
  static SensitivitySpec measurement_errors();
};

struct SensitivityRow {
  Perturbation perturbation;
  double ca50_err_std = 0.0;
  double ca50_err_max = 0.0;
};

/// Applies one perturbation to every model input and scores predicted CA50
/// against the unperturbed references. EGR and X_r are clipped at 0.
std::vector<SensitivityRow> run_sensitivity(const SensitivitySpec& spec,
                                            const ModelCoefficients& coeffs,
                                            const Dataset& dataset,
                                            const EngineGeometry& geom);

void write_sensitivity_csv(std::ostream& os, const std::vector<SensitivityRow>& rows);

struct NoiseStudyResult {
  std::vector<CycleRecord> records;
  double error_mean = 0.0;
  double error_std = 0.0;
  double error_max = 0.0;  // max |actual - reference|
  std::size_t cycles = 0;
  bool bounded = false;
};

/// Holds the scenario's initial operating point and reference for 10 s under
/// adaptive control with uniform CA50 measurement noise of the given half-width.
NoiseStudyResult run_noise_study(const Scenario& scenario, double halfwidth,
                                 const ModelCoefficients& controller_coeffs);

/// Error magnitude regarded as loss of control in the noise study.
inline constexpr double kNoiseStudyBound = 10.0;

}  // namespace dfphase
