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
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dfphase/engine_core.hpp"
#include "dfphase/plant.hpp"

namespace dfphase {

struct CalibSample {
  OperatingPoint op;
  double soi = 0.0;
  double soc_ref = 0.0;
  double ca50_ref = 0.0;
};

using Dataset = std::vector<CalibSample>;

struct Interval {
  double lo;
  double hi;
};

/// Sweep box for synthetic calibration data.
struct ParameterRanges {
  Interval speed{1200.0, 1500.0};
  Interval t_ivc{372.56, 408.87};
  Interval p_ivc{2.85, 4.37};
  Interval phi_di{0.2, 0.5};
  Interval phi_ng{0.2, 0.7};
  Interval egr{0.0, 0.5};
  Interval soi{-20.0, -10.0};
  Interval x_r{0.02, 0.05};

  void validate() const;
};

struct GeneratedDataset {
  Dataset samples;
  std::size_t misfires = 0;
};

/// Samples the box with a randomly shifted Halton sequence and evaluates the
/// plant at steady state (no lag, no noise) for each point.
GeneratedDataset generate_dataset(const ParameterRanges& ranges, std::size_t n_samples,
                                  const PlantConfig& cfg, std::uint64_t seed);

/// Deterministic shuffle-and-split into (train, holdout).
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed);

/// Root-mean-square CA50 prediction error over the dataset.
double rmse(const ModelCoefficients& c, const Dataset& data, const EngineGeometry& geom);

/// Central-difference gradient of rmse() w.r.t. the calibrated parameters,
/// with a per-coordinate step of `relative_step * max(|p_i|, 1e-12)`.
ModelCoefficients::Parameters rmse_gradient(const ModelCoefficients& c, const Dataset& data,
                                            const EngineGeometry& geom,
                                            double relative_step = 1e-6);

struct CalibOptions {
  double learn_rate = 1e-3;
  std::size_t max_iters = 4000;
  double tol = 1e-6;  // CAD of RMSE improvement
  double divergence_rmse = 1e3;
  double relative_step = 1e-6;
};

struct CalibIteration {
  std::size_t iteration;
  double rmse;
  double step_size;
  ModelCoefficients::Parameters params;
};

struct CalibReport {
  std::size_t iterations = 0;
  double initial_rmse = 0.0;
  double final_rmse = 0.0;
  bool diverged = false;
  std::string stop_reason;
  std::vector<CalibIteration> history;
  ModelCoefficients coefficients;
};

class CalibrationDiverged : public std::runtime_error {
 public:
  CalibrationDiverged(const std::string& what, CalibReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const CalibReport& report() const { return report_; }

 private:
  CalibReport report_;
};

/// Batch gradient descent on the CA50 RMSE. Steps are scaled by each
/// coefficient's magnitude; a step that raises the RMSE or leaves the valid
/// coefficient domain is halved until it does not.
CalibReport calibrate(const ModelCoefficients& initial, const Dataset& data,
                      const EngineGeometry& geom, const CalibOptions& options = {});

struct ValidationStats {
  std::size_t count = 0;
  double soc_err_mean = 0.0;
  double soc_err_std = 0.0;
  double soc_err_max = 0.0;  // max |error|
  double ca50_err_mean = 0.0;
  double ca50_err_std = 0.0;
  double ca50_err_max = 0.0;
  double soc_within_1cad = 0.0;   // fraction
  double ca50_within_1cad = 0.0;
};

ValidationStats validate(const ModelCoefficients& c, const Dataset& holdout,
                         const EngineGeometry& geom);

/// Population standard deviation and max-abs of a list of errors.
struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
  double max_abs = 0.0;
};
ErrorStats error_stats(const std::vector<double>& errors);

// CSV I/O. Columns: speed,t_ivc,p_ivc,phi_di,phi_ng,egr,x_r,soi,soc_ref,ca50_ref
void write_dataset_csv(std::ostream& os, const Dataset& data);
Dataset read_dataset_csv(std::istream& is);

void write_calib_report_csv(std::ostream& os, const CalibReport& report);
void write_calib_summary(std::ostream& os, const CalibReport& report,
                         const ValidationStats* holdout);

}  // namespace dfphase
