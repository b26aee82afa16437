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

#include <optional>

#include "dfphase/engine_core.hpp"

namespace dfphase {

/// CA50 = SOI + alpha x1 + beta x2, with x1 and x2 computable every cycle
/// from speed and fuel equivalence ratios.
struct AdaptiveStates {
  double x1;  // N (phi_ng^c3 + phi_di^c4)
  double x2;  // phi_ng^c9 + phi_di^c10
};

struct ControllerState {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double last_v_soi = 0.0;  // m^3, 0 until the first feedforward command
  double last_error = 0.0;  // CAD, measured minus reference
};

AdaptiveStates compute_states(const OperatingPoint& op, const ModelCoefficients& c);

/// 1 / (x1^2 + x2^2).
double learning_rate(const AdaptiveStates& s);

/// u = y_d - alpha_hat x1 - beta_hat x2.
double adaptive_soi(double ref_ca50, const AdaptiveStates& s,
                    const ControllerState& ctrl);

/// One normalised gradient step on E = (y - y_d)^2 / 2.
ControllerState adaptive_update(double measured_ca50, double ref_ca50,
                                const AdaptiveStates& s, ControllerState ctrl);

/// V = (x1 (alpha - alpha_hat) + x2 (beta - beta_hat))^2 for a plant with
/// true parameters (alpha, beta).
double lyapunov_value(double alpha, double beta, const AdaptiveStates& s,
                      const ControllerState& ctrl);

/// SOI assumed for the first open-loop command, before any SOI has been issued.
inline constexpr double kSeedSoi = -15.0;

/// Model inversion for the commanded CA50, with P/T at SOI evaluated at the
/// previous cycle's SOI volume and the mean residual fraction. Updates
/// `ctrl.last_v_soi` to the volume at the returned SOI.
double feedforward_soi(double ref_ca50, const OperatingPoint& op,
                       const ModelCoefficients& c, const EngineGeometry& geom,
                       ControllerState& ctrl);

/// Actuator limits applied to every command: [IVC + 5, +5] deg aTDC.
double saturate_soi(double soi, const EngineGeometry& geom);

/// Closed-loop controller: observer-based SOI law plus the per-cycle
/// observer update. Optionally low-pass filters the measured CA50.
class AdaptiveController {
 public:
  struct Options {
    /// Weight of the newest measurement in a first-order filter; 1 disables it.
    double measurement_filter_gain = 1.0;
  };

  AdaptiveController(ModelCoefficients coeffs, EngineGeometry geom);
  AdaptiveController(ModelCoefficients coeffs, EngineGeometry geom, Options options);

  /// SOI for a cycle with reference `ref_ca50` at sensed operating point `op`.
  double command(double ref_ca50, const OperatingPoint& op);

  /// Feed back the CA50 measured for the cycle last commanded.
  void observe(double measured_ca50);

  const ControllerState& state() const { return state_; }

 private:
  ModelCoefficients coeffs_;
  EngineGeometry geom_;
  Options options_;
  ControllerState state_;
  std::optional<AdaptiveStates> pending_states_;
  double pending_ref_ = 0.0;
  std::optional<double> filtered_;
};

class FeedforwardController {
 public:
  FeedforwardController(ModelCoefficients coeffs, EngineGeometry geom);

  double command(double ref_ca50, const OperatingPoint& op);

  const ControllerState& state() const { return state_; }

 private:
  ModelCoefficients coeffs_;
  EngineGeometry geom_;
  ControllerState state_;
};

}  // namespace dfphase
