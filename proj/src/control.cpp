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

#include "dfphase/control.hpp"

#include <algorithm>
#include <cmath>

namespace dfphase {

namespace {
constexpr double kSoiMarginAfterIvc = 5.0;
constexpr double kLatestSoiCommand = 5.0;
}  // namespace

AdaptiveStates compute_states(const OperatingPoint& op, const ModelCoefficients& c) {
  if (!(op.phi_di > 0.0)) throw DomainError("no pilot fuel: phi_di must be positive");
  return {reactivity_state(op, c), burn_fuel_state(op, c)};
}

double learning_rate(const AdaptiveStates& s) {
  const double norm2 = s.x1 * s.x1 + s.x2 * s.x2;
  if (!(norm2 > 0.0)) throw DomainError("learning_rate: states are both zero");
  return 1.0 / norm2;
}

double adaptive_soi(double ref_ca50, const AdaptiveStates& s,
                    const ControllerState& ctrl) {
  return ref_ca50 - ctrl.alpha_hat * s.x1 - ctrl.beta_hat * s.x2;
}

ControllerState adaptive_update(double measured_ca50, double ref_ca50,
                                const AdaptiveStates& s, ControllerState ctrl) {
  const double eta = learning_rate(s);
  const double error = measured_ca50 - ref_ca50;
  ctrl.alpha_hat += eta * s.x1 * error;
  ctrl.beta_hat += eta * s.x2 * error;
  ctrl.last_error = error;
  return ctrl;
}

double lyapunov_value(double alpha, double beta, const AdaptiveStates& s,
                      const ControllerState& ctrl) {
  const double v = s.x1 * (alpha - ctrl.alpha_hat) + s.x2 * (beta - ctrl.beta_hat);
  return v * v;
}

double feedforward_soi(double ref_ca50, const OperatingPoint& op,
                       const ModelCoefficients& c, const EngineGeometry& geom,
                       ControllerState& ctrl) {
  const double v_soi = ctrl.last_v_soi > 0.0 ? ctrl.last_v_soi : cylinder_volume(kSeedSoi, geom);
  const double v_ivc = cylinder_volume(geom.ivc_angle, geom);
  const auto soi_state = polytropic_state_at_soi(op.p_ivc, op.t_ivc, v_ivc, v_soi, c.k_c);
  const double soi =
      ref_ca50 - ignition_delay(op, soi_state, c) -
      ca50_offset(dilution_fraction(op.egr, kMeanResidualFraction), op.phi_ng, op.phi_di, c);
  ctrl.last_v_soi = cylinder_volume(soi, geom);
  return soi;
}

double saturate_soi(double soi, const EngineGeometry& geom) {
  return std::clamp(soi, geom.ivc_angle + kSoiMarginAfterIvc, kLatestSoiCommand);
}

AdaptiveController::AdaptiveController(ModelCoefficients coeffs, EngineGeometry geom)
    : AdaptiveController(std::move(coeffs), std::move(geom), Options{}) {}

AdaptiveController::AdaptiveController(ModelCoefficients coeffs, EngineGeometry geom,
                                       Options options)
    : coeffs_(std::move(coeffs)), geom_(std::move(geom)), options_(options) {
  if (!(options_.measurement_filter_gain > 0.0 && options_.measurement_filter_gain <= 1.0)) {
    throw DomainError("adaptive controller: filter gain must lie in (0, 1]");
  }
}

double AdaptiveController::command(double ref_ca50, const OperatingPoint& op) {
  const AdaptiveStates s = compute_states(op, coeffs_);
  pending_states_ = s;
  pending_ref_ = ref_ca50;
  return saturate_soi(adaptive_soi(ref_ca50, s, state_), geom_);
}

void AdaptiveController::observe(double measured_ca50) {
  if (!pending_states_) return;
  double y = measured_ca50;
  if (options_.measurement_filter_gain < 1.0) {
    filtered_ = filtered_ ? *filtered_ + options_.measurement_filter_gain * (y - *filtered_) : y;
    y = *filtered_;
  }
  state_ = adaptive_update(y, pending_ref_, *pending_states_, state_);
  pending_states_.reset();
}

FeedforwardController::FeedforwardController(ModelCoefficients coeffs, EngineGeometry geom)
    : coeffs_(std::move(coeffs)), geom_(std::move(geom)) {}

double FeedforwardController::command(double ref_ca50, const OperatingPoint& op) {
  const double soi = saturate_soi(feedforward_soi(ref_ca50, op, coeffs_, geom_, state_), geom_);
  state_.last_v_soi = cylinder_volume(soi, geom_);
  return soi;
}

}  // namespace dfphase
