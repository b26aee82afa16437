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

#include <array>
#include <stdexcept>
#include <string>

/// Closed-form combustion phasing model for a diesel / natural-gas dual-fuel
/// engine. Everything in here is a pure function of its arguments.
///
/// Units used throughout the library:
///   crank angle   degrees after top dead center (deg aTDC), CAD for spans
///   volume        m^3
///   pressure      bar
///   temperature   K
///   speed         RPM
namespace dfphase {

/// Raised when an input lies outside the domain of a model equation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EngineGeometry {
  double bore = 0.126;          // m
  double stroke = 0.166;        // m
  double rod_length = 0.251;    // m
  double compression_ratio = 17.0;
  double ivc_angle = -148.5;    // deg aTDC
  double ivo_angle = -363.5;
  double evo_angle = 137.0;
  double evc_angle = 389.0;

  /// Six-cylinder 12.4 L heavy-duty engine used throughout the project.
  static EngineGeometry reference_engine() { return {}; }

  double displaced_volume() const;
  double clearance_volume() const;
  void validate() const;

  bool operator==(const EngineGeometry&) const = default;
};

struct OperatingPoint {
  double speed = 1200.0;   // RPM
  double phi_ng = 0.4;
  double phi_di = 0.4;
  double egr = 0.25;       // mass fraction
  double x_r = 0.0329;     // residual fraction
  double p_ivc = 2.9;      // bar
  double t_ivc = 390.0;    // K

  void validate() const;

  bool operator==(const OperatingPoint&) const = default;
};

struct MassState {
  double m_air = 0.0;      // kg per cycle
  double m_ng = 0.0;
  double m_diesel = 0.0;
  double m_egr = 0.0;
  double m_residual = 0.0;
};

struct O2Readings {
  double x_o2_amb = 0.23;
  double x_o2_int = 0.23;
  double x_o2_exh = 0.11;
};

struct FuelProperties {
  double afr_stoich_diesel = 14.5;
  double afr_stoich_ng = 17.19;  // methane
};

/// Calibrated constants of the SOC / burn-duration / CA50 model.
///
/// `wiebe_a` and `wiebe_b` only shape the plant's burn trace; the CA50 model
/// sees them folded into `c11`, and `c7()` recovers the burn-duration scale.
struct ModelCoefficients {
  double c1 = 1.0504e-4;
  double c2 = 1.4958e-4;
  double c3 = 0.2284;
  double c4 = -0.2604;
  double c5 = 9591.9;
  double c6 = -0.5962;
  double c8 = 0.8292;
  double c9 = 0.0522;
  double c10 = -0.9682;
  double c11 = 1.3359;
  double k_c = 1.0546;
  double wiebe_a = 6.908;
  double wiebe_b = 1.5;

  /// Published calibration.
  static ModelCoefficients published() { return {}; }

  /// Burn-duration scale in CAD, c11 / (ln2/a)^(1/b).
  double c7() const;
  /// (ln2/a)^(1/b): fraction of the burn duration elapsed at CA50.
  double wiebe_half_fraction() const;

  void validate() const;

  static constexpr std::size_t kCalibratedCount = 11;
  using Parameters = std::array<double, kCalibratedCount>;
  static const std::array<const char*, kCalibratedCount>& parameter_names();

  /// Calibrated subset in the order c1..c6, c8..c11, k_c.
  Parameters parameters() const;
  ModelCoefficients with_parameters(const Parameters& p) const;

  bool operator==(const ModelCoefficients&) const = default;
};

/// Mean residual fraction assumed by the open-loop controller.
inline constexpr double kMeanResidualFraction = 0.0329;

/// Slider-crank cylinder volume at crank angle `theta` (deg aTDC).
double cylinder_volume(double theta, const EngineGeometry& geom);

struct EquivalenceRatios {
  double phi_ng;
  double phi_di;
};

EquivalenceRatios equivalence_ratios(const MassState& masses,
                                     const FuelProperties& fuels);

/// Stoichiometric air-fuel mass ratio of a hydrocarbon CxHy burned in air
/// (O2 + 3.76 N2, molar mass of air 28.96 g/mol).
double stoichiometric_afr(double carbon_atoms, double hydrogen_atoms);

struct EgrEstimate {
  double egr;
  bool in_range;  // false when the raw estimate falls outside [0, 1]
};

/// EGR fraction from the oxygen mass balance at the intake:
/// x_int = (1 - EGR) x_amb + EGR x_exh.
EgrEstimate egr_from_o2(const O2Readings& readings);

double residual_fraction(const MassState& masses);

double dilution_fraction(double egr, double x_r);

struct CylinderState {
  double pressure;     // bar
  double temperature;  // K
};

CylinderState polytropic_state_at_soi(double p_ivc, double t_ivc, double v_ivc,
                                      double v_soi, double k_c);

/// N (phi_ng^c3 + phi_di^c4): the speed-weighted fuel reactivity term.
double reactivity_state(const OperatingPoint& op, const ModelCoefficients& c);
/// phi_ng^c9 + phi_di^c10: the burn-duration fuel term.
double burn_fuel_state(const OperatingPoint& op, const ModelCoefficients& c);

/// (c1 EGR + c2) exp(c5 P^c6 / T) with P, T the frozen cylinder state.
double delay_scale(double egr, const CylinderState& soi_state,
                   const ModelCoefficients& c);

/// Ignition delay SOC - SOI with the cylinder state frozen at SOI.
double ignition_delay(const OperatingPoint& op, const CylinderState& soi_state,
                      const ModelCoefficients& c);

double predict_soc(const OperatingPoint& op, double soi,
                   const ModelCoefficients& c, const EngineGeometry& geom);

/// SOC with the cylinder volume at SOI supplied by the caller.
double predict_soc_at_volume(const OperatingPoint& op, double soi, double v_soi,
                             const ModelCoefficients& c,
                             const EngineGeometry& geom);

double burn_duration(double x_d, double phi_ng, double phi_di,
                     const ModelCoefficients& c);

double ca50_from_soc_bd(double soc, double bd, const ModelCoefficients& c);

/// c11 (1 + X_d)^c8 (phi_ng^c9 + phi_di^c10): CA50 - SOC.
double ca50_offset(double x_d, double phi_ng, double phi_di,
                   const ModelCoefficients& c);

double predict_ca50(const OperatingPoint& op, double soi,
                    const ModelCoefficients& c, const EngineGeometry& geom);

double predict_ca50_at_volume(const OperatingPoint& op, double soi,
                              double v_soi, const ModelCoefficients& c,
                              const EngineGeometry& geom);

/// Latest SOI accepted by the prediction model.
inline constexpr double kLatestModelSoi = 30.0;

}  // namespace dfphase
