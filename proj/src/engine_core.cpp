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

#include "dfphase/engine_core.hpp"

#include <cmath>
#include <numbers>

namespace dfphase {

namespace {

constexpr double kAirMolarMass = 28.96;   // g/mol
constexpr double kCarbonMolarMass = 12.011;
constexpr double kHydrogenMolarMass = 1.008;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// x^e for a fuel equivalence ratio, rejecting 0^negative.
double ratio_pow(double phi, double exponent, const char* what) {
  if (phi < 0.0 || !std::isfinite(phi)) {
    throw DomainError(std::string(what) + ": equivalence ratio must be >= 0");
  }
  if (phi == 0.0 && exponent < 0.0) {
    throw DomainError(std::string(what) + ": zero equivalence ratio with negative exponent");
  }
  return std::pow(phi, exponent);
}

double diesel_pow(double phi_di, double exponent) {
  if (phi_di == 0.0 && exponent < 0.0) {
    throw DomainError("no pilot fuel: phi_di = 0 with a negative exponent");
  }
  return ratio_pow(phi_di, exponent, "phi_di");
}

}  // namespace

double EngineGeometry::displaced_volume() const {
  return std::numbers::pi / 4.0 * bore * bore * stroke;
}

double EngineGeometry::clearance_volume() const {
  return displaced_volume() / (compression_ratio - 1.0);
}

void EngineGeometry::validate() const {
  if (!(bore > 0.0) || !(stroke > 0.0)) {
    throw DomainError("engine geometry: bore and stroke must be positive");
  }
  if (!(compression_ratio > 1.0)) {
    throw DomainError("engine geometry: compression ratio must exceed 1");
  }
  if (!(rod_length > stroke / 2.0)) {
    throw DomainError("engine geometry: rod length must exceed the crank radius");
  }
}

void OperatingPoint::validate() const {
  if (!(speed > 0.0)) throw DomainError("operating point: speed must be positive");
  if (!(egr >= 0.0 && egr < 1.0)) throw DomainError("operating point: egr must lie in [0, 1)");
  if (!(x_r >= 0.0 && x_r < 1.0)) throw DomainError("operating point: x_r must lie in [0, 1)");
  if (!(phi_ng >= 0.0)) throw DomainError("operating point: phi_ng must be >= 0");
  if (!(phi_di > 0.0)) throw DomainError("no pilot fuel: phi_di must be positive");
  if (!(p_ivc > 0.0)) throw DomainError("operating point: p_ivc must be positive");
  if (!(t_ivc > 0.0)) throw DomainError("operating point: t_ivc must be positive");
}

double ModelCoefficients::wiebe_half_fraction() const {
  return std::pow(std::numbers::ln2 / wiebe_a, 1.0 / wiebe_b);
}

double ModelCoefficients::c7() const { return c11 / wiebe_half_fraction(); }

void ModelCoefficients::validate() const {
  for (double v : parameters()) {
    if (!std::isfinite(v)) throw DomainError("model coefficients: non-finite value");
  }
  if (!(c5 > 0.0)) throw DomainError("model coefficients: c5 must be positive");
  if (!(c11 > 0.0)) throw DomainError("model coefficients: c11 must be positive");
  if (!(k_c > 1.0)) throw DomainError("model coefficients: k_c must exceed 1");
  if (!(wiebe_a > 0.0) || !(wiebe_b > 0.0)) {
    throw DomainError("model coefficients: Wiebe shape must be positive");
  }
}

const std::array<const char*, ModelCoefficients::kCalibratedCount>&
ModelCoefficients::parameter_names() {
  static const std::array<const char*, kCalibratedCount> names = {
      "c1", "c2", "c3", "c4", "c5", "c6", "c8", "c9", "c10", "c11", "k_c"};
  return names;
}

ModelCoefficients::Parameters ModelCoefficients::parameters() const {
  return {c1, c2, c3, c4, c5, c6, c8, c9, c10, c11, k_c};
}

ModelCoefficients ModelCoefficients::with_parameters(const Parameters& p) const {
  ModelCoefficients out = *this;
  out.c1 = p[0];
  out.c2 = p[1];
  out.c3 = p[2];
  out.c4 = p[3];
  out.c5 = p[4];
  out.c6 = p[5];
  out.c8 = p[6];
  out.c9 = p[7];
  out.c10 = p[8];
  out.c11 = p[9];
  out.k_c = p[10];
  return out;
}

double cylinder_volume(double theta, const EngineGeometry& geom) {
  const double r = geom.stroke / 2.0;
  const double l = geom.rod_length;
  const double t = deg_to_rad(theta);
  const double s = std::sin(t);
  const double area = std::numbers::pi / 4.0 * geom.bore * geom.bore;
  const double piston_travel = l + r - r * std::cos(t) - std::sqrt(l * l - r * r * s * s);
  return geom.clearance_volume() + area * piston_travel;
}

EquivalenceRatios equivalence_ratios(const MassState& masses,
                                     const FuelProperties& fuels) {
  if (!(masses.m_air > 0.0)) {
    throw DomainError("equivalence ratios: air mass must be positive");
  }
  // (m_f/m_air) / (m_f/m_air)_st with (m_f/m_air)_st = 1/AFR_st
  return {masses.m_ng / masses.m_air * fuels.afr_stoich_ng,
          masses.m_diesel / masses.m_air * fuels.afr_stoich_diesel};
}

double stoichiometric_afr(double carbon_atoms, double hydrogen_atoms) {
  const double o2_moles = carbon_atoms + hydrogen_atoms / 4.0;
  const double air_mass = o2_moles * 4.76 * kAirMolarMass;
  const double fuel_mass = carbon_atoms * kCarbonMolarMass + hydrogen_atoms * kHydrogenMolarMass;
  return air_mass / fuel_mass;
}

EgrEstimate egr_from_o2(const O2Readings& r) {
  const double depletion = r.x_o2_amb - r.x_o2_exh;
  if (depletion == 0.0) {
    throw DomainError("egr_from_o2: no oxygen depletion between ambient and exhaust");
  }
  const double egr = (r.x_o2_amb - r.x_o2_int) / depletion;
  return {egr, egr >= 0.0 && egr <= 1.0};
}

double residual_fraction(const MassState& m) {
  const double fresh = m.m_air + m.m_ng + m.m_diesel + m.m_egr;
  if (!(fresh > 0.0)) {
    throw DomainError("residual_fraction: zero inducted mass");
  }
  return m.m_residual / fresh;
}

double dilution_fraction(double egr, double x_r) { return egr + x_r; }

CylinderState polytropic_state_at_soi(double p_ivc, double t_ivc, double v_ivc,
                                      double v_soi, double k_c) {
  if (!(v_ivc > 0.0) || !(v_soi > 0.0)) {
    throw DomainError("polytropic state: volumes must be positive");
  }
  const double ratio = v_ivc / v_soi;
  return {p_ivc * std::pow(ratio, k_c), t_ivc * std::pow(ratio, k_c - 1.0)};
}

double reactivity_state(const OperatingPoint& op, const ModelCoefficients& c) {
  return op.speed * (ratio_pow(op.phi_ng, c.c3, "phi_ng") + diesel_pow(op.phi_di, c.c4));
}

double burn_fuel_state(const OperatingPoint& op, const ModelCoefficients& c) {
  return ratio_pow(op.phi_ng, c.c9, "phi_ng") + diesel_pow(op.phi_di, c.c10);
}

double delay_scale(double egr, const CylinderState& s, const ModelCoefficients& c) {
  return (c.c1 * egr + c.c2) * std::exp(c.c5 * std::pow(s.pressure, c.c6) / s.temperature);
}

double ignition_delay(const OperatingPoint& op, const CylinderState& soi_state,
                      const ModelCoefficients& c) {
  return delay_scale(op.egr, soi_state, c) * reactivity_state(op, c);
}

double predict_soc_at_volume(const OperatingPoint& op, double soi, double v_soi,
                             const ModelCoefficients& c,
                             const EngineGeometry& geom) {
  const double v_ivc = cylinder_volume(geom.ivc_angle, geom);
  const auto state = polytropic_state_at_soi(op.p_ivc, op.t_ivc, v_ivc, v_soi, c.k_c);
  return soi + ignition_delay(op, state, c);
}

double predict_soc(const OperatingPoint& op, double soi,
                   const ModelCoefficients& c, const EngineGeometry& geom) {
  if (!(soi >= geom.ivc_angle && soi <= kLatestModelSoi)) {
    throw DomainError("predict_soc: SOI outside [IVC, 30] deg aTDC");
  }
  return predict_soc_at_volume(op, soi, cylinder_volume(soi, geom), c, geom);
}

double burn_duration(double x_d, double phi_ng, double phi_di,
                     const ModelCoefficients& c) {
  if (!(x_d >= 0.0)) throw DomainError("burn_duration: dilution fraction must be >= 0");
  return c.c7() * std::pow(1.0 + x_d, c.c8) *
         (ratio_pow(phi_ng, c.c9, "phi_ng") + diesel_pow(phi_di, c.c10));
}

double ca50_from_soc_bd(double soc, double bd, const ModelCoefficients& c) {
  if (!(bd >= 0.0)) throw DomainError("ca50_from_soc_bd: burn duration must be >= 0");
  return soc + c.wiebe_half_fraction() * bd;
}

double ca50_offset(double x_d, double phi_ng, double phi_di,
                   const ModelCoefficients& c) {
  return c.c11 * std::pow(1.0 + x_d, c.c8) *
         (ratio_pow(phi_ng, c.c9, "phi_ng") + diesel_pow(phi_di, c.c10));
}

double predict_ca50(const OperatingPoint& op, double soi,
                    const ModelCoefficients& c, const EngineGeometry& geom) {
  return predict_soc(op, soi, c, geom) +
         ca50_offset(dilution_fraction(op.egr, op.x_r), op.phi_ng, op.phi_di, c);
}

double predict_ca50_at_volume(const OperatingPoint& op, double soi,
                              double v_soi, const ModelCoefficients& c,
                              const EngineGeometry& geom) {
  return predict_soc_at_volume(op, soi, v_soi, c, geom) +
         ca50_offset(dilution_fraction(op.egr, op.x_r), op.phi_ng, op.phi_di, c);
}

}  // namespace dfphase
