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

#include "dfphase/plant.hpp"

#include <cmath>
#include <sstream>

namespace dfphase {

namespace {

// Integrand of the knock integral along the polytropic compression trace.
class KnockIntegrand {
 public:
  KnockIntegrand(const OperatingPoint& op, const PlantConfig& cfg)
      : cfg_(cfg),
        op_(op),
        v_ivc_(cylinder_volume(cfg.geom.ivc_angle, cfg.geom)),
        inv_scale_(1.0 / ((cfg.coeffs.c1 * op.egr + cfg.coeffs.c2) *
                          reactivity_state(op, cfg.coeffs))) {}

  double operator()(double theta) const {
    const double ratio = v_ivc_ / cylinder_volume(theta, cfg_.geom);
    const double p = op_.p_ivc * std::pow(ratio, cfg_.plant_poly_exp);
    const double t = op_.t_ivc * std::pow(ratio, cfg_.plant_poly_exp - 1.0);
    return std::exp(-cfg_.coeffs.c5 * std::pow(p, cfg_.coeffs.c6) / t) * inv_scale_;
  }

 private:
  const PlantConfig& cfg_;
  const OperatingPoint& op_;
  double v_ivc_;
  double inv_scale_;
};

// Integral of the linear interpolant between (0, f0) and (h, f1) over [0, s].
double partial_trapezoid(double f0, double f1, double h, double s) {
  return f0 * s + (f1 - f0) * s * s / (2.0 * h);
}

void check_soi(double soi, const PlantConfig& cfg) {
  if (!(soi >= cfg.geom.ivc_angle)) {
    throw DomainError("knock integral: SOI before IVC");
  }
}

}  // namespace

ModelCoefficients default_plant_coefficients() {
  ModelCoefficients c = ModelCoefficients::published();
  c.c5 = 2.0e4;
  return c;
}

void PlantConfig::validate() const {
  geom.validate();
  coeffs.validate();
  if (!(quad_step > 0.0 && quad_step <= 0.5)) {
    throw DomainError("plant config: quad_step must lie in (0, 0.5]");
  }
  if (!(soi_resolution > 0.0)) throw DomainError("plant config: soi_resolution must be positive");
  if (egr_lag_cycles < 0) throw DomainError("plant config: egr_lag_cycles must be >= 0");
  if (!(ca50_noise_halfwidth >= 0.0)) {
    throw DomainError("plant config: noise half-width must be >= 0");
  }
  if (!(plant_poly_exp > 0.0)) throw DomainError("plant config: polytropic exponent must be positive");
}

double knock_integral_soc(const OperatingPoint& op, double soi,
                          const PlantConfig& cfg) {
  check_soi(soi, cfg);
  const KnockIntegrand f(op, cfg);
  const double h = cfg.quad_step;
  double accumulated = 0.0;
  double f0 = f(soi);
  for (long k = 0;; ++k) {
    const double theta0 = soi + static_cast<double>(k) * h;
    if (theta0 >= kMisfireAngle) break;
    const double f1 = f(soi + static_cast<double>(k + 1) * h);
    const double step = 0.5 * h * (f0 + f1);
    if (accumulated + step >= 1.0) {
      // Solve partial_trapezoid(f0, f1, h, s) = remaining for s in (0, h].
      const double remaining = 1.0 - accumulated;
      const double a = (f1 - f0) / (2.0 * h);
      const double disc = f0 * f0 + 4.0 * a * remaining;
      const double s = 2.0 * remaining / (f0 + std::sqrt(std::max(disc, 0.0)));
      return theta0 + s;
    }
    accumulated += step;
    f0 = f1;
  }
  std::ostringstream msg;
  msg << "misfire: knock integral reached " << accumulated << " by " << kMisfireAngle
      << " deg aTDC (SOI " << soi << ")";
  throw MisfireError(msg.str());
}

double knock_integral_value(const OperatingPoint& op, double soi, double theta,
                            const PlantConfig& cfg) {
  check_soi(soi, cfg);
  if (theta <= soi) return 0.0;
  const KnockIntegrand f(op, cfg);
  const double h = cfg.quad_step;
  double accumulated = 0.0;
  double f0 = f(soi);
  for (long k = 0;; ++k) {
    const double theta0 = soi + static_cast<double>(k) * h;
    const double f1 = f(soi + static_cast<double>(k + 1) * h);
    const double s = theta - theta0;
    if (s <= h) return accumulated + partial_trapezoid(f0, f1, h, s);
    accumulated += 0.5 * h * (f0 + f1);
    f0 = f1;
  }
}

double wiebe_fraction(double theta, double soc, double bd,
                      const ModelCoefficients& c) {
  if (!(bd > 0.0)) throw DomainError("wiebe_fraction: burn duration must be positive");
  if (theta <= soc) return 0.0;
  return 1.0 - std::exp(-c.wiebe_a * std::pow((theta - soc) / bd, c.wiebe_b));
}

double simplification_gap(const OperatingPoint& op, double soi,
                          const PlantConfig& cfg) {
  ModelCoefficients frozen = cfg.coeffs;
  frozen.k_c = cfg.plant_poly_exp;
  return knock_integral_soc(op, soi, cfg) - predict_soc(op, soi, frozen, cfg.geom);
}

double quantize_soi(double command, double resolution) {
  // Decimal ties such as -14.95 / 0.1 land a hair short of .5 in binary; the
  // nudge keeps them rounding away from zero.
  const double q = command / resolution;
  return std::round(q + std::copysign(1e-9, q)) * resolution;
}

CombustionResult evaluate_combustion(const OperatingPoint& op, double soi,
                                     const PlantConfig& cfg) {
  const double soc = knock_integral_soc(op, soi, cfg);
  const double bd = burn_duration(dilution_fraction(op.egr, op.x_r), op.phi_ng,
                                  op.phi_di, cfg.coeffs);
  return {soc, bd, ca50_from_soc_bd(soc, bd, cfg.coeffs)};
}

Plant::Plant(PlantConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.rng_seed) {
  cfg_.validate();
}

CycleRecord Plant::step(double soi_command, const OperatingPoint& scheduled,
                        double ca50_ref) {
  scheduled.validate();
  if (!intake_) {
    intake_ = scheduled;
  } else {
    const double w = 1.0 / (1.0 + cfg_.egr_lag_cycles);
    intake_->egr += w * (scheduled.egr - intake_->egr);
    intake_->p_ivc += w * (scheduled.p_ivc - intake_->p_ivc);
    intake_->t_ivc += w * (scheduled.t_ivc - intake_->t_ivc);
    intake_->x_r += w * (scheduled.x_r - intake_->x_r);
  }

  CycleRecord rec;
  rec.cycle_index = cycle_;
  rec.time_s = time_;
  rec.op = scheduled;
  rec.op.egr = intake_->egr;
  rec.op.p_ivc = intake_->p_ivc;
  rec.op.t_ivc = intake_->t_ivc;
  rec.op.x_r = intake_->x_r;
  rec.soi_commanded = soi_command;
  rec.soi_applied = quantize_soi(soi_command, cfg_.soi_resolution);
  rec.ca50_ref = ca50_ref;

  ++cycle_;
  time_ += cycle_period(scheduled.speed);

  if (rec.cycle_index < kUnfueledCycles) return rec;

  const CombustionResult burn = evaluate_combustion(rec.op, rec.soi_applied, cfg_);
  rec.fired = true;
  rec.soc = burn.soc;
  rec.bd = burn.bd;
  rec.ca50_actual = burn.ca50;
  double noise = 0.0;
  if (cfg_.ca50_noise_halfwidth > 0.0) {
    std::uniform_real_distribution<double> dist(-cfg_.ca50_noise_halfwidth,
                                                cfg_.ca50_noise_halfwidth);
    noise = dist(rng_);
  }
  rec.ca50_measured = rec.ca50_actual + noise;
  return rec;
}

}  // namespace dfphase
