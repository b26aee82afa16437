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

#include "dfphase/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <variant>

#include "dfphase/control.hpp"

namespace dfphase {

namespace {

using AnyController = std::variant<AdaptiveController, FeedforwardController>;

AnyController make_controller(const Scenario& s, const ModelCoefficients& coeffs) {
  if (s.controller == ControllerKind::kAdaptive) {
    AdaptiveController::Options opts;
    opts.measurement_filter_gain = s.measurement_filter_gain;
    return AdaptiveController(coeffs, s.plant.geom, opts);
  }
  return FeedforwardController(coeffs, s.plant.geom);
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario, const ModelCoefficients& controller_coeffs) {
  scenario.validate();
  ScenarioResult result;
  Plant plant(scenario.plant);
  AnyController controller = make_controller(scenario, controller_coeffs);

  std::optional<double> previous_ref;
  while (plant.time() < scenario.duration_s - kTimeEpsilon) {
    const double t = plant.time();
    const OperatingPoint sensed = scenario.operating_point_at(t);
    const double ref_now = scenario.reference.value_at(t);
    // The SOI for this cycle was computed before the current reference sample.
    const double ref_used = previous_ref.value_or(ref_now);
    previous_ref = ref_now;

    std::optional<double> alpha_hat;
    std::optional<double> beta_hat;
    const double soi = std::visit(
        [&](auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, AdaptiveController>) {
            alpha_hat = c.state().alpha_hat;
            beta_hat = c.state().beta_hat;
          }
          return c.command(ref_used, sensed);
        },
        controller);

    CycleRecord rec;
    try {
      rec = plant.step(soi, sensed, ref_now);
    } catch (const MisfireError& e) {
      result.aborted = e.what();
      break;
    }
    rec.alpha_hat = alpha_hat;
    rec.beta_hat = beta_hat;
    if (rec.fired) {
      if (auto* adaptive = std::get_if<AdaptiveController>(&controller)) {
        adaptive->observe(rec.ca50_measured);
      }
    }
    result.records.push_back(rec);
  }
  result.summary = summarize(result.records, scenario.segment_boundaries());
  return result;
}

ScenarioSummary summarize(const std::vector<CycleRecord>& records,
                          const std::vector<double>& boundaries) {
  std::vector<std::vector<const CycleRecord*>> groups(boundaries.size() + 1);
  for (const auto& r : records) {
    if (!r.fired) continue;
    std::size_t seg = 0;
    while (seg < boundaries.size() && r.time_s > boundaries[seg] + kTimeEpsilon) ++seg;
    groups[seg].push_back(&r);
  }

  ScenarioSummary summary;
  std::optional<double> previous_final;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    if (grp.empty()) continue;
    SegmentSummary seg;
    seg.t_start = g == 0 ? 0.0 : boundaries[g - 1];
    seg.t_end = g < boundaries.size() ? boundaries[g] : grp.back()->time_s;
    seg.first_cycle = grp.front()->cycle_index;
    seg.last_cycle = grp.back()->cycle_index;
    seg.cycles = grp.size();

    const std::size_t window = std::min(kSteadyStateWindow, grp.size());
    const std::size_t tail = grp.size() - window;
    std::vector<double> tail_values;
    std::vector<double> tail_errors;
    for (std::size_t i = tail; i < grp.size(); ++i) {
      tail_values.push_back(grp[i]->ca50_actual);
      tail_errors.push_back(grp[i]->ca50_actual - grp[i]->ca50_ref);
    }
    seg.final_value = mean_of(tail_values);
    seg.ss_error_mean = mean_of(tail_errors);
    seg.ss_error_min = *std::min_element(tail_errors.begin(), tail_errors.end());
    seg.ss_error_max = *std::max_element(tail_errors.begin(), tail_errors.end());

    std::size_t settle = 0;
    for (std::size_t i = grp.size(); i-- > 0;) {
      if (std::abs(grp[i]->ca50_actual - seg.final_value) > kSettleBand) {
        settle = i + 1;
        break;
      }
    }
    seg.settling_cycles = static_cast<int>(settle);

    const double start = previous_final.value_or(grp.front()->ca50_actual);
    const double direction = seg.final_value > start ? 1.0 : (seg.final_value < start ? -1.0 : 0.0);
    for (const auto* r : grp) {
      seg.overshoot = std::max(seg.overshoot, direction * (r->ca50_actual - seg.final_value));
      seg.max_abs_error = std::max(seg.max_abs_error, std::abs(r->ca50_actual - r->ca50_ref));
    }
    previous_final = seg.final_value;
    summary.segments.push_back(seg);
  }
  return summary;
}

void write_cycles_csv(std::ostream& os, const std::vector<CycleRecord>& records) {
  os << "cycle,time_s,speed,phi_di,phi_ng,egr,p_ivc,t_ivc,ca50_ref,soi_cmd,soi_applied,soc,bd,"
        "ca50_actual,ca50_meas,alpha_hat,beta_hat\n";
  os << std::setprecision(17);
  for (const auto& r : records) {
    os << r.cycle_index << ',' << r.time_s << ',' << r.op.speed << ',' << r.op.phi_di << ','
       << r.op.phi_ng << ',' << r.op.egr << ',' << r.op.p_ivc << ',' << r.op.t_ivc << ','
       << r.ca50_ref << ',' << r.soi_commanded << ',' << r.soi_applied << ',' << r.soc << ','
       << r.bd << ',' << r.ca50_actual << ',' << r.ca50_measured << ',';
    if (r.alpha_hat) os << *r.alpha_hat;
    os << ',';
    if (r.beta_hat) os << *r.beta_hat;
    os << '\n';
  }
}

nlohmann::json summary_to_json(const ScenarioSummary& summary) {
  nlohmann::json segments = nlohmann::json::array();
  for (const auto& s : summary.segments) {
    segments.push_back({{"t_start", s.t_start},
                        {"t_end", s.t_end},
                        {"first_cycle", s.first_cycle},
                        {"last_cycle", s.last_cycle},
                        {"cycles", s.cycles},
                        {"final_value", s.final_value},
                        {"settling_cycles", s.settling_cycles},
                        {"overshoot", s.overshoot},
                        {"ss_error_min", s.ss_error_min},
                        {"ss_error_max", s.ss_error_max},
                        {"ss_error_mean", s.ss_error_mean},
                        {"max_abs_error", s.max_abs_error}});
  }
  return {{"segments", segments}};
}

std::string to_string(Quantity q) {
  switch (q) {
    case Quantity::kNone: return "none";
    case Quantity::kPIvc: return "p_ivc";
    case Quantity::kTIvc: return "t_ivc";
    case Quantity::kEgr: return "egr";
    case Quantity::kPhiDi: return "phi_di";
    case Quantity::kPhiNg: return "phi_ng";
    case Quantity::kXr: return "x_r";
  }
  return "unknown";
}

SensitivitySpec SensitivitySpec::measurement_errors() {
  SensitivitySpec spec;
  spec.perturbations = {
      {Quantity::kNone, 0.0, false},
      {Quantity::kPIvc, +0.05, false}, {Quantity::kPIvc, -0.05, false},
      {Quantity::kTIvc, +5.0, false},  {Quantity::kTIvc, -5.0, false},
      {Quantity::kEgr, +0.05, false},  {Quantity::kEgr, -0.05, false},
      {Quantity::kPhiDi, +0.10, true}, {Quantity::kPhiDi, -0.10, true},
      {Quantity::kPhiNg, +0.10, true}, {Quantity::kPhiNg, -0.10, true},
      {Quantity::kXr, +0.03, false},   {Quantity::kXr, -0.03, false},
  };
  return spec;
}

namespace {

double perturb(double value, const Perturbation& p) {
  return p.relative ? value * (1.0 + p.delta) : value + p.delta;
}

OperatingPoint perturbed(OperatingPoint op, const Perturbation& p) {
  switch (p.quantity) {
    case Quantity::kNone: break;
    case Quantity::kPIvc: op.p_ivc = perturb(op.p_ivc, p); break;
    case Quantity::kTIvc: op.t_ivc = perturb(op.t_ivc, p); break;
    case Quantity::kEgr: op.egr = std::max(0.0, perturb(op.egr, p)); break;
    case Quantity::kPhiDi: op.phi_di = perturb(op.phi_di, p); break;
    case Quantity::kPhiNg: op.phi_ng = perturb(op.phi_ng, p); break;
    case Quantity::kXr: op.x_r = std::max(0.0, perturb(op.x_r, p)); break;
  }
  return op;
}

}  // namespace

std::vector<SensitivityRow> run_sensitivity(const SensitivitySpec& spec,
                                            const ModelCoefficients& coeffs,
                                            const Dataset& dataset,
                                            const EngineGeometry& geom) {
  std::vector<SensitivityRow> rows;
  for (const auto& p : spec.perturbations) {
    Dataset shifted = dataset;
    for (auto& s : shifted) s.op = perturbed(s.op, p);
    const ValidationStats stats = validate(coeffs, shifted, geom);
    rows.push_back({p, stats.ca50_err_std, stats.ca50_err_max});
  }
  return rows;
}

void write_sensitivity_csv(std::ostream& os, const std::vector<SensitivityRow>& rows) {
  os << "quantity,delta,relative,ca50_err_std,ca50_err_max\n" << std::setprecision(10);
  for (const auto& r : rows) {
    os << to_string(r.perturbation.quantity) << ',' << r.perturbation.delta << ','
       << (r.perturbation.relative ? 1 : 0) << ',' << r.ca50_err_std << ','
       << r.ca50_err_max << '\n';
  }
}

NoiseStudyResult run_noise_study(const Scenario& scenario, double halfwidth,
                                 const ModelCoefficients& controller_coeffs) {
  if (!(halfwidth >= 0.0)) throw DomainError("noise study: half-width must be >= 0");
  Scenario held = scenario;
  held.name = scenario.name + "-noise";
  held.duration_s = 10.0;
  held.controller = ControllerKind::kAdaptive;
  held.plant.ca50_noise_halfwidth = halfwidth;
  for (auto& [key, sched] : held.schedules) sched = Schedule::constant(sched.value_at(0.0));
  held.reference = Schedule::constant(scenario.reference.value_at(0.0));

  const ScenarioResult run = run_scenario(held, controller_coeffs);
  NoiseStudyResult out;
  out.records = run.records;
  std::vector<double> errors;
  for (const auto& r : run.records) {
    if (r.fired) errors.push_back(r.ca50_actual - r.ca50_ref);
  }
  const ErrorStats stats = error_stats(errors);
  out.cycles = errors.size();
  out.error_mean = stats.mean;
  out.error_std = stats.std;
  out.error_max = stats.max_abs;
  out.bounded = !run.aborted && std::all_of(errors.begin(), errors.end(), [](double e) {
    return std::isfinite(e) && std::abs(e) <= kNoiseStudyBound;
  });
  return out;
}

}  // namespace dfphase
