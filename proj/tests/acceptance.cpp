// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dfphase/calib.hpp"
#include "dfphase/control.hpp"
#include "dfphase/harness.hpp"
#include "dfphase/plant.hpp"
#include "dfphase/scenario.hpp"
#include "support.hpp"

using namespace dfphase;

namespace {

// Pinned tolerances.
constexpr double kExactTol = 1e-9;
constexpr int kRandomTrials = 1000;
constexpr int kSettleLimitCycles = 5;
constexpr double kAdaptiveSteadyBand = 0.15;
constexpr double kFeedforwardSteadyBand = 1.5;
constexpr double kCase1RuntimeLimit = 1.0;  // s
constexpr double kStepRefinementLimit = 0.01;
constexpr double kIntegralTol = 1e-6;
constexpr double kIdentifiabilityRmse = 0.05;
constexpr double kPlantErrStdLimit = 1.0;
constexpr double kPlantErrMaxLimit = 3.0;
constexpr double kCalibRuntimeLimit = 30.0;  // s
constexpr double kSensitivityRatioLimit = 1.5;
constexpr double kNoiseHalfwidth = 0.5;
constexpr std::size_t kNoiseMinCycles = 100;
constexpr double kNoiseStdLimit = 1.2;
constexpr std::size_t kDatasetSize = 1054;
constexpr std::uint64_t kSeed = 42;

const EngineGeometry kGeom = EngineGeometry::reference_engine();

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;
void report(int number, const char* title, const Outcome& o) {
  std::printf("CRITERION %d %s: %s | %s\n", number, o.pass ? "PASS" : "FAIL", title,
              o.detail.c_str());
  if (!o.pass) ++failures;
}

double steady_abs_error(const SegmentSummary& s) {
  return std::max(std::abs(s.ss_error_min), std::abs(s.ss_error_max));
}

// 1. Adaptive loop against a linear plant y = u + alpha x1 + beta x2.
Outcome deadbeat_lyapunov() {
  std::mt19937_64 rng(kSeed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const auto coeffs = ModelCoefficients::published();
  double worst_settled = 0.0, worst_decrement = 0.0;
  constexpr int kCycles = 12, kStepAt = 6;
  for (int trial = 0; trial < kRandomTrials; ++trial) {
    OperatingPoint op;
    op.speed = u(1200, 1500);
    op.phi_di = u(0.2, 0.5);
    op.phi_ng = u(0.2, 0.7);
    const AdaptiveStates s = compute_states(op, coeffs);
    // Keep every command inside the actuator window so the loop stays linear.
    auto draw_params = [&](double& a, double& b) {
      const double total = u(6.0, 25.0), share = u(0.2, 0.8);
      a = share * total / s.x1;
      b = (1.0 - share) * total / s.x2;
    };
    double alpha, beta;
    draw_params(alpha, beta);
    double y_d = u(0.0, 4.0);

    AdaptiveController ctl(coeffs, kGeom);
    for (int k = 0; k < kCycles; ++k) {
      if (k == kStepAt) {
        draw_params(alpha, beta);
        y_d = u(0.0, 4.0);
      }
      const double v_before = lyapunov_value(alpha, beta, s, ctl.state());
      const double y = ctl.command(y_d, op) + alpha * s.x1 + beta * s.x2;
      ctl.observe(y);
      const double v_after = lyapunov_value(alpha, beta, s, ctl.state());
      const double e2 = (y_d - y) * (y_d - y);
      worst_decrement = std::max(worst_decrement,
                                 std::abs((v_after - v_before) + e2) / std::max(1.0, e2));
      if (k == 1 || k == kStepAt + 1 || k == kCycles - 1) {
        worst_settled = std::max(worst_settled, std::abs(y - y_d));
      }
    }
  }
  return {worst_settled <= kExactTol && worst_decrement <= kExactTol,
          fmt("%d trials; max |y-y_d| one cycle after a step %.2e; max decrement residual %.2e",
              kRandomTrials, worst_settled, worst_decrement)};
}

// 2. Feedforward command fed back through the prediction model.
Outcome feedforward_inversion(const ModelCoefficients& coeffs) {
  std::mt19937_64 rng(kSeed + 1);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const ParameterRanges box;
  double worst = 0.0;
  for (int i = 0; i < kRandomTrials; ++i) {
    OperatingPoint op;
    op.speed = u(box.speed.lo, box.speed.hi);
    op.t_ivc = u(box.t_ivc.lo, box.t_ivc.hi);
    op.p_ivc = u(box.p_ivc.lo, box.p_ivc.hi);
    op.phi_di = u(box.phi_di.lo, box.phi_di.hi);
    op.phi_ng = u(box.phi_ng.lo, box.phi_ng.hi);
    op.egr = u(box.egr.lo, box.egr.hi);
    op.x_r = kMeanResidualFraction;
    ControllerState ctrl;
    ctrl.last_v_soi = cylinder_volume(u(box.soi.lo, box.soi.hi), kGeom);
    const double v_soi = ctrl.last_v_soi;
    const double ref = u(0.0, 15.0);
    const double soi = feedforward_soi(ref, op, coeffs, kGeom, ctrl);
    worst = std::max(worst, std::abs(predict_ca50_at_volume(op, soi, v_soi, coeffs, kGeom) - ref));
  }
  return {worst <= kExactTol, fmt("%d points; max |CA50 - ref| %.2e", kRandomTrials, worst)};
}

struct CaseRuns {
  ScenarioResult adaptive;
  ScenarioResult feedforward;
  double adaptive_seconds = 0.0;
};

CaseRuns run_case(int n, const ModelCoefficients& coeffs) {
  CaseRuns r;
  const auto t0 = Clock::now();
  r.adaptive = run_scenario(benchmark_case(n, ControllerKind::kAdaptive), coeffs);
  r.adaptive_seconds = seconds_since(t0);
  r.feedforward = run_scenario(benchmark_case(n, ControllerKind::kFeedforward), coeffs);
  return r;
}

// 3. Case 1 reference step.
Outcome case1(const ModelCoefficients& coeffs) {
  const auto r = run_case(1, coeffs);
  Outcome o;
  if (r.adaptive.aborted || r.feedforward.aborted) return {false, "run aborted"};
  int worst_settle = 0;
  double ad = 0.0, ff = 0.0;
  for (const auto& s : r.adaptive.summary.segments) {
    worst_settle = std::max(worst_settle, s.settling_cycles);
    ad = std::max(ad, steady_abs_error(s));
  }
  for (const auto& s : r.feedforward.summary.segments) ff = std::max(ff, steady_abs_error(s));
  o.pass = r.adaptive.summary.segments.size() == 2 && worst_settle <= kSettleLimitCycles &&
           ad <= kAdaptiveSteadyBand && ff <= kFeedforwardSteadyBand &&
           r.adaptive_seconds <= kCase1RuntimeLimit;
  const auto& seg = r.adaptive.summary.segments;
  o.detail = fmt("adaptive settling %d/%d cycles, steady |err| %.3f (bands [%.3f,%.3f] [%.3f,%.3f]); "
                 "feedforward steady |err| %.3f; runtime %.3f s",
                 seg.size() > 0 ? seg[0].settling_cycles : -1,
                 seg.size() > 1 ? seg[1].settling_cycles : -1, ad,
                 seg.size() > 0 ? seg[0].ss_error_min : 0.0, seg.size() > 0 ? seg[0].ss_error_max : 0.0,
                 seg.size() > 1 ? seg[1].ss_error_min : 0.0, seg.size() > 1 ? seg[1].ss_error_max : 0.0,
                 ff, r.adaptive_seconds);
  return o;
}

// 4. Cases 2-6 operating-point ramps.
Outcome cases_2_to_6(const ModelCoefficients& coeffs) {
  Outcome o;
  std::ostringstream d;
  for (int n = 2; n <= 6; ++n) {
    const auto r = run_case(n, coeffs);
    if (r.adaptive.aborted || r.feedforward.aborted) {
      o.pass = false;
      d << "case" << n << " aborted; ";
      continue;
    }
    // Transient excursions are taken after the change; the first segment
    // also holds the start-up transient.
    double ad = 0.0, ff = 0.0, ad_tr = 0.0, ff_tr = 0.0;
    const auto& as = r.adaptive.summary.segments;
    const auto& fs = r.feedforward.summary.segments;
    for (std::size_t i = 0; i < as.size(); ++i) {
      ad = std::max(ad, steady_abs_error(as[i]));
      if (i > 0) ad_tr = std::max(ad_tr, as[i].max_abs_error);
    }
    for (std::size_t i = 0; i < fs.size(); ++i) {
      ff = std::max(ff, steady_abs_error(fs[i]));
      if (i > 0) ff_tr = std::max(ff_tr, fs[i].max_abs_error);
    }
    o.pass = o.pass && ad <= kAdaptiveSteadyBand && ff <= kFeedforwardSteadyBand;
    d << fmt("case%d ad %.3f ff %.3f", n, ad, ff);
    if (n == 4 || n == 6) d << fmt(" (transient max ad %.2f ff %.2f)", ad_tr, ff_tr);
    d << (n < 6 ? "; " : "");
  }
  o.detail = "steady |err| " + d.str();
  return o;
}

// 5. Plant quadrature.
Outcome quadrature() {
  std::mt19937_64 rng(kSeed + 2);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  const ParameterRanges box;
  const PlantConfig coarse;
  PlantConfig fine = coarse;
  fine.quad_step = 0.05;
  double worst_shift = 0.0, worst_integral = 0.0;
  for (int i = 0; i < 100; ++i) {
    OperatingPoint op;
    op.speed = u(box.speed.lo, box.speed.hi);
    op.t_ivc = u(box.t_ivc.lo, box.t_ivc.hi);
    op.p_ivc = u(box.p_ivc.lo, box.p_ivc.hi);
    op.phi_di = u(box.phi_di.lo, box.phi_di.hi);
    op.phi_ng = u(box.phi_ng.lo, box.phi_ng.hi);
    op.egr = u(box.egr.lo, box.egr.hi);
    op.x_r = u(box.x_r.lo, box.x_r.hi);
    const double soi = u(box.soi.lo, box.soi.hi);
    const double soc = knock_integral_soc(op, soi, coarse);
    worst_shift = std::max(worst_shift, std::abs(knock_integral_soc(op, soi, fine) - soc));
    worst_integral = std::max(worst_integral, std::abs(knock_integral_value(op, soi, soc, coarse) - 1.0));
  }
  return {worst_shift < kStepRefinementLimit && worst_integral <= kIntegralTol,
          fmt("100 points; max SOC shift on halving %.2e CAD; max |integral - 1| %.2e",
              worst_shift, worst_integral)};
}

struct CalibrationRun {
  Outcome outcome;
  Dataset plant_data;
  ModelCoefficients coeffs;
};

// 6. Calibration identifiability and in-family error on the plant dataset.
CalibrationRun calibration() {
  CalibrationRun run;
  const auto t0 = Clock::now();

  const auto truth = ModelCoefficients::published();
  const Dataset model_data = testing::model_dataset(truth, kDatasetSize, kSeed);
  const auto ident = calibrate(testing::scaled(truth, 1.2), model_data, kGeom);
  bool monotone = true;
  for (std::size_t i = 1; i < ident.history.size(); ++i) {
    monotone = monotone && ident.history[i].rmse <= ident.history[i - 1].rmse;
  }

  const auto generated = generate_dataset(ParameterRanges{}, kDatasetSize, PlantConfig{}, kSeed);
  run.plant_data = generated.samples;
  const auto fit = calibrate(ModelCoefficients::published(), run.plant_data, kGeom);
  run.coeffs = fit.coefficients;
  const auto stats = validate(run.coeffs, run.plant_data, kGeom);
  const double elapsed = seconds_since(t0);

  run.outcome.pass = ident.final_rmse < kIdentifiabilityRmse && monotone &&
                     run.plant_data.size() == kDatasetSize &&
                     stats.ca50_err_std <= kPlantErrStdLimit &&
                     stats.ca50_err_max <= kPlantErrMaxLimit && elapsed <= kCalibRuntimeLimit;
  run.outcome.detail =
      fmt("identifiability rmse %.4f from %.3f (%s); plant set %zu pts, rmse %.3f -> %.4f, "
          "CA50 err std %.4f max %.4f (SOC std %.4f max %.4f); runtime %.2f s",
          ident.final_rmse, ident.initial_rmse, monotone ? "non-increasing" : "INCREASING",
          run.plant_data.size(), fit.initial_rmse, fit.final_rmse, stats.ca50_err_std,
          stats.ca50_err_max, stats.soc_err_std, stats.soc_err_max, elapsed);
  return run;
}

// 7. Input-error sensitivity table.
Outcome sensitivity(const ModelCoefficients& coeffs, const Dataset& data) {
  const auto rows = run_sensitivity(SensitivitySpec::measurement_errors(), coeffs, data, kGeom);
  const auto base = validate(coeffs, data, kGeom);
  const bool baseline_exact = !rows.empty() && rows[0].perturbation.quantity == Quantity::kNone &&
                              rows[0].ca50_err_std == base.ca50_err_std &&
                              rows[0].ca50_err_max == base.ca50_err_max;
  const SensitivityRow* worst = &rows[0];
  for (const auto& r : rows) {
    if (r.ca50_err_max > worst->ca50_err_max) worst = &r;
  }
  const double ratio = worst->ca50_err_max / base.ca50_err_max;
  return {baseline_exact && rows.size() == 13 && ratio <= kSensitivityRatioLimit,
          fmt("%zu rows; baseline row %s; baseline max %.4f; worst max %.4f (%s %+g%s), ratio %.2f "
              "(limit %.1f)",
              rows.size(), baseline_exact ? "exact" : "MISMATCH", base.ca50_err_max,
              worst->ca50_err_max, to_string(worst->perturbation.quantity).c_str(),
              worst->perturbation.relative ? 100 * worst->perturbation.delta : worst->perturbation.delta,
              worst->perturbation.relative ? "%" : "", ratio, kSensitivityRatioLimit)};
}

// 8. Measurement noise at Case 1's first condition.
Outcome noise(const ModelCoefficients& coeffs) {
  const auto r = run_noise_study(benchmark_case(1, ControllerKind::kAdaptive), kNoiseHalfwidth, coeffs);
  return {r.bounded && r.records.size() >= kNoiseMinCycles && r.error_std <= kNoiseStdLimit,
          fmt("%zu cycles (%zu fired), %s; actual CA50 error std %.4f, max %.4f", r.records.size(),
              r.cycles, r.bounded ? "bounded" : "UNBOUNDED", r.error_std, r.error_max)};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  // Criterion 6 supplies the calibrated coefficients used by the closed-loop checks.
  const CalibrationRun calib = calibration();

  report(1, "deadbeat convergence and Lyapunov decrement", deadbeat_lyapunov());
  report(2, "feedforward inversion", feedforward_inversion(calib.coeffs));
  report(3, "case 1 reference step", case1(calib.coeffs));
  report(4, "cases 2-6 operating-point ramps", cases_2_to_6(calib.coeffs));
  report(5, "plant quadrature", quadrature());
  report(6, "calibration", calib.outcome);
  report(7, "sensitivity to input errors", sensitivity(calib.coeffs, calib.plant_data));
  report(8, "measurement noise", noise(calib.coeffs));
  std::printf("total %.2f s, %d failing\n", seconds_since(t0), failures);
  return failures;
}
