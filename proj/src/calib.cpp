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

#include "dfphase/calib.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace dfphase {

namespace {

// Cap on any coefficient's relative change in one step.
constexpr double kMaxRelativeStep = 0.5;
// Barzilai-Borwein steps are uneven, so one small gain does not mean convergence.
constexpr int kStallIterations = 5;

constexpr std::array<unsigned, 8> kHaltonBases = {2, 3, 5, 7, 11, 13, 17, 19};

double radical_inverse(std::size_t index, unsigned base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double lerp(const Interval& iv, double u) { return iv.lo + u * (iv.hi - iv.lo); }

// Per-sample volumes never change during a calibration run.
struct PreparedSample {
  const CalibSample* sample;
  double volume_ratio;  // V_IVC / V_SOI
};

std::vector<PreparedSample> prepare(const Dataset& data, const EngineGeometry& geom) {
  const double v_ivc = cylinder_volume(geom.ivc_angle, geom);
  std::vector<PreparedSample> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back({&s, v_ivc / cylinder_volume(s.soi, geom)});
  return out;
}

double prepared_ca50(const PreparedSample& ps, const ModelCoefficients& c) {
  const CalibSample& s = *ps.sample;
  const CylinderState state{s.op.p_ivc * std::pow(ps.volume_ratio, c.k_c),
                            s.op.t_ivc * std::pow(ps.volume_ratio, c.k_c - 1.0)};
  return s.soi + ignition_delay(s.op, state, c) +
         ca50_offset(dilution_fraction(s.op.egr, s.op.x_r), s.op.phi_ng, s.op.phi_di, c);
}

double prepared_rmse(const std::vector<PreparedSample>& data, const ModelCoefficients& c) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double e;
    try {
      e = prepared_ca50(data[i], c) - data[i].sample->ca50_ref;
    } catch (const DomainError& err) {
      throw DomainError("sample " + std::to_string(i) + ": " + err.what());
    }
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(data.size()));
}

ModelCoefficients::Parameters prepared_gradient(const std::vector<PreparedSample>& data,
                                                const ModelCoefficients& c,
                                                double relative_step) {
  const auto p = c.parameters();
  ModelCoefficients::Parameters g{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = relative_step * std::max(std::abs(p[i]), 1e-12);
    auto plus = p;
    auto minus = p;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (prepared_rmse(data, c.with_parameters(plus)) -
            prepared_rmse(data, c.with_parameters(minus))) /
           (2.0 * h);
  }
  return g;
}

bool admissible(const ModelCoefficients& c) {
  try {
    c.validate();
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

void require_nonempty(const Dataset& data, const char* what) {
  if (data.empty()) throw DomainError(std::string(what) + ": dataset is empty");
}

}  // namespace

void ParameterRanges::validate() const {
  for (const Interval* iv : {&speed, &t_ivc, &p_ivc, &phi_di, &phi_ng, &egr, &soi, &x_r}) {
    if (!(iv->lo <= iv->hi)) throw DomainError("parameter ranges: lower bound above upper");
  }
  if (!(speed.lo > 0.0 && t_ivc.lo > 0.0 && p_ivc.lo > 0.0 && phi_di.lo > 0.0 &&
        phi_ng.lo >= 0.0 && egr.lo >= 0.0 && egr.hi < 1.0 && x_r.lo >= 0.0 && x_r.hi < 1.0)) {
    throw DomainError("parameter ranges: outside physical validity");
  }
}

GeneratedDataset generate_dataset(const ParameterRanges& ranges, std::size_t n_samples,
                                  const PlantConfig& cfg, std::uint64_t seed) {
  ranges.validate();
  cfg.validate();
  if (n_samples == 0) throw DomainError("generate_dataset: n_samples must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::array<double, kHaltonBases.size()> shift{};
  for (auto& s : shift) s = unit(rng);

  GeneratedDataset out;
  out.samples.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::array<double, kHaltonBases.size()> u{};
    for (std::size_t d = 0; d < u.size(); ++d) {
      const double v = radical_inverse(i + 1, kHaltonBases[d]) + shift[d];
      u[d] = v - std::floor(v);
    }
    CalibSample s;
    s.op.speed = lerp(ranges.speed, u[0]);
    s.op.t_ivc = lerp(ranges.t_ivc, u[1]);
    s.op.p_ivc = lerp(ranges.p_ivc, u[2]);
    s.op.phi_di = lerp(ranges.phi_di, u[3]);
    s.op.phi_ng = lerp(ranges.phi_ng, u[4]);
    s.op.egr = lerp(ranges.egr, u[5]);
    s.soi = lerp(ranges.soi, u[6]);
    s.op.x_r = lerp(ranges.x_r, u[7]);
    try {
      const CombustionResult r = evaluate_combustion(s.op, s.soi, cfg);
      s.soc_ref = r.soc;
      s.ca50_ref = r.ca50;
    } catch (const MisfireError&) {
      ++out.misfires;
      continue;
    }
    out.samples.push_back(s);
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw DomainError("split_dataset: train fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the split does not depend on the
  // standard library's shuffle implementation.
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(data.size())));
  Dataset train;
  Dataset holdout;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : holdout).push_back(data[order[k]]);
  }
  return {std::move(train), std::move(holdout)};
}

double rmse(const ModelCoefficients& c, const Dataset& data, const EngineGeometry& geom) {
  require_nonempty(data, "rmse");
  return prepared_rmse(prepare(data, geom), c);
}

ModelCoefficients::Parameters rmse_gradient(const ModelCoefficients& c, const Dataset& data,
                                            const EngineGeometry& geom,
                                            double relative_step) {
  require_nonempty(data, "rmse_gradient");
  return prepared_gradient(prepare(data, geom), c, relative_step);
}

CalibReport calibrate(const ModelCoefficients& initial, const Dataset& data,
                      const EngineGeometry& geom, const CalibOptions& options) {
  require_nonempty(data, "calibrate");
  initial.validate();
  const auto prepared = prepare(data, geom);

  CalibReport report;
  ModelCoefficients current = initial;
  double current_rmse = prepared_rmse(prepared, current);
  report.initial_rmse = current_rmse;
  report.history.push_back({0, current_rmse, 0.0, current.parameters()});

  auto finish = [&](std::string reason) {
    report.final_rmse = current_rmse;
    report.coefficients = current;
    report.stop_reason = std::move(reason);
    return report;
  };

  if (!(current_rmse <= options.divergence_rmse)) {
    report.diverged = true;
    throw CalibrationDiverged("calibrate: initial RMSE exceeds divergence limit",
                              finish("diverged"));
  }

  // Descent runs on log|p_i|, so every coefficient moves by a relative amount.
  // The step length is the Barzilai-Borwein estimate from the last accepted
  // move; `step` is the largest relative change of any single coefficient.
  double step = options.learn_rate;
  ModelCoefficients::Parameters prev_log{};
  ModelCoefficients::Parameters prev_rel{};
  bool have_prev = false;
  int stalled = 0;
  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    const auto grad = prepared_gradient(prepared, current, options.relative_step);
    const auto p = current.parameters();

    ModelCoefficients::Parameters rel{};
    ModelCoefficients::Parameters log_p{};
    double rel_max = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      rel[i] = p[i] * grad[i];  // d rmse / d log|p_i|
      log_p[i] = std::log(std::abs(p[i]));
      rel_max = std::max(rel_max, std::abs(rel[i]));
    }
    if (!(rel_max > 0.0)) return finish("zero gradient");

    if (have_prev) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double ds = log_p[i] - prev_log[i];
        ss += ds * ds;
        sy += ds * (rel[i] - prev_rel[i]);
      }
      if (sy > 0.0) step = std::min(ss / sy * rel_max, kMaxRelativeStep);
    }

    bool accepted = false;
    while (step > 1e-15) {
      auto trial = p;
      for (std::size_t i = 0; i < p.size(); ++i) {
        trial[i] *= std::exp(-step * rel[i] / rel_max);
      }
      const ModelCoefficients candidate = current.with_parameters(trial);
      double trial_rmse = 0.0;
      bool ok = admissible(candidate);
      if (ok) {
        try {
          trial_rmse = prepared_rmse(prepared, candidate);
        } catch (const DomainError&) {
          ok = false;
        }
      }
      if (ok && trial_rmse < current_rmse) {
        const double improvement = current_rmse - trial_rmse;
        current = candidate;
        current_rmse = trial_rmse;
        report.iterations = iter;
        report.history.push_back({iter, current_rmse, step, trial});
        accepted = true;
        prev_log = log_p;
        prev_rel = rel;
        have_prev = true;
        stalled = improvement < options.tol ? stalled + 1 : 0;
        if (stalled >= kStallIterations) return finish("improvement below tolerance");
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return finish("no decreasing step");
  }
  return finish("max iterations");
}

ErrorStats error_stats(const std::vector<double>& errors) {
  ErrorStats s;
  if (errors.empty()) return s;
  const double n = static_cast<double>(errors.size());
  s.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  double var = 0.0;
  for (double e : errors) {
    var += (e - s.mean) * (e - s.mean);
    s.max_abs = std::max(s.max_abs, std::abs(e));
  }
  s.std = std::sqrt(var / n);
  return s;
}

ValidationStats validate(const ModelCoefficients& c, const Dataset& holdout,
                         const EngineGeometry& geom) {
  ValidationStats v;
  v.count = holdout.size();
  if (holdout.empty()) return v;
  std::vector<double> soc_err;
  std::vector<double> ca50_err;
  soc_err.reserve(holdout.size());
  ca50_err.reserve(holdout.size());
  std::size_t soc_in = 0;
  std::size_t ca50_in = 0;
  for (const auto& s : holdout) {
    const double soc = predict_soc(s.op, s.soi, c, geom);
    const double ca50 =
        soc + ca50_offset(dilution_fraction(s.op.egr, s.op.x_r), s.op.phi_ng, s.op.phi_di, c);
    soc_err.push_back(soc - s.soc_ref);
    ca50_err.push_back(ca50 - s.ca50_ref);
    if (std::abs(soc_err.back()) <= 1.0) ++soc_in;
    if (std::abs(ca50_err.back()) <= 1.0) ++ca50_in;
  }
  const auto soc_stats = error_stats(soc_err);
  const auto ca50_stats = error_stats(ca50_err);
  v.soc_err_mean = soc_stats.mean;
  v.soc_err_std = soc_stats.std;
  v.soc_err_max = soc_stats.max_abs;
  v.ca50_err_mean = ca50_stats.mean;
  v.ca50_err_std = ca50_stats.std;
  v.ca50_err_max = ca50_stats.max_abs;
  const double n = static_cast<double>(holdout.size());
  v.soc_within_1cad = static_cast<double>(soc_in) / n;
  v.ca50_within_1cad = static_cast<double>(ca50_in) / n;
  return v;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os << "speed,t_ivc,p_ivc,phi_di,phi_ng,egr,x_r,soi,soc_ref,ca50_ref\n";
  os << std::setprecision(17);
  for (const auto& s : data) {
    os << s.op.speed << ',' << s.op.t_ivc << ',' << s.op.p_ivc << ',' << s.op.phi_di << ','
       << s.op.phi_ng << ',' << s.op.egr << ',' << s.op.x_r << ',' << s.soi << ','
       << s.soc_ref << ',' << s.ca50_ref << '\n';
  }
}

Dataset read_dataset_csv(std::istream& is) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line_no == 1) continue;  // header
    std::array<double, 10> v{};
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= v.size()) break;
      try {
        v[k++] = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("dataset csv line " + std::to_string(line_no) +
                                 ": bad number '" + cell + "'");
      }
    }
    if (k != v.size()) {
      throw std::runtime_error("dataset csv line " + std::to_string(line_no) +
                               ": expected 10 columns");
    }
    CalibSample s;
    s.op.speed = v[0];
    s.op.t_ivc = v[1];
    s.op.p_ivc = v[2];
    s.op.phi_di = v[3];
    s.op.phi_ng = v[4];
    s.op.egr = v[5];
    s.op.x_r = v[6];
    s.soi = v[7];
    s.soc_ref = v[8];
    s.ca50_ref = v[9];
    data.push_back(s);
  }
  return data;
}

void write_calib_report_csv(std::ostream& os, const CalibReport& report) {
  os << "iteration,rmse,step";
  for (const char* name : ModelCoefficients::parameter_names()) os << ',' << name;
  os << '\n' << std::setprecision(17);
  for (const auto& h : report.history) {
    os << h.iteration << ',' << h.rmse << ',' << h.step_size;
    for (double p : h.params) os << ',' << p;
    os << '\n';
  }
}

void write_calib_summary(std::ostream& os, const CalibReport& report,
                         const ValidationStats* holdout) {
  os << std::setprecision(6);
  os << "iterations:    " << report.iterations << '\n'
     << "stop reason:   " << report.stop_reason << '\n'
     << "initial rmse:  " << report.initial_rmse << " CAD\n"
     << "final rmse:    " << report.final_rmse << " CAD\n";
  const auto p = report.coefficients.parameters();
  for (std::size_t i = 0; i < p.size(); ++i) {
    os << "  " << std::setw(4) << ModelCoefficients::parameter_names()[i] << " = " << p[i]
       << '\n';
  }
  if (holdout) {
    os << "holdout (" << holdout->count << " points)\n"
       << "  SOC  error std " << holdout->soc_err_std << " max " << holdout->soc_err_max
       << " within 1 CAD " << holdout->soc_within_1cad << '\n'
       << "  CA50 error std " << holdout->ca50_err_std << " max " << holdout->ca50_err_max
       << " within 1 CAD " << holdout->ca50_within_1cad << '\n';
  }
}

}  // namespace dfphase
