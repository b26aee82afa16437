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

// dfphase: dataset generation, calibration, validation and closed-loop
// simulation of dual-fuel combustion phasing.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfphase/calib.hpp"
#include "dfphase/coeffs_io.hpp"
#include "dfphase/harness.hpp"
#include "dfphase/scenario.hpp"

namespace fs = std::filesystem;
using namespace dfphase;

namespace {

struct CommonOptions {
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::string coeffs_path;
};

ModelCoefficients controller_coefficients(const CommonOptions& common) {
  return common.coeffs_path.empty() ? ModelCoefficients::published()
                                    : load_coefficients(common.coeffs_path);
}

std::ofstream open_out(const CommonOptions& common, const std::string& name) {
  fs::create_directories(common.out_dir);
  const fs::path path = fs::path(common.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

Dataset load_or_generate(const std::string& data_path, std::size_t n, std::uint64_t seed) {
  if (!data_path.empty()) {
    std::ifstream in(data_path);
    if (!in) throw std::runtime_error("cannot open dataset " + data_path);
    return read_dataset_csv(in);
  }
  auto generated = generate_dataset(ParameterRanges{}, n, PlantConfig{}, seed);
  if (generated.misfires > 0) {
    std::cerr << "note: " << generated.misfires << " misfiring samples excluded\n";
  }
  return generated.samples;
}

void print_validation(std::ostream& os, const ValidationStats& v) {
  os << std::setprecision(5) << "points " << v.count << '\n'
     << "SOC  error: mean " << v.soc_err_mean << "  std " << v.soc_err_std << "  max "
     << v.soc_err_max << "  within 1 CAD " << v.soc_within_1cad << '\n'
     << "CA50 error: mean " << v.ca50_err_mean << "  std " << v.ca50_err_std << "  max "
     << v.ca50_err_max << "  within 1 CAD " << v.ca50_within_1cad << '\n';
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--seed", common.seed, "Random seed");
  cmd->add_option("--out", common.out_dir, "Output directory");
  cmd->add_option("--coeffs", common.coeffs_path, "Model coefficient JSON file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-fuel CA50 prediction, calibration and control toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  std::size_t n_samples = 1054;
  std::string data_path;
  std::string scenario_path;
  double train_fraction = 0.8;
  double halfwidth = 0.5;
  CalibOptions calib_options;

  auto* gen = app.add_subcommand("gen-data", "Generate a plant dataset over the sweep box");
  add_common(gen, common);
  gen->add_option("-n,--samples", n_samples, "Number of samples")->check(CLI::PositiveNumber);

  auto* cal = app.add_subcommand("calibrate", "Fit model coefficients by gradient descent");
  add_common(cal, common);
  cal->add_option("--data", data_path, "Dataset CSV (generated when omitted)");
  cal->add_option("-n,--samples", n_samples, "Samples to generate when --data is omitted");
  cal->add_option("--train-fraction", train_fraction, "Training share of the dataset");
  cal->add_option("--learn-rate", calib_options.learn_rate, "Initial relative step");
  cal->add_option("--max-iters", calib_options.max_iters, "Iteration limit");
  cal->add_option("--tol", calib_options.tol, "Stop when RMSE improves less than this (CAD)");

  auto* val = app.add_subcommand("validate", "Score coefficients against a dataset");
  add_common(val, common);
  val->add_option("--data", data_path, "Dataset CSV (generated when omitted)");
  val->add_option("-n,--samples", n_samples, "Samples to generate when --data is omitted");

  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  add_common(sim, common);
  sim->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* sens = app.add_subcommand("sensitivity", "CA50 prediction error under input errors");
  add_common(sens, common);
  sens->add_option("--data", data_path, "Dataset CSV (generated when omitted)");
  sens->add_option("-n,--samples", n_samples, "Samples to generate when --data is omitted");

  auto* noise = app.add_subcommand("noise-study", "Adaptive loop under CA50 measurement noise");
  add_common(noise, common);
  noise->add_option("scenario", scenario_path, "Scenario JSON (initial condition is held)")
      ->required();
  noise->add_option("--halfwidth", halfwidth, "Uniform noise half-width (CAD)");

  std::string case_controller = "adaptive";
  auto* cases = app.add_subcommand("export-cases", "Write the six benchmark scenarios as JSON");
  add_common(cases, common);
  cases->add_option("--controller", case_controller, "adaptive or feedforward");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto generated = generate_dataset(ParameterRanges{}, n_samples, PlantConfig{}, common.seed);
      auto out = open_out(common, "dataset.csv");
      write_dataset_csv(out, generated.samples);
      std::cout << "wrote " << generated.samples.size() << " samples ("
                << generated.misfires << " misfires excluded)\n";
    } else if (cal->parsed()) {
      const Dataset data = load_or_generate(data_path, n_samples, common.seed);
      auto [train, holdout] = split_dataset(data, train_fraction, common.seed);
      const ModelCoefficients initial = controller_coefficients(common);
      const EngineGeometry geom = EngineGeometry::reference_engine();
      const CalibReport report = calibrate(initial, train, geom, calib_options);
      const ValidationStats stats = validate(report.coefficients, holdout, geom);
      fs::create_directories(common.out_dir);
      save_coefficients((fs::path(common.out_dir) / "coefficients.json").string(),
                        report.coefficients);
      auto csv = open_out(common, "calib_report.csv");
      write_calib_report_csv(csv, report);
      auto txt = open_out(common, "calib_summary.txt");
      write_calib_summary(txt, report, holdout.empty() ? nullptr : &stats);
      write_calib_summary(std::cout, report, holdout.empty() ? nullptr : &stats);
    } else if (val->parsed()) {
      const Dataset data = load_or_generate(data_path, n_samples, common.seed);
      const ValidationStats stats =
          validate(controller_coefficients(common), data, EngineGeometry::reference_engine());
      print_validation(std::cout, stats);
    } else if (sim->parsed()) {
      const Scenario scenario = load_scenario(scenario_path);
      const ScenarioResult result = run_scenario(scenario, controller_coefficients(common));
      auto csv = open_out(common, "cycles.csv");
      write_cycles_csv(csv, result.records);
      auto js = open_out(common, "summary.json");
      nlohmann::json summary = summary_to_json(result.summary);
      if (result.aborted) summary["aborted"] = *result.aborted;
      js << summary.dump(2) << '\n';
      std::cout << summary.dump(2) << '\n';
      if (result.aborted) return 2;
    } else if (sens->parsed()) {
      const Dataset data = load_or_generate(data_path, n_samples, common.seed);
      const auto rows = run_sensitivity(SensitivitySpec::measurement_errors(),
                                        controller_coefficients(common), data,
                                        EngineGeometry::reference_engine());
      auto csv = open_out(common, "sensitivity.csv");
      write_sensitivity_csv(csv, rows);
      write_sensitivity_csv(std::cout, rows);
    } else if (cases->parsed()) {
      const ControllerKind kind = controller_kind_from_string(case_controller);
      for (int n = 1; n <= 6; ++n) {
        auto out = open_out(common, "case" + std::to_string(n) + "_" + to_string(kind) + ".json");
        out << serialize_scenario(benchmark_case(n, kind)) << '\n';
      }
    } else if (noise->parsed()) {
      Scenario scenario = load_scenario(scenario_path);
      scenario.plant.rng_seed = common.seed;
      const NoiseStudyResult r = run_noise_study(scenario, halfwidth, controller_coefficients(common));
      auto csv = open_out(common, "noise_cycles.csv");
      write_cycles_csv(csv, r.records);
      std::cout << std::setprecision(5) << "cycles " << r.cycles << "  error mean " << r.error_mean
                << "  std " << r.error_std << "  max " << r.error_max
                << (r.bounded ? "  bounded" : "  UNBOUNDED") << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
