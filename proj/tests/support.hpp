// Helpers shared by the test executables.
#pragma once

#include "dfphase/calib.hpp"

namespace dfphase::testing {

/// Dataset on the sweep box whose references come from the prediction model
/// itself with coefficients `truth`.
inline Dataset model_dataset(const ModelCoefficients& truth, std::size_t n, std::uint64_t seed) {
  Dataset data = generate_dataset(ParameterRanges{}, n, PlantConfig{}, seed).samples;
  const auto geom = EngineGeometry::reference_engine();
  for (auto& s : data) {
    s.soc_ref = predict_soc(s.op, s.soi, truth, geom);
    s.ca50_ref = predict_ca50(s.op, s.soi, truth, geom);
  }
  return data;
}

inline ModelCoefficients scaled(const ModelCoefficients& c, double factor) {
  auto p = c.parameters();
  for (auto& v : p) v *= factor;
  return c.with_parameters(p);
}

}  // namespace dfphase::testing
