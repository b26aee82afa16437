#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dfphase/engine_core.hpp"

using namespace dfphase;
using doctest::Approx;

// Frozen values from tests/oracles/derive_expected.py (50-digit mpmath).
namespace oracle {
constexpr double kDisplacedL = 2.0698508861882496;
constexpr double kClearanceL = 0.12936568038676560;
constexpr double kVolumeIvc = 0.0020937787711047911;
constexpr double kVolumeMinus15 = 0.00017611338615505461;
constexpr double kPSoi = 32.318028530408393;
constexpr double kTSoi = 422.47034067680530;
constexpr double kX1 = 2496.7688955382676;
constexpr double kX2 = 3.3815014106375486;
constexpr double kDelay = 7.6675879673037314;
constexpr double kCa50MinusSoc = 5.5538864565150917;
constexpr double kC7 = 6.1866924686329439;
}  // namespace oracle

TEST_CASE("reference engine volumes") {
  const auto g = EngineGeometry::reference_engine();
  CHECK(g.displaced_volume() * 1e3 == Approx(oracle::kDisplacedL).epsilon(1e-14));
  CHECK(g.clearance_volume() * 1e3 == Approx(oracle::kClearanceL).epsilon(1e-14));
  CHECK(6 * g.displaced_volume() * 1e3 == Approx(12.42).epsilon(1e-3));
  CHECK(cylinder_volume(g.ivc_angle, g) == Approx(oracle::kVolumeIvc).epsilon(1e-13));
  CHECK(cylinder_volume(-15.0, g) == Approx(oracle::kVolumeMinus15).epsilon(1e-13));
  CHECK(cylinder_volume(0.0, g) == Approx(g.clearance_volume()).epsilon(1e-14));
  CHECK(cylinder_volume(180.0, g) ==
        Approx(g.clearance_volume() + g.displaced_volume()).epsilon(1e-14));
}

TEST_CASE("volume is symmetric about TDC and monotone on the compression stroke") {
  const auto g = EngineGeometry::reference_engine();
  double prev = cylinder_volume(-180.0, g);
  for (double th = -179.5; th <= 0.0; th += 0.5) {
    CHECK(cylinder_volume(th, g) == Approx(cylinder_volume(-th, g)).epsilon(1e-14));
    const double v = cylinder_volume(th, g);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("geometry validation") {
  EngineGeometry g;
  g.compression_ratio = 1.0;
  CHECK_THROWS_AS(g.validate(), DomainError);
  g = EngineGeometry{};
  g.rod_length = 0.05;
  CHECK_THROWS_AS(g.validate(), DomainError);
  CHECK_NOTHROW(EngineGeometry{}.validate());
}

TEST_CASE("stoichiometric air-fuel ratio of methane") {
  CHECK(stoichiometric_afr(1, 4) == Approx(17.19).epsilon(1e-3));
  CHECK(FuelProperties{}.afr_stoich_ng == 17.19);
  CHECK(FuelProperties{}.afr_stoich_diesel == 14.5);
}

TEST_CASE("equivalence ratios from per-cycle masses") {
  MassState m;
  m.m_air = 1.0;
  m.m_ng = 0.4 / 17.19;
  m.m_diesel = 0.4 / 14.5;
  const auto phi = equivalence_ratios(m, FuelProperties{});
  CHECK(phi.phi_ng == Approx(0.4).epsilon(1e-14));
  CHECK(phi.phi_di == Approx(0.4).epsilon(1e-14));
  m.m_air = 0.0;
  CHECK_THROWS_AS(equivalence_ratios(m, FuelProperties{}), DomainError);
}

TEST_CASE("EGR from oxygen readings") {
  const auto e = egr_from_o2({0.23, 0.20, 0.11});
  CHECK(e.egr == Approx(0.25).epsilon(1e-12));
  CHECK(e.in_range);

  SUBCASE("out-of-range estimate is flagged, not clamped") {
    const auto bad = egr_from_o2({0.23, 0.24, 0.11});
    CHECK(bad.egr < 0.0);
    CHECK_FALSE(bad.in_range);
  }
  SUBCASE("no depletion is a domain error") {
    CHECK_THROWS_AS(egr_from_o2({0.21, 0.21, 0.21}), DomainError);
  }
  SUBCASE("mixing round trip") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> egr(0.0, 1.0), exh(0.02, 0.2);
    for (int i = 0; i < 1000; ++i) {
      const double f = egr(rng), x_exh = exh(rng), amb = 0.2314;
      const double x_int = (1 - f) * amb + f * x_exh;
      CHECK(egr_from_o2({amb, x_int, x_exh}).egr == Approx(f).epsilon(1e-10).scale(1.0));
    }
  }
}

TEST_CASE("residual and dilution fractions") {
  MassState m;
  m.m_air = 2.5;
  m.m_egr = 0.4;
  m.m_residual = 0.1;
  CHECK(residual_fraction(m) == Approx(0.1 / 2.9).epsilon(1e-14));
  CHECK(residual_fraction(m) == Approx(0.03448).epsilon(1e-3));
  CHECK(dilution_fraction(0.25, 0.0329) == Approx(0.2829));
  CHECK_THROWS_AS(residual_fraction(MassState{}), DomainError);
}

TEST_CASE("polytropic compression to SOI") {
  const auto s = polytropic_state_at_soi(2.85, 372.56, 10.0, 1.0, 1.0546);
  CHECK(s.pressure == Approx(oracle::kPSoi).epsilon(1e-13));
  CHECK(s.temperature == Approx(oracle::kTSoi).epsilon(1e-13));
  CHECK(s.pressure == Approx(32.30).epsilon(1e-3));
  CHECK(s.temperature == Approx(422.4).epsilon(1e-3));
  CHECK_THROWS_AS(polytropic_state_at_soi(2.85, 372.56, 10.0, 0.0, 1.0546), DomainError);

  SUBCASE("compress then expand returns to the start") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> p(1.0, 5.0), t(300, 450), r(1.0, 17.0), k(1.01, 1.4);
    for (int i = 0; i < 1000; ++i) {
      const double p0 = p(rng), t0 = t(rng), ratio = r(rng), kc = k(rng);
      const auto up = polytropic_state_at_soi(p0, t0, ratio, 1.0, kc);
      const auto back = polytropic_state_at_soi(up.pressure, up.temperature, 1.0, ratio, kc);
      CHECK(back.pressure == Approx(p0).epsilon(1e-12));
      CHECK(back.temperature == Approx(t0).epsilon(1e-12));
    }
  }
}

TEST_CASE("fuel state variables and ignition delay") {
  const auto c = ModelCoefficients::published();
  OperatingPoint op;  // 1200 RPM, phi 0.4 / 0.4, EGR 0.25
  CHECK(reactivity_state(op, c) == Approx(oracle::kX1).epsilon(1e-13));
  CHECK(burn_fuel_state(op, c) == Approx(oracle::kX2).epsilon(1e-13));
  const CylinderState st{32.30, 422.4};
  CHECK(ignition_delay(op, st, c) == Approx(oracle::kDelay).epsilon(1e-12));
  CHECK(ca50_offset(dilution_fraction(op.egr, op.x_r), op.phi_ng, op.phi_di, c) ==
        Approx(oracle::kCa50MinusSoc).epsilon(1e-12));
}

TEST_CASE("burn-duration scale and CA50 composition") {
  const auto c = ModelCoefficients::published();
  CHECK(c.c7() == Approx(oracle::kC7).epsilon(1e-13));
  CHECK(c.c7() == Approx(6.19).epsilon(1e-3));
  // With phi_ng = phi_di = 1 and no dilution, CA50 - SOC = 2 c11.
  CHECK(ca50_offset(0.0, 1.0, 1.0, c) == Approx(2.6718).epsilon(1e-12));
  const double bd = burn_duration(0.3, 0.5, 0.3, c);
  CHECK(ca50_from_soc_bd(-5.0, bd, c) - (-5.0) ==
        Approx(ca50_offset(0.3, 0.5, 0.3, c)).epsilon(1e-13));
  CHECK_THROWS_AS(burn_duration(-0.1, 0.5, 0.3, c), DomainError);
  CHECK_THROWS_AS(ca50_from_soc_bd(0.0, -1.0, c), DomainError);
}

TEST_CASE("missing pilot fuel is rejected") {
  const auto c = ModelCoefficients::published();
  OperatingPoint op;
  op.phi_di = 0.0;
  CHECK_THROWS_WITH_AS(reactivity_state(op, c), doctest::Contains("no pilot fuel"), DomainError);
  CHECK_THROWS_AS(burn_duration(0.2, 0.4, 0.0, c), DomainError);
  CHECK_THROWS_AS(op.validate(), DomainError);
}

TEST_CASE("predict_soc domain and SOI linearity") {
  const auto c = ModelCoefficients::published();
  const auto g = EngineGeometry::reference_engine();
  OperatingPoint op;
  CHECK_THROWS_AS(predict_soc(op, g.ivc_angle - 1.0, c, g), DomainError);
  CHECK_THROWS_AS(predict_soc(op, 31.0, c, g), DomainError);
  CHECK_NOTHROW(predict_soc(op, g.ivc_angle, c, g));
  CHECK_NOTHROW(predict_soc(op, 30.0, c, g));

  // With the cylinder volume held, CA50 moves one-for-one with SOI.
  const double v = cylinder_volume(-15.0, g);
  for (double soi = -20.0; soi <= -10.0; soi += 1.0) {
    CHECK(predict_ca50_at_volume(op, soi + 1.0, v, c, g) - predict_ca50_at_volume(op, soi, v, c, g) ==
          Approx(1.0).epsilon(1e-12));
  }
  CHECK(predict_ca50(op, -15.0, c, g) == Approx(predict_ca50_at_volume(op, -15.0, v, c, g)));
}

TEST_CASE("delay falls as the charge gets hotter") {
  const auto c = ModelCoefficients::published();
  const auto g = EngineGeometry::reference_engine();
  OperatingPoint cold, hot;
  hot.t_ivc = cold.t_ivc + 20.0;
  CHECK(predict_soc(hot, -15.0, c, g) < predict_soc(cold, -15.0, c, g));
}

TEST_CASE("coefficient parameter vector round trip") {
  auto c = ModelCoefficients::published();
  auto p = c.parameters();
  CHECK(p.size() == 11);
  CHECK(c.with_parameters(p) == c);
  p[0] *= 2.0;
  CHECK(c.with_parameters(p).c1 == Approx(2.0 * c.c1));
  CHECK(std::string(ModelCoefficients::parameter_names()[10]) == "k_c");
  c.k_c = 0.9;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
