#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "popspec/pumpsim.hpp"

using namespace popspec;

namespace {

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("zero intensity gives the thermal distribution") {
  for (auto [cfg, field] : {scenario_experiment1(), scenario_experiment2()}) {
    field.intensity_uW_mm2 = 0.0;
    PopulationDistribution p = steady_state(cfg, field);
    REQUIRE(p.p.size() == 8);
    for (double v : p.p) CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
  }
}

TEST_CASE("populations conserve probability and stay non-negative") {
  auto [cfg, field] = scenario_experiment1();
  for (double inten : {0.1, 10.0, 1000.0}) {
    field.intensity_uW_mm2 = inten;
    PopulationDistribution p = steady_state(cfg, field);
    CHECK(std::abs(sum(p.p) - 1.0) < 1e-10);
    for (double v : p.p) CHECK(v >= 0.0);
  }
}

TEST_CASE("pi pump keeps mF mirror symmetry to 1e-9") {
  auto [cfg, field] = scenario_experiment2();
  for (double inten : {1.0, 50.0, 2000.0}) {
    field.intensity_uW_mm2 = inten;
    PopulationDistribution p = steady_state(cfg, field);
    // F=1: indices 0,2 mirror; F=2: (3,7) and (4,6)
    CHECK(std::abs(p.p[0] - p.p[2]) < 1e-9);
    CHECK(std::abs(p.p[3] - p.p[7]) < 1e-9);
    CHECK(std::abs(p.p[4] - p.p[6]) < 1e-9);
  }
}

TEST_CASE("weak-pump response is linear in intensity") {
  auto [cfg, field] = scenario_experiment1();
  // (p - thermal) proportional to intensity over two decades
  std::vector<double> intens = {1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2};
  std::vector<double> dev;
  for (double i : intens) {
    field.intensity_uW_mm2 = i;
    PopulationDistribution p = steady_state(cfg, field);
    dev.push_back(p.p[7] - 0.125);
  }
  // linear regression of dev on intensity through the origin; R^2 > 0.999
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t k = 0; k < intens.size(); ++k) {
    sxy += intens[k] * dev[k];
    sxx += intens[k] * intens[k];
    syy += dev[k] * dev[k];
  }
  double r2 = (sxy * sxy) / (sxx * syy);
  CHECK(r2 > 0.999);
}

TEST_CASE("experiment 1 piles F=2 population into the stretched state") {
  auto [cfg, field] = scenario_experiment1();
  field.intensity_uW_mm2 = 1e4;
  PopulationDistribution p = steady_state(cfg, field);
  double f2 = p.p[3] + p.p[4] + p.p[5] + p.p[6] + p.p[7];
  CHECK(p.p[7] >= 0.95 * f2);
}

TEST_CASE("experiment 1: total F=1 rises then falls with intensity") {
  auto [cfg, field] = scenario_experiment1();
  auto grid = log_intensity_grid(1e-2, 1e4, 13);
  PumpCurve curve = sweep(cfg, field, grid);
  std::vector<double> f1;
  for (const auto& p : curve.populations) f1.push_back(p.p[0] + p.p[1] + p.p[2]);
  auto imax = std::max_element(f1.begin(), f1.end()) - f1.begin();
  CHECK(imax > 0);
  CHECK((size_t)imax < f1.size() - 1);
  CHECK(f1[imax] > f1.front() + 0.05);
  CHECK(f1[imax] > f1.back() + 0.05);
}

TEST_CASE("experiment 2: clock-state maximum near twice thermal") {
  auto [cfg, field] = scenario_experiment2();
  auto grid = log_intensity_grid(1e-2, 1e4, 17);
  PumpCurve curve = sweep(cfg, field, grid);
  double peak = 0.0;
  for (const auto& p : curve.populations) peak = std::max(peak, p.p[1]);
  CHECK(peak > 0.20);
  CHECK(peak < 0.30);
}

TEST_CASE("disabling non-resonant excitation raises the high-power clock state") {
  auto [cfg, field] = scenario_experiment2();
  field.intensity_uW_mm2 = 2000.0;
  PopulationDistribution with = steady_state(cfg, field);
  cfg.include_nonresonant = false;
  PopulationDistribution without = steady_state(cfg, field);
  CHECK(without.p[1] > with.p[1]);
}

TEST_CASE("scenario metadata") {
  auto [c1, f1] = scenario_experiment1();
  CHECK(f1.q == +1);
  CHECK(f1.components.size() == 1);
  CHECK(f1.carrier_detuning_hz ==
        doctest::Approx(c1.scheme.line_center_hz(4, 4)).epsilon(1e-12));
  auto [c2, f2] = scenario_experiment2();
  CHECK(f2.q == 0);
  REQUIRE(f2.components.size() == 3);
  CHECK(f2.components.front().offset_hz == -3.0e9);
  CHECK(f2.components.back().offset_hz == +3.0e9);
  CHECK(c2.velocity_groups == 11);
}

TEST_CASE("config validation") {
  auto [cfg, field] = scenario_experiment1();
  cfg.velocity_groups = 0;
  CHECK_THROWS_AS(steady_state(cfg, field), std::invalid_argument);
  auto [cfg2, field2] = scenario_experiment1();
  field2.intensity_uW_mm2 = -1.0;
  CHECK_THROWS_AS(steady_state(cfg2, field2), std::invalid_argument);
  auto [cfg3, field3] = scenario_experiment1();
  cfg3.equilibration_rate = 0.0;
  CHECK_THROWS_AS(steady_state(cfg3, field3), std::invalid_argument);
}
