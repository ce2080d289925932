#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "popspec/reconstruct.hpp"

using namespace popspec;

namespace {

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = lo + (hi - lo) * i / (n - 1.0);
  return a;
}

ProbeConfig probe(int q, double lo = -10e9, double hi = 10e9, int n = 2000) {
  ProbeConfig c;
  c.q = q;
  c.axis_hz = axis(lo, hi, n);
  c.n0_cm3 = 1e10;
  c.path_cm = 5.0;
  c.voigt = {103e6, 202e6, 0.0};
  return c;
}

PopulationDistribution random_pop(uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  PopulationDistribution p;
  p.p.resize(8);
  double s = 0;
  for (double& v : p.p) s += (v = u(rng));
  for (double& v : p.p) v /= s;
  return p;
}

}  // namespace

TEST_CASE("F=1 inversion matrix times the coupling rows is exactly identity") {
  LevelScheme s = rb87_d1_scheme();
  // exact rational product: rows (1,+), (2,+), (1,-) of the F=1 matrix
  Rational rows[3][3];
  int r = 0;
  for (auto [two_fp, q] : std::vector<std::pair<int, int>>{{2, 1}, {4, 1}, {2, -1}}) {
    int c = 0;
    for (int two_mf = -2; two_mf <= 2; two_mf += 2)
      rows[r][c++] = squared_dipole_exact({2, two_mf}, two_fp, q, s);
    ++r;
  }
  Eigen::Matrix3d inv = f1_inversion_matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Rational acc = 0;
      for (int k = 0; k < 3; ++k)
        // inversion matrix entries are exact integers
        acc += Rational((long long)inv(i, k)) * rows[k][j];
      CHECK(acc == Rational(i == j ? 1 : 0));
    }
}

TEST_CASE("invert_f1 recovers populations from exact xi values") {
  LevelScheme s = rb87_d1_scheme();
  for (uint64_t seed : {1u, 2u, 3u}) {
    PopulationDistribution p = random_pop(seed);
    auto xp = reduced_xi(p, +1, s);
    auto xm = reduced_xi(p, -1, s);
    Eigen::Vector3d f1 = invert_f1(xp[0], xp[1], xm[0]);
    for (int i = 0; i < 3; ++i)
      CHECK(f1[i] == doctest::Approx(p.p[i]).epsilon(1e-13));
  }
}

TEST_CASE("fit_xi with fixed widths recovers scaled reduced xi") {
  LevelScheme s = rb87_d1_scheme();
  PopulationDistribution p = random_pop(17);
  ProbeConfig cp = probe(+1), cm = probe(-1);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  XiFitOptions opt;
  opt.fixed_widths = cp.voigt;
  XiFitResult fit = fit_xi({plus, minus}, s, opt);
  double scale = cp.n0_cm3 * absorption_scale_per_n0(s);
  auto xp = reduced_xi(p, +1, s);
  CHECK(fit.get(2, 2, +1) == doctest::Approx(scale * xp[0]).epsilon(1e-8));
  CHECK(fit.get(2, 4, +1) == doctest::Approx(scale * xp[1]).epsilon(1e-8));
  CHECK(fit.get(4, 4, +1) == doctest::Approx(scale * xp[3]).epsilon(1e-8));
  CHECK(fit.residual_norm < 1e-12);
}

TEST_CASE("fit_xi with free widths converges to the generating widths") {
  LevelScheme s = rb87_d1_scheme();
  PopulationDistribution p = random_pop(4);
  ProbeConfig cp = probe(+1, -10e9, 10e9, 800), cm = probe(-1, -10e9, 10e9, 800);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  XiFitResult fit = fit_xi({plus, minus}, s);
  CHECK(fit.gamma_fwhm_hz == doctest::Approx(103e6).epsilon(1e-6));
  CHECK(fit.sigma_fwhm_hz == doctest::Approx(202e6).epsilon(1e-6));
}

TEST_CASE("fit_xi rejects degenerate input") {
  LevelScheme s = rb87_d1_scheme();
  Spectrum zero;
  zero.q = +1;
  zero.axis_hz = axis(-1e9, 1e9, 100);
  zero.alpha_per_cm.assign(100, 0.0);
  CHECK_THROWS(fit_xi({zero}, s));
  CHECK_THROWS_AS(fit_xi({}, s), std::invalid_argument);
}

TEST_CASE("density identity holds within 0.5% over random populations") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    PopulationDistribution p = random_pop(seed);
    Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
    DensityEstimate d = estimate_density(plus, minus, s, cp.voigt);
    CHECK(std::abs(d.n0_cm3 - 1e10) / 1e10 < 0.005);
  }
}

TEST_CASE("wing correction matters on a truncated scan") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1, -5.5e9, 5.5e9, 1200);
  ProbeConfig cm = probe(-1, -5.5e9, 5.5e9, 1200);
  PopulationDistribution p = random_pop(23);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  DensityEstimate with = estimate_density(plus, minus, s, cp.voigt, true);
  DensityEstimate without = estimate_density(plus, minus, s, cp.voigt, false);
  CHECK(std::abs(with.n0_cm3 - 1e10) < std::abs(without.n0_cm3 - 1e10));
  CHECK(with.truncation_fraction > 0.0);
}

TEST_CASE("stretched-state NNLS detection") {
  LevelScheme s = rb87_d1_scheme();
  PopulationDistribution p;
  p.p = {0.1, 0.15, 0.15, 0.0, 0.0, 0.0, 0.0, 0.6};
  auto xp = reduced_xi(p, +1, s);
  auto xm = reduced_xi(p, -1, s);
  Eigen::Vector4d xi2(xp[2], xp[3], xm[2], xm[3]);
  F2Estimate est = estimate_f2_nnls(xi2, s);
  double total = est.populations.sum();
  CHECK(est.populations[4] >= 0.95 * total);
  CHECK(est.reliable);
  CHECK(est.null_space_dim == 2);
  // sigma+ absorption from the stretched F=2 state is identically zero
  CHECK(xp[2] == 0.0);
  CHECK(xp[3] == 0.0);
}

TEST_CASE("conditioning report flags the Zeeman-degenerate null space") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1, -8e9, 8e9, 300), cm = probe(-1, -8e9, 8e9, 300);
  CouplingMatrix c = coupling_matrix(cp, cm, s);
  ConditioningReport rep = conditioning_report(c);
  CHECK(rep.near_zero_count == 2);
  CHECK(rep.rank == 6);
  CHECK(rep.regime == "degenerate");

  // adding pi rows does not lift the two null directions
  ProbeConfig cpi = cp;
  cpi.q = 0;
  CouplingMatrix c3 = coupling_matrix({cp, cm, cpi}, s);
  ConditioningReport rep3 = conditioning_report(c3);
  CHECK(rep3.near_zero_count == 2);
  CHECK(rep3.rank == 6);
}

TEST_CASE("pseudoinverse recovers the row-space component") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1, -8e9, 8e9, 400), cm = probe(-1, -8e9, 8e9, 400);
  CouplingMatrix c = coupling_matrix(cp, cm, s);
  PopulationDistribution p = random_pop(31);
  Eigen::VectorXd pv(8);
  for (int i = 0; i < 8; ++i) pv[i] = p.p[i];
  Eigen::VectorXd alpha = c.c * pv;
  PseudoinverseResult r = solve_pseudoinverse(c, alpha);
  CHECK(r.rank == 6);
  CHECK(r.residual_norm < 1e-10 * alpha.norm());
  // the estimate reproduces the data even where p itself is not unique
  CHECK((c.c * r.p - alpha).norm() < 1e-10 * alpha.norm());
}

TEST_CASE("full reconstruction round trip, fixed widths") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  PopulationDistribution p = random_pop(77);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  ReconstructOptions opt;
  opt.fixed_widths = cp.voigt;
  ReconstructionReport rep = reconstruct(plus, minus, s, opt);
  for (int i = 0; i < 3; ++i)
    CHECK(rep.populations.p[i] == doctest::Approx(p.p[i]).epsilon(1e-6));
  double f2_true = p.p[3] + p.p[4] + p.p[5] + p.p[6] + p.p[7];
  CHECK(rep.f2_total == doctest::Approx(f2_true).epsilon(1e-6));
  CHECK(std::abs(rep.population_sum_raw - 1.0) < 1e-4);
  CHECK_FALSE(rep.negative_population_warning);
}

TEST_CASE("reconstruct rejects mismatched polarizations") {
  LevelScheme s = rb87_d1_scheme();
  PopulationDistribution p = random_pop(5);
  ProbeConfig cp = probe(+1), cm = probe(-1);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  CHECK_THROWS_AS(reconstruct(minus, plus, s), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct(plus, plus, s), std::invalid_argument);
}

TEST_CASE("full-pseudoinverse option reproduces manifold totals") {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  PopulationDistribution p = random_pop(13);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  ReconstructOptions opt;
  opt.fixed_widths = cp.voigt;
  opt.full_pseudoinverse = true;
  ReconstructionReport rep = reconstruct(plus, minus, s, opt);
  // individual F=2 sublevels are not identifiable; totals are
  double f1_true = p.p[0] + p.p[1] + p.p[2];
  double f1_rec =
      rep.populations.p[0] + rep.populations.p[1] + rep.populations.p[2];
  CHECK(f1_rec == doctest::Approx(f1_true).epsilon(1e-4));
}
