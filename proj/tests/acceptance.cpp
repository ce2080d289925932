// Acceptance suite: runs the twelve release criteria end to end and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "popspec/calibrate.hpp"
#include "popspec/pumpsim.hpp"
#include "popspec/reconstruct.hpp"

using namespace popspec;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& what, bool ok,
            const std::string& detail = "") {
  std::printf("%s  criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

std::vector<double> axis(double lo, double hi, int n) {
  std::vector<double> a(n);
  for (int i = 0; i < n; ++i) a[i] = lo + (hi - lo) * i / (n - 1.0);
  return a;
}

ProbeConfig probe(int q) {
  ProbeConfig c;
  c.q = q;
  c.axis_hz = axis(-10e9, 10e9, 2000);
  c.n0_cm3 = 1e10;
  c.path_cm = 5.0;
  c.voigt = {103e6, 202e6, 0.0};
  return c;
}

PopulationDistribution random_pop(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.02, 1.0);
  PopulationDistribution p;
  p.p.resize(8);
  double s = 0;
  for (double& v : p.p) s += (v = u(rng));
  for (double& v : p.p) v /= s;
  return p;
}

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// whole-line quadrature for the Voigt normalization check
double integrate_line(const std::function<double(double)>& f, double scale) {
  // x = scale*tan(t), composite Simpson fine enough at 4e5 panels
  const int n = 400000;
  double a = -std::numbers::pi / 2 + 1e-9, b = std::numbers::pi / 2 - 1e-9;
  double h = (b - a) / n;
  auto g = [&](double t) {
    double c = std::cos(t);
    return f(scale * std::tan(t)) * scale / (c * c);
  };
  double acc = g(a) + g(b);
  for (int i = 1; i < n; ++i) acc += g(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

void criterion_1() {
  double t0 = now_s();
  LevelScheme s = rb87_d1_scheme();
  Rational want_plus[2][3] = {{Rational(1, 12), Rational(1, 12), Rational(0)},
                              {Rational(1, 12), Rational(1, 4), Rational(1, 2)}};
  Rational want_minus[2][3] = {{Rational(0), Rational(1, 12), Rational(1, 12)},
                               {Rational(1, 2), Rational(1, 4), Rational(1, 12)}};
  bool ok = true;
  int col = 0;
  for (int two_mf = -2; two_mf <= 2; two_mf += 2, ++col) {
    int row = 0;
    for (int two_fp : {2, 4}) {
      ok = ok && squared_dipole_exact({2, two_mf}, two_fp, +1, s) ==
                     want_plus[row][col];
      ok = ok && squared_dipole_exact({2, two_mf}, two_fp, -1, s) ==
                     want_minus[row][col];
      ++row;
    }
  }
  double dt = now_s() - t0;
  ok = ok && dt < 1.0;
  report(1, "F=1 sigma coupling matrix exact (1/12,1/4,1/2 pattern), <1s", ok,
         "runtime " + std::to_string(dt) + " s");
}

void criterion_2() {
  LevelScheme s = rb87_d1_scheme();
  Eigen::Matrix3d inv = f1_inversion_matrix();
  bool ok = true;
  Rational rows[3][3];
  int r = 0;
  for (auto [two_fp, q] :
       std::vector<std::pair<int, int>>{{2, +1}, {4, +1}, {2, -1}}) {
    int c = 0;
    for (int two_mf = -2; two_mf <= 2; two_mf += 2)
      rows[r][c++] = squared_dipole_exact({2, two_mf}, two_fp, q, s);
    ++r;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Rational acc = 0;
      for (int k = 0; k < 3; ++k)
        acc += Rational((long long)inv(i, k)) * rows[k][j];
      ok = ok && acc == Rational(i == j ? 1 : 0);
    }
  report(2, "F=1 inversion matrix times coupling rows is exactly identity", ok);
}

void criterion_3() {
  LevelScheme s = rb87_d1_scheme();
  bool ok = true;
  double worst = 0.0;
  for (const GroundState& g : s.ground_states()) {
    double acc = 0.0;
    for (int two_fp : {2, 4})
      for (int q : {+1, -1}) acc += squared_dipole(g, two_fp, q, s);
    worst = std::max(worst, std::abs(acc - 2.0 / 3.0));
  }
  ok = worst < 1e-12;
  report(3, "sum rule sum_{F',q=+-} mu^2 = 2/3 on every sublevel (1e-12)", ok,
         "worst deviation " + std::to_string(worst));
}

void criterion_4() {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig plus = probe(+1), minus = probe(-1);
  plus.axis_hz = minus.axis_hz = axis(-10e9, 10e9, 400);
  CouplingMatrix c = coupling_matrix(plus, minus, s);
  ConditioningReport rep = conditioning_report(c);
  bool ok = rep.near_zero_count == 2;

  ProbeConfig pi = plus;
  pi.q = 0;
  CouplingMatrix c3 = coupling_matrix({plus, minus, pi}, s);
  ConditioningReport rep3 = conditioning_report(c3);
  ok = ok && rep3.near_zero_count == 2;
  report(4,
         "degenerate regime: exactly 2 singular values < 1e-6 of max; "
         "pi rows leave both small",
         ok,
         "sigma+-: " + std::to_string(rep.near_zero_count) +
             ", with pi: " + std::to_string(rep3.near_zero_count));
}

void criterion_5() {
  LevelScheme s = rb87_d1_scheme();
  Eigen::MatrixXd m = xi_coupling_matrix(4, {+1, -1}, s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  bool ok = rank == 3 && sv[3] < 1e-10 * sv[0];
  report(5, "F=2 sigma coupling matrix has numerical rank 3", ok,
         "s4/s1 = " + std::to_string(sv[3] / sv[0]));
}

void criterion_6() {
  double t0 = now_s();
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  ReconstructOptions opt;
  opt.fixed_widths = cp.voigt;  // Gamma=103 MHz, sigma=202 MHz fixtures
  std::mt19937_64 rng(2024);
  double worst_f1 = 0.0, worst_f2 = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    PopulationDistribution p = random_pop(rng);
    Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
    ReconstructionReport rep = reconstruct(plus, minus, s, opt);
    for (int i = 0; i < 3; ++i)
      worst_f1 = std::max(worst_f1, std::abs(rep.populations.p[i] - p.p[i]));
    double f2_true = p.p[3] + p.p[4] + p.p[5] + p.p[6] + p.p[7];
    worst_f2 = std::max(worst_f2, std::abs(rep.f2_total - f2_true));
  }
  double dt = now_s() - t0;
  bool ok = worst_f1 <= 1e-6 && worst_f2 <= 1e-6 && dt < 30.0;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "worst F=1 err %.2e, worst F=2 total err %.2e, %.1f s",
                worst_f1, worst_f2, dt);
  report(6, "noiseless round trip, 50 random P: F=1 and F=2 total <= 1e-6, <30s",
         ok, detail);
}

void criterion_7() {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  ReconstructOptions opt;
  opt.fixed_widths = cp.voigt;
  std::mt19937_64 rng(7);
  PopulationDistribution p = random_pop(rng);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  std::vector<double> errs;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Spectrum np = add_noise(plus, 0.01, 2 * seed);
    Spectrum nm = add_noise(minus, 0.01, 2 * seed + 1);
    ReconstructionReport rep = reconstruct(np, nm, s, opt);
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
      e = std::max(e, std::abs(rep.populations.p[i] - p.p[i]));
    errs.push_back(e);
  }
  std::sort(errs.begin(), errs.end());
  double median = 0.5 * (errs[49] + errs[50]);
  bool ok = median < 0.02;
  report(7, "1% noise round trip: median F=1 error over 100 seeds < 0.02", ok,
         "median " + std::to_string(median));
}

void criterion_8() {
  LevelScheme s = rb87_d1_scheme();
  ProbeConfig cp = probe(+1), cm = probe(-1);
  std::mt19937_64 rng(88);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    PopulationDistribution p = random_pop(rng);
    Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
    DensityEstimate d = estimate_density(plus, minus, s, cp.voigt);
    worst = std::max(worst, std::abs(d.n0_cm3 - cp.n0_cm3) / cp.n0_cm3);
  }
  bool ok = worst < 0.005;
  report(8, "density identity recovers n0 within 0.5% for 10 random P", ok,
         "worst relative error " + std::to_string(worst));
}

void criterion_9() {
  LevelScheme s = rb87_d1_scheme();
  PopulationDistribution p;
  p.p = {0.12, 0.14, 0.14, 0.0, 0.0, 0.0, 0.0, 0.60};
  ProbeConfig cp = probe(+1), cm = probe(-1);
  Spectrum plus = synthesize(p, cp, s), minus = synthesize(p, cm, s);
  XiFitOptions fopt;
  fopt.fixed_widths = cp.voigt;
  XiFitResult fit = fit_xi({plus, minus}, s, fopt);
  double scale = cp.n0_cm3 * absorption_scale_per_n0(s);
  Eigen::Vector4d xi2(fit.get(4, 2, +1) / scale, fit.get(4, 4, +1) / scale,
                      fit.get(4, 2, -1) / scale, fit.get(4, 4, -1) / scale);
  F2Estimate est = estimate_f2_nnls(xi2, s);
  double total = est.populations.sum();
  bool nnls_ok = total > 0 && est.populations[4] >= 0.95 * total;
  // sigma+ F=2 absorption must vanish relative to the spectrum peak
  double xi_peak = 0.0;
  for (const XiValue& v : fit.xi) xi_peak = std::max(xi_peak, v.value);
  double sigma_plus_f2 =
      std::max(fit.get(4, 2, +1), fit.get(4, 4, +1)) / xi_peak;
  bool ok = nnls_ok && sigma_plus_f2 < 1e-6;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "mF=+2 weight %.4f, sigma+ F=2 rel %.2e",
                total > 0 ? est.populations[4] / total : 0.0, sigma_plus_f2);
  report(9, "stretched state: NNLS >=95% on mF=+2, sigma+ F=2 lines vanish", ok,
         detail);
}

void criterion_10() {
  // (a) thermal at zero pump
  auto [c1, f1] = scenario_experiment1();
  f1.intensity_uW_mm2 = 0.0;
  PopulationDistribution pth = steady_state(c1, f1);
  double dev = 0.0;
  for (double v : pth.p) dev = std::max(dev, std::abs(v - 0.125));
  bool ok_a = dev < 1e-10;

  // (b) Experiment-II clock-state maximum 0.25 +- 0.05
  auto [c2, f2] = scenario_experiment2();
  auto grid = log_intensity_grid(1e-2, 1e4, 17);
  PumpCurve curve = sweep(c2, f2, grid);
  double peak = 0.0;
  for (const auto& p : curve.populations) peak = std::max(peak, p.p[1]);
  bool ok_b = peak > 0.20 && peak < 0.30;

  // (c) mF=+-1 symmetry to 1e-9
  double asym = 0.0;
  for (const auto& p : curve.populations) {
    asym = std::max(asym, std::abs(p.p[0] - p.p[2]));
    asym = std::max(asym, std::abs(p.p[3] - p.p[7]));
    asym = std::max(asym, std::abs(p.p[4] - p.p[6]));
  }
  bool ok_c = asym < 1e-9;

  // (d) disabling non-resonant excitation raises the high-power clock state
  f2.intensity_uW_mm2 = 1e4;
  PopulationDistribution with_nr = steady_state(c2, f2);
  c2.include_nonresonant = false;
  PopulationDistribution without_nr = steady_state(c2, f2);
  bool ok_d = without_nr.p[1] > with_nr.p[1];

  char detail[200];
  std::snprintf(detail, sizeof detail,
                "thermal dev %.1e, clock max %.3f, asym %.1e, "
                "no-nonres clock %.3f vs %.3f",
                dev, peak, asym, without_nr.p[1], with_nr.p[1]);
  report(10, "simulator trends: thermal, clock max 0.25+-0.05, mirror, "
             "non-resonant limit", ok_a && ok_b && ok_c && ok_d, detail);
}

void criterion_11() {
  double t0 = now_s();
  LevelScheme s = rb87_d1_scheme();
  // 12 GHz scan, 10% quadratic chirp, FP + SAS channels
  const int n = 12000;
  const double lo = -6e9, hi = 6e9, chirp = 0.10, fsr = 1e9;
  std::vector<double> freq(n);
  for (int i = 0; i < n; ++i) {
    double u = (double)i / (n - 1);
    freq[i] = lo + (hi - lo) * (u + chirp * u * u) / (1.0 + chirp);
  }
  RawTrace fp, sas;
  fp.channel = "fp";
  sas.channel = "sas";
  auto table = sas_reference_lines(s, false);
  double coef = 2.0 * 30.0 * 30.0 / (std::numbers::pi * std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    double ph = std::numbers::pi * freq[i] / fsr;
    fp.samples.push_back(1.0 / (1.0 + coef * std::sin(ph) * std::sin(ph)));
    double v = 0.05;
    for (const auto& l : table) {
      double d = (freq[i] - l.frequency_hz) / 15e6;
      v += 1.0 / (1.0 + d * d);
    }
    sas.samples.push_back(v);
  }
  FpPeaks peaks = detect_fp_peaks(fp);
  auto anchors = detect_sas_anchors(sas, table);
  FrequencyMap map = fit_frequency_axis(peaks, anchors, 3);
  double rms = 0.0;
  int count = 0;
  for (int i = 0; i < n; i += 13) {
    double e = map((double)i) - freq[i];
    rms += e * e;
    ++count;
  }
  rms = std::sqrt(rms / count);
  double dt = now_s() - t0;
  bool ok = rms < 2e6 && dt < 5.0;
  char detail[120];
  std::snprintf(detail, sizeof detail, "axis RMS %.3f MHz, %.2f s", rms / 1e6,
                dt);
  report(11, "calibration: 12 GHz scan, 10% chirp -> axis RMS < 2 MHz, <5s",
         ok, detail);
}

void criterion_12() {
  bool ok = true;
  double worst_norm = 0.0;
  for (double gamma : {10e6, 103e6, 1e9})
    for (double sigma : {10e6, 202e6, 2e9}) {
      VoigtParams p{gamma, sigma, 0.0};
      double area =
          integrate_line([&](double x) { return voigt(x, p); }, gamma + sigma);
      worst_norm = std::max(worst_norm, std::abs(area - 1.0));
    }
  ok = worst_norm < 1e-6;

  // limits
  double worst_lim = 0.0;
  double gamma = 103e6;
  for (double x : {0.0, gamma, 10.0 * gamma}) {
    double hw = gamma / 2.0;
    double lor = hw / (std::numbers::pi * (x * x + hw * hw));
    double got = voigt(x, {gamma, 0.0, 0.0});
    worst_lim = std::max(worst_lim, std::abs(got - lor) / lor);
  }
  double sigma = 202e6;
  double sd = sigma / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  for (double x : {0.0, sigma, 2.0 * sigma}) {
    double gau = std::exp(-0.5 * x * x / (sd * sd)) /
                 (sd * std::sqrt(2.0 * std::numbers::pi));
    double got = voigt(x, {0.0, sigma, 0.0});
    worst_lim = std::max(worst_lim, std::abs(got - gau) / gau);
  }
  ok = ok && worst_lim < 1e-8;
  char detail[120];
  std::snprintf(detail, sizeof detail, "norm dev %.1e, limit dev %.1e",
                worst_norm, worst_lim);
  report(12, "Voigt normalization within 1e-6, limits within 1e-8", ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  criterion_12();
  if (g_failures == 0)
    std::printf("all 12 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures;
}
