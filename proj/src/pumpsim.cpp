#include "popspec/pumpsim.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "popspec/reconstruct.hpp"

namespace popspec {

namespace {

constexpr double kPlanck = 6.62607015e-34;  // J*s

// Gauss-Hermite nodes/weights (physicists' weight exp(-x^2)) by Newton
// iteration on the recurrence
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const double pi_quarter = std::pow(std::numbers::pi, -0.25);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z;
    if (i == 0) z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1) z = x[n - 1] - 1.14 * std::pow((double)n, 0.426) / x[n - 1];
    else if (i == 2) z = 1.86 * x[n - 1] - 0.86 * x[n - 3];
    else if (i == 3) z = 1.91 * x[n - 2] - 0.91 * x[n - 4];
    else z = 2.0 * x[n - i + 1] - x[n - i + 3];
    for (int it = 0; it < 100; ++it) {
      double p1 = pi_quarter, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
             std::sqrt((double)j / (j + 1.0)) * p3;
      }
      double pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    double p1 = pi_quarter, p2 = 0.0;
    for (int j = 0; j < n; ++j) {
      double p3 = p2;
      p2 = p1;
      p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
           std::sqrt((double)j / (j + 1.0)) * p3;
    }
    double pp = std::sqrt(2.0 * n) * p2;
    x[n - 1 - i] = z;
    x[i] = -z;
    w[i] = w[n - 1 - i] = 2.0 / (pp * pp);
  }
}

struct StateIndex {
  std::vector<GroundState> ground, excited;
  size_t of_ground(const GroundState& g) const {
    for (size_t i = 0; i < ground.size(); ++i)
      if (ground[i] == g) return i;
    throw std::logic_error("ground state not in scheme");
  }
  size_t of_excited(int two_fp, int two_mfp) const {
    for (size_t i = 0; i < excited.size(); ++i)
      if (excited[i].two_f == two_fp && excited[i].two_mf == two_mfp)
        return i + ground.size();
    throw std::logic_error("excited state not in scheme");
  }
};

}  // namespace

void EnsembleConfig::validate() const {
  if (velocity_groups < 1)
    throw std::invalid_argument("need at least one velocity group");
  if (!(excited_decay_rate > 0) || !(equilibration_rate > 0))
    throw std::invalid_argument("rates must be positive");
  if (!(doppler_fwhm_hz >= 0) || !(homogeneous_fwhm_hz > 0))
    throw std::invalid_argument("bad linewidths");
}

PopulationDistribution steady_state(const EnsembleConfig& cfg,
                                    const PumpField& field) {
  cfg.validate();
  if (field.intensity_uW_mm2 < 0)
    throw std::invalid_argument("negative pump intensity");
  if (field.q < -1 || field.q > 1)
    throw std::invalid_argument("bad pump polarization");

  const LevelScheme& scheme = cfg.scheme;
  StateIndex idx{scheme.ground_states(), scheme.excited_states()};
  const size_t ng = idx.ground.size(), ne = idx.excited.size();
  const size_t nn = ng + ne;

  TransitionTable table = build_transition_table(scheme);

  // spontaneous branching ratios from the squared dipole table
  std::vector<double> decay_norm(ne, 0.0);
  for (const Transition& t : table.lines)
    decay_norm[idx.of_excited(t.two_fp, t.two_mfp) - ng] += t.mu_squared;

  // per-component photon flux, photons / (cm^2 s)
  double amp2_total = 0.0;
  for (const Sideband& s : field.components) amp2_total += s.amplitude * s.amplitude;
  if (amp2_total <= 0.0 && field.intensity_uW_mm2 > 0)
    throw std::invalid_argument("pump field has no components");
  double photon_energy = kPlanck * scheme.reference_frequency_hz;
  // 1 uW/mm^2 = 1 W/m^2 = 1e-4 W/cm^2
  double flux_total = field.intensity_uW_mm2 * 1e-4 / photon_energy;

  double cross_section_unit = absorption_scale_per_n0(scheme) * scheme.mu0 *
                              scheme.mu0;  // cm^2 per mu0^2 per (1/Hz)

  std::vector<double> nodes, weights;
  if (cfg.velocity_groups == 1) {
    nodes = {0.0};
    weights = {std::sqrt(std::numbers::pi)};
  } else {
    gauss_hermite(cfg.velocity_groups, nodes, weights);
  }
  double doppler_sd =
      cfg.doppler_fwhm_hz / (2.0 * std::sqrt(2.0 * std::numbers::ln2));

  Eigen::VectorXd theta = Eigen::VectorXd::Zero((Eigen::Index)nn);
  for (size_t i = 0; i < ng; ++i) theta[(Eigen::Index)i] = 1.0 / (double)ng;

  VoigtParams lorentz{cfg.homogeneous_fwhm_hz, 0.0, 0.0};

  Eigen::VectorXd ground_avg = Eigen::VectorXd::Zero((Eigen::Index)ng);
  double weight_sum = 0.0;
  for (int v = 0; v < (int)nodes.size(); ++v) {
    double shift = std::sqrt(2.0) * doppler_sd * nodes[v];
    double wv = weights[v] / std::sqrt(std::numbers::pi);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero((Eigen::Index)nn, (Eigen::Index)nn);

    // stimulated rates
    if (field.intensity_uW_mm2 > 0) {
      for (const Transition& t : table.lines) {
        if (t.q != field.q) continue;
        Eigen::Index gi = (Eigen::Index)idx.of_ground(t.ground);
        Eigen::Index ei = (Eigen::Index)idx.of_excited(t.two_fp, t.two_mfp);
        for (const Sideband& s : field.components) {
          double comp_freq = field.carrier_detuning_hz + s.offset_hz;
          double det0 = t.frequency_hz - comp_freq;
          if (!cfg.include_nonresonant &&
              std::abs(det0) > cfg.nonresonant_cutoff_hz)
            continue;
          double flux = flux_total * s.amplitude * s.amplitude / amp2_total;
          double rate = flux * cross_section_unit * t.mu_squared *
                        voigt(det0 - shift, lorentz);
          m(ei, gi) += rate;
          m(gi, gi) -= rate;
          m(gi, ei) += rate;
          m(ei, ei) -= rate;
        }
      }
    }

    // spontaneous emission
    for (const Transition& t : table.lines) {
      Eigen::Index gi = (Eigen::Index)idx.of_ground(t.ground);
      Eigen::Index ei = (Eigen::Index)idx.of_excited(t.two_fp, t.two_mfp);
      double br = t.mu_squared / decay_norm[ei - (Eigen::Index)ng];
      m(gi, ei) += cfg.excited_decay_rate * br;
    }
    for (size_t e = 0; e < ne; ++e)
      m((Eigen::Index)(ng + e), (Eigen::Index)(ng + e)) -= cfg.excited_decay_rate;

    // uniform equilibration toward the ground thermal distribution
    for (Eigen::Index i = 0; i < (Eigen::Index)nn; ++i) {
      m(i, i) -= cfg.equilibration_rate;
      for (Eigen::Index j = 0; j < (Eigen::Index)nn; ++j)
        m(i, j) += cfg.equilibration_rate * theta[i];
    }

    // null vector with sum 1: replace the last balance row
    Eigen::MatrixXd a = m;
    a.row((Eigen::Index)nn - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero((Eigen::Index)nn);
    rhs[(Eigen::Index)nn - 1] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
      throw std::runtime_error("steady-state rate matrix is singular");
    Eigen::VectorXd p = lu.solve(rhs);

    for (size_t i = 0; i < ng; ++i) ground_avg[(Eigen::Index)i] += wv * p[(Eigen::Index)i];
    weight_sum += wv;
  }
  ground_avg /= weight_sum;

  double sum = ground_avg.sum();
  PopulationDistribution out;
  out.p.resize(ng);
  for (size_t i = 0; i < ng; ++i) {
    double v = ground_avg[(Eigen::Index)i] / sum;
    if (v < -1e-12)
      throw std::runtime_error("steady state produced a negative population");
    out.p[i] = std::max(0.0, v);
  }
  return out;
}

PumpCurve sweep(const EnsembleConfig& cfg, const PumpField& field_template,
                const std::vector<double>& intensity_grid) {
  PumpCurve curve;
  for (double intensity : intensity_grid) {
    PumpField f = field_template;
    f.intensity_uW_mm2 = intensity;
    curve.intensities_uW_mm2.push_back(intensity);
    curve.populations.push_back(steady_state(cfg, f));
  }
  return curve;
}

std::vector<double> log_intensity_grid(double lo, double hi, int points) {
  if (!(lo > 0) || !(hi > lo) || points < 2)
    throw std::invalid_argument("bad intensity grid");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo * std::pow(hi / lo, (double)i / (points - 1));
  return g;
}

std::pair<EnsembleConfig, PumpField> scenario_experiment1() {
  EnsembleConfig cfg;
  cfg.scheme = rb87_d1_scheme();
  cfg.temperature_c = 20.0;
  cfg.buffer_gas = "Ne 10 Torr";

  PumpField field;
  field.q = +1;
  // locked to the upper-ground -> upper-excited hyperfine transition
  field.carrier_detuning_hz = cfg.scheme.line_center_hz(4, 4);
  field.components = {{0.0, 1.0}};
  return {cfg, field};
}

std::pair<EnsembleConfig, PumpField> scenario_experiment2() {
  EnsembleConfig cfg;
  cfg.scheme = rb87_d1_scheme();
  cfg.temperature_c = 58.0;
  cfg.buffer_gas = "N2 10 Torr";

  PumpField field;
  field.q = 0;
  // carrier midway between the two resonant sideband targets; +-3.0 GHz
  // modulation sidebands land on F_low->F'_low and F_high->F'_high
  double f_low = cfg.scheme.line_center_hz(2, 2);
  double f_high = cfg.scheme.line_center_hz(4, 4);
  field.carrier_detuning_hz = 0.5 * (f_low + f_high);
  field.components = {{-3.0e9, 1.0}, {0.0, 1.0}, {+3.0e9, 1.0}};
  return {cfg, field};
}

}  // namespace popspec
