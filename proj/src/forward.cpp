#include "popspec/forward.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace popspec {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kC_cgs = 2.99792458e10;        // cm/s
constexpr double kHbar_cgs = 1.054571817e-27;   // erg*s
constexpr double kCm_to_statC_cm = 2.99792458e11;
}  // namespace

void PopulationDistribution::validate() const {
  if (p.empty()) throw std::invalid_argument("empty population vector");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument("negative population entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("populations must sum to 1");
}

PopulationDistribution PopulationDistribution::thermal(size_t m) {
  return {std::vector<double>(m, 1.0 / (double)m)};
}

void ProbeConfig::validate() const {
  if (q != -1 && q != 1)
    throw std::invalid_argument("probe polarization must be circular (q=+-1)");
  if (axis_hz.empty()) throw std::invalid_argument("empty frequency axis");
  for (size_t i = 1; i < axis_hz.size(); ++i)
    if (!(axis_hz[i] > axis_hz[i - 1]))
      throw std::invalid_argument("frequency axis must be strictly increasing");
  if (!(n0_cm3 > 0)) throw std::invalid_argument("density must be positive");
  if (!(path_cm > 0)) throw std::invalid_argument("path length must be positive");
  VoigtParams p = voigt;
  p.center_hz = 0.0;
  p.validate();
}

double absorption_scale_per_n0(const LevelScheme& scheme) {
  // alpha = n0 * 4 pi omega/(c hbar) * d^2 * K_ang, cgs. K is kept in
  // 1/Hz in this code so the 1/(2 pi) of K_ang = K_Hz/(2 pi) is folded in.
  double omega = 2.0 * kPi * scheme.reference_frequency_hz;
  double d_cgs = scheme.dipole_scale_cm * kCm_to_statC_cm;  // statC*cm
  return 4.0 * kPi * omega * d_cgs * d_cgs / (kC_cgs * kHbar_cgs) /
         (2.0 * kPi);
}

double excitation_spectrum(const GroundState& g, int q, double omega_hz,
                           const ProbeConfig& cfg, const LevelScheme& scheme) {
  double scale = cfg.n0_cm3 * absorption_scale_per_n0(scheme);
  double acc = 0.0;
  for (const auto& [two_fp, _] : scheme.excited_levels) {
    Rational mu2 = squared_dipole_exact(g, two_fp, q, scheme);
    if (mu2 == 0) continue;
    VoigtParams vp = cfg.voigt;
    vp.center_hz = scheme.line_center_hz(g.two_f, two_fp);
    acc += mu2.convert_to<double>() * voigt(omega_hz, vp);
  }
  return scale * scheme.mu0 * scheme.mu0 * acc;
}

Spectrum synthesize(const PopulationDistribution& pop, const ProbeConfig& cfg,
                    const LevelScheme& scheme) {
  pop.validate();
  cfg.validate();
  auto states = scheme.ground_states();
  if (pop.p.size() != states.size())
    throw std::invalid_argument("population vector size does not match scheme");

  double scale = cfg.n0_cm3 * absorption_scale_per_n0(scheme) *
                 scheme.mu0 * scheme.mu0;
  TransitionTable table = build_transition_table(scheme);

  Spectrum out;
  out.q = cfg.q;
  out.axis_hz = cfg.axis_hz;
  out.alpha_per_cm.assign(cfg.axis_hz.size(), 0.0);
  for (const Transition& t : table.lines) {
    if (t.q != cfg.q) continue;
    size_t col = 0;
    while (!(states[col] == t.ground)) ++col;
    if (pop.p[col] == 0.0) continue;
    VoigtParams vp = cfg.voigt;
    vp.center_hz = t.frequency_hz;
    double w = scale * t.mu_squared * pop.p[col];
    for (size_t i = 0; i < cfg.axis_hz.size(); ++i)
      out.alpha_per_cm[i] += w * voigt(cfg.axis_hz[i], vp);
  }
  return out;
}

CouplingMatrix coupling_matrix(const std::vector<ProbeConfig>& configs,
                               const LevelScheme& scheme) {
  if (configs.empty()) throw std::invalid_argument("no probe configs");
  size_t rows = 0;
  for (const ProbeConfig& c : configs) {
    if (c.q < -1 || c.q > 1) throw std::invalid_argument("bad polarization");
    if (std::abs(c.n0_cm3 - configs[0].n0_cm3) > 0 ||
        c.voigt.gamma_fwhm_hz != configs[0].voigt.gamma_fwhm_hz ||
        c.voigt.sigma_fwhm_hz != configs[0].voigt.sigma_fwhm_hz)
      throw std::invalid_argument(
          "probe configs must share density and Voigt parameters");
    rows += c.axis_hz.size();
  }

  auto states = scheme.ground_states();
  double scale = configs[0].n0_cm3 * absorption_scale_per_n0(scheme) *
                 scheme.mu0 * scheme.mu0;

  CouplingMatrix out;
  out.columns = states;
  out.c.setZero((Eigen::Index)rows, (Eigen::Index)states.size());
  out.row_freq_hz.reserve(rows);
  out.row_q.reserve(rows);

  Eigen::Index r = 0;
  for (const ProbeConfig& cfg : configs) {
    for (double omega : cfg.axis_hz) {
      for (size_t col = 0; col < states.size(); ++col) {
        double acc = 0.0;
        for (const auto& [two_fp, _] : scheme.excited_levels) {
          double mu2 = squared_dipole(states[col], two_fp, cfg.q, scheme);
          if (mu2 == 0.0) continue;
          VoigtParams vp = cfg.voigt;
          vp.center_hz = scheme.line_center_hz(states[col].two_f, two_fp);
          acc += mu2 * voigt(omega, vp);
        }
        out.c(r, (Eigen::Index)col) = scale * acc;
      }
      out.row_freq_hz.push_back(omega);
      out.row_q.push_back(cfg.q);
      ++r;
    }
  }
  return out;
}

CouplingMatrix coupling_matrix(const ProbeConfig& plus, const ProbeConfig& minus,
                               const LevelScheme& scheme) {
  return coupling_matrix(std::vector<ProbeConfig>{plus, minus}, scheme);
}

std::vector<double> reduced_xi(const PopulationDistribution& pop, int q,
                               const LevelScheme& scheme) {
  pop.validate();
  auto states = scheme.ground_states();
  if (pop.p.size() != states.size())
    throw std::invalid_argument("population vector size does not match scheme");
  std::vector<double> xi;
  for (const auto& [two_f, _] : scheme.ground_levels) {
    for (const auto& [two_fp, __] : scheme.excited_levels) {
      double acc = 0.0;
      for (size_t i = 0; i < states.size(); ++i) {
        if (states[i].two_f != two_f) continue;
        acc += squared_dipole(states[i], two_fp, q, scheme) * pop.p[i];
      }
      xi.push_back(acc);
    }
  }
  return xi;
}

Eigen::MatrixXd xi_coupling_matrix(int two_f, const std::vector<int>& pols,
                                   const LevelScheme& scheme) {
  std::vector<GroundState> cols;
  for (int two_mf = -two_f; two_mf <= two_f; two_mf += 2)
    cols.push_back({two_f, two_mf});
  size_t nfp = scheme.excited_levels.size();
  Eigen::MatrixXd m((Eigen::Index)(nfp * pols.size()), (Eigen::Index)cols.size());
  Eigen::Index r = 0;
  for (int q : pols) {
    for (const auto& [two_fp, _] : scheme.excited_levels) {
      for (size_t cidx = 0; cidx < cols.size(); ++cidx)
        m(r, (Eigen::Index)cidx) = squared_dipole(cols[cidx], two_fp, q, scheme);
      ++r;
    }
  }
  return m;
}

Spectrum add_noise(const Spectrum& s, double relative_sigma, uint64_t seed) {
  if (relative_sigma < 0) throw std::invalid_argument("negative noise level");
  Spectrum out = s;
  if (relative_sigma == 0.0) return out;
  double peak = 0.0;
  for (double a : s.alpha_per_cm) peak = std::max(peak, std::abs(a));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, relative_sigma * peak);
  for (double& a : out.alpha_per_cm) a += dist(rng);
  return out;
}

}  // namespace popspec
