#pragma once

// Forward absorption model: per-state excitation spectra, synthesized
// spectra, the sampled coupling matrix and the reduced per-manifold
// line-strength coefficients.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "popspec/lineshape.hpp"
#include "popspec/species.hpp"

namespace popspec {

struct PopulationDistribution {
  // ordering: F ascending, mF ascending (Rb87 D1: |1,-1>,|1,0>,|1,+1>,
  // |2,-2>,...,|2,+2>)
  std::vector<double> p;

  void validate() const;  // entries >= 0, sum = 1 within 1e-9
  static PopulationDistribution thermal(size_t m);
};

struct ProbeConfig {
  int q = +1;                    // circular probe polarization
  std::vector<double> axis_hz;   // detuning from the species reference
  double n0_cm3 = 1e10;          // atomic density
  double path_cm = 5.0;
  VoigtParams voigt;             // gamma/sigma shared across lines

  void validate() const;
};

struct Spectrum {
  std::vector<double> axis_hz;
  std::vector<double> alpha_per_cm;
  int q = +1;
};

struct CouplingMatrix {
  Eigen::MatrixXd c;                   // rows: (omega, q) samples
  std::vector<double> row_freq_hz;
  std::vector<int> row_q;
  std::vector<GroundState> columns;
};

// absorption per unit density per unit squared dipole (mu0^2 units):
// alpha = n0 * scale_per_n0 * sum mu^2 K(nu), with K normalized per Hz.
// Evaluated at the fixed reference frequency so the model stays linear.
double absorption_scale_per_n0(const LevelScheme& scheme);

// C_{|F,mF>}^q(omega) of the absorption sum, 1/cm
double excitation_spectrum(const GroundState& g, int q, double omega_hz,
                           const ProbeConfig& cfg, const LevelScheme& scheme);

Spectrum synthesize(const PopulationDistribution& pop, const ProbeConfig& cfg,
                    const LevelScheme& scheme);

CouplingMatrix coupling_matrix(const std::vector<ProbeConfig>& configs,
                               const LevelScheme& scheme);
CouplingMatrix coupling_matrix(const ProbeConfig& plus, const ProbeConfig& minus,
                               const LevelScheme& scheme);

// xi_F^{F',q} = sum_mF mu^2 P (reduced line strengths, mu0^2 units, no
// density scale). Order: (F,F') = (lowest..) x (lowest..), i.e. for
// Rb87: (1,1),(1,2),(2,1),(2,2).
std::vector<double> reduced_xi(const PopulationDistribution& pop, int q,
                               const LevelScheme& scheme);

// per-manifold xi coupling matrix: rows are (F', q) combinations in the
// given polarization order, columns the mF sublevels of manifold two_f
Eigen::MatrixXd xi_coupling_matrix(int two_f, const std::vector<int>& pols,
                                   const LevelScheme& scheme);

Spectrum add_noise(const Spectrum& s, double relative_sigma, uint64_t seed);

}  // namespace popspec
