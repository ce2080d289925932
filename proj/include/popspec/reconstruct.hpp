#pragma once

// Inversion of absorption spectra to ground-state populations:
// pseudoinverse regression, separable xi fitting, the exact F=1
// inversion, non-negative F=2 estimation, density normalization and
// conditioning diagnostics.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "popspec/forward.hpp"
#include "popspec/nnls.hpp"

namespace popspec {

struct PseudoinverseResult {
  Eigen::VectorXd p;
  double residual_norm = 0.0;
  Eigen::VectorXd singular_values;
  int rank = 0;
};

// least-squares solve of C * p = alpha via SVD with a relative
// singular-value cutoff
PseudoinverseResult solve_pseudoinverse(const CouplingMatrix& c,
                                        const Eigen::VectorXd& alpha,
                                        double sv_cutoff_rel = 1e-10);

struct XiValue {
  int two_f = 0;
  int two_fp = 0;
  int q = 0;
  double value = 0.0;    // includes the n0 * kappa absorption scale
  double std_error = 0.0;
};

struct XiFitResult {
  std::vector<XiValue> xi;
  double gamma_fwhm_hz = 0.0;
  double sigma_fwhm_hz = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;

  double get(int two_f, int two_fp, int q) const;
};

struct XiFitOptions {
  // when set, the widths are held fixed and only the linear xi solve runs
  std::optional<VoigtParams> fixed_widths;
  int max_iterations = 400;
  int multistart = 3;
};

XiFitResult fit_xi(const std::vector<Spectrum>& spectra,
                   const LevelScheme& scheme, const XiFitOptions& opt = {});

// the exact 3x3 inverse of the F=1 sigma+ / sigma- xi rows
Eigen::Matrix3d f1_inversion_matrix();
// inputs: xi_1^{1,+}, xi_1^{2,+}, xi_1^{1,-} in mu0^2 units (scale removed)
Eigen::Vector3d invert_f1(double xi11_plus, double xi12_plus, double xi11_minus);

struct F2Estimate {
  Eigen::VectorXd populations;  // 5 entries, mF = -2..+2
  bool reliable = false;        // >= 90% of weight on one stretched state
  int null_space_dim = 0;
  double residual_norm = 0.0;
};

// xi2 order: (F'=low,+), (F'=high,+), (F'=low,-), (F'=high,-)
F2Estimate estimate_f2_nnls(const Eigen::Vector4d& xi2, const LevelScheme& scheme);

struct DensityEstimate {
  double n0_cm3 = 0.0;
  double truncation_fraction = 0.0;  // estimated absorption mass outside the scan
  bool truncated_scan_warning = false;
};

// Integral identity: int (alpha+ + alpha-) dnu = Q n0 kappa. The widths
// are used only for the wing-truncation correction.
DensityEstimate estimate_density(const Spectrum& plus, const Spectrum& minus,
                                 const LevelScheme& scheme,
                                 const VoigtParams& widths,
                                 bool wing_correction = true);

// sum over F' of (mu+)^2 + (mu-)^2, identical for every ground sublevel
double isotropic_q_factor(const LevelScheme& scheme);

struct ConditioningReport {
  Eigen::VectorXd singular_values;
  int rank = 0;                 // at relative cutoff 1e-10
  int near_zero_count = 0;      // singular values below 1e-6 of max
  std::string regime;           // resolved | intermediate | degenerate
};

ConditioningReport conditioning_report(const CouplingMatrix& c);

struct ReconstructOptions {
  std::optional<VoigtParams> fixed_widths;
  bool full_pseudoinverse = false;  // regress all sublevels from C directly
  double sv_cutoff_rel = 1e-10;
  bool wing_correction = true;
};

struct ReconstructionReport {
  PopulationDistribution populations;  // all sublevels, normalized
  Eigen::Vector3d f1;                  // F=1 detail before normalization
  double f2_total = 0.0;
  F2Estimate f2_estimate;
  double n0_cm3 = 0.0;
  double gamma_fwhm_hz = 0.0;
  double sigma_fwhm_hz = 0.0;
  double fit_residual_norm = 0.0;
  double population_sum_raw = 0.0;     // before the sum-to-1 normalization
  std::vector<double> singular_values;
  bool negative_population_warning = false;
  bool truncated_scan_warning = false;
};

ReconstructionReport reconstruct(const Spectrum& plus, const Spectrum& minus,
                                 const LevelScheme& scheme,
                                 const ReconstructOptions& opt = {});

}  // namespace popspec
