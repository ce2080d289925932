#pragma once

// Frequency-axis calibration from Fabry-Perot marker fringes and
// saturated-absorption anchor lines, plus transmission -> absorption
// conversion onto a uniform calibrated grid.

#include <string>
#include <vector>

#include "popspec/forward.hpp"

namespace popspec {

struct RawTrace {
  std::vector<double> samples;  // detector voltage vs sample index
  std::string channel;          // probe | fp | sas

  void validate() const;  // >= 16 finite samples
};

struct ReferenceLine {
  std::string name;
  double frequency_hz = 0.0;  // detuning from the species reference
  bool crossover = false;
};

// SAS reference table for a scheme: the hyperfine lines, optionally with
// the pairwise crossover resonances
std::vector<ReferenceLine> sas_reference_lines(const LevelScheme& scheme,
                                               bool include_crossovers = false);
std::vector<ReferenceLine> load_reference_lines(const std::string& path,
                                                bool include_crossovers = false);

struct FrequencyMap {
  // polynomial in the normalized index u = (s - x_offset)/x_scale,
  // ascending power
  std::vector<double> coefficients;
  double x_offset = 0.0;
  double x_scale = 1.0;
  double fsr_hz = 0.0;
  std::vector<double> anchor_residuals_hz;
  double anchor_rms_hz = 0.0;
  bool contradictory_anchors = false;  // anchor RMS comparable to the FSR
  double domain_lo = 0.0, domain_hi = 0.0;

  double operator()(double sample_index) const;
  bool monotone() const;  // strictly increasing over the fitted domain
};

// sub-sample fringe peak centers, strictly increasing
struct FpPeaks {
  std::vector<double> centers;
  bool periodic_warning = false;  // fringe spacing drifts beyond a chirp model
};
FpPeaks detect_fp_peaks(const RawTrace& fp);

struct Anchor {
  double sample_index = 0.0;
  double frequency_hz = 0.0;
  std::string name;
};
std::vector<Anchor> detect_sas_anchors(const RawTrace& sas,
                                       const std::vector<ReferenceLine>& table);

FrequencyMap fit_frequency_axis(const FpPeaks& peaks,
                                const std::vector<Anchor>& anchors,
                                int degree = 3);

// alpha = -ln(I/I0)/L with I0 from the outermost 5% of the scan,
// resampled onto a uniform Hz grid
Spectrum apply_map(const FrequencyMap& map, const RawTrace& probe,
                   double path_cm, int q);

}  // namespace popspec
