#pragma once

// Area-normalized Voigt profiles. Widths are stored as FWHM in Hz for
// both the Lorentzian (gamma) and Gaussian (sigma) components; the
// profile integrates to 1 over frequency in Hz.

#include <complex>
#include <vector>

namespace popspec {

struct VoigtParams {
  double gamma_fwhm_hz = 0.0;  // homogeneous (Lorentzian) FWHM
  double sigma_fwhm_hz = 0.0;  // inhomogeneous (Gaussian) FWHM
  double center_hz = 0.0;

  void validate() const;  // throws std::invalid_argument
};

// Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im(z) >= 0
std::complex<double> faddeeva_w(std::complex<double> z);

// profile value at omega, units 1/Hz
double voigt(double omega_hz, const VoigtParams& p);

// vectorized evaluation over a monotone frequency axis
std::vector<double> voigt_batch(const std::vector<double>& axis_hz,
                                const VoigtParams& p);

}  // namespace popspec
