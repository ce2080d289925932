#pragma once

// Versioned file formats: spectrum CSV, three-channel raw bundle CSV,
// pump-curve CSV, frequency-map and reconstruction-report JSON. Every
// writer embeds the resolved configuration for provenance, and numeric
// round trips through read/write are bit-exact.

#include <string>
#include <vector>

#include "popspec/calibrate.hpp"
#include "popspec/forward.hpp"
#include "popspec/pumpsim.hpp"
#include "popspec/reconstruct.hpp"

namespace popspec {

// shortest decimal form that round-trips a double exactly
std::string format_double(double v);

struct SpectrumFile {
  Spectrum spectrum;
  double n0_cm3 = 0.0;
  double gamma_fwhm_hz = 0.0;
  double sigma_fwhm_hz = 0.0;
  double path_cm = 0.0;
  std::string config_json;  // resolved generating config, may be empty
};

void write_spectrum_csv(const SpectrumFile& f, const std::string& path);
SpectrumFile read_spectrum_csv(const std::string& path);

struct RawBundle {
  RawTrace probe, fp, sas;
  double path_cm = 0.0;
  std::string config_json;
};

void write_raw_bundle_csv(const RawBundle& b, const std::string& path);
RawBundle read_raw_bundle_csv(const std::string& path);

void write_frequency_map_json(const FrequencyMap& map, const std::string& config_json,
                              const std::string& path);
FrequencyMap read_frequency_map_json(const std::string& path);

void write_report_json(const ReconstructionReport& rep,
                       const std::string& config_json, const std::string& path);

void write_pump_curve_csv(const PumpCurve& curve, const std::string& config_json,
                          const std::string& path);

}  // namespace popspec
