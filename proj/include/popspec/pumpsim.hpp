#pragma once

// Steady-state multilevel optical-pumping simulator. The full
// density-matrix model is reduced to population rate equations with
// optical coherences adiabatically eliminated: stimulated rates from the
// squared dipole table and a Lorentzian per velocity group, spontaneous
// branching from the same table, and a single uniform ground-state
// equilibration rate.

#include <vector>

#include "popspec/forward.hpp"

namespace popspec {

struct Sideband {
  double offset_hz = 0.0;       // relative to the carrier
  double amplitude = 1.0;       // relative field amplitude
};

struct PumpField {
  double carrier_detuning_hz = 0.0;  // vs the species reference frequency
  int q = +1;                        // -1, 0, +1
  double intensity_uW_mm2 = 0.0;     // total, split over components by amp^2
  std::vector<Sideband> components = {{0.0, 1.0}};
};

struct EnsembleConfig {
  LevelScheme scheme;
  int velocity_groups = 11;
  double doppler_fwhm_hz = 202e6;     // inhomogeneous width of the sampled shifts
  double homogeneous_fwhm_hz = 103e6; // buffer-gas Lorentzian per group
  double excited_decay_rate = 3.61e7; // 1/s, total
  double equilibration_rate = 150.0;  // 1/s, the single fitted parameter
  bool include_nonresonant = true;
  double nonresonant_cutoff_hz = 400e6;  // couplings beyond this detuning count
                                         // as non-resonant
  // metadata for the paper-style scenarios
  double temperature_c = 20.0;
  std::string buffer_gas = "Ne 10 Torr";

  void validate() const;
};

struct PumpCurve {
  std::vector<double> intensities_uW_mm2;
  std::vector<PopulationDistribution> populations;
};

// ground-state steady state, normalized to sum 1 over the ground manifold
PopulationDistribution steady_state(const EnsembleConfig& cfg,
                                    const PumpField& field);

PumpCurve sweep(const EnsembleConfig& cfg, const PumpField& field_template,
                const std::vector<double>& intensity_grid);

std::vector<double> log_intensity_grid(double lo, double hi, int points);

// sigma+ pump locked to the upper-ground -> upper-excited transition
std::pair<EnsembleConfig, PumpField> scenario_experiment1();
// pi-polarized carrier with +-3.0 GHz sidebands on the two hyperfine lines
std::pair<EnsembleConfig, PumpField> scenario_experiment2();

}  // namespace popspec
