#pragma once

// Atomic species description for D1-type schemes (J=1/2 -> J'=1/2):
// hyperfine level energies, the enumerated ground-state basis and the
// transition table with squared dipole moments per polarization.

#include <map>
#include <string>
#include <vector>

#include "popspec/angular.hpp"

namespace popspec {

struct GroundState {
  int two_f = 0;
  int two_mf = 0;  // twice m_F

  bool operator==(const GroundState&) const = default;
};

struct LevelScheme {
  std::string name;
  int two_i = 0;        // nuclear spin
  int two_j_ground = 0;
  int two_j_excited = 0;
  // hyperfine energy offsets in Hz, keyed by 2F, relative to the optical
  // reference frequency (ground and excited manifolds separately)
  std::map<int, double> ground_levels;
  std::map<int, double> excited_levels;
  double reference_frequency_hz = 0.0;
  double mu0 = 1.0;  // dipole prefactor, normalized unit
  // reduced dipole matrix element in C*m, sets the absolute cross-section
  // scale of the forward model (reference data, not part of mu0)
  double dipole_scale_cm = 0.0;

  // ground sublevels in canonical order: F ascending, mF ascending
  std::vector<GroundState> ground_states() const;
  // excited sublevels, same ordering convention
  std::vector<GroundState> excited_states() const;
  // detuning of the |F,mF> -> |F',mF'> line center from the reference, Hz
  double line_center_hz(int two_f, int two_fp) const;

  void validate() const;  // throws std::invalid_argument on bad data
};

struct Transition {
  GroundState ground;
  int two_fp = 0;
  int two_mfp = 0;
  int q = 0;  // polarization: -1, 0, +1
  double mu_squared = 0.0;   // units of mu0^2
  double frequency_hz = 0.0; // detuning of line center from reference
};

struct TransitionTable {
  std::vector<Transition> lines;
};

// |mu|^2 for |F,mF> -> |F', mF+q>, exact in units of mu0^2
Rational squared_dipole_exact(const GroundState& g, int two_fp, int q,
                              const LevelScheme& scheme);
double squared_dipole(const GroundState& g, int two_fp, int q,
                      const LevelScheme& scheme);

// built-in rubidium-87 D1 scheme (constants from standard reference data)
LevelScheme rb87_d1_scheme();
TransitionTable build_transition_table(const LevelScheme& scheme);

// species data file (JSON), same schema as data/rb87_d1.json
LevelScheme load_species(const std::string& path);
void save_species(const LevelScheme& scheme, const std::string& path);

}  // namespace popspec
