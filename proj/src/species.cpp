#include "popspec/species.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace popspec {

std::vector<GroundState> LevelScheme::ground_states() const {
  std::vector<GroundState> out;
  for (const auto& [two_f, _] : ground_levels)
    for (int two_mf = -two_f; two_mf <= two_f; two_mf += 2)
      out.push_back({two_f, two_mf});
  return out;
}

std::vector<GroundState> LevelScheme::excited_states() const {
  std::vector<GroundState> out;
  for (const auto& [two_f, _] : excited_levels)
    for (int two_mf = -two_f; two_mf <= two_f; two_mf += 2)
      out.push_back({two_f, two_mf});
  return out;
}

double LevelScheme::line_center_hz(int two_f, int two_fp) const {
  return excited_levels.at(two_fp) - ground_levels.at(two_f);
}

void LevelScheme::validate() const {
  if (two_i < 0 || two_j_ground < 0 || two_j_excited < 0)
    throw std::invalid_argument("negative angular momentum in species data");
  auto check_manifold = [&](const std::map<int, double>& levels, int two_j,
                            const char* which) {
    if (levels.empty())
      throw std::invalid_argument(std::string("no ") + which +
                                  " hyperfine levels");
    for (const auto& [two_f, offset] : levels) {
      if (!triangle_ok(two_j, two_i, two_f))
        throw std::invalid_argument(std::string("hyperfine F outside |J-I|..J+I in ") +
                                    which + " manifold");
      if (!std::isfinite(offset))
        throw std::invalid_argument("non-finite hyperfine offset");
    }
  };
  check_manifold(ground_levels, two_j_ground, "ground");
  check_manifold(excited_levels, two_j_excited, "excited");
  if (!(reference_frequency_hz > 0))
    throw std::invalid_argument("reference frequency must be positive");
  if (!(dipole_scale_cm > 0))
    throw std::invalid_argument("dipole scale must be positive");
}

Rational squared_dipole_exact(const GroundState& g, int two_fp, int q,
                              const LevelScheme& scheme) {
  if (q < -1 || q > 1) throw std::invalid_argument("polarization q not in {-1,0,+1}");
  int two_mfp = g.two_mf + 2 * q;
  if (!valid_jm(two_fp, two_mfp)) return 0;
  SignedSquare sixj =
      wigner6j_exact(scheme.two_j_ground, scheme.two_j_excited, 2,
                     two_fp, g.two_f, scheme.two_i);
  SignedSquare cg = clebsch_gordan_exact(g.two_f, g.two_mf, 2, 2 * q,
                                         two_fp, two_mfp);
  // mu = mu0 sqrt((2J+1)(2F+1)) {J J' 1; F F' I} <F,mF,1,q|F',mF+q>
  return Rational((scheme.two_j_ground + 1) * (g.two_f + 1)) * sixj.square *
         cg.square;
}

double squared_dipole(const GroundState& g, int two_fp, int q,
                      const LevelScheme& scheme) {
  return squared_dipole_exact(g, two_fp, q, scheme).convert_to<double>() *
         scheme.mu0 * scheme.mu0;
}

LevelScheme rb87_d1_scheme() {
  LevelScheme s;
  s.name = "Rb87-D1";
  s.two_i = 3;         // I = 3/2
  s.two_j_ground = 1;  // 5S1/2
  s.two_j_excited = 1; // 5P1/2
  // offsets from the respective manifold centers of gravity, Hz
  s.ground_levels = {{2, -4.271676631815181e9}, {4, 2.563005979089109e9}};
  s.excited_levels = {{2, -509.05e6}, {4, 305.43e6}};
  s.reference_frequency_hz = 377.107463380e12;
  s.mu0 = 1.0;
  s.dipole_scale_cm = 2.5377e-29;  // <J||er||J'>, C*m
  return s;
}

TransitionTable build_transition_table(const LevelScheme& scheme) {
  TransitionTable table;
  for (const GroundState& g : scheme.ground_states()) {
    for (const auto& [two_fp, _] : scheme.excited_levels) {
      if (std::abs(g.two_f - two_fp) > 2) continue;
      for (int q = -1; q <= 1; ++q) {
        int two_mfp = g.two_mf + 2 * q;
        if (!valid_jm(two_fp, two_mfp)) continue;
        double mu2 = squared_dipole(g, two_fp, q, scheme);
        if (mu2 == 0.0) continue;
        table.lines.push_back({g, two_fp, two_mfp, q, mu2,
                               scheme.line_center_hz(g.two_f, two_fp)});
      }
    }
  }
  return table;
}

namespace {

using nlohmann::json;

std::map<int, double> parse_levels(const json& j) {
  std::map<int, double> out;
  for (const auto& lvl : j) {
    int two_f = lvl.at("two_f").get<int>();
    out[two_f] = lvl.at("offset_hz").get<double>();
  }
  return out;
}

}  // namespace

LevelScheme load_species(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open species file: " + path);
  json j = json::parse(in);
  LevelScheme s;
  s.name = j.at("name").get<std::string>();
  s.two_i = j.at("two_i").get<int>();
  s.two_j_ground = j.at("two_j_ground").get<int>();
  s.two_j_excited = j.at("two_j_excited").get<int>();
  s.ground_levels = parse_levels(j.at("ground_levels"));
  s.excited_levels = parse_levels(j.at("excited_levels"));
  s.reference_frequency_hz = j.at("reference_frequency_hz").get<double>();
  s.mu0 = j.value("mu0", 1.0);
  s.dipole_scale_cm = j.at("dipole_scale_cm").get<double>();
  s.validate();
  return s;
}

void save_species(const LevelScheme& scheme, const std::string& path) {
  json j;
  j["schema"] = "popspec-species-v1";
  j["name"] = scheme.name;
  j["two_i"] = scheme.two_i;
  j["two_j_ground"] = scheme.two_j_ground;
  j["two_j_excited"] = scheme.two_j_excited;
  auto dump_levels = [](const std::map<int, double>& levels) {
    json arr = json::array();
    for (const auto& [two_f, offset] : levels)
      arr.push_back({{"two_f", two_f}, {"offset_hz", offset}});
    return arr;
  };
  j["ground_levels"] = dump_levels(scheme.ground_levels);
  j["excited_levels"] = dump_levels(scheme.excited_levels);
  j["reference_frequency_hz"] = scheme.reference_frequency_hz;
  j["mu0"] = scheme.mu0;
  j["dipole_scale_cm"] = scheme.dipole_scale_cm;
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write species file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace popspec
