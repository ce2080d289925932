// popspec: synthesize, calibrate, reconstruct and simulate ground-state
// population spectra from the command line.
//
// Exit codes: 0 success, 1 numerical failure, 2 input error.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <json.hpp>

#include "popspec/calibrate.hpp"
#include "popspec/forward.hpp"
#include "popspec/io.hpp"
#include "popspec/pumpsim.hpp"
#include "popspec/reconstruct.hpp"

namespace {

using namespace popspec;
using nlohmann::json;

LevelScheme resolve_species(const std::string& species_path) {
  if (species_path.empty()) return rb87_d1_scheme();
  return load_species(species_path);
}

void require_input(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("input file not found: " + path);
}

int matrix_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
  return rank;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json exact_matrix_json(int two_f, const std::vector<int>& pols,
                       const LevelScheme& scheme) {
  json rows = json::array();
  for (int q : pols)
    for (const auto& [two_fp, _] : scheme.excited_levels) {
      json row = json::array();
      for (int two_mf = -two_f; two_mf <= two_f; two_mf += 2) {
        Rational r = squared_dipole_exact({two_f, two_mf}, two_fp, q, scheme);
        row.push_back(r == 0 ? "0"
                             : r.convert_to<std::string>());
      }
      rows.push_back(row);
    }
  return rows;
}

int cmd_couplings(const std::string& species_path, const std::string& out_path) {
  LevelScheme scheme = resolve_species(species_path);
  json j;
  j["schema"] = "popspec-couplings-v1";
  j["species"] = scheme.name;
  json manifolds = json::array();
  for (const auto& [two_f, _] : scheme.ground_levels) {
    for (auto& [label, pols] :
         std::vector<std::pair<std::string, std::vector<int>>>{
             {"sigma", {+1, -1}}, {"sigma+pi", {+1, -1, 0}}}) {
      Eigen::MatrixXd m = xi_coupling_matrix(two_f, pols, scheme);
      json entry;
      entry["two_f"] = two_f;
      entry["polarizations"] = label;
      entry["matrix"] = matrix_json(m);
      entry["matrix_exact"] = exact_matrix_json(two_f, pols, scheme);
      entry["rank"] = matrix_rank(m);
      manifolds.push_back(entry);
    }
  }
  j["manifolds"] = manifolds;
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot write " + out_path);
  out << j.dump(2) << "\n";
  return 0;
}

struct SynthConfig {
  PopulationDistribution population;
  double n0_cm3 = 1e10;
  double gamma_fwhm_hz = 103e6;
  double sigma_fwhm_hz = 202e6;
  double axis_lo_hz = -10e9, axis_hi_hz = 10e9;
  int axis_points = 2500;
  double path_cm = 5.0;
  double noise_relative = 0.0;
  uint64_t seed = 1;
  bool make_raw_bundle = false;
  double fsr_hz = 1.0e9;
  double chirp = 0.0;
  double i0 = 1.0;
  double fp_finesse = 20.0;
  double sas_width_hz = 30e6;
  json resolved;
};

SynthConfig parse_synth_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  json j = json::parse(in);
  static const std::set<std::string> known = {
      "population", "n0_cm3",        "gamma_fwhm_hz", "sigma_fwhm_hz",
      "axis",       "path_cm",       "noise_relative", "seed",
      "raw_bundle"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key: " + it.key());

  SynthConfig c;
  c.population.p = j.at("population").get<std::vector<double>>();
  c.n0_cm3 = j.value("n0_cm3", c.n0_cm3);
  c.gamma_fwhm_hz = j.value("gamma_fwhm_hz", c.gamma_fwhm_hz);
  c.sigma_fwhm_hz = j.value("sigma_fwhm_hz", c.sigma_fwhm_hz);
  if (j.contains("axis")) {
    c.axis_lo_hz = j["axis"].value("lo_hz", c.axis_lo_hz);
    c.axis_hi_hz = j["axis"].value("hi_hz", c.axis_hi_hz);
    c.axis_points = j["axis"].value("points", c.axis_points);
  }
  c.path_cm = j.value("path_cm", c.path_cm);
  c.noise_relative = j.value("noise_relative", c.noise_relative);
  c.seed = j.value("seed", c.seed);
  if (j.contains("raw_bundle")) {
    c.make_raw_bundle = true;
    const json& rb = j["raw_bundle"];
    c.fsr_hz = rb.value("fsr_hz", c.fsr_hz);
    c.chirp = rb.value("chirp", c.chirp);
    c.i0 = rb.value("i0", c.i0);
    c.fp_finesse = rb.value("fp_finesse", c.fp_finesse);
    c.sas_width_hz = rb.value("sas_width_hz", c.sas_width_hz);
  }
  return c;
}

json resolved_synth_json(const SynthConfig& c) {
  json j;
  j["population"] = c.population.p;
  j["n0_cm3"] = c.n0_cm3;
  j["gamma_fwhm_hz"] = c.gamma_fwhm_hz;
  j["sigma_fwhm_hz"] = c.sigma_fwhm_hz;
  j["axis"] = {{"lo_hz", c.axis_lo_hz}, {"hi_hz", c.axis_hi_hz},
               {"points", c.axis_points}};
  j["path_cm"] = c.path_cm;
  j["noise_relative"] = c.noise_relative;
  j["seed"] = c.seed;
  if (c.make_raw_bundle)
    j["raw_bundle"] = {{"fsr_hz", c.fsr_hz},     {"chirp", c.chirp},
                       {"i0", c.i0},             {"fp_finesse", c.fp_finesse},
                       {"sas_width_hz", c.sas_width_hz}};
  return j;
}

std::vector<double> linear_axis(double lo, double hi, int n) {
  std::vector<double> axis(n);
  for (int i = 0; i < n; ++i)
    axis[i] = lo + (hi - lo) * (double)i / (double)(n - 1);
  return axis;
}

int cmd_synth(const std::string& config_path, const std::string& species_path,
              const std::string& out_prefix, std::optional<uint64_t> seed_flag,
              std::optional<double> noise_flag) {
  SynthConfig c = parse_synth_config(config_path);
  if (seed_flag) c.seed = *seed_flag;
  if (noise_flag) c.noise_relative = *noise_flag;
  LevelScheme scheme = resolve_species(species_path);
  c.population.validate();
  c.resolved = resolved_synth_json(c);
  std::string cfg_str = c.resolved.dump();

  ProbeConfig probe;
  probe.axis_hz = linear_axis(c.axis_lo_hz, c.axis_hi_hz, c.axis_points);
  probe.n0_cm3 = c.n0_cm3;
  probe.path_cm = c.path_cm;
  probe.voigt = {c.gamma_fwhm_hz, c.sigma_fwhm_hz, 0.0};

  for (int q : {+1, -1}) {
    probe.q = q;
    Spectrum s = synthesize(c.population, probe, scheme);
    if (c.noise_relative > 0)
      s = add_noise(s, c.noise_relative, c.seed + (q > 0 ? 0 : 1));
    SpectrumFile f{s, c.n0_cm3, c.gamma_fwhm_hz, c.sigma_fwhm_hz, c.path_cm,
                   cfg_str};
    write_spectrum_csv(f, out_prefix + (q > 0 ? "_sigma_plus.csv"
                                              : "_sigma_minus.csv"));
  }

  if (c.make_raw_bundle) {
    // simulated scan with a quadratic sweep nonlinearity; the probe channel
    // sees the sigma+ spectrum as transmitted intensity
    int n = c.axis_points;
    double span = c.axis_hi_hz - c.axis_lo_hz;
    std::vector<double> freq(n);
    for (int i = 0; i < n; ++i) {
      double u = (double)i / (double)(n - 1);
      freq[i] = c.axis_lo_hz + span * (u + c.chirp * u * u) / (1.0 + c.chirp);
    }
    ProbeConfig bp = probe;
    bp.q = +1;
    bp.axis_hz = freq;
    Spectrum s = synthesize(c.population, bp, scheme);

    RawBundle bundle;
    bundle.path_cm = c.path_cm;
    bundle.config_json = cfg_str;
    bundle.probe.channel = "probe";
    bundle.fp.channel = "fp";
    bundle.sas.channel = "sas";
    double coeff_f = 2.0 * c.fp_finesse * c.fp_finesse / std::numbers::pi /
                     std::numbers::pi;
    auto anchors = sas_reference_lines(scheme, false);
    for (int i = 0; i < n; ++i) {
      bundle.probe.samples.push_back(c.i0 *
                                     std::exp(-s.alpha_per_cm[i] * c.path_cm));
      double phase = std::numbers::pi * freq[i] / c.fsr_hz;
      bundle.fp.samples.push_back(1.0 /
                                  (1.0 + coeff_f * std::sin(phase) * std::sin(phase)));
      double sas = 0.05;
      for (const auto& line : anchors) {
        double d = (freq[i] - line.frequency_hz) / (c.sas_width_hz / 2.0);
        sas += 1.0 / (1.0 + d * d);
      }
      bundle.sas.samples.push_back(sas);
    }
    write_raw_bundle_csv(bundle, out_prefix + "_bundle.csv");
  }
  return 0;
}

int cmd_calibrate(const std::string& in_path, const std::string& species_path,
                  const std::string& out_map, const std::string& out_spectrum,
                  int degree, bool crossovers, int q) {
  require_input(in_path);
  LevelScheme scheme = resolve_species(species_path);
  RawBundle bundle = read_raw_bundle_csv(in_path);
  if (bundle.fp.samples.empty())
    throw std::invalid_argument("raw bundle has no FP channel");

  FpPeaks peaks = detect_fp_peaks(bundle.fp);
  auto table = sas_reference_lines(scheme, crossovers);
  auto anchors = detect_sas_anchors(bundle.sas, table);
  FrequencyMap map = fit_frequency_axis(peaks, anchors, degree);

  json cfg;
  cfg["input"] = in_path;
  cfg["degree"] = degree;
  cfg["crossovers"] = crossovers;
  cfg["q"] = q;
  cfg["species"] = scheme.name;
  write_frequency_map_json(map, cfg.dump(), out_map);

  if (!out_spectrum.empty()) {
    Spectrum s = apply_map(map, bundle.probe, bundle.path_cm, q);
    SpectrumFile f{s, 0.0, 0.0, 0.0, bundle.path_cm, cfg.dump()};
    write_spectrum_csv(f, out_spectrum);
  }
  std::cout << "anchor_rms_hz=" << format_double(map.anchor_rms_hz) << "\n";
  return 0;
}

int cmd_reconstruct(const std::string& plus_path, const std::string& minus_path,
                    const std::string& species_path, const std::string& out_path,
                    bool full_pinv, bool free_widths, double sv_cutoff) {
  require_input(plus_path);
  require_input(minus_path);
  LevelScheme scheme = resolve_species(species_path);
  SpectrumFile plus = read_spectrum_csv(plus_path);
  SpectrumFile minus = read_spectrum_csv(minus_path);
  if (plus.spectrum.q != +1 || minus.spectrum.q != -1)
    throw std::invalid_argument(
        "reconstruction needs a sigma+ file and a sigma- file (check q= headers)");

  ReconstructOptions opt;
  opt.full_pseudoinverse = full_pinv;
  opt.sv_cutoff_rel = sv_cutoff;
  if (!free_widths && plus.gamma_fwhm_hz > 0)
    opt.fixed_widths = VoigtParams{plus.gamma_fwhm_hz, plus.sigma_fwhm_hz, 0.0};

  ReconstructionReport rep = reconstruct(plus.spectrum, minus.spectrum, scheme, opt);

  json cfg;
  cfg["plus"] = plus_path;
  cfg["minus"] = minus_path;
  cfg["species"] = scheme.name;
  cfg["full_pinv"] = full_pinv;
  cfg["free_widths"] = free_widths;
  cfg["sv_cutoff_rel"] = sv_cutoff;
  write_report_json(rep, cfg.dump(), out_path);
  return 0;
}

int cmd_simulate(int scenario, const std::string& grid_spec,
                 const std::string& out_path, bool no_nonresonant,
                 std::optional<double> equilibration_rate,
                 std::optional<int> velocity_groups) {
  auto [cfg, field] = scenario == 1 ? scenario_experiment1()
                                    : scenario_experiment2();
  cfg.include_nonresonant = !no_nonresonant;
  if (equilibration_rate) cfg.equilibration_rate = *equilibration_rate;
  if (velocity_groups) cfg.velocity_groups = *velocity_groups;

  std::vector<double> grid;
  {
    double lo = 0, hi = 0;
    int n = 0;
    if (std::sscanf(grid_spec.c_str(), "%lf,%lf,%d", &lo, &hi, &n) == 3)
      grid = log_intensity_grid(lo, hi, n);
    else if (std::sscanf(grid_spec.c_str(), "%lf", &lo) == 1)
      grid = {lo};
    else
      throw std::invalid_argument("bad --grid, expected lo,hi,points or a value");
  }

  PumpCurve curve = sweep(cfg, field, grid);

  json j;
  j["scenario"] = scenario;
  j["grid"] = grid_spec;
  j["include_nonresonant"] = cfg.include_nonresonant;
  j["equilibration_rate"] = cfg.equilibration_rate;
  j["velocity_groups"] = cfg.velocity_groups;
  j["doppler_fwhm_hz"] = cfg.doppler_fwhm_hz;
  j["homogeneous_fwhm_hz"] = cfg.homogeneous_fwhm_hz;
  j["buffer_gas"] = cfg.buffer_gas;
  j["temperature_c"] = cfg.temperature_c;
  write_pump_curve_csv(curve, j.dump(), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ground-state population spectroscopy toolkit"};
  app.require_subcommand(1);

  std::string species_path, out_path, config_path, out_prefix;
  std::string plus_path, minus_path, in_path, out_map, out_spectrum, grid_spec;
  std::optional<uint64_t> seed_flag;
  std::optional<double> noise_flag, eq_rate;
  std::optional<int> vel_groups;
  int degree = 3, q = +1, scenario = 1;
  bool crossovers = false, full_pinv = false, free_widths = false;
  bool no_nonresonant = false;
  double sv_cutoff = 1e-10;

  CLI::App* couplings = app.add_subcommand(
      "couplings", "write per-manifold xi coupling matrices and ranks");
  couplings->add_option("--species", species_path, "species JSON file");
  couplings->add_option("--out", out_path, "output JSON path")->required();

  CLI::App* synth = app.add_subcommand(
      "synth", "synthesize sigma+/- spectra (and optional raw bundle)");
  synth->add_option("--config", config_path, "synth config JSON")->required();
  synth->add_option("--species", species_path, "species JSON file");
  synth->add_option("--out", out_prefix, "output path prefix")->required();
  synth->add_option("--seed", seed_flag, "override config seed");
  synth->add_option("--noise", noise_flag, "override relative noise level");

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "fit a frequency map from a raw FP/SAS bundle");
  calibrate->add_option("--in", in_path, "raw bundle CSV")->required();
  calibrate->add_option("--species", species_path, "species JSON file");
  calibrate->add_option("--out-map", out_map, "frequency map JSON")->required();
  calibrate->add_option("--out-spectrum", out_spectrum,
                        "calibrated spectrum CSV");
  calibrate->add_option("--degree", degree, "polynomial degree (default 3)");
  calibrate->add_flag("--crossovers", crossovers,
                      "include crossover resonances in the line table");
  calibrate->add_option("--q", q, "polarization tag for the output spectrum");

  CLI::App* reconstruct_cmd = app.add_subcommand(
      "reconstruct", "reconstruct populations from sigma+/- spectra");
  reconstruct_cmd->add_option("--plus", plus_path, "sigma+ spectrum CSV")
      ->required();
  reconstruct_cmd->add_option("--minus", minus_path, "sigma- spectrum CSV")
      ->required();
  reconstruct_cmd->add_option("--species", species_path, "species JSON file");
  reconstruct_cmd->add_option("--out", out_path, "report JSON path")->required();
  reconstruct_cmd->add_flag("--full-pinv", full_pinv,
                            "regress all sublevels from the full coupling matrix");
  reconstruct_cmd->add_flag("--free-widths", free_widths,
                            "fit Voigt widths instead of using file headers");
  reconstruct_cmd->add_option("--sv-cutoff", sv_cutoff,
                              "relative singular value cutoff");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "steady-state optical pumping sweep");
  simulate->add_option("--scenario", scenario, "1 or 2")
      ->check(CLI::Range(1, 2));
  simulate->add_option("--grid", grid_spec,
                       "lo,hi,points (log spaced) or a single intensity")
      ->required();
  simulate->add_option("--out", out_path, "pump curve CSV")->required();
  simulate->add_flag("--no-nonresonant", no_nonresonant,
                     "drop couplings classified as non-resonant");
  simulate->add_option("--equilibration-rate", eq_rate,
                       "ground equilibration rate, 1/s");
  simulate->add_option("--velocity-groups", vel_groups, "velocity group count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (couplings->parsed()) return cmd_couplings(species_path, out_path);
    if (synth->parsed())
      return cmd_synth(config_path, species_path, out_prefix, seed_flag,
                       noise_flag);
    if (calibrate->parsed())
      return cmd_calibrate(in_path, species_path, out_map, out_spectrum, degree,
                           crossovers, q);
    if (reconstruct_cmd->parsed())
      return cmd_reconstruct(plus_path, minus_path, species_path, out_path,
                             full_pinv, free_widths, sv_cutoff);
    if (simulate->parsed())
      return cmd_simulate(scenario, grid_spec, out_path, no_nonresonant,
                          eq_rate, vel_groups);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
