#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "popspec/angular.hpp"
#include "popspec/calibrate.hpp"
#include "popspec/forward.hpp"
#include "popspec/io.hpp"
#include "popspec/nnls.hpp"
#include "popspec/pumpsim.hpp"
#include "popspec/reconstruct.hpp"

namespace py = pybind11;
using namespace popspec;

PYBIND11_MODULE(_core, m) {
  m.doc() = "ground-state population spectroscopy toolkit";

  // angular momentum
  m.def("wigner3j", &wigner3j, py::arg("two_j1"), py::arg("two_j2"),
        py::arg("two_j3"), py::arg("two_m1"), py::arg("two_m2"),
        py::arg("two_m3"));
  m.def("wigner6j", &wigner6j, py::arg("two_j1"), py::arg("two_j2"),
        py::arg("two_j3"), py::arg("two_j4"), py::arg("two_j5"),
        py::arg("two_j6"));
  m.def("clebsch_gordan", &clebsch_gordan, py::arg("two_j1"), py::arg("two_m1"),
        py::arg("two_j2"), py::arg("two_m2"), py::arg("two_j3"),
        py::arg("two_m3"));

  // species
  py::class_<GroundState>(m, "GroundState")
      .def(py::init<int, int>(), py::arg("two_f"), py::arg("two_mf"))
      .def_readwrite("two_f", &GroundState::two_f)
      .def_readwrite("two_mf", &GroundState::two_mf)
      .def("__repr__", [](const GroundState& g) {
        return "GroundState(two_f=" + std::to_string(g.two_f) +
               ", two_mf=" + std::to_string(g.two_mf) + ")";
      });

  py::class_<LevelScheme>(m, "LevelScheme")
      .def_readwrite("name", &LevelScheme::name)
      .def_readwrite("two_i", &LevelScheme::two_i)
      .def_readwrite("two_j_ground", &LevelScheme::two_j_ground)
      .def_readwrite("two_j_excited", &LevelScheme::two_j_excited)
      .def_readwrite("ground_levels", &LevelScheme::ground_levels)
      .def_readwrite("excited_levels", &LevelScheme::excited_levels)
      .def_readwrite("reference_frequency_hz",
                     &LevelScheme::reference_frequency_hz)
      .def_readwrite("mu0", &LevelScheme::mu0)
      .def_readwrite("dipole_scale_cm", &LevelScheme::dipole_scale_cm)
      .def("ground_states", &LevelScheme::ground_states)
      .def("excited_states", &LevelScheme::excited_states)
      .def("line_center_hz", &LevelScheme::line_center_hz, py::arg("two_f"),
           py::arg("two_fp"))
      .def("validate", &LevelScheme::validate);

  m.def("rb87_d1_scheme", &rb87_d1_scheme);
  m.def("load_species", &load_species, py::arg("path"));
  m.def("save_species", &save_species, py::arg("scheme"), py::arg("path"));
  m.def("squared_dipole", &squared_dipole, py::arg("ground"), py::arg("two_fp"),
        py::arg("q"), py::arg("scheme"));

  // lineshape
  py::class_<VoigtParams>(m, "VoigtParams")
      .def(py::init<>())
      .def(py::init<double, double, double>(), py::arg("gamma_fwhm_hz"),
           py::arg("sigma_fwhm_hz"), py::arg("center_hz") = 0.0)
      .def_readwrite("gamma_fwhm_hz", &VoigtParams::gamma_fwhm_hz)
      .def_readwrite("sigma_fwhm_hz", &VoigtParams::sigma_fwhm_hz)
      .def_readwrite("center_hz", &VoigtParams::center_hz);
  m.def("voigt", &voigt, py::arg("omega_hz"), py::arg("params"));
  m.def("voigt_batch", &voigt_batch, py::arg("axis_hz"), py::arg("params"));
  m.def("faddeeva_w", &faddeeva_w, py::arg("z"));

  // forward model
  py::class_<PopulationDistribution>(m, "PopulationDistribution")
      .def(py::init<>())
      .def(py::init([](std::vector<double> p) {
             return PopulationDistribution{std::move(p)};
           }),
           py::arg("p"))
      .def_readwrite("p", &PopulationDistribution::p)
      .def("validate", &PopulationDistribution::validate)
      .def_static("thermal", &PopulationDistribution::thermal, py::arg("m"));

  py::class_<ProbeConfig>(m, "ProbeConfig")
      .def(py::init<>())
      .def_readwrite("q", &ProbeConfig::q)
      .def_readwrite("axis_hz", &ProbeConfig::axis_hz)
      .def_readwrite("n0_cm3", &ProbeConfig::n0_cm3)
      .def_readwrite("path_cm", &ProbeConfig::path_cm)
      .def_readwrite("voigt", &ProbeConfig::voigt);

  py::class_<Spectrum>(m, "Spectrum")
      .def(py::init<>())
      .def_readwrite("axis_hz", &Spectrum::axis_hz)
      .def_readwrite("alpha_per_cm", &Spectrum::alpha_per_cm)
      .def_readwrite("q", &Spectrum::q);

  py::class_<CouplingMatrix>(m, "CouplingMatrix")
      .def_readonly("c", &CouplingMatrix::c)
      .def_readonly("row_freq_hz", &CouplingMatrix::row_freq_hz)
      .def_readonly("row_q", &CouplingMatrix::row_q)
      .def_readonly("columns", &CouplingMatrix::columns);

  m.def("absorption_scale_per_n0", &absorption_scale_per_n0, py::arg("scheme"));
  m.def("synthesize", &synthesize, py::arg("populations"), py::arg("config"),
        py::arg("scheme"));
  m.def("coupling_matrix",
        py::overload_cast<const ProbeConfig&, const ProbeConfig&,
                          const LevelScheme&>(&coupling_matrix),
        py::arg("plus"), py::arg("minus"), py::arg("scheme"));
  m.def("reduced_xi", &reduced_xi, py::arg("populations"), py::arg("q"),
        py::arg("scheme"));
  m.def("xi_coupling_matrix", &xi_coupling_matrix, py::arg("two_f"),
        py::arg("polarizations"), py::arg("scheme"));
  m.def("add_noise", &add_noise, py::arg("spectrum"), py::arg("relative_sigma"),
        py::arg("seed"));

  // solvers
  py::class_<NnlsResult>(m, "NnlsResult")
      .def_readonly("x", &NnlsResult::x)
      .def_readonly("residual_norm", &NnlsResult::residual_norm)
      .def_readonly("iterations", &NnlsResult::iterations)
      .def_readonly("converged", &NnlsResult::converged);
  m.def("nnls", &nnls, py::arg("a"), py::arg("b"), py::arg("max_iterations") = 0);

  // reconstruction
  py::class_<XiValue>(m, "XiValue")
      .def_readonly("two_f", &XiValue::two_f)
      .def_readonly("two_fp", &XiValue::two_fp)
      .def_readonly("q", &XiValue::q)
      .def_readonly("value", &XiValue::value)
      .def_readonly("std_error", &XiValue::std_error);

  py::class_<XiFitResult>(m, "XiFitResult")
      .def_readonly("xi", &XiFitResult::xi)
      .def_readonly("gamma_fwhm_hz", &XiFitResult::gamma_fwhm_hz)
      .def_readonly("sigma_fwhm_hz", &XiFitResult::sigma_fwhm_hz)
      .def_readonly("residual_norm", &XiFitResult::residual_norm)
      .def_readonly("iterations", &XiFitResult::iterations)
      .def("get", &XiFitResult::get, py::arg("two_f"), py::arg("two_fp"),
           py::arg("q"));

  py::class_<XiFitOptions>(m, "XiFitOptions")
      .def(py::init<>())
      .def_readwrite("fixed_widths", &XiFitOptions::fixed_widths)
      .def_readwrite("max_iterations", &XiFitOptions::max_iterations)
      .def_readwrite("multistart", &XiFitOptions::multistart);

  m.def("fit_xi", &fit_xi, py::arg("spectra"), py::arg("scheme"),
        py::arg("options") = XiFitOptions{});
  m.def("f1_inversion_matrix", &f1_inversion_matrix);
  m.def("invert_f1", &invert_f1, py::arg("xi11_plus"), py::arg("xi12_plus"),
        py::arg("xi11_minus"));

  py::class_<F2Estimate>(m, "F2Estimate")
      .def_readonly("populations", &F2Estimate::populations)
      .def_readonly("reliable", &F2Estimate::reliable)
      .def_readonly("null_space_dim", &F2Estimate::null_space_dim)
      .def_readonly("residual_norm", &F2Estimate::residual_norm);
  m.def("estimate_f2_nnls", &estimate_f2_nnls, py::arg("xi2"), py::arg("scheme"));

  py::class_<DensityEstimate>(m, "DensityEstimate")
      .def_readonly("n0_cm3", &DensityEstimate::n0_cm3)
      .def_readonly("truncation_fraction", &DensityEstimate::truncation_fraction)
      .def_readonly("truncated_scan_warning",
                    &DensityEstimate::truncated_scan_warning);
  m.def("estimate_density", &estimate_density, py::arg("plus"), py::arg("minus"),
        py::arg("scheme"), py::arg("widths"), py::arg("wing_correction") = true);
  m.def("isotropic_q_factor", &isotropic_q_factor, py::arg("scheme"));

  py::class_<PseudoinverseResult>(m, "PseudoinverseResult")
      .def_readonly("p", &PseudoinverseResult::p)
      .def_readonly("residual_norm", &PseudoinverseResult::residual_norm)
      .def_readonly("singular_values", &PseudoinverseResult::singular_values)
      .def_readonly("rank", &PseudoinverseResult::rank);
  m.def("solve_pseudoinverse", &solve_pseudoinverse, py::arg("coupling"),
        py::arg("alpha"), py::arg("sv_cutoff_rel") = 1e-10);

  py::class_<ConditioningReport>(m, "ConditioningReport")
      .def_readonly("singular_values", &ConditioningReport::singular_values)
      .def_readonly("rank", &ConditioningReport::rank)
      .def_readonly("near_zero_count", &ConditioningReport::near_zero_count)
      .def_readonly("regime", &ConditioningReport::regime);
  m.def("conditioning_report", &conditioning_report, py::arg("coupling"));

  py::class_<ReconstructOptions>(m, "ReconstructOptions")
      .def(py::init<>())
      .def_readwrite("fixed_widths", &ReconstructOptions::fixed_widths)
      .def_readwrite("full_pseudoinverse", &ReconstructOptions::full_pseudoinverse)
      .def_readwrite("sv_cutoff_rel", &ReconstructOptions::sv_cutoff_rel)
      .def_readwrite("wing_correction", &ReconstructOptions::wing_correction);

  py::class_<ReconstructionReport>(m, "ReconstructionReport")
      .def_readonly("populations", &ReconstructionReport::populations)
      .def_readonly("f1", &ReconstructionReport::f1)
      .def_readonly("f2_total", &ReconstructionReport::f2_total)
      .def_readonly("f2_estimate", &ReconstructionReport::f2_estimate)
      .def_readonly("n0_cm3", &ReconstructionReport::n0_cm3)
      .def_readonly("gamma_fwhm_hz", &ReconstructionReport::gamma_fwhm_hz)
      .def_readonly("sigma_fwhm_hz", &ReconstructionReport::sigma_fwhm_hz)
      .def_readonly("fit_residual_norm", &ReconstructionReport::fit_residual_norm)
      .def_readonly("population_sum_raw",
                    &ReconstructionReport::population_sum_raw)
      .def_readonly("singular_values", &ReconstructionReport::singular_values)
      .def_readonly("negative_population_warning",
                    &ReconstructionReport::negative_population_warning)
      .def_readonly("truncated_scan_warning",
                    &ReconstructionReport::truncated_scan_warning);

  m.def("reconstruct", &reconstruct, py::arg("plus"), py::arg("minus"),
        py::arg("scheme"), py::arg("options") = ReconstructOptions{});

  // calibration
  py::class_<RawTrace>(m, "RawTrace")
      .def(py::init<>())
      .def_readwrite("samples", &RawTrace::samples)
      .def_readwrite("channel", &RawTrace::channel);

  py::class_<ReferenceLine>(m, "ReferenceLine")
      .def(py::init<>())
      .def_readwrite("name", &ReferenceLine::name)
      .def_readwrite("frequency_hz", &ReferenceLine::frequency_hz)
      .def_readwrite("crossover", &ReferenceLine::crossover);
  m.def("sas_reference_lines", &sas_reference_lines, py::arg("scheme"),
        py::arg("include_crossovers") = false);
  m.def("load_reference_lines", &load_reference_lines, py::arg("path"),
        py::arg("include_crossovers") = false);

  py::class_<FpPeaks>(m, "FpPeaks")
      .def_readonly("centers", &FpPeaks::centers)
      .def_readonly("periodic_warning", &FpPeaks::periodic_warning);
  m.def("detect_fp_peaks", &detect_fp_peaks, py::arg("fp"));

  py::class_<Anchor>(m, "Anchor")
      .def_readonly("sample_index", &Anchor::sample_index)
      .def_readonly("frequency_hz", &Anchor::frequency_hz)
      .def_readonly("name", &Anchor::name);
  m.def("detect_sas_anchors", &detect_sas_anchors, py::arg("sas"),
        py::arg("table"));

  py::class_<FrequencyMap>(m, "FrequencyMap")
      .def(py::init<>())
      .def_readwrite("coefficients", &FrequencyMap::coefficients)
      .def_readwrite("x_offset", &FrequencyMap::x_offset)
      .def_readwrite("x_scale", &FrequencyMap::x_scale)
      .def_readwrite("fsr_hz", &FrequencyMap::fsr_hz)
      .def_readonly("anchor_residuals_hz", &FrequencyMap::anchor_residuals_hz)
      .def_readonly("anchor_rms_hz", &FrequencyMap::anchor_rms_hz)
      .def_readonly("contradictory_anchors", &FrequencyMap::contradictory_anchors)
      .def_readwrite("domain_lo", &FrequencyMap::domain_lo)
      .def_readwrite("domain_hi", &FrequencyMap::domain_hi)
      .def("__call__", &FrequencyMap::operator(), py::arg("sample_index"))
      .def("monotone", &FrequencyMap::monotone);
  m.def("fit_frequency_axis", &fit_frequency_axis, py::arg("peaks"),
        py::arg("anchors"), py::arg("degree") = 3);
  m.def("apply_map", &apply_map, py::arg("map"), py::arg("probe"),
        py::arg("path_cm"), py::arg("q"));

  // pump simulator
  py::class_<Sideband>(m, "Sideband")
      .def(py::init<double, double>(), py::arg("offset_hz"),
           py::arg("amplitude") = 1.0)
      .def_readwrite("offset_hz", &Sideband::offset_hz)
      .def_readwrite("amplitude", &Sideband::amplitude);

  py::class_<PumpField>(m, "PumpField")
      .def(py::init<>())
      .def_readwrite("carrier_detuning_hz", &PumpField::carrier_detuning_hz)
      .def_readwrite("q", &PumpField::q)
      .def_readwrite("intensity_uW_mm2", &PumpField::intensity_uW_mm2)
      .def_readwrite("components", &PumpField::components);

  py::class_<EnsembleConfig>(m, "EnsembleConfig")
      .def(py::init<>())
      .def_readwrite("scheme", &EnsembleConfig::scheme)
      .def_readwrite("velocity_groups", &EnsembleConfig::velocity_groups)
      .def_readwrite("doppler_fwhm_hz", &EnsembleConfig::doppler_fwhm_hz)
      .def_readwrite("homogeneous_fwhm_hz", &EnsembleConfig::homogeneous_fwhm_hz)
      .def_readwrite("excited_decay_rate", &EnsembleConfig::excited_decay_rate)
      .def_readwrite("equilibration_rate", &EnsembleConfig::equilibration_rate)
      .def_readwrite("include_nonresonant", &EnsembleConfig::include_nonresonant)
      .def_readwrite("nonresonant_cutoff_hz",
                     &EnsembleConfig::nonresonant_cutoff_hz)
      .def_readwrite("temperature_c", &EnsembleConfig::temperature_c)
      .def_readwrite("buffer_gas", &EnsembleConfig::buffer_gas);

  py::class_<PumpCurve>(m, "PumpCurve")
      .def_readonly("intensities_uW_mm2", &PumpCurve::intensities_uW_mm2)
      .def_readonly("populations", &PumpCurve::populations);

  m.def("steady_state", &steady_state, py::arg("config"), py::arg("field"));
  m.def("sweep", &sweep, py::arg("config"), py::arg("field"),
        py::arg("intensity_grid"));
  m.def("log_intensity_grid", &log_intensity_grid, py::arg("lo"), py::arg("hi"),
        py::arg("points"));
  m.def("scenario_experiment1", &scenario_experiment1);
  m.def("scenario_experiment2", &scenario_experiment2);

  // io
  m.def("format_double", &format_double, py::arg("value"));
  py::class_<SpectrumFile>(m, "SpectrumFile")
      .def(py::init<>())
      .def_readwrite("spectrum", &SpectrumFile::spectrum)
      .def_readwrite("n0_cm3", &SpectrumFile::n0_cm3)
      .def_readwrite("gamma_fwhm_hz", &SpectrumFile::gamma_fwhm_hz)
      .def_readwrite("sigma_fwhm_hz", &SpectrumFile::sigma_fwhm_hz)
      .def_readwrite("path_cm", &SpectrumFile::path_cm)
      .def_readwrite("config_json", &SpectrumFile::config_json);
  m.def("write_spectrum_csv", &write_spectrum_csv, py::arg("file"),
        py::arg("path"));
  m.def("read_spectrum_csv", &read_spectrum_csv, py::arg("path"));
}
