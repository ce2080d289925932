#include "popspec/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace popspec {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  // shortest representation that parses back to the same double
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

std::string encode_config(const std::string& config_json) {
  // single-line JSON so it fits a CSV comment
  if (config_json.empty()) return "{}";
  return json::parse(config_json).dump();
}

std::map<std::string, std::string> parse_header(std::istream& in,
                                                std::string& config_json,
                                                std::string& schema) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (in.peek() == '#') {
    std::getline(in, line);
    std::string body = line.substr(1);
    size_t start = body.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    body = body.substr(start);
    if (body.rfind("config=", 0) == 0) {
      config_json = body.substr(7);
      continue;
    }
    if (schema.empty() && body.rfind("popspec-", 0) == 0) {
      schema = body;
      continue;
    }
    std::istringstream fields(body);
    std::string tok;
    while (fields >> tok) {
      size_t eq = tok.find('=');
      if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  return kv;
}

double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("malformed number: " + s);
  return v;
}

}  // namespace

void write_spectrum_csv(const SpectrumFile& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "# popspec-spectrum v1\n";
  out << "# q=" << (f.spectrum.q > 0 ? "+1" : "-1")
      << " n0_cm3=" << format_double(f.n0_cm3)
      << " gamma_fwhm_hz=" << format_double(f.gamma_fwhm_hz)
      << " sigma_fwhm_hz=" << format_double(f.sigma_fwhm_hz)
      << " path_cm=" << format_double(f.path_cm) << "\n";
  out << "# config=" << encode_config(f.config_json) << "\n";
  out << "frequency_hz,alpha_per_cm\n";
  for (size_t i = 0; i < f.spectrum.axis_hz.size(); ++i)
    out << format_double(f.spectrum.axis_hz[i]) << ","
        << format_double(f.spectrum.alpha_per_cm[i]) << "\n";
}

SpectrumFile read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  SpectrumFile f;
  std::string schema;
  auto kv = parse_header(in, f.config_json, schema);
  if (schema.rfind("popspec-spectrum", 0) != 0)
    throw std::invalid_argument(path + ": not a popspec spectrum file");
  f.spectrum.q = kv.count("q") ? (int)to_double(kv["q"]) : +1;
  if (kv.count("n0_cm3")) f.n0_cm3 = to_double(kv["n0_cm3"]);
  if (kv.count("gamma_fwhm_hz")) f.gamma_fwhm_hz = to_double(kv["gamma_fwhm_hz"]);
  if (kv.count("sigma_fwhm_hz")) f.sigma_fwhm_hz = to_double(kv["sigma_fwhm_hz"]);
  if (kv.count("path_cm")) f.path_cm = to_double(kv["path_cm"]);

  std::string line;
  std::getline(in, line);  // column header
  if (line != "frequency_hz,alpha_per_cm")
    throw std::invalid_argument(path + ": unexpected column header: " + line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument(path + ": malformed row: " + line);
    f.spectrum.axis_hz.push_back(to_double(line.substr(0, comma)));
    f.spectrum.alpha_per_cm.push_back(to_double(line.substr(comma + 1)));
  }
  if (f.spectrum.axis_hz.empty())
    throw std::invalid_argument(path + ": no samples");
  return f;
}

void write_raw_bundle_csv(const RawBundle& b, const std::string& path) {
  if (b.probe.samples.size() != b.fp.samples.size() ||
      b.probe.samples.size() != b.sas.samples.size())
    throw std::invalid_argument("raw bundle channels differ in length");
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "# popspec-rawbundle v1\n";
  out << "# path_cm=" << format_double(b.path_cm) << "\n";
  out << "# config=" << encode_config(b.config_json) << "\n";
  out << "index,probe,fp,sas\n";
  for (size_t i = 0; i < b.probe.samples.size(); ++i)
    out << i << "," << format_double(b.probe.samples[i]) << ","
        << format_double(b.fp.samples[i]) << ","
        << format_double(b.sas.samples[i]) << "\n";
}

RawBundle read_raw_bundle_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  RawBundle b;
  b.probe.channel = "probe";
  b.fp.channel = "fp";
  b.sas.channel = "sas";
  std::string schema;
  auto kv = parse_header(in, b.config_json, schema);
  if (schema.rfind("popspec-rawbundle", 0) != 0)
    throw std::invalid_argument(path + ": not a popspec raw bundle");
  if (kv.count("path_cm")) b.path_cm = to_double(kv["path_cm"]);
  std::string line;
  std::getline(in, line);
  if (line != "index,probe,fp,sas")
    throw std::invalid_argument(path + ": unexpected column header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4)
      throw std::invalid_argument(path + ": malformed row: " + line);
    b.probe.samples.push_back(to_double(cells[1]));
    b.fp.samples.push_back(to_double(cells[2]));
    b.sas.samples.push_back(to_double(cells[3]));
  }
  return b;
}

void write_frequency_map_json(const FrequencyMap& map,
                              const std::string& config_json,
                              const std::string& path) {
  json j;
  j["schema"] = "popspec-frequency-map-v1";
  j["coefficients"] = map.coefficients;
  j["x_offset"] = map.x_offset;
  j["x_scale"] = map.x_scale;
  j["fsr_hz"] = map.fsr_hz;
  j["anchor_residuals_hz"] = map.anchor_residuals_hz;
  j["anchor_rms_hz"] = map.anchor_rms_hz;
  j["contradictory_anchors"] = map.contradictory_anchors;
  j["domain"] = {map.domain_lo, map.domain_hi};
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

FrequencyMap read_frequency_map_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j = json::parse(in);
  if (j.value("schema", "") != "popspec-frequency-map-v1")
    throw std::invalid_argument(path + ": not a popspec frequency map");
  FrequencyMap map;
  map.coefficients = j.at("coefficients").get<std::vector<double>>();
  map.x_offset = j.at("x_offset").get<double>();
  map.x_scale = j.at("x_scale").get<double>();
  map.fsr_hz = j.at("fsr_hz").get<double>();
  map.anchor_residuals_hz =
      j.at("anchor_residuals_hz").get<std::vector<double>>();
  map.anchor_rms_hz = j.at("anchor_rms_hz").get<double>();
  map.contradictory_anchors = j.value("contradictory_anchors", false);
  map.domain_lo = j.at("domain")[0].get<double>();
  map.domain_hi = j.at("domain")[1].get<double>();
  return map;
}

void write_report_json(const ReconstructionReport& rep,
                       const std::string& config_json, const std::string& path) {
  json j;
  j["schema"] = "popspec-report-v1";
  j["populations"] = rep.populations.p;
  j["f1_detail"] = {rep.f1[0], rep.f1[1], rep.f1[2]};
  j["f2_total"] = rep.f2_total;
  j["f2_estimate"] = {
      {"populations", std::vector<double>(rep.f2_estimate.populations.data(),
                                          rep.f2_estimate.populations.data() +
                                              rep.f2_estimate.populations.size())},
      {"reliable", rep.f2_estimate.reliable},
      {"null_space_dim", rep.f2_estimate.null_space_dim},
      {"residual_norm", rep.f2_estimate.residual_norm}};
  j["n0_cm3"] = rep.n0_cm3;
  j["gamma_fwhm_hz"] = rep.gamma_fwhm_hz;
  j["sigma_fwhm_hz"] = rep.sigma_fwhm_hz;
  j["fit_residual_norm"] = rep.fit_residual_norm;
  j["population_sum_raw"] = rep.population_sum_raw;
  j["singular_values"] = rep.singular_values;
  j["flags"] = {{"negative_population_warning", rep.negative_population_warning},
                {"truncated_scan_warning", rep.truncated_scan_warning}};
  j["config"] = config_json.empty() ? json::object() : json::parse(config_json);
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_pump_curve_csv(const PumpCurve& curve, const std::string& config_json,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "# popspec-pumpcurve v1\n";
  out << "# config=" << encode_config(config_json) << "\n";
  out << "intensity_uW_mm2";
  size_t m = curve.populations.empty() ? 0 : curve.populations[0].p.size();
  for (size_t i = 0; i < m; ++i) out << ",p" << i;
  out << "\n";
  for (size_t row = 0; row < curve.intensities_uW_mm2.size(); ++row) {
    out << format_double(curve.intensities_uW_mm2[row]);
    for (double v : curve.populations[row].p) out << "," << format_double(v);
    out << "\n";
  }
}

}  // namespace popspec
