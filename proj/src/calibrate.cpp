#include "popspec/calibrate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

namespace popspec {

namespace {

// strict local maxima of the linearly detrended trace above a relative
// prominence threshold, refined by a three-point parabola
std::vector<double> find_peak_centers(const std::vector<double>& y,
                                      double rel_threshold) {
  const size_t n = y.size();
  // linear detrend
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += (double)i; sy += y[i];
    sxx += (double)i * (double)i; sxy += (double)i * y[i];
  }
  double denom = n * sxx - sx * sx;
  double slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
  double inter = (sy - slope * sx) / n;
  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) d[i] = y[i] - (inter + slope * i);

  double lo = *std::min_element(d.begin(), d.end());
  double hi = *std::max_element(d.begin(), d.end());
  double thr = lo + rel_threshold * (hi - lo);

  std::vector<double> centers;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!(d[i] > thr)) continue;
    if (!(d[i] >= d[i - 1] && d[i] > d[i + 1])) continue;
    double curv = d[i - 1] - 2.0 * d[i] + d[i + 1];
    double delta = curv != 0 ? 0.5 * (d[i - 1] - d[i + 1]) / curv : 0.0;
    delta = std::clamp(delta, -0.5, 0.5);
    centers.push_back((double)i + delta);
  }
  return centers;
}

double polyval(const std::vector<double>& c, double u) {
  double acc = 0.0;
  for (size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
  return acc;
}

}  // namespace

void RawTrace::validate() const {
  if (samples.size() < 16)
    throw std::invalid_argument("raw trace needs at least 16 samples");
  for (double v : samples)
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite sample in raw trace");
}

std::vector<ReferenceLine> sas_reference_lines(const LevelScheme& scheme,
                                               bool include_crossovers) {
  std::vector<ReferenceLine> out;
  for (const auto& [two_f, _] : scheme.ground_levels) {
    std::vector<ReferenceLine> manifold;
    for (const auto& [two_fp, __] : scheme.excited_levels) {
      if (std::abs(two_f - two_fp) > 2) continue;
      ReferenceLine l;
      l.name = "F" + std::to_string(two_f / 2) + "-Fp" + std::to_string(two_fp / 2);
      l.frequency_hz = scheme.line_center_hz(two_f, two_fp);
      manifold.push_back(l);
    }
    if (include_crossovers) {
      const size_t n_main = manifold.size();
      for (size_t i = 0; i < n_main; ++i)
        for (size_t j = i + 1; j < n_main; ++j) {
          ReferenceLine co;
          co.name = "co:" + manifold[i].name + "/" + manifold[j].name;
          co.frequency_hz =
              0.5 * (manifold[i].frequency_hz + manifold[j].frequency_hz);
          co.crossover = true;
          manifold.push_back(co);
        }
    }
    out.insert(out.end(), manifold.begin(), manifold.end());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.frequency_hz < b.frequency_hz;
  });
  return out;
}

std::vector<ReferenceLine> load_reference_lines(const std::string& path,
                                                bool include_crossovers) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open reference line table: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<ReferenceLine> out;
  for (const auto& e : j.at("lines")) {
    ReferenceLine l;
    l.name = e.at("name").get<std::string>();
    l.frequency_hz = e.at("frequency_hz").get<double>();
    l.crossover = e.value("crossover", false);
    if (l.crossover && !include_crossovers) continue;
    out.push_back(l);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.frequency_hz < b.frequency_hz;
  });
  return out;
}

double FrequencyMap::operator()(double sample_index) const {
  return polyval(coefficients, (sample_index - x_offset) / x_scale);
}

bool FrequencyMap::monotone() const {
  const int n = 1024;
  double prev = (*this)(domain_lo);
  for (int i = 1; i <= n; ++i) {
    double s = domain_lo + (domain_hi - domain_lo) * i / n;
    double v = (*this)(s);
    if (!(v > prev)) return false;
    prev = v;
  }
  return true;
}

FpPeaks detect_fp_peaks(const RawTrace& fp) {
  fp.validate();
  FpPeaks out;
  out.centers = find_peak_centers(fp.samples, 0.4);
  if (out.centers.size() < 3)
    throw std::runtime_error("too few Fabry-Perot fringes in scan (need >= 3)");

  // fringe centers vs fringe number should follow a smooth chirp; flag
  // large residuals of a quadratic model
  const size_t n = out.centers.size();
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (size_t i = 0; i < n; ++i) {
    double k = (double)i;
    a((Eigen::Index)i, 0) = 1.0;
    a((Eigen::Index)i, 1) = k;
    a((Eigen::Index)i, 2) = k * k;
    b[(Eigen::Index)i] = out.centers[i];
  }
  Eigen::VectorXd fitres = a * a.colPivHouseholderQr().solve(b) - b;
  double spacing = (out.centers.back() - out.centers.front()) / (double)(n - 1);
  out.periodic_warning = fitres.norm() / std::sqrt((double)n) > 0.05 * spacing;
  return out;
}

std::vector<Anchor> detect_sas_anchors(const RawTrace& sas,
                                       const std::vector<ReferenceLine>& table) {
  sas.validate();
  std::vector<double> centers = find_peak_centers(sas.samples, 0.3);
  if (centers.size() < 2)
    throw std::runtime_error(
        "need at least 2 identifiable reference features in the SAS trace");
  const size_t k = centers.size();
  const size_t n = table.size();
  if (k > n)
    throw std::runtime_error("more SAS features detected than reference lines");

  auto assignment = [&](const std::vector<size_t>& idx) {
    std::vector<Anchor> a;
    for (size_t i = 0; i < k; ++i)
      a.push_back({centers[i], table[idx[i]].frequency_hz, table[idx[i]].name});
    return a;
  };

  if (k == n) {
    std::vector<size_t> idx(k);
    for (size_t i = 0; i < k; ++i) idx[i] = i;
    return assignment(idx);
  }
  if (k == 2)
    throw std::runtime_error(
        "ambiguous anchor assignment: 2 features cannot be matched to " +
        std::to_string(n) + " reference lines by spacing ratios");

  // match ordered features to an ordered subset of the table by comparing
  // normalized spacings (tolerance 10%)
  double span_s = centers.back() - centers.front();
  std::vector<double> ratio_s(k - 1);
  for (size_t i = 0; i + 1 < k; ++i)
    ratio_s[i] = (centers[i + 1] - centers[i]) / span_s;

  struct Candidate { std::vector<size_t> idx; double score; };
  std::vector<Candidate> ok;
  std::vector<size_t> idx(k);
  std::function<void(size_t, size_t)> choose = [&](size_t pos, size_t start) {
    if (pos == k) {
      double span_t = table[idx[k - 1]].frequency_hz - table[idx[0]].frequency_hz;
      if (!(span_t > 0)) return;
      double worst = 0.0;
      for (size_t i = 0; i + 1 < k; ++i) {
        double rt = (table[idx[i + 1]].frequency_hz - table[idx[i]].frequency_hz) /
                    span_t;
        worst = std::max(worst, std::abs(rt - ratio_s[i]));
      }
      if (worst < 0.10) ok.push_back({idx, worst});
      return;
    }
    for (size_t j = start; j < n; ++j) { idx[pos] = j; choose(pos + 1, j + 1); }
  };
  choose(0, 0);

  if (ok.empty())
    throw std::runtime_error(
        "no anchor assignment matches the reference table within tolerance");
  std::sort(ok.begin(), ok.end(),
            [](const auto& a, const auto& b) { return a.score < b.score; });
  if (ok.size() > 1 && ok[1].score < 2.0 * ok[0].score && ok[1].score < 0.10) {
    std::string msg = "ambiguous anchor assignment, candidates:";
    for (size_t c = 0; c < std::min<size_t>(ok.size(), 4); ++c) {
      msg += " [";
      for (size_t i = 0; i < k; ++i)
        msg += (i ? "," : "") + table[ok[c].idx[i]].name;
      msg += "]";
    }
    throw std::runtime_error(msg);
  }
  return assignment(ok[0].idx);
}

FrequencyMap fit_frequency_axis(const FpPeaks& peaks,
                                const std::vector<Anchor>& anchors,
                                int degree) {
  if (degree < 1 || degree > 8)
    throw std::invalid_argument("polynomial degree out of range");
  if (anchors.size() < 2)
    throw std::invalid_argument("frequency fit needs at least 2 anchors");
  const size_t np = peaks.centers.size();
  const size_t na = anchors.size();
  const size_t ncoef = (size_t)degree + 1;
  if (np + na < ncoef + 2)
    throw std::invalid_argument("not enough peaks+anchors for the fit degree");

  double lo = peaks.centers.front(), hi = peaks.centers.back();
  for (const Anchor& a : anchors) {
    lo = std::min(lo, a.sample_index);
    hi = std::max(hi, a.sample_index);
  }
  double x0 = 0.5 * (lo + hi);
  double xs = std::max(1.0, 0.5 * (hi - lo));

  // unknowns: ncoef polynomial coefficients, nu0, fsr.
  // peaks: p(u_i) - nu0 - i*fsr = 0; anchors: p(u_j) = f_j
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(np + na, ncoef + 2);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(np + na);
  for (size_t i = 0; i < np; ++i) {
    double u = (peaks.centers[i] - x0) / xs, p = 1.0;
    for (size_t d = 0; d < ncoef; ++d) { a((Eigen::Index)i, (Eigen::Index)d) = p; p *= u; }
    a((Eigen::Index)i, (Eigen::Index)ncoef) = -1.0;
    a((Eigen::Index)i, (Eigen::Index)(ncoef + 1)) = -(double)i;
  }
  for (size_t j = 0; j < na; ++j) {
    double u = (anchors[j].sample_index - x0) / xs, p = 1.0;
    Eigen::Index r = (Eigen::Index)(np + j);
    for (size_t d = 0; d < ncoef; ++d) { a(r, (Eigen::Index)d) = p; p *= u; }
    b[r] = anchors[j].frequency_hz;
  }

  Eigen::VectorXd sol = a.colPivHouseholderQr().solve(b);

  FrequencyMap map;
  map.coefficients.assign(sol.data(), sol.data() + ncoef);
  map.x_offset = x0;
  map.x_scale = xs;
  map.fsr_hz = sol[(Eigen::Index)(ncoef + 1)];
  map.domain_lo = lo;
  map.domain_hi = hi;
  double rss = 0.0;
  for (const Anchor& an : anchors) {
    double r = map(an.sample_index) - an.frequency_hz;
    map.anchor_residuals_hz.push_back(r);
    rss += r * r;
  }
  map.anchor_rms_hz = std::sqrt(rss / (double)na);
  map.contradictory_anchors = map.anchor_rms_hz > 0.5 * std::abs(map.fsr_hz);

  if (!map.monotone()) {
    if (map.contradictory_anchors)
      throw std::runtime_error(
          "frequency map not monotone; anchor residual RMS " +
          std::to_string(map.anchor_rms_hz) + " Hz suggests a wrong line table");
    throw std::runtime_error("fitted frequency map is not monotone over the scan");
  }
  return map;
}

Spectrum apply_map(const FrequencyMap& map, const RawTrace& probe,
                   double path_cm, int q) {
  probe.validate();
  if (!map.monotone())
    throw std::invalid_argument("frequency map must be monotone");
  if (!(path_cm > 0)) throw std::invalid_argument("path length must be positive");

  const size_t n = probe.samples.size();
  size_t wing = std::max<size_t>(1, n / 20);  // outermost 5%
  double i0 = 0.0;
  for (size_t i = 0; i < wing; ++i) i0 += probe.samples[i] + probe.samples[n - 1 - i];
  i0 /= 2.0 * (double)wing;
  if (!(i0 > 0)) throw std::runtime_error("baseline transmission is not positive");

  std::vector<double> freq(n), alpha(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(probe.samples[i] > 0))
      throw std::runtime_error("non-positive transmission sample at index " +
                               std::to_string(i));
    freq[i] = map((double)i);
    alpha[i] = -std::log(probe.samples[i] / i0) / path_cm;
  }

  // resample onto a uniform grid spanning the calibrated scan
  Spectrum out;
  out.q = q;
  out.axis_hz.resize(n);
  out.alpha_per_cm.resize(n);
  double flo = freq.front(), fhi = freq.back();
  size_t j = 0;
  for (size_t i = 0; i < n; ++i) {
    double f = flo + (fhi - flo) * (double)i / (double)(n - 1);
    while (j + 2 < n && freq[j + 1] < f) ++j;
    double t = (f - freq[j]) / (freq[j + 1] - freq[j]);
    out.axis_hz[i] = f;
    out.alpha_per_cm[i] = alpha[j] + t * (alpha[j + 1] - alpha[j]);
  }
  return out;
}

}  // namespace popspec
