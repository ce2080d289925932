#include "popspec/reconstruct.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace popspec {

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return acc;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// line centers (F,F') of a two-manifold scheme, with the variable layout
// used by fit_xi: per spectrum, one xi per (F,F') pair
struct XiLayout {
  std::vector<std::pair<int, int>> pairs;  // (two_f, two_fp)
  std::vector<double> centers;

  explicit XiLayout(const LevelScheme& scheme) {
    for (const auto& [two_f, _] : scheme.ground_levels)
      for (const auto& [two_fp, __] : scheme.excited_levels) {
        pairs.emplace_back(two_f, two_fp);
        centers.push_back(scheme.line_center_hz(two_f, two_fp));
      }
  }
};

Eigen::MatrixXd xi_design(const std::vector<Spectrum>& spectra,
                          const XiLayout& layout, double gamma, double sigma) {
  size_t rows = 0;
  for (const auto& s : spectra) rows += s.axis_hz.size();
  size_t nb = layout.pairs.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero((Eigen::Index)rows,
                                            (Eigen::Index)(nb * spectra.size()));
  Eigen::Index r0 = 0;
  for (size_t si = 0; si < spectra.size(); ++si) {
    for (size_t k = 0; k < nb; ++k) {
      VoigtParams vp{gamma, sigma, layout.centers[k]};
      for (size_t i = 0; i < spectra[si].axis_hz.size(); ++i)
        a(r0 + (Eigen::Index)i, (Eigen::Index)(si * nb + k)) =
            voigt(spectra[si].axis_hz[i], vp);
    }
    r0 += (Eigen::Index)spectra[si].axis_hz.size();
  }
  return a;
}

// two-parameter Nelder-Mead on the log widths
std::pair<Eigen::Vector2d, double> nelder_mead_2d(
    const std::function<double(const Eigen::Vector2d&)>& f,
    Eigen::Vector2d start, int max_iter) {
  std::array<Eigen::Vector2d, 3> v{start,
                                   start + Eigen::Vector2d(0.3, 0.0),
                                   start + Eigen::Vector2d(0.0, 0.3)};
  std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> ord{0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    int lo = ord[0], mid = ord[1], hi = ord[2];
    if (std::abs(fv[hi] - fv[lo]) <= 1e-15 * (std::abs(fv[lo]) + 1e-300) &&
        (v[hi] - v[lo]).norm() < 1e-12)
      break;
    Eigen::Vector2d centroid = 0.5 * (v[lo] + v[mid]);
    Eigen::Vector2d refl = centroid + (centroid - v[hi]);
    double fr = f(refl);
    if (fr < fv[lo]) {
      Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - v[hi]);
      double fe = f(exp_pt);
      if (fe < fr) { v[hi] = exp_pt; fv[hi] = fe; }
      else { v[hi] = refl; fv[hi] = fr; }
    } else if (fr < fv[mid]) {
      v[hi] = refl; fv[hi] = fr;
    } else {
      Eigen::Vector2d contr = centroid + 0.5 * (v[hi] - centroid);
      double fc = f(contr);
      if (fc < fv[hi]) { v[hi] = contr; fv[hi] = fc; }
      else {
        v[mid] = v[lo] + 0.5 * (v[mid] - v[lo]); fv[mid] = f(v[mid]);
        v[hi] = v[lo] + 0.5 * (v[hi] - v[lo]); fv[hi] = f(v[hi]);
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (fv[i] < fv[best]) best = i;
  return {v[best], fv[best]};
}

}  // namespace

PseudoinverseResult solve_pseudoinverse(const CouplingMatrix& c,
                                        const Eigen::VectorXd& alpha,
                                        double sv_cutoff_rel) {
  if (c.c.rows() != alpha.size())
    throw std::invalid_argument("coupling matrix / sample count mismatch");
  if (c.c.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("all-zero coupling matrix");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(c.c,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  PseudoinverseResult res;
  res.singular_values = svd.singularValues();
  double cutoff = sv_cutoff_rel * res.singular_values[0];
  Eigen::VectorXd inv_sv = res.singular_values;
  res.rank = 0;
  for (Eigen::Index i = 0; i < inv_sv.size(); ++i) {
    if (inv_sv[i] > cutoff) { inv_sv[i] = 1.0 / inv_sv[i]; ++res.rank; }
    else inv_sv[i] = 0.0;
  }
  res.p = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose() * alpha;
  res.residual_norm = (c.c * res.p - alpha).norm();
  return res;
}

double XiFitResult::get(int two_f, int two_fp, int q) const {
  for (const XiValue& v : xi)
    if (v.two_f == two_f && v.two_fp == two_fp && v.q == q) return v.value;
  throw std::out_of_range("xi value not present in fit result");
}

XiFitResult fit_xi(const std::vector<Spectrum>& spectra,
                   const LevelScheme& scheme, const XiFitOptions& opt) {
  if (spectra.empty()) throw std::invalid_argument("no spectra to fit");
  size_t rows = 0;
  double peak = 0.0, lo = 0.0, hi = 0.0;
  for (const auto& s : spectra) {
    if (s.axis_hz.size() < 8)
      throw std::invalid_argument("spectrum too short for a xi fit");
    rows += s.axis_hz.size();
    for (double a : s.alpha_per_cm) peak = std::max(peak, std::abs(a));
    lo = std::min(lo, s.axis_hz.front());
    hi = std::max(hi, s.axis_hz.back());
  }
  if (peak == 0.0) throw std::runtime_error("degenerate fit: spectrum is zero");

  XiLayout layout(scheme);
  Eigen::VectorXd b((Eigen::Index)rows);
  Eigen::Index r0 = 0;
  for (const auto& s : spectra) {
    for (size_t i = 0; i < s.alpha_per_cm.size(); ++i)
      b[r0 + (Eigen::Index)i] = s.alpha_per_cm[i];
    r0 += (Eigen::Index)s.alpha_per_cm.size();
  }

  auto linear_solve = [&](double gamma, double sigma) {
    Eigen::MatrixXd a = xi_design(spectra, layout, gamma, sigma);
    NnlsResult n = nnls(a, b);
    return std::make_pair(std::move(a), std::move(n));
  };

  double gamma, sigma;
  int iterations = 0;
  if (opt.fixed_widths) {
    gamma = opt.fixed_widths->gamma_fwhm_hz;
    sigma = opt.fixed_widths->sigma_fwhm_hz;
  } else {
    auto objective = [&](const Eigen::Vector2d& logw) {
      auto [a, n] = linear_solve(std::exp(logw[0]), std::exp(logw[1]));
      return n.residual_norm * n.residual_norm;
    };
    double w0 = (hi - lo) / 40.0;
    Eigen::Vector2d best_w;
    double best_f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < std::max(1, opt.multistart); ++s) {
      double factor = std::pow(10.0, s - opt.multistart / 2);
      Eigen::Vector2d start(std::log(w0 * factor), std::log(w0 * factor));
      auto [w, fval] = nelder_mead_2d(objective, start,
                                      opt.max_iterations);
      iterations += opt.max_iterations;
      if (fval < best_f) { best_f = fval; best_w = w; }
    }
    // Gauss-Newton polish on the variable-projection residual; finite
    // differences on the two log widths
    Eigen::Vector2d theta = best_w;
    for (int it = 0; it < 40; ++it) {
      auto rvec = [&](const Eigen::Vector2d& t) -> Eigen::VectorXd {
        auto [a, n] = linear_solve(std::exp(t[0]), std::exp(t[1]));
        return a * n.x - b;
      };
      Eigen::VectorXd r = rvec(theta);
      const double h = 1e-6;
      Eigen::MatrixXd jac(r.size(), 2);
      for (int k = 0; k < 2; ++k) {
        Eigen::Vector2d tp = theta, tm = theta;
        tp[k] += h; tm[k] -= h;
        jac.col(k) = (rvec(tp) - rvec(tm)) / (2.0 * h);
      }
      Eigen::Vector2d step =
          (jac.transpose() * jac).ldlt().solve(-jac.transpose() * r);
      if (!step.allFinite()) break;
      // backtrack if the full step does not improve
      double f0 = r.squaredNorm();
      double scale_step = 1.0;
      Eigen::Vector2d next = theta + step;
      while (scale_step > 1e-4) {
        auto [a2, n2] = linear_solve(std::exp(next[0]), std::exp(next[1]));
        if (n2.residual_norm * n2.residual_norm <= f0) break;
        scale_step *= 0.5;
        next = theta + scale_step * step;
      }
      theta = next;
      ++iterations;
      if (step.norm() * scale_step < 1e-13) break;
    }
    gamma = std::exp(theta[0]);
    sigma = std::exp(theta[1]);
  }

  auto [a, n] = linear_solve(gamma, sigma);
  double xi_peak = n.x.cwiseAbs().maxCoeff();
  if (xi_peak <= 0.0)
    throw std::runtime_error("degenerate fit: all xi coefficients are zero");

  // standard errors from the linear subproblem
  Eigen::Index m = a.rows(), k = a.cols();
  double dof = std::max<double>(1.0, (double)(m - k - (opt.fixed_widths ? 0 : 2)));
  double s2 = n.residual_norm * n.residual_norm / dof;
  Eigen::MatrixXd ata_inv =
      (a.transpose() * a)
          .ldlt()
          .solve(Eigen::MatrixXd::Identity(k, k));

  XiFitResult res;
  res.gamma_fwhm_hz = gamma;
  res.sigma_fwhm_hz = sigma;
  res.residual_norm = n.residual_norm;
  res.iterations = iterations;
  for (size_t si = 0; si < spectra.size(); ++si)
    for (size_t kk = 0; kk < layout.pairs.size(); ++kk) {
      Eigen::Index col = (Eigen::Index)(si * layout.pairs.size() + kk);
      res.xi.push_back({layout.pairs[kk].first, layout.pairs[kk].second,
                        spectra[si].q, n.x[col],
                        std::sqrt(std::max(0.0, s2 * ata_inv(col, col)))});
    }
  return res;
}

Eigen::Matrix3d f1_inversion_matrix() {
  Eigen::Matrix3d m;
  m << 9, 3, -18,
       3, -3, 18,
      -3, 3, -6;
  return m;
}

Eigen::Vector3d invert_f1(double xi11_plus, double xi12_plus,
                          double xi11_minus) {
  return f1_inversion_matrix() *
         Eigen::Vector3d(xi11_plus, xi12_plus, xi11_minus);
}

F2Estimate estimate_f2_nnls(const Eigen::Vector4d& xi2,
                            const LevelScheme& scheme) {
  int two_f2 = scheme.ground_levels.rbegin()->first;
  Eigen::MatrixXd a = xi_coupling_matrix(two_f2, {+1, -1}, scheme);
  NnlsResult n = nnls(a, xi2);

  F2Estimate est;
  est.populations = n.x;
  est.residual_norm = n.residual_norm;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * svd.singularValues()[0]) ++rank;
  est.null_space_dim = (int)a.cols() - rank;
  double total = n.x.sum();
  if (total > 0) {
    double stretched = std::max(n.x[0], n.x[n.x.size() - 1]);
    est.reliable = stretched >= 0.9 * total;
  }
  return est;
}

double isotropic_q_factor(const LevelScheme& scheme) {
  GroundState g = scheme.ground_states().front();
  double q_factor = 0.0;
  for (const auto& [two_fp, _] : scheme.excited_levels)
    for (int q : {-1, +1})
      q_factor += squared_dipole(g, two_fp, q, scheme);
  return q_factor;
}

DensityEstimate estimate_density(const Spectrum& plus, const Spectrum& minus,
                                 const LevelScheme& scheme,
                                 const VoigtParams& widths,
                                 bool wing_correction) {
  if (plus.axis_hz.size() < 2 || minus.axis_hz.size() < 2)
    throw std::invalid_argument("density estimate needs sampled spectra");

  double total = trapezoid(plus.axis_hz, plus.alpha_per_cm) +
                 trapezoid(minus.axis_hz, minus.alpha_per_cm);

  double missing = 0.0;
  if (wing_correction) {
    XiLayout layout(scheme);
    // attribute integral mass to the nearest line center, then scale by
    // the analytic out-of-scan fraction of that line's profile
    for (const Spectrum* sp : {&plus, &minus}) {
      double lo = sp->axis_hz.front(), hi = sp->axis_hz.back();
      std::vector<double> mass(layout.centers.size(), 0.0);
      for (size_t i = 1; i < sp->axis_hz.size(); ++i) {
        double x = 0.5 * (sp->axis_hz[i] + sp->axis_hz[i - 1]);
        double seg = 0.5 * (sp->alpha_per_cm[i] + sp->alpha_per_cm[i - 1]) *
                     (sp->axis_hz[i] - sp->axis_hz[i - 1]);
        size_t best = 0;
        for (size_t k = 1; k < layout.centers.size(); ++k)
          if (std::abs(x - layout.centers[k]) < std::abs(x - layout.centers[best]))
            best = k;
        mass[best] += seg;
      }
      for (size_t k = 0; k < layout.centers.size(); ++k) {
        if (mass[k] <= 0.0) continue;
        VoigtParams vp = widths;
        vp.center_hz = layout.centers[k];
        double inside = integrate([&](double x) { return voigt(x, vp); }, lo,
                                  hi, 1e-10);
        inside = std::clamp(inside, 1e-6, 1.0);
        missing += mass[k] * (1.0 - inside) / inside;
      }
    }
  }

  DensityEstimate est;
  est.truncation_fraction = missing / std::max(total, 1e-300);
  est.truncated_scan_warning = est.truncation_fraction > 0.01;
  double q_factor = isotropic_q_factor(scheme);
  est.n0_cm3 = (total + missing) /
               (q_factor * absorption_scale_per_n0(scheme) * scheme.mu0 *
                scheme.mu0);
  return est;
}

ConditioningReport conditioning_report(const CouplingMatrix& c) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c.c);
  ConditioningReport rep;
  rep.singular_values = svd.singularValues();
  double smax = rep.singular_values[0];
  for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) {
    if (rep.singular_values[i] > 1e-10 * smax) ++rep.rank;
    if (rep.singular_values[i] < 1e-6 * smax) ++rep.near_zero_count;
  }
  double cond = rep.singular_values[0] /
                rep.singular_values[rep.singular_values.size() - 1];
  if (rep.near_zero_count >= 2) rep.regime = "degenerate";
  else if (rep.near_zero_count == 0 && cond < 1e3) rep.regime = "resolved";
  else rep.regime = "intermediate";
  return rep;
}

ReconstructionReport reconstruct(const Spectrum& plus, const Spectrum& minus,
                                 const LevelScheme& scheme,
                                 const ReconstructOptions& opt) {
  if (plus.q != +1 || minus.q != -1)
    throw std::invalid_argument(
        "reconstruction needs one sigma+ and one sigma- spectrum");

  ReconstructionReport rep;

  XiFitOptions fit_opt;
  fit_opt.fixed_widths = opt.fixed_widths;
  XiFitResult fit = fit_xi({plus, minus}, scheme, fit_opt);
  rep.gamma_fwhm_hz = fit.gamma_fwhm_hz;
  rep.sigma_fwhm_hz = fit.sigma_fwhm_hz;
  rep.fit_residual_norm = fit.residual_norm;

  VoigtParams widths{fit.gamma_fwhm_hz, fit.sigma_fwhm_hz, 0.0};
  DensityEstimate dens =
      estimate_density(plus, minus, scheme, widths, opt.wing_correction);
  rep.n0_cm3 = dens.n0_cm3;
  rep.truncated_scan_warning = dens.truncated_scan_warning;

  double scale = dens.n0_cm3 * absorption_scale_per_n0(scheme) * scheme.mu0 *
                 scheme.mu0;
  int two_f1 = scheme.ground_levels.begin()->first;
  int two_f2 = scheme.ground_levels.rbegin()->first;
  int two_fp1 = scheme.excited_levels.begin()->first;
  int two_fp2 = scheme.excited_levels.rbegin()->first;

  rep.f1 = invert_f1(fit.get(two_f1, two_fp1, +1) / scale,
                     fit.get(two_f1, two_fp2, +1) / scale,
                     fit.get(two_f1, two_fp1, -1) / scale);

  Eigen::Vector4d xi2(fit.get(two_f2, two_fp1, +1) / scale,
                      fit.get(two_f2, two_fp2, +1) / scale,
                      fit.get(two_f2, two_fp1, -1) / scale,
                      fit.get(two_f2, two_fp2, -1) / scale);
  rep.f2_total = xi2.sum() / isotropic_q_factor(scheme);
  rep.f2_estimate = estimate_f2_nnls(xi2, scheme);

  // populations sum to 1 by definition; renormalizing here cancels the
  // common scale error inherited from the density estimate
  double total_raw = rep.f1.sum() + rep.f2_total;
  if (total_raw > 0) {
    rep.f1 /= total_raw;
    rep.f2_total /= total_raw;
  }

  // conditioning of the reduced per-manifold maps
  {
    Eigen::MatrixXd a1 = xi_coupling_matrix(two_f1, {+1, -1}, scheme);
    Eigen::MatrixXd a2 = xi_coupling_matrix(two_f2, {+1, -1}, scheme);
    for (const Eigen::MatrixXd& m : {a1, a2}) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        rep.singular_values.push_back(svd.singularValues()[i]);
    }
  }

  std::vector<double> pops(scheme.ground_states().size(), 0.0);
  if (opt.full_pseudoinverse) {
    ProbeConfig cp{+1, plus.axis_hz, dens.n0_cm3, 1.0, widths};
    ProbeConfig cm{-1, minus.axis_hz, dens.n0_cm3, 1.0, widths};
    CouplingMatrix c = coupling_matrix(cp, cm, scheme);
    Eigen::VectorXd alpha(c.c.rows());
    Eigen::Index r = 0;
    for (double v : plus.alpha_per_cm) alpha[r++] = v;
    for (double v : minus.alpha_per_cm) alpha[r++] = v;
    PseudoinverseResult pr = solve_pseudoinverse(c, alpha, opt.sv_cutoff_rel);
    rep.singular_values.clear();
    for (Eigen::Index i = 0; i < pr.singular_values.size(); ++i)
      rep.singular_values.push_back(pr.singular_values[i]);
    for (size_t i = 0; i < pops.size(); ++i) pops[i] = pr.p[(Eigen::Index)i];
  } else {
    for (int i = 0; i < 3; ++i) pops[i] = rep.f1[i];
    double nnls_sum = rep.f2_estimate.populations.sum();
    for (int i = 0; i < 5; ++i)
      pops[3 + i] = nnls_sum > 0 ? rep.f2_estimate.populations[i] / nnls_sum *
                                       rep.f2_total
                                 : rep.f2_total / 5.0;
  }

  double raw_sum = 0.0;
  for (double v : pops) raw_sum += v;
  rep.population_sum_raw = raw_sum;
  for (double& v : pops) {
    if (v < -1e-6) rep.negative_population_warning = true;
    v = std::max(0.0, v);
  }
  double clipped_sum = 0.0;
  for (double v : pops) clipped_sum += v;
  if (clipped_sum <= 0.0)
    throw std::runtime_error("reconstruction produced no population mass");
  for (double& v : pops) v /= clipped_sum;
  rep.populations = {pops};
  return rep;
}

}  // namespace popspec
