#include "popspec/nnls.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace popspec {

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                int max_iterations) {
  if (a.rows() != b.size())
    throw std::invalid_argument("nnls: matrix rows must match rhs length");
  if (a.cols() == 0 || a.rows() == 0)
    throw std::invalid_argument("nnls: empty problem");
  const Eigen::Index n = a.cols();
  if (max_iterations <= 0) max_iterations = 3 * (int)n + 30;

  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);

  const double tol = 1e-12 * a.cwiseAbs().maxCoeff() * b.size();

  auto solve_passive = [&](const std::vector<bool>& set) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (set[j]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), (Eigen::Index)idx.size());
    for (size_t k = 0; k < idx.size(); ++k) ap.col((Eigen::Index)k) = a.col(idx[k]);
    Eigen::VectorXd zp = ap.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zp[(Eigen::Index)k];
    return z;
  };

  int it = 0;
  while (it < max_iterations) {
    Eigen::VectorXd w = a.transpose() * (b - a * res.x);
    // pick the most violated zero-bound variable; strict > keeps the
    // lowest index on ties
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w[j] > best_w) { best_w = w[j]; best = j; }
    if (best < 0) break;  // KKT satisfied
    passive[best] = true;

    while (true) {
      ++it;
      Eigen::VectorXd z = solve_passive(passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0) { feasible = false; break; }
      if (feasible) { res.x = z; break; }

      // step back to the boundary and drop newly-zero variables
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0)
          alpha = std::min(alpha, res.x[j] / (res.x[j] - z[j]));
      res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j] && res.x[j] <= tol) { res.x[j] = 0.0; passive[j] = false; }
      if (it >= max_iterations) break;
    }
  }

  res.iterations = it;
  res.converged = it < max_iterations;
  res.residual_norm = (a * res.x - b).norm();
  return res;
}

}  // namespace popspec
