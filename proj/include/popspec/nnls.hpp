#pragma once

// Lawson-Hanson active-set solver for min ||A x - b|| s.t. x >= 0.
// Ties in the gradient selection break toward the lowest column index,
// so under-determined problems always return the same representative.

#include <Eigen/Dense>

namespace popspec {

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                int max_iterations = 0 /* 0 -> 3*cols */);

}  // namespace popspec
