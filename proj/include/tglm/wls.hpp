#pragma once

#include <Eigen/Dense>

namespace tglm {

struct WlsProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd z;
  Eigen::VectorXd w;
};

struct WlsSolution {
  Eigen::VectorXd beta;
  Eigen::MatrixXd V;  // (X' W X)^-1, pseudo-inverse when rank deficient
  bool rank_ok = true;
};

/// Relative pivot threshold below which the scaled system is treated as
/// rank deficient.
inline constexpr double kWlsRankTolerance = 1e-12;

/// Minimizes sum_i w_i (z_i - X_i beta)^2 through a column-pivoted QR of the
/// sqrt(w)-scaled system. Throws on non-positive or non-finite weights.
WlsSolution solve_wls(const WlsProblem& problem);

}  // namespace tglm
