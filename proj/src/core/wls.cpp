#include "tglm/wls.hpp"

#include "tglm/error.hpp"

#include <cmath>
#include <string>

namespace tglm {

WlsSolution solve_wls(const WlsProblem& problem) {
  const auto m = problem.X.rows();
  const auto J = problem.X.cols();
  if (problem.z.size() != m || problem.w.size() != m)
    throw Error(ErrorKind::invalid_argument, "weighted least squares: dimension mismatch");
  if (m < 1) throw Error(ErrorKind::invalid_argument, "weighted least squares: no rows");
  for (Eigen::Index i = 0; i < m; ++i) {
    const double w = problem.w(i);
    if (!std::isfinite(w) || !(w > 0.0))
      throw Error(ErrorKind::invalid_argument,
                  "weighted least squares: weight " + std::to_string(i) + " is not finite and positive");
  }

  const Eigen::VectorXd root_w = problem.w.cwiseSqrt();
  const Eigen::MatrixXd A = root_w.asDiagonal() * problem.X;
  const Eigen::VectorXd b = root_w.cwiseProduct(problem.z);

  WlsSolution sol;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(kWlsRankTolerance);
  sol.rank_ok = qr.rank() == J;

  if (sol.rank_ok) {
    sol.beta = qr.solve(b);
    // A P = Q R  =>  (A'A)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(J, J).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(J, J));
    const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
    const auto& P = qr.colsPermutation();
    sol.V = P * inner * P.transpose();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(kWlsRankTolerance);
    sol.beta = cod.solve(b);
    const Eigen::MatrixXd pinv = cod.pseudoInverse();
    sol.V = pinv * pinv.transpose();
  }
  sol.V = 0.5 * (sol.V + sol.V.transpose());
  return sol;
}

}  // namespace tglm
