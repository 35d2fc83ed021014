#include "mflab/lanczos.hpp"

namespace mflab {

std::pair<double, Eigen::VectorXd> tridiagonal_lowest(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
  if (m == 1) return {alpha[0], Eigen::VectorXd::Ones(1)};
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    t.diagonal() = d;
    t.diagonal(-1) = e;
    t.diagonal(1) = e;
    es.compute(t);
  }
  // computeFromTridiagonal does not always return the spectrum sorted
  Eigen::Index k = 0;
  es.eigenvalues().minCoeff(&k);
  return {es.eigenvalues()[k], es.eigenvectors().col(k)};
}

}  // namespace mflab
