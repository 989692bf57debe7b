#include "depth.hpp"

#include <algorithm>
#include <cmath>

namespace dlcc {

double md_depth_prefactored(const Eigen::VectorXd& z, const Eigen::VectorXd& center,
                            const Eigen::LLT<Eigen::MatrixXd>& llt) {
  Eigen::VectorXd diff = z - center;
  const double q = diff.dot(llt.solve(diff));
  return 1.0 / (1.0 + std::max(q, 0.0));
}

double md_depth(const Eigen::VectorXd& z, const Eigen::VectorXd& center,
                const Eigen::MatrixXd& cov) {
  return md_depth_prefactored(z, center, factorize_spd(cov));
}

double spatial_depth(const Eigen::VectorXd& z, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(X.cols());
  Eigen::VectorXd diff(X.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    diff = z - X.row(i).transpose();
    const double nrm = diff.norm();
    if (nrm != 0.0) acc += diff / nrm;
  }
  const double depth = 1.0 - acc.norm() / static_cast<double>(n);
  return std::clamp(depth, 0.0, 1.0);
}

}  // namespace dlcc
