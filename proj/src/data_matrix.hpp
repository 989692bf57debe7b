#pragma once

#include <Eigen/Dense>

#include "common.hpp"

namespace dlcc {

/// n x d observations, one row per observation.
struct DataMatrix {
  Eigen::MatrixXd values;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }

  static DataMatrix validated(Eigen::MatrixXd m) {
    if (m.rows() < 2 || m.cols() < 1)
      throw Error(Errc::InvalidArgument, "data matrix needs n >= 2 and d >= 1");
    if (!m.allFinite())
      throw Error(Errc::InvalidArgument, "data matrix contains non-finite values");
    return DataMatrix{std::move(m)};
  }
};

/// Unbiased sample covariance (divides by n - 1).
inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  Eigen::RowVectorXd mean = rows.colwise().mean();
  Eigen::MatrixXd centered = rows.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(n > 1 ? n - 1 : 1);
}

}  // namespace dlcc
