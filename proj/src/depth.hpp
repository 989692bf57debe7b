#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "common.hpp"

namespace dlcc {

/// Mahalanobis depth of z with the depth median fixed at `center`:
/// [1 + (z - center)' cov^-1 (z - center)]^-1, always in (0, 1].
/// Throws Errc::SingularCovariance when cov is not positive definite; the
/// caller is expected to fall back to an identity model.
double md_depth(const Eigen::VectorXd& z, const Eigen::VectorXd& center,
                const Eigen::MatrixXd& cov);

/// Same depth with a pre-factorized covariance.
double md_depth_prefactored(const Eigen::VectorXd& z, const Eigen::VectorXd& center,
                            const Eigen::LLT<Eigen::MatrixXd>& llt);

/// Sample spatial depth of z with respect to the rows of X:
/// 1 - || mean of unit vectors (z - x_i)/||z - x_i|| ||.
/// Terms with z == x_i contribute the zero vector but still count in the
/// denominator n. Always in [0, 1].
double spatial_depth(const Eigen::VectorXd& z, const Eigen::MatrixXd& X);

inline Eigen::LLT<Eigen::MatrixXd> factorize_spd(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::SingularCovariance,
                "covariance matrix is not positive definite; fall back to the identity model");
  return llt;
}

}  // namespace dlcc
