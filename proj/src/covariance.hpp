#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common.hpp"
#include "data_matrix.hpp"

namespace dlcc {

enum class PcaGate { Pass, Fail };

/// Variance-proportion test deciding whether Mahalanobis scaling is worth it.
/// `vp` holds the proportion of variance explained by each principal
/// component, descending, summing to 1. Passes when vp[0] > 0.6 or when the
/// components explaining more than 5% variance jointly exceed 0.95 (with the
/// count redefined to d - 1 when every component clears 5%).
PcaGate pca_gate(const std::vector<double>& vp);

/// Gaussian mixture fit under the EEV constraint: components share volume
/// (lambda) and shape (delta, unit determinant) but have free orientations.
struct EevFit {
  int k = 0;
  double lambda = 0.0;
  Eigen::VectorXd delta;                  // descending, prod(delta) == 1
  std::vector<Eigen::MatrixXd> gammas;    // per-component orthogonal d x d
  std::vector<Eigen::VectorXd> means;
  Eigen::VectorXd weights;                // mixing proportions
  Eigen::MatrixXd responsibilities;       // n x k, rows sum to 1
  std::vector<int> assignment;            // argmax responsibility
  double loglik = 0.0;
  double bic = 0.0;
  std::vector<double> loglik_history;     // one entry per EM iteration

  Eigen::MatrixXd covariance(int component) const;
};

std::vector<int> default_k_candidates(Eigen::Index n, Eigen::Index d);

/// EM under the EEV constraint for each candidate K; the returned fit is the
/// BIC winner with near-ties (delta BIC < 2) broken toward smaller K.
/// Throws Errc::SingularCovariance when every candidate degenerates.
EevFit fit_eev(const DataMatrix& X, const std::vector<int>& k_candidates,
               uint64_t seed, Notes* notes = nullptr);

struct CovarianceModel {
  enum class Kind { Global, Identity, PerClusterEev };
  Kind kind = Kind::Identity;
  std::vector<Eigen::MatrixXd> matrices;  // SPD, one per component
  std::vector<int> assignment;            // per-observation index into matrices

  const Eigen::MatrixXd& matrix_for(int obs) const {
    return matrices[assignment.empty() ? 0 : assignment[obs]];
  }
  static const char* kind_name(Kind k);
};

/// The similarity-matrix covariance decision flow: gate on the global
/// eigenvalue proportions, then (on failure) on the common EEV spectrum,
/// defaulting to the identity when both fail or the fit degenerates.
CovarianceModel select_covariance_model(const DataMatrix& X, uint64_t seed,
                                        Notes* notes = nullptr);

}  // namespace dlcc
