#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common.hpp"
#include "data_matrix.hpp"
#include "local_centers.hpp"

namespace dlcc {

/// Per-cluster depth evaluator used by the maximum-depth classifier and the
/// maxdepth refinement. MD uses moment estimates (identity fallback when the
/// cluster covariance is singular); SD evaluates against the member set.
class ClusterDepth {
 public:
  ClusterDepth(const DataMatrix& X, const std::vector<std::vector<int>>& clusters,
               DepthKind kind, Notes* notes = nullptr);
  /// Depth of observation row `obs` with respect to cluster k.
  double depth(int obs, int k) const;
  int k_count() const { return static_cast<int>(members_.size()); }

 private:
  const DataMatrix& x_;
  DepthKind kind_;
  std::vector<std::vector<int>> members_;
  std::vector<Eigen::VectorXd> means_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> llts_;
  std::vector<char> identity_;
};

/// Assigns each unlabeled observation to the cluster where its depth is
/// largest (ties toward the lowest cluster id). labels: 0 = unlabeled.
void classify_mdc(std::vector<int>& labels, const DataMatrix& X, DepthKind kind,
                  Notes* notes = nullptr);

/// Majority vote among the k labeled points with the highest symmetric
/// similarity; ties break toward higher mean similarity, then lower label.
void classify_knn(std::vector<int>& labels, const Eigen::MatrixXd& S_sym, int k);

struct RfConfig {
  int trees = 200;
  int max_features = 0;  // 0 selects ceil(sqrt(d))
  uint64_t seed = 1;
};

/// Bagged axis-aligned decision trees with Gini splits; deterministic given
/// the seed. A single labeled class degenerates to a constant prediction.
void classify_rf(std::vector<int>& labels, const DataMatrix& X, const RfConfig& cfg,
                 Notes* notes = nullptr);

}  // namespace dlcc
