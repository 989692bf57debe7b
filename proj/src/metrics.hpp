#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common.hpp"

namespace dlcc {

/// Largest threshold eta keeping the whole dataset depth-connected (edges
/// S_ij >= eta); equals the bottleneck edge of a maximum spanning tree.
double eta_x(const Eigen::MatrixXd& S_sym);

/// Largest threshold at which the cluster splits into exactly one
/// depth-connected component of size >= ntilde plus outliers.
struct EtaK {
  double eta = 0.0;
  std::vector<int> outliers;  // observation indices (small components)
};
EtaK eta_k(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster, int ntilde);

/// Within-cluster similarity J_k: weighted mean of per-point core-neighbor
/// similarities, outliers contributing their best link into the main body.
double dc_within(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster,
                 double eta_k_value, const std::vector<int>& outliers);

/// Between-cluster similarity H_k: weighted mean of similarities to outside
/// core neighbors at eta_x; inner points contribute eta_x itself.
double dc_between(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster,
                  const std::vector<char>& in_cluster, double eta_x_value,
                  std::vector<int>* inner_out = nullptr);

struct DcClusterReport {
  double eta_k = 0.0;
  double j_k = 0.0;
  double h_k = 0.0;
  std::vector<int> outliers;
  std::vector<int> inner;
};

struct DcReport {
  double dc = 0.0;
  double eta_x = 0.0;
  std::vector<DcClusterReport> clusters;
};

/// DC = sum_k (n_k / n) (J_k - H_k). Labels are 1..K; every cluster must have
/// at least ntilde members. Structural assertions (outlier mu < eta_k and
/// H_k >= eta_X) are enforced on every report.
DcReport dc_metric(const Eigen::MatrixXd& S_sym, const std::vector<int>& labels,
                   int ntilde);

/// Adjusted Rand index from pair counting; 1 on identical partitions.
double ari(const std::vector<int>& a, const std::vector<int>& b);

/// Clustering error: 1 minus the best one-to-one label-matching accuracy
/// (optimal assignment over the contingency table).
double ce(const std::vector<int>& pred, const std::vector<int>& truth);

/// Reference internal metrics for the comparison harness.
double average_silhouette_width(const Eigen::MatrixXd& X, const std::vector<int>& labels);
double calinski_harabasz(const Eigen::MatrixXd& X, const std::vector<int>& labels);

}  // namespace dlcc
