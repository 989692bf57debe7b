#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common.hpp"
#include "data_matrix.hpp"
#include "similarity.hpp"

namespace dlcc {

enum class DepthKind { MD, SD };

/// Depth-based neighborhood: the anchor followed by its s - 1 most similar
/// observations (row of S, descending, ties broken by ascending index).
struct Neighborhood {
  int anchor = 0;
  std::vector<int> members;  // anchor first
};

std::vector<Neighborhood> build_neighborhoods(const SimilarityMatrix& S, int s);

/// Depth of every member with respect to the member subset. MD estimates the
/// neighborhood covariance by moments and falls back to the identity when it
/// is singular (s <= d makes that unavoidable).
Eigen::VectorXd member_depths(const std::vector<int>& members, const DataMatrix& X,
                              DepthKind kind);

/// Local ranks from depth values: r = 1 + #{strictly deeper members}; the
/// deepest member has rank 1 and exact ties share a rank.
std::vector<int> local_ranks(const Eigen::VectorXd& depths);

struct LocalCenter {
  int index = 0;          // observation index
  int frequency = 0;      // neighborhoods this point centers
  double local_depth = 0; // depth within its own neighborhood N_index
  int self_rank = 0;      // rank within N_index
};

struct CenterDetection {
  std::vector<LocalCenter> centers;  // ascending observation index
  std::vector<int> center_of;        // per-anchor observation index of its center
  std::vector<int> self_rank;        // per-observation rank within its own neighborhood
  std::vector<double> local_depth;   // per-observation depth within its own neighborhood
};

CenterDetection detect_centers(const std::vector<Neighborhood>& neighborhoods,
                               const DataMatrix& X, DepthKind kind);

/// M_ij = |N_{c_i} ∩ N_{c_j}| / s over the given centers' neighborhoods.
Eigen::MatrixXd center_similarity(const std::vector<LocalCenter>& centers,
                                  const std::vector<Neighborhood>& neighborhoods,
                                  int s);

}  // namespace dlcc
