#pragma once

#include <Eigen/Dense>
#include <string>

#include "common.hpp"
#include "covariance.hpp"
#include "data_matrix.hpp"

namespace dlcc {

/// Depth-based similarity matrix: values(i, j) = D(x_j | X_Ri), so row i
/// orders every observation by similarity to x_i. Diagonal is exactly 1.
struct SimilarityMatrix {
  Eigen::MatrixXd values;
  bool symmetric = false;

  Eigen::Index n() const { return values.rows(); }
};

/// Shared precomputation for the reflection spatial-depth build: unit-vector
/// sums within X and the pairwise norm tables that Proposition-1 lookups use.
struct ReflectionWorkspace {
  Eigen::MatrixXd E;    // n x d, row q = sum of unit vectors from X\{x_q} to x_q
  Eigen::MatrixXd L2;   // n x n squared pairwise norms
  Eigen::MatrixXd L;    // n x n pairwise norms
};

/// Builds E/L tables and detects duplicate observations (hard error carrying
/// the duplicate index pairs).
ReflectionWorkspace build_reflection_workspace(const DataMatrix& X);

/// Squared norm between the reflection of x_v through x_i and x_u, evaluated
/// purely from the pairwise norm table:
///   ||v^i - u||^2 = 2||v - x_i||^2 + 2||u - x_i||^2 - ||u - v||^2,
/// clamped at zero against floating-point cancellation.
double reflected_sq_norm(const Eigen::MatrixXd& L2, int i, int u, int v);

/// Spatial-depth similarity via the reflection identities; reflected-point
/// norms come from the L table only, never from coordinates.
SimilarityMatrix build_sd_similarity(const DataMatrix& X);

/// Mahalanobis-depth similarity; row i is computed with center x_i and the
/// covariance matrix assigned to observation i. Inversion failures fall back
/// to the identity for the offending matrix (noted).
SimilarityMatrix build_md_similarity(const DataMatrix& X, const CovarianceModel& model,
                                     Notes* notes = nullptr);

/// Averages S_ij and S_ji; idempotent, sets the symmetric flag.
SimilarityMatrix symmetrize(const SimilarityMatrix& S);

/// Binary cache: magic "DLCCSIM1", u32 n, u32 flags (bit0 = symmetric),
/// followed by row-major float64 values.
void save_similarity(const SimilarityMatrix& S, const std::string& path);
SimilarityMatrix load_similarity(const std::string& path);

}  // namespace dlcc
