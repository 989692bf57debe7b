#pragma once

#include <map>
#include <optional>
#include <string>

#include "classify.hpp"
#include "common.hpp"
#include "data_matrix.hpp"
#include "grouping_max.hpp"
#include "grouping_min.hpp"
#include "metrics.hpp"
#include "similarity.hpp"

namespace dlcc {

enum class Strategy { Min, Max };
enum class Classifier { MDC, KNN, RF };

struct DlccConfig {
  DepthKind depth = DepthKind::MD;
  Strategy strategy = Strategy::Min;
  int s = 0;                      // <= 0 selects ceil(sqrt(n)) (min) / 12 (max)
  std::optional<double> delta;    // max strategy only
  std::optional<int> k;
  Classifier classifier = Classifier::MDC;
  bool maxdepth = false;
  bool ifloop = false;            // min strategy only (warned and ignored under max)
  int knn_k = 0;
  RfConfig rf;
  int iteration_cap = 100;
  int md_force_global = -1;       // -1: global under the max strategy; 0/1 explicit
  double group_delta_lo = 0.4;    // grouping threshold clamp
  double group_delta_hi = 0.75;
  uint64_t seed = 1;              // covariance-model fitting
  int ntilde = 3;                 // DC metric
};

struct Diagnostics {
  int s = 0;
  std::optional<double> delta;
  std::string classifier;
  std::string covariance_model;
  int refine_iterations = 0;
  bool converged = true;
  double dc = std::numeric_limits<double>::quiet_NaN();
  Notes notes;
  std::map<std::string, double> timing_ms;
};

struct ClusteringResult {
  std::vector<int> labels;  // 1..K, no point left unlabeled
  int k = 0;
  Strategy strategy = Strategy::Min;
  Diagnostics diag;
};

/// Moves every observation to its argmax-depth cluster, sweep by sweep, until
/// a fixed point, the cap, or a revisited state. A sweep that would empty a
/// cluster is reverted. Returns the number of sweeps applied.
int refine_maxdepth(std::vector<int>& labels, const DataMatrix& X, DepthKind kind,
                    int cap, bool* converged, Notes* notes);

/// Min-strategy self-improvement: keep only the deepest filtered center per
/// cluster, reassign every point to its most similar of those single centers,
/// and iterate until stable (other centers stay eligible between rounds).
int run_ifloop(std::vector<int>& labels,
               const std::vector<std::vector<int>>& group_center_obs,
               const Eigen::MatrixXd& S_sym, const DataMatrix& X, DepthKind kind,
               int cap, bool* converged, Notes* notes);

/// Full DLCC pipeline. `precomputed` may carry a similarity matrix for this
/// exact (X, depth, covariance) configuration (used by sweeps and by
/// repeated-seed harnesses).
ClusteringResult run_dlcc(const DataMatrix& X, const DlccConfig& cfg,
                      const SimilarityMatrix* precomputed = nullptr,
                      const std::vector<int>* truth = nullptr);

/// Builds the configured similarity matrix (MD covariance selection included).
SimilarityMatrix build_similarity(const DataMatrix& X, const DlccConfig& cfg,
                                  Notes* notes = nullptr,
                                  std::string* model_name = nullptr);

struct SweepCell {
  int s = 0;
  std::optional<double> delta;
  int k = 0;
  double dc = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> ari;
  std::string status;  // "ok" or the error message
};

struct SweepOutcome {
  ClusteringResult best;
  std::vector<SweepCell> leaderboard;  // DC descending, failures last
};

std::vector<int> default_s_grid(const DlccConfig& cfg, Eigen::Index n);

/// Runs every (s[, delta]) cell, scores each with the DC metric, and returns
/// the best-scoring result plus the full leaderboard.
SweepOutcome sweep(const DataMatrix& X, const DlccConfig& cfg,
                   const std::vector<int>& s_values,
                   const std::vector<int>* truth = nullptr);

}  // namespace dlcc
