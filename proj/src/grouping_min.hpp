#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "common.hpp"
#include "local_centers.hpp"

namespace dlcc {

/// Bundle shared by the grouping pipelines: all detected centers (ascending
/// observation index), their neighborhood-overlap matrix M, and the full
/// neighborhood table.
struct CenterSet {
  std::vector<LocalCenter> centers;
  Eigen::MatrixXd M;  // |centers| x |centers|
  const std::vector<Neighborhood>* neighborhoods = nullptr;
  int s = 0;
  int n = 0;

  const Neighborhood& nbh(int pos) const {
    return (*neighborhoods)[centers[pos].index];
  }
};

/// Filtered centers partitioned into groups. Positions index into
/// CenterSet::centers; `order` is the frequency order the filtering pipeline
/// ran with (descending f, ties by ascending observation index).
struct GroupingState {
  std::vector<std::vector<int>> groups;
  std::vector<int> stable;  // representative per group
  std::vector<int> order;
};

std::vector<int> frequency_order(const CenterSet& cs, const std::vector<int>& positions);

/// Local depth and similarity-based grouping: valid neighbors are centers in
/// each center's top floor(s/2) similarity entries; per-center thresholds are
/// min(MS_i, MS_of_closest_neighbor) clamped to [lo, hi]; stable centers have
/// no above-threshold valid neighbor that is at least as deep; everything
/// else attaches to its most similar stable center.
GroupingState group_by_local_depth(const std::vector<int>& ordered, const CenterSet& cs,
                                   double clamp_lo, double clamp_hi, Notes* notes);

/// Cumulative proportion of covered observations down a frequency-ordered
/// center list: P_t = |union of the first t neighborhoods| / n.
std::vector<double> cumulative_proportion(const std::vector<int>& ordered,
                                          const CenterSet& cs);

/// Min-strategy violation counting per Definition 2 (ties count as
/// violations; a singleton group's own-group max is vacuous).
struct MinChecks {
  static double mw(int pos, const std::vector<int>& group, const Eigen::MatrixXd& M);
  static double mb(int pos, int group_idx, const std::vector<std::vector<int>>& groups,
                   const Eigen::MatrixXd& M);
  static bool violates_min1(int pos, int group_idx,
                            const std::vector<std::vector<int>>& groups,
                            const Eigen::MatrixXd& M);
  static bool violates_min2(int pos, int group_idx,
                            const std::vector<std::vector<int>>& groups,
                            const Eigen::MatrixXd& M);
  static int count_violations(const std::vector<std::vector<int>>& groups,
                              const Eigen::MatrixXd& M);
};

/// The full min-strategy filtering flow (frequency cutoff on the high-coverage
/// branch, dissimilarity check plus greedy re-addition on the low-coverage
/// branch). Returns surviving center positions in frequency order.
std::vector<int> filter_min(const CenterSet& cs, double clamp_lo, double clamp_hi,
                            Notes* notes);

/// Group trimming: force G to K when requested, then iteratively drop centers
/// until every survivor satisfies both min-strategy inequalities.
GroupingState trim_groups(GroupingState state, const CenterSet& cs,
                          std::optional<int> k, Notes* notes);

/// (a - b) / max(a, b) with a/b the max symmetric similarity from observation
/// `obs` to the filtered centers inside/outside group k; 0 when both vanish.
double score_min(int obs, int k, const std::vector<std::vector<int>>& group_center_obs,
                 const Eigen::MatrixXd& S_sym);

struct ScorePools {
  // Per cluster: (observation, score) pairs.
  std::vector<std::vector<std::pair<int, double>>> accepted;
  std::vector<std::vector<std::pair<int, double>>> deferred;
};

/// Seeds the pools: accepted with each group's unique neighbors, deferred
/// with unassigned observations scoring positively toward the cluster.
ScorePools init_score_pools(const std::vector<std::vector<int>>& group_center_obs,
                            const std::vector<std::vector<int>>& unique_neighbors,
                            const Eigen::MatrixXd& S_sym, int n);

/// Per-cluster pool update: demote accepted points scoring under the deferred
/// mean, then promote deferred points above the gap/quantile bound gamma_2.
ScorePools update_temporary_clusters(ScorePools pools, int s);

/// Unique neighbors per group: points of a group's neighborhoods appearing in
/// no other group's neighborhoods.
std::vector<std::vector<int>> unique_neighbors(const std::vector<std::vector<int>>& groups,
                                               const CenterSet& cs);

}  // namespace dlcc
