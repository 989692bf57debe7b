#pragma once

#include <Eigen/Dense>
#include <vector>

#include "common.hpp"
#include "grouping_min.hpp"

namespace dlcc {

/// Local centers split for non-convex handling: c1 survives the initial
/// filter, c2 has zero overlap with all of c1 (the locally non-convex
/// regions), c3 overlaps some c1 center. Isolated centers are excluded.
struct CenterPartition {
  std::vector<int> c1, c2, c3;  // positions into CenterSet::centers
};

CenterPartition partition_centers(const CenterSet& cs);

/// Moves c3 centers that lean toward c2 into it, evicting their c1 overlaps,
/// so surviving c1 and c2 centers end up overlap-disjoint.
std::vector<int> segregate_nonconvex(CenterPartition p, const CenterSet& cs, Notes* notes);

/// min over centers of the max off-diagonal overlap in their row.
double delta_upper(const Eigen::MatrixXd& M);

/// Connected components of the graph with edges M_ij > delta (strict).
/// Groups ordered by smallest member.
std::vector<std::vector<int>> group_at_delta(const Eigen::MatrixXd& M, double delta);

struct MergeEvent {
  double delta = 0.0;
  int a = 0, b = 0;  // smallest members of the merging groups
};

/// Hierarchical grouping trace: group counts and the critical points at the
/// inclusive lower bound of each count's interval, ending at delta = 0.
struct HierarchyTrace {
  std::vector<int> group_counts;  // strictly decreasing
  std::vector<double> deltas;     // strictly decreasing, last entry 0
  std::vector<MergeEvent> merges;
};

HierarchyTrace hierarchy_trace(const Eigen::MatrixXd& M);

/// Per-group score for observation `obs`: fraction of the group's centers
/// whose neighborhood contains it.
std::vector<double> score_max(int obs, const std::vector<std::vector<int>>& groups,
                              const CenterSet& cs);

}  // namespace dlcc
