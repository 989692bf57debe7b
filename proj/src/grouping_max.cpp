#include "grouping_max.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace dlcc {

namespace {

bool overlaps_any(int pos, const std::vector<int>& others, const Eigen::MatrixXd& M) {
  for (int o : others)
    if (M(pos, o) > 0.0) return true;
  return false;
}

}  // namespace

CenterPartition partition_centers(const CenterSet& cs) {
  const int t = static_cast<int>(cs.centers.size());
  std::vector<char> isolated(t, 1);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j)
      if (j != i && cs.M(i, j) > 0.0) {
        isolated[i] = 0;
        break;
      }

  CenterPartition p;
  for (int i = 0; i < t; ++i) {
    if (isolated[i]) continue;
    if (cs.centers[i].frequency >= 2 && cs.centers[i].self_rank <= 2)
      p.c1.push_back(i);
  }
  for (int i = 0; i < t; ++i) {
    if (isolated[i]) continue;
    if (std::count(p.c1.begin(), p.c1.end(), i)) continue;
    if (overlaps_any(i, p.c1, cs.M))
      p.c3.push_back(i);
    else
      p.c2.push_back(i);
  }
  return p;
}

std::vector<int> segregate_nonconvex(CenterPartition p, const CenterSet& cs, Notes* notes) {
  std::vector<int> result;
  if (p.c2.empty()) {
    result = p.c1;
  } else {
    note(notes, "max: locally non-convex region detected (" +
                    std::to_string(p.c2.size()) + " centers)");
    std::vector<int> c1 = p.c1;
    std::vector<int> c2 = p.c2;
    for (int v : p.c3) {
      double to_c2 = 0.0, to_c1 = 0.0;
      for (int j : c2) to_c2 = std::max(to_c2, cs.M(v, j));
      for (int i : c1) to_c1 = std::max(to_c1, cs.M(v, i));
      if (to_c2 > to_c1) {
        c2.push_back(v);
        std::vector<int> keep;
        for (int i : c1)
          if (!(cs.M(v, i) > 0.0)) keep.push_back(i);
        c1 = std::move(keep);
      }
    }
    result = c1;
    result.insert(result.end(), c2.begin(), c2.end());
    std::sort(result.begin(), result.end());
    // Evictions can strand centers with no remaining overlap.
    std::vector<int> connected;
    for (int i : result) {
      bool any = false;
      for (int j : result)
        if (j != i && cs.M(i, j) > 0.0) {
          any = true;
          break;
        }
      if (any) connected.push_back(i);
    }
    result = std::move(connected);
  }
  if (result.empty())
    throw Error(Errc::NoCenters, "max-strategy filtering kept no centers; try a different s");
  return result;
}

double delta_upper(const Eigen::MatrixXd& M) {
  const int t = static_cast<int>(M.rows());
  if (t < 2) throw Error(Errc::InvalidArgument, "delta_upper needs at least two centers");
  double result = std::numeric_limits<double>::infinity();
  for (int i = 0; i < t; ++i) {
    double rowmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < t; ++j)
      if (j != i) rowmax = std::max(rowmax, M(i, j));
    result = std::min(result, rowmax);
  }
  return result;
}

std::vector<std::vector<int>> group_at_delta(const Eigen::MatrixXd& M, double delta) {
  const int t = static_cast<int>(M.rows());
  UnionFind uf(t);
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j)
      if (M(i, j) > delta) uf.unite(i, j);
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < t; ++i) comps[uf.find(i)].push_back(i);
  std::vector<std::vector<int>> groups;
  for (auto& [root, members] : comps) groups.push_back(std::move(members));
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return groups;
}

HierarchyTrace hierarchy_trace(const Eigen::MatrixXd& M) {
  const int t = static_cast<int>(M.rows());
  if (t < 2) throw Error(Errc::InvalidArgument, "hierarchy trace needs at least two centers");

  // Distinct positive overlap values, descending. Merging rows/columns by
  // entrywise maximum makes group connectivity single-linkage, so the trace
  // follows from a descending union-find sweep.
  std::set<double, std::greater<>> values;
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j)
      if (M(i, j) > 0.0) values.insert(M(i, j));

  HierarchyTrace trace;
  UnionFind uf(t);
  std::vector<int> smallest(t);
  for (int i = 0; i < t; ++i) smallest[i] = i;
  int current = t;
  for (double v : values) {
    int merged = current;
    for (int i = 0; i < t; ++i)
      for (int j = i + 1; j < t; ++j) {
        if (M(i, j) != v) continue;
        int ra = uf.find(i), rb = uf.find(j);
        if (ra == rb) continue;
        MergeEvent ev;
        ev.delta = v;
        ev.a = std::min(smallest[ra], smallest[rb]);
        ev.b = std::max(smallest[ra], smallest[rb]);
        trace.merges.push_back(ev);
        uf.unite(ra, rb);
        smallest[uf.find(ra)] = std::min(smallest[ra], smallest[rb]);
        --merged;
      }
    if (merged < current) {
      trace.group_counts.push_back(current);
      trace.deltas.push_back(v);
      current = merged;
    }
  }
  trace.group_counts.push_back(current);
  trace.deltas.push_back(0.0);
  return trace;
}

std::vector<double> score_max(int obs, const std::vector<std::vector<int>>& groups,
                              const CenterSet& cs) {
  std::vector<double> scores(groups.size(), 0.0);
  for (size_t g = 0; g < groups.size(); ++g) {
    int hits = 0;
    for (int pos : groups[g]) {
      const auto& members = cs.nbh(pos).members;
      if (std::find(members.begin(), members.end(), obs) != members.end()) ++hits;
    }
    scores[g] = static_cast<double>(hits) / groups[g].size();
  }
  return scores;
}

}  // namespace dlcc
