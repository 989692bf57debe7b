#include "local_centers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "depth.hpp"

namespace dlcc {

std::vector<Neighborhood> build_neighborhoods(const SimilarityMatrix& S, int s) {
  const int n = static_cast<int>(S.n());
  if (s < 2 || s > n)
    throw Error(Errc::InvalidArgument,
                "neighborhood size s must satisfy 2 <= s <= n (got " + std::to_string(s) + ")");
  std::vector<Neighborhood> out(n);
  parallel_for(0, static_cast<size_t>(n), [&](size_t i) {
    std::vector<int> idx;
    idx.reserve(n - 1);
    for (int j = 0; j < n; ++j)
      if (j != static_cast<int>(i)) idx.push_back(j);
    std::partial_sort(idx.begin(), idx.begin() + (s - 1), idx.end(),
                      [&](int a, int b) {
                        const double va = S.values(i, a), vb = S.values(i, b);
                        if (va != vb) return va > vb;
                        return a < b;
                      });
    Neighborhood& nb = out[i];
    nb.anchor = static_cast<int>(i);
    nb.members.reserve(s);
    nb.members.push_back(nb.anchor);
    nb.members.insert(nb.members.end(), idx.begin(), idx.begin() + (s - 1));
  });
  return out;
}

Eigen::VectorXd member_depths(const std::vector<int>& members, const DataMatrix& X,
                              DepthKind kind) {
  const int s = static_cast<int>(members.size());
  Eigen::MatrixXd sub(s, X.dim());
  for (int m = 0; m < s; ++m) sub.row(m) = X.values.row(members[m]);

  Eigen::VectorXd depths(s);
  if (kind == DepthKind::SD) {
    for (int m = 0; m < s; ++m)
      depths[m] = spatial_depth(sub.row(m).transpose(), sub);
    return depths;
  }
  Eigen::VectorXd mean = sub.colwise().mean().transpose();
  Eigen::MatrixXd cov = sample_covariance(sub);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const bool identity = llt.info() != Eigen::Success;
  for (int m = 0; m < s; ++m) {
    Eigen::VectorXd diff = sub.row(m).transpose() - mean;
    const double q = identity ? diff.squaredNorm() : diff.dot(llt.solve(diff));
    depths[m] = 1.0 / (1.0 + std::max(q, 0.0));
  }
  return depths;
}

std::vector<int> local_ranks(const Eigen::VectorXd& depths) {
  const int s = static_cast<int>(depths.size());
  std::vector<int> ranks(s);
  for (int j = 0; j < s; ++j) {
    int deeper = 0;
    for (int q = 0; q < s; ++q)
      if (depths[q] > depths[j]) ++deeper;
    ranks[j] = 1 + deeper;
  }
  return ranks;
}

CenterDetection detect_centers(const std::vector<Neighborhood>& neighborhoods,
                               const DataMatrix& X, DepthKind kind) {
  const int n = static_cast<int>(neighborhoods.size());
  CenterDetection det;
  det.center_of.assign(n, -1);
  det.self_rank.assign(n, 0);
  det.local_depth.assign(n, 0.0);

  parallel_for(0, static_cast<size_t>(n), [&](size_t i) {
    const auto& nb = neighborhoods[i];
    Eigen::VectorXd depths = member_depths(nb.members, X, kind);
    std::vector<int> ranks = local_ranks(depths);
    int center = -1;
    for (size_t m = 0; m < nb.members.size(); ++m) {
      if (ranks[m] == 1 && (center < 0 || nb.members[m] < center))
        center = nb.members[m];
      if (nb.members[m] == nb.anchor) {
        det.self_rank[i] = ranks[m];
        det.local_depth[i] = depths[m];
      }
    }
    det.center_of[i] = center;
  });

  std::vector<int> freq(n, 0);
  for (int i = 0; i < n; ++i) freq[det.center_of[i]]++;
  for (int idx = 0; idx < n; ++idx) {
    if (freq[idx] == 0) continue;
    LocalCenter c;
    c.index = idx;
    c.frequency = freq[idx];
    c.local_depth = det.local_depth[idx];
    c.self_rank = det.self_rank[idx];
    det.centers.push_back(c);
  }
  return det;
}

Eigen::MatrixXd center_similarity(const std::vector<LocalCenter>& centers,
                                  const std::vector<Neighborhood>& neighborhoods,
                                  int s) {
  const int t = static_cast<int>(centers.size());
  std::vector<std::vector<int>> sorted(t);
  for (int i = 0; i < t; ++i) {
    sorted[i] = neighborhoods[centers[i].index].members;
    std::sort(sorted[i].begin(), sorted[i].end());
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) {
      int overlap = 0;
      size_t a = 0, b = 0;
      while (a < sorted[i].size() && b < sorted[j].size()) {
        if (sorted[i][a] == sorted[j][b]) {
          ++overlap;
          ++a;
          ++b;
        } else if (sorted[i][a] < sorted[j][b]) {
          ++a;
        } else {
          ++b;
        }
      }
      M(i, j) = M(j, i) = static_cast<double>(overlap) / s;
    }
  return M;
}

}  // namespace dlcc
