#include "classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "depth.hpp"

namespace dlcc {

ClusterDepth::ClusterDepth(const DataMatrix& X, const std::vector<std::vector<int>>& clusters,
                           DepthKind kind, Notes* notes)
    : x_(X), kind_(kind), members_(clusters) {
  if (kind_ != DepthKind::MD) return;
  const int k_count = static_cast<int>(clusters.size());
  means_.resize(k_count);
  llts_.resize(k_count);
  identity_.assign(k_count, 0);
  for (int k = 0; k < k_count; ++k) {
    const auto& rows = clusters[k];
    if (rows.empty()) throw Error(Errc::InvalidArgument, "empty cluster in depth evaluator");
    Eigen::MatrixXd sub(rows.size(), X.dim());
    for (size_t m = 0; m < rows.size(); ++m) sub.row(m) = X.values.row(rows[m]);
    means_[k] = sub.colwise().mean().transpose();
    Eigen::MatrixXd cov = sample_covariance(sub);
    llts_[k].compute(cov);
    if (llts_[k].info() != Eigen::Success) {
      identity_[k] = 1;
      note(notes, "mdc: cluster " + std::to_string(k + 1) +
                      " covariance singular; identity fallback");
    }
  }
}

double ClusterDepth::depth(int obs, int k) const {
  if (kind_ == DepthKind::SD) {
    Eigen::MatrixXd sub(members_[k].size(), x_.dim());
    for (size_t m = 0; m < members_[k].size(); ++m)
      sub.row(m) = x_.values.row(members_[k][m]);
    return spatial_depth(x_.values.row(obs).transpose(), sub);
  }
  Eigen::VectorXd diff = x_.values.row(obs).transpose() - means_[k];
  const double q = identity_[k] ? diff.squaredNorm() : diff.dot(llts_[k].solve(diff));
  return 1.0 / (1.0 + std::max(q, 0.0));
}

namespace {

std::vector<std::vector<int>> labeled_clusters(const std::vector<int>& labels) {
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  std::vector<std::vector<int>> clusters(k_count);
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) clusters[labels[i] - 1].push_back(static_cast<int>(i));
  return clusters;
}

}  // namespace

void classify_mdc(std::vector<int>& labels, const DataMatrix& X, DepthKind kind,
                  Notes* notes) {
  auto clusters = labeled_clusters(labels);
  ClusterDepth eval(X, clusters, kind, notes);
  const int k_count = eval.k_count();
  std::vector<int> targets;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0) targets.push_back(static_cast<int>(i));
  std::vector<int> result(targets.size());
  parallel_for(0, targets.size(), [&](size_t t) {
    const int obs = targets[t];
    int best = 1;
    double best_depth = -1.0;
    for (int k = 0; k < k_count; ++k) {
      const double d = eval.depth(obs, k);
      if (d > best_depth) {
        best_depth = d;
        best = k + 1;
      }
    }
    result[t] = best;
  });
  for (size_t t = 0; t < targets.size(); ++t) labels[targets[t]] = result[t];
}

void classify_knn(std::vector<int>& labels, const Eigen::MatrixXd& S_sym, int k) {
  std::vector<int> labeled;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) labeled.push_back(static_cast<int>(i));
  if (labeled.empty()) throw Error(Errc::InvalidArgument, "knn: no labeled points");
  if (k <= 0) k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(labeled.size()))));
  k = std::min<int>(k, static_cast<int>(labeled.size()));

  std::vector<int> targets;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0) targets.push_back(static_cast<int>(i));
  std::vector<int> result(targets.size());
  parallel_for(0, targets.size(), [&](size_t t) {
    const int obs = targets[t];
    std::vector<int> order = labeled;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      const double va = S_sym(a, obs), vb = S_sym(b, obs);
      if (va != vb) return va > vb;
      return a < b;
    });
    std::vector<int> votes;
    std::vector<double> mass;
    for (int m = 0; m < k; ++m) {
      const int lab = labels[order[m]];
      if (static_cast<size_t>(lab) >= votes.size() + 1) {
        votes.resize(lab + 1, 0);
        mass.resize(lab + 1, 0.0);
      }
      votes[lab]++;
      mass[lab] += S_sym(order[m], obs);
    }
    int best = 0;
    for (size_t lab = 1; lab < votes.size(); ++lab) {
      if (votes[lab] == 0) continue;
      if (best == 0) {
        best = static_cast<int>(lab);
        continue;
      }
      const double mean_best = mass[best] / votes[best];
      const double mean_cur = mass[lab] / votes[lab];
      if (votes[lab] > votes[best] ||
          (votes[lab] == votes[best] && mean_cur > mean_best))
        best = static_cast<int>(lab);
    }
    result[t] = best;
  });
  for (size_t t = 0; t < targets.size(); ++t) labels[targets[t]] = result[t];
}

// ---- random forest ----

namespace {

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  int label = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;
  int predict(const Eigen::RowVectorXd& x) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
      cur = x[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left
                                                          : nodes[cur].right;
    return nodes[cur].label;
  }
};

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    g -= p * p;
  }
  return g;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const std::vector<int>& y, int label_max,
              int max_features, Rng& rng)
      : x_(X), y_(y), label_max_(label_max), max_features_(max_features), rng_(rng) {}

  Tree build(const std::vector<int>& sample) {
    tree_.nodes.clear();
    grow(sample);
    return std::move(tree_);
  }

 private:
  const Eigen::MatrixXd& x_;
  const std::vector<int>& y_;
  int label_max_;
  int max_features_;
  Rng& rng_;
  Tree tree_;

  int majority(const std::vector<int>& rows) const {
    std::vector<int> counts(label_max_ + 1, 0);
    for (int r : rows) counts[y_[r]]++;
    int best = 1;
    for (int lab = 1; lab <= label_max_; ++lab)
      if (counts[lab] > counts[best]) best = lab;
    return best;
  }

  int grow(const std::vector<int>& rows) {
    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    bool pure = true;
    for (size_t r = 1; r < rows.size(); ++r)
      if (y_[rows[r]] != y_[rows[0]]) {
        pure = false;
        break;
      }
    if (pure || rows.size() < 2) {
      tree_.nodes[node_id].label = majority(rows);
      return node_id;
    }

    // Sample features without replacement.
    const int d = static_cast<int>(x_.cols());
    std::vector<int> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    for (int f = 0; f < std::min(max_features_, d); ++f) {
      const size_t pick = f + rng_.index(d - f);
      std::swap(feats[f], feats[pick]);
    }
    feats.resize(std::min(max_features_, d));

    int best_feat = -1;
    double best_thresh = 0.0, best_impurity = std::numeric_limits<double>::infinity();
    std::vector<int> order(rows);
    for (int f : feats) {
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (x_(a, f) != x_(b, f)) return x_(a, f) < x_(b, f);
        return a < b;
      });
      std::vector<int> left_counts(label_max_ + 1, 0);
      std::vector<int> right_counts(label_max_ + 1, 0);
      for (int r : order) right_counts[y_[r]]++;
      const int total = static_cast<int>(order.size());
      for (int split = 1; split < total; ++split) {
        const int moved = order[split - 1];
        left_counts[y_[moved]]++;
        right_counts[y_[moved]]--;
        if (x_(order[split - 1], f) == x_(order[split], f)) continue;
        const double impurity = split * gini(left_counts, split) +
                                (total - split) * gini(right_counts, total - split);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feat = f;
          best_thresh = 0.5 * (x_(order[split - 1], f) + x_(order[split], f));
        }
      }
    }
    if (best_feat < 0) {  // constant within sampled features
      tree_.nodes[node_id].label = majority(rows);
      return node_id;
    }

    std::vector<int> left, right;
    for (int r : rows)
      (x_(r, best_feat) <= best_thresh ? left : right).push_back(r);
    if (left.empty() || right.empty()) {
      tree_.nodes[node_id].label = majority(rows);
      return node_id;
    }
    tree_.nodes[node_id].feature = best_feat;
    tree_.nodes[node_id].threshold = best_thresh;
    const int l = grow(left);
    tree_.nodes[node_id].left = l;
    const int r = grow(right);
    tree_.nodes[node_id].right = r;
    return node_id;
  }
};

}  // namespace

void classify_rf(std::vector<int>& labels, const DataMatrix& X, const RfConfig& cfg,
                 Notes* notes) {
  std::vector<int> train;
  int label_max = 0;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) {
      train.push_back(static_cast<int>(i));
      label_max = std::max(label_max, labels[i]);
    }
  if (train.empty()) throw Error(Errc::InvalidArgument, "rf: no labeled points");

  int distinct = 0;
  {
    std::vector<char> seen(label_max + 1, 0);
    for (int r : train)
      if (!seen[labels[r]]) {
        seen[labels[r]] = 1;
        ++distinct;
      }
  }
  if (distinct < 2) {
    note(notes, "rf: single labeled class; assigning it everywhere");
    int only = labels[train[0]];
    for (auto& l : labels)
      if (l == 0) l = only;
    return;
  }

  const int d = static_cast<int>(X.dim());
  const int max_features =
      cfg.max_features > 0 ? cfg.max_features
                           : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<Tree> forest(cfg.trees);
  parallel_for(0, static_cast<size_t>(cfg.trees), [&](size_t t) {
    Rng rng(splitmix64(cfg.seed ^ (0xABCDULL + t * 0x9E3779B97F4A7C15ULL)));
    std::vector<int> sample(train.size());
    for (size_t m = 0; m < train.size(); ++m)
      sample[m] = train[rng.index(train.size())];
    TreeBuilder builder(X.values, labels, label_max, max_features, rng);
    forest[t] = builder.build(sample);
  });

  std::vector<int> targets;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 0) targets.push_back(static_cast<int>(i));
  std::vector<int> result(targets.size());
  parallel_for(0, targets.size(), [&](size_t t) {
    std::vector<int> votes(label_max + 1, 0);
    for (const auto& tree : forest) votes[tree.predict(X.values.row(targets[t]))]++;
    int best = 1;
    for (int lab = 1; lab <= label_max; ++lab)
      if (votes[lab] > votes[best]) best = lab;
    result[t] = best;
  });
  for (size_t t = 0; t < targets.size(); ++t) labels[targets[t]] = result[t];
}

}  // namespace dlcc
