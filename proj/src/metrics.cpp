#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace dlcc {

namespace {

struct Edge {
  double value;
  int a, b;
};

// Edges sorted by descending similarity; ascending index pairs on ties.
std::vector<Edge> sorted_edges(const Eigen::MatrixXd& s, const std::vector<int>& subset) {
  std::vector<Edge> edges;
  edges.reserve(subset.size() * (subset.size() - 1) / 2);
  for (size_t a = 0; a < subset.size(); ++a)
    for (size_t b = a + 1; b < subset.size(); ++b)
      edges.push_back({s(subset[a], subset[b]), static_cast<int>(a), static_cast<int>(b)});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.value != y.value) return x.value > y.value;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return edges;
}

}  // namespace

double eta_x(const Eigen::MatrixXd& S_sym) {
  const int n = static_cast<int>(S_sym.rows());
  if (n < 2) throw Error(Errc::InvalidArgument, "eta_x needs n >= 2");
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<Edge> edges = sorted_edges(S_sym, all);
  UnionFind uf(n);
  int components = n;
  // Once a batch of equal-valued edges reaches one component, the remaining
  // edges of that value cannot split it, so mid-batch detection is exact.
  for (const Edge& e : edges) {
    if (uf.unite(e.a, e.b) && --components == 1) return e.value;
  }
  // A complete similarity graph always connects at its minimum value.
  throw Error(Errc::Internal, "eta_x: similarity graph never connected");
}

EtaK eta_k(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster, int ntilde) {
  const int m = static_cast<int>(cluster.size());
  if (m < ntilde)
    throw Error(Errc::UndersizedCluster,
                "cluster of size " + std::to_string(m) + " is below ntilde=" +
                    std::to_string(ntilde));
  UnionFind uf(m);
  int large = ntilde <= 1 ? m : 0;
  if (large == 1) return EtaK{1.0, {}};  // ntilde <= 1 with m == 1
  std::vector<Edge> edges = sorted_edges(S_sym, cluster);
  // The large-component count can rise and fall, and mid-batch states are not
  // valid thresholds, so evaluate only after each equal-value batch.
  size_t i = 0;
  while (i < edges.size()) {
    const double v = edges[i].value;
    for (; i < edges.size() && edges[i].value == v; ++i) {
      const int ra = uf.find(edges[i].a), rb = uf.find(edges[i].b);
      if (ra == rb) continue;
      if (uf.size[ra] >= ntilde) --large;
      if (uf.size[rb] >= ntilde) --large;
      uf.unite(ra, rb);
      if (uf.size[uf.find(ra)] >= ntilde) ++large;
    }
    if (large == 1) {
      EtaK out;
      out.eta = v;
      for (int a = 0; a < m; ++a)
        if (uf.size[uf.find(a)] < ntilde) out.outliers.push_back(cluster[a]);
      return out;
    }
  }
  throw Error(Errc::UndersizedCluster,
              "no threshold yields a single depth-connected core for this cluster");
}

double dc_within(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster,
                 double eta_k_value, const std::vector<int>& outliers) {
  std::vector<char> is_outlier_global(S_sym.rows(), 0);
  for (int o : outliers) is_outlier_global[o] = 1;

  const int m = static_cast<int>(cluster.size());
  std::vector<double> mu(m, 0.0);
  std::vector<double> weight_raw(m, 0.0);
  double normalizer = 0.0;
  for (int a = 0; a < m; ++a) {
    const int i = cluster[a];
    if (!is_outlier_global[i]) {
      double sum = 0.0;
      int count = 0;
      for (int b = 0; b < m; ++b) {
        const int j = cluster[b];
        if (j == i) continue;
        if (S_sym(i, j) >= eta_k_value) {
          sum += S_sym(i, j);
          ++count;
        }
      }
      // Core members always have at least one neighbor at eta_k.
      mu[a] = count > 0 ? sum / count : 0.0;
      weight_raw[a] = count;
    } else {
      double best = 0.0;
      for (int b = 0; b < m; ++b) {
        const int j = cluster[b];
        if (j == i || is_outlier_global[j]) continue;
        best = std::max(best, S_sym(i, j));
      }
      mu[a] = best;
      weight_raw[a] = 1.0;
      if (!(best < eta_k_value))
        throw Error(Errc::Internal, "DC property 3 violated: outlier mu >= eta_k");
    }
    normalizer += weight_raw[a];
  }
  if (normalizer <= 0.0) return 0.0;
  double jk = 0.0;
  for (int a = 0; a < m; ++a) jk += weight_raw[a] / normalizer * mu[a];
  return jk;
}

double dc_between(const Eigen::MatrixXd& S_sym, const std::vector<int>& cluster,
                  const std::vector<char>& in_cluster, double eta_x_value,
                  std::vector<int>* inner_out) {
  const int n = static_cast<int>(S_sym.rows());
  const int m = static_cast<int>(cluster.size());
  std::vector<double> mu(m, 0.0);
  std::vector<double> weight_raw(m, 0.0);
  double normalizer = 0.0;
  for (int a = 0; a < m; ++a) {
    const int i = cluster[a];
    double sum = 0.0;
    int count = 0;
    for (int h = 0; h < n; ++h) {
      if (in_cluster[h]) continue;
      if (S_sym(i, h) > eta_x_value) {
        sum += S_sym(i, h);
        ++count;
      }
    }
    if (count > 0) {
      mu[a] = sum / count;
      weight_raw[a] = count;
    } else {
      // Inner observation (also covers exact-tie boundaries, whose strict
      // core-neighbor set is empty).
      mu[a] = eta_x_value;
      weight_raw[a] = 1.0;
      if (inner_out) inner_out->push_back(i);
    }
    normalizer += weight_raw[a];
  }
  double hk = 0.0;
  for (int a = 0; a < m; ++a) hk += weight_raw[a] / normalizer * mu[a];
  if (hk < eta_x_value - 1e-12 * std::max(1.0, eta_x_value))
    throw Error(Errc::Internal, "DC property 4 violated: H_k < eta_X");
  return hk;
}

DcReport dc_metric(const Eigen::MatrixXd& S_sym, const std::vector<int>& labels,
                   int ntilde) {
  const int n = static_cast<int>(S_sym.rows());
  if (static_cast<int>(labels.size()) != n)
    throw Error(Errc::InvalidArgument, "labels length mismatch");
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  std::vector<std::vector<int>> clusters(k_count);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 1 || labels[i] > k_count)
      throw Error(Errc::InvalidArgument, "labels must be 1..K");
    clusters[labels[i] - 1].push_back(i);
  }
  for (int k = 0; k < k_count; ++k)
    if (static_cast<int>(clusters[k].size()) < ntilde)
      throw Error(Errc::UndersizedCluster,
                  "cluster " + std::to_string(k + 1) + " has " +
                      std::to_string(clusters[k].size()) + " < ntilde points");

  DcReport report;
  report.eta_x = eta_x(S_sym);
  report.clusters.resize(k_count);
  report.dc = 0.0;
  for (int k = 0; k < k_count; ++k) {
    auto& cr = report.clusters[k];
    EtaK ek = eta_k(S_sym, clusters[k], ntilde);
    cr.eta_k = ek.eta;
    cr.outliers = ek.outliers;
    cr.j_k = dc_within(S_sym, clusters[k], ek.eta, ek.outliers);
    std::vector<char> in_cluster(n, 0);
    for (int i : clusters[k]) in_cluster[i] = 1;
    cr.h_k = dc_between(S_sym, clusters[k], in_cluster, report.eta_x, &cr.inner);
    report.dc += static_cast<double>(clusters[k].size()) / n * (cr.j_k - cr.h_k);
  }
  return report;
}

namespace {

// Contingency counts with labels remapped to dense 0-based ids.
Eigen::MatrixXd contingency(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<int, int> ida, idb;
  for (int v : a) ida.emplace(v, static_cast<int>(ida.size()));
  for (int v : b) idb.emplace(v, static_cast<int>(idb.size()));
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ida.size(), idb.size());
  for (size_t i = 0; i < a.size(); ++i) table(ida[a[i]], idb[b[i]]) += 1.0;
  return table;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

// O(n^3) min-cost assignment (Hungarian with potentials) on a square matrix.
double assignment_max_sum(const Eigen::MatrixXd& score) {
  const int n = static_cast<int>(score.rows());
  const double maxv = score.maxCoeff();
  // Convert to min-cost.
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) cost[i][j] = maxv - score(i - 1, j - 1);
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = std::numeric_limits<double>::infinity();
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0][j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) total += score(p[j] - 1, j - 1);
  return total;
}

}  // namespace

double ari(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw Error(Errc::InvalidArgument, "ari: label vectors differ in length");
  const double n = static_cast<double>(a.size());
  Eigen::MatrixXd table = contingency(a, b);
  double index = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i)
    for (Eigen::Index j = 0; j < table.cols(); ++j) index += choose2(table(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) sum_a += choose2(table.row(i).sum());
  for (Eigen::Index j = 0; j < table.cols(); ++j) sum_b += choose2(table.col(j).sum());
  const double expected = sum_a * sum_b / choose2(n);
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

double ce(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw Error(Errc::InvalidArgument, "ce: label vectors differ in length");
  Eigen::MatrixXd table = contingency(pred, truth);
  const int dim = static_cast<int>(std::max(table.rows(), table.cols()));
  Eigen::MatrixXd square = Eigen::MatrixXd::Zero(dim, dim);
  square.topLeftCorner(table.rows(), table.cols()) = table;
  const double matched = assignment_max_sum(square);
  return 1.0 - matched / static_cast<double>(pred.size());
}

double average_silhouette_width(const Eigen::MatrixXd& X, const std::vector<int>& labels) {
  const int n = static_cast<int>(X.rows());
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  std::vector<std::vector<int>> clusters(k_count);
  for (int i = 0; i < n; ++i) clusters[labels[i] - 1].push_back(i);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int own = labels[i] - 1;
    if (clusters[own].size() <= 1) continue;  // silhouette defined as 0
    double a = 0.0;
    for (int j : clusters[own])
      if (j != i) a += (X.row(i) - X.row(j)).norm();
    a /= clusters[own].size() - 1;
    double b = std::numeric_limits<double>::infinity();
    for (int k = 0; k < k_count; ++k) {
      if (k == own || clusters[k].empty()) continue;
      double d = 0.0;
      for (int j : clusters[k]) d += (X.row(i) - X.row(j)).norm();
      b = std::min(b, d / clusters[k].size());
    }
    total += (b - a) / std::max(a, b);
  }
  return total / n;
}

double calinski_harabasz(const Eigen::MatrixXd& X, const std::vector<int>& labels) {
  const int n = static_cast<int>(X.rows());
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  Eigen::RowVectorXd mean = X.colwise().mean();
  std::vector<std::vector<int>> clusters(k_count);
  for (int i = 0; i < n; ++i) clusters[labels[i] - 1].push_back(i);
  double between = 0.0, within = 0.0;
  for (int k = 0; k < k_count; ++k) {
    if (clusters[k].empty()) continue;
    Eigen::RowVectorXd cmean = Eigen::RowVectorXd::Zero(X.cols());
    for (int i : clusters[k]) cmean += X.row(i);
    cmean /= clusters[k].size();
    between += clusters[k].size() * (cmean - mean).squaredNorm();
    for (int i : clusters[k]) within += (X.row(i) - cmean).squaredNorm();
  }
  if (within == 0.0 || k_count <= 1) return 0.0;
  return (between / (k_count - 1)) / (within / (n - k_count));
}

}  // namespace dlcc
