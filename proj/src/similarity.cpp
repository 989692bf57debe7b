#include "similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "depth.hpp"

namespace dlcc {

ReflectionWorkspace build_reflection_workspace(const DataMatrix& X) {
  const Eigen::Index n = X.n();
  ReflectionWorkspace ws;
  ws.L2.resize(n, n);
  ws.L2.diagonal().setZero();
  parallel_for(0, static_cast<size_t>(n), [&](size_t i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(i); ++j) {
      const double sq = (X.values.row(i) - X.values.row(j)).squaredNorm();
      ws.L2(i, j) = sq;
      ws.L2(j, i) = sq;
    }
  });
  std::vector<std::pair<int, int>> dups;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (ws.L2(i, j) == 0.0) dups.emplace_back(static_cast<int>(i), static_cast<int>(j));
  if (!dups.empty()) {
    std::string msg = "duplicate observations (unit vectors undefined); dedupe or jitter rows:";
    for (size_t k = 0; k < dups.size() && k < 8; ++k)
      msg += " (" + std::to_string(dups[k].first) + "," + std::to_string(dups[k].second) + ")";
    if (dups.size() > 8) msg += " ...";
    throw DuplicateRowsError(std::move(dups), msg);
  }
  ws.L = ws.L2.cwiseSqrt();

  ws.E.resize(n, X.dim());
  parallel_for(0, static_cast<size_t>(n), [&](size_t q) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(X.dim());
    for (Eigen::Index p = 0; p < n; ++p) {
      if (static_cast<size_t>(p) == q) continue;
      acc += (X.values.row(q) - X.values.row(p)) / ws.L(q, p);
    }
    ws.E.row(q) = acc;
  });
  return ws;
}

double reflected_sq_norm(const Eigen::MatrixXd& L2, int i, int u, int v) {
  const double val = 2.0 * L2(v, i) + 2.0 * L2(u, i) - L2(u, v);
  return std::max(val, 0.0);
}

SimilarityMatrix build_sd_similarity(const DataMatrix& X) {
  const Eigen::Index n = X.n();
  const Eigen::Index d = X.dim();
  ReflectionWorkspace ws = build_reflection_workspace(X);

  SimilarityMatrix S;
  S.values.resize(n, n);
  const double denom = 2.0 * n - 1.0;
  constexpr Eigen::Index kBlock = 256;

  parallel_for(0, static_cast<size_t>(n), [&](size_t row) {
    const Eigen::Index i = static_cast<Eigen::Index>(row);
    // Etilde_{i,q} = colsum_q * (x_q - 2 x_i) + sum_j r_jq x_j with
    // r_jq = 1 / ||(2x_i - x_j) - x_q||, accumulated block-wise so the
    // inner product runs as a matrix product.
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, d);
    Eigen::MatrixXd rblk(kBlock, n);
    for (Eigen::Index j0 = 0; j0 < n; j0 += kBlock) {
      const Eigen::Index jb = std::min(kBlock, n - j0);
      for (Eigen::Index b = 0; b < jb; ++b) {
        const Eigen::Index j = j0 + b;
        if (j == i) {
          rblk.row(b).setZero();
          continue;
        }
        const double two_lji = 2.0 * ws.L2(j, i);
        for (Eigen::Index q = 0; q < n; ++q) {
          const double sq = two_lji + 2.0 * ws.L2(q, i) - ws.L2(q, j);
          rblk(b, q) = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
        }
      }
      acc.noalias() += rblk.topRows(jb).transpose() * X.values.middleRows(j0, jb);
      colsum += rblk.topRows(jb).colwise().sum().transpose();
    }
    for (Eigen::Index q = 0; q < n; ++q) {
      if (q == i) {
        S.values(i, i) = 1.0;
        continue;
      }
      Eigen::RowVectorXd etilde =
          colsum[q] * (X.values.row(q) - 2.0 * X.values.row(i)) + acc.row(q);
      const double val = 1.0 - (ws.E.row(q) + etilde).norm() / denom;
      S.values(i, q) = std::clamp(val, 0.0, 1.0);
    }
  });
  S.symmetric = false;
  return S;
}

SimilarityMatrix build_md_similarity(const DataMatrix& X, const CovarianceModel& model,
                                     Notes* notes) {
  const Eigen::Index n = X.n();
  const Eigen::Index d = X.dim();
  if (model.matrices.empty())
    throw Error(Errc::InvalidArgument, "covariance model has no matrices");

  // Whiten per covariance matrix: with Z = X L^-T the quadratic form is a
  // plain squared distance, q_ij = ||z_j - z_i||^2.
  std::vector<Eigen::MatrixXd> whitened(model.matrices.size());
  for (size_t m = 0; m < model.matrices.size(); ++m) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.matrices[m]);
    if (llt.info() != Eigen::Success) {
      note(notes, "md similarity: covariance " + std::to_string(m) +
                      " not invertible; identity fallback");
      whitened[m] = X.values;
      continue;
    }
    whitened[m] =
        llt.matrixL().solve(X.values.transpose()).transpose();
  }

  SimilarityMatrix S;
  S.values.resize(n, n);
  parallel_for(0, static_cast<size_t>(n), [&](size_t row) {
    const Eigen::Index i = static_cast<Eigen::Index>(row);
    const int m = model.assignment.empty() ? 0 : model.assignment[i];
    const Eigen::MatrixXd& z = whitened[m];
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) {
        S.values(i, i) = 1.0;
        continue;
      }
      const double q = (z.row(j) - z.row(i)).squaredNorm();
      S.values(i, j) = 1.0 / (1.0 + q);
    }
  });
  S.symmetric = model.kind != CovarianceModel::Kind::PerClusterEev;
  return S;
}

SimilarityMatrix symmetrize(const SimilarityMatrix& S) {
  SimilarityMatrix out;
  out.values = 0.5 * (S.values + S.values.transpose());
  out.symmetric = true;
  return out;
}

void save_similarity(const SimilarityMatrix& S, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot open similarity cache for writing: " + path);
  const char magic[8] = {'D', 'L', 'C', 'C', 'S', 'I', 'M', '1'};
  const uint32_t n = static_cast<uint32_t>(S.n());
  const uint32_t flags = S.symmetric ? 1u : 0u;
  f.write(magic, 8);
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(&flags), 4);
  // Row-major on disk regardless of in-memory layout.
  std::vector<double> row(n);
  for (uint32_t i = 0; i < n; ++i) {
    for (uint32_t j = 0; j < n; ++j) row[j] = S.values(i, j);
    f.write(reinterpret_cast<const char*>(row.data()), sizeof(double) * n);
  }
  if (!f) throw Error(Errc::Io, "failed writing similarity cache: " + path);
}

SimilarityMatrix load_similarity(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot open similarity cache: " + path);
  char magic[8];
  uint32_t n = 0, flags = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&n), 4);
  f.read(reinterpret_cast<char*>(&flags), 4);
  if (!f || std::memcmp(magic, "DLCCSIM1", 8) != 0)
    throw Error(Errc::Parse, "not a DLCC similarity cache: " + path);
  SimilarityMatrix S;
  S.values.resize(n, n);
  std::vector<double> row(n);
  for (uint32_t i = 0; i < n; ++i) {
    f.read(reinterpret_cast<char*>(row.data()), sizeof(double) * n);
    if (!f) throw Error(Errc::Parse, "similarity cache truncated: " + path);
    for (uint32_t j = 0; j < n; ++j) S.values(i, j) = row[j];
  }
  S.symmetric = (flags & 1u) != 0;
  return S;
}

}  // namespace dlcc
