#include "covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "depth.hpp"

namespace dlcc {
namespace {

constexpr double kEmRelTol = 1e-7;
constexpr int kEmMaxIters = 500;

struct Degenerate {};

std::vector<double> eigen_proportions(const Eigen::VectorXd& eigenvalues_desc) {
  std::vector<double> vp(eigenvalues_desc.size());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues_desc.size(); ++i) {
    vp[i] = std::max(eigenvalues_desc[i], 0.0);
    sum += vp[i];
  }
  if (sum <= 0.0) throw Error(Errc::SingularCovariance, "all eigenvalues vanish");
  for (double& v : vp) v /= sum;
  return vp;
}

// Eigen returns ascending eigenvalues; flip to descending.
void eig_descending(const Eigen::MatrixXd& sym, Eigen::VectorXd& values,
                    Eigen::MatrixXd& vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw Degenerate{};
  values = es.eigenvalues().reverse();
  vectors = es.eigenvectors().rowwise().reverse();
}

// k-means++ seeding followed by a few Lloyd rounds; returns hard assignments.
std::vector<int> kmeans_init(const Eigen::MatrixXd& X, int k, Rng& rng) {
  const Eigen::Index n = X.rows();
  std::vector<Eigen::VectorXd> centers;
  centers.reserve(k);
  centers.push_back(X.row(static_cast<Eigen::Index>(rng.index(n))).transpose());
  Eigen::VectorXd dist2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    dist2[i] = (X.row(i).transpose() - centers[0]).squaredNorm();
  while (static_cast<int>(centers.size()) < k) {
    const double total = dist2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += dist2[i];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.index(n));
    }
    centers.push_back(X.row(pick).transpose());
    for (Eigen::Index i = 0; i < n; ++i)
      dist2[i] = std::min(dist2[i], (X.row(i).transpose() - centers.back()).squaredNorm());
  }

  std::vector<int> assign(n, 0);
  for (int iter = 0; iter < 20; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double bestd = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (X.row(i).transpose() - centers[c]).squaredNorm();
        if (d < bestd) {
          bestd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    std::vector<Eigen::VectorXd> sums(k, Eigen::VectorXd::Zero(X.cols()));
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums[assign[i]] += X.row(i).transpose();
      counts[assign[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed an emptied cluster at the point farthest from its center.
        Eigen::Index far = 0;
        double fard = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (X.row(i).transpose() - centers[assign[i]]).squaredNorm();
          if (d > fard) {
            fard = d;
            far = i;
          }
        }
        centers[c] = X.row(far).transpose();
        changed = true;
      } else {
        centers[c] = sums[c] / counts[c];
      }
    }
    if (!changed) break;
  }
  return assign;
}

int eev_free_parameters(int k, int d) {
  return k * d + (k - 1) + 1 + (d - 1) + k * d * (d - 1) / 2;
}

EevFit fit_eev_single(const DataMatrix& X, int k, uint64_t seed) {
  const Eigen::Index n = X.n();
  const Eigen::Index d = X.dim();
  Rng rng(seed);

  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k);
  {
    std::vector<int> assign = kmeans_init(X.values, k, rng);
    for (Eigen::Index i = 0; i < n; ++i) resp(i, assign[i]) = 1.0;
  }

  EevFit fit;
  fit.k = k;
  fit.gammas.assign(k, Eigen::MatrixXd::Identity(d, d));
  fit.means.assign(k, Eigen::VectorXd::Zero(d));
  fit.weights = Eigen::VectorXd::Constant(k, 1.0 / k);

  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < kEmMaxIters; ++iter) {
    // M-step: weighted scatters; shared volume/shape via summed eigenvalues.
    Eigen::VectorXd nk = resp.colwise().sum();
    if ((nk.array() < 1e-10).any()) throw Degenerate{};
    fit.weights = nk / static_cast<double>(n);
    std::vector<Eigen::MatrixXd> scatter(k, Eigen::MatrixXd::Zero(d, d));
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd mu = (resp.col(c).transpose() * X.values).transpose() / nk[c];
      fit.means[c] = mu;
      Eigen::MatrixXd centered = X.values.rowwise() - mu.transpose();
      scatter[c] = centered.transpose() * (resp.col(c).asDiagonal() * centered);
    }
    Eigen::VectorXd omega_bar = Eigen::VectorXd::Zero(d);
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd vals;
      Eigen::MatrixXd vecs;
      eig_descending(scatter[c], vals, vecs);
      if (vals[d - 1] < -1e-9 * std::max(1.0, vals[0])) throw Degenerate{};
      fit.gammas[c] = vecs;
      omega_bar += vals.cwiseMax(0.0);
    }
    if (omega_bar[d - 1] <= 1e-12 * omega_bar[0] || omega_bar[0] <= 0.0)
      throw Degenerate{};
    double log_geo = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) log_geo += std::log(omega_bar[j]);
    log_geo /= static_cast<double>(d);
    const double geo = std::exp(log_geo);
    fit.lambda = geo / static_cast<double>(n);
    fit.delta = omega_bar / geo;

    // E-step; |Sigma_c| = lambda^d is shared so the log-determinant is common.
    const double logdet = d * std::log(fit.lambda);
    Eigen::VectorXd inv_scale = (fit.lambda * fit.delta.array()).inverse();
    Eigen::MatrixXd logp(n, k);
    for (int c = 0; c < k; ++c) {
      Eigen::MatrixXd centered = X.values.rowwise() - fit.means[c].transpose();
      Eigen::MatrixXd proj = centered * fit.gammas[c];  // n x d
      Eigen::VectorXd mahal = (proj.array().square().rowwise() *
                               inv_scale.transpose().array())
                                  .rowwise()
                                  .sum();
      logp.col(c) = (std::log(fit.weights[c]) - 0.5 * (d * log2pi + logdet)) -
                    0.5 * mahal.array();
    }
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = logp.row(i).maxCoeff();
      double sum = 0.0;
      for (int c = 0; c < k; ++c) sum += std::exp(logp(i, c) - m);
      const double lse = m + std::log(sum);
      ll += lse;
      for (int c = 0; c < k; ++c) resp(i, c) = std::exp(logp(i, c) - lse);
    }
    if (ll + 1e-8 * (1.0 + std::abs(ll)) < prev_ll)
      throw Error(Errc::Internal, "EEV EM log-likelihood decreased");
    fit.loglik_history.push_back(ll);
    const bool converged =
        iter > 0 && std::abs(ll - prev_ll) <= kEmRelTol * std::max(1.0, std::abs(ll));
    prev_ll = ll;
    fit.loglik = ll;
    if (converged) break;
  }

  fit.responsibilities = resp;
  fit.assignment.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < k; ++c)
      if (resp(i, c) > resp(i, best)) best = c;
    fit.assignment[i] = best;
  }
  fit.bic = -2.0 * fit.loglik +
            eev_free_parameters(k, static_cast<int>(d)) * std::log(static_cast<double>(n));
  return fit;
}

}  // namespace

PcaGate pca_gate(const std::vector<double>& vp) {
  const int d = static_cast<int>(vp.size());
  if (d < 1) throw Error(Errc::InvalidArgument, "empty variance proportions");
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    if (vp[i] < -1e-12) throw Error(Errc::InvalidArgument, "negative variance proportion");
    if (i > 0 && vp[i] > vp[i - 1] + 1e-12)
      throw Error(Errc::InvalidArgument, "variance proportions must descend");
    sum += vp[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(Errc::InvalidArgument, "variance proportions must sum to 1");

  if (vp[0] > 0.6) return PcaGate::Pass;
  int h = 0;
  for (double v : vp)
    if (v > 0.05) ++h;
  if (h == d) h = d - 1;
  double lead = 0.0;
  for (int i = 0; i < h; ++i) lead += vp[i];
  return lead > 0.95 ? PcaGate::Pass : PcaGate::Fail;
}

Eigen::MatrixXd EevFit::covariance(int component) const {
  return lambda * gammas[component] * delta.asDiagonal() *
         gammas[component].transpose();
}

std::vector<int> default_k_candidates(Eigen::Index n, Eigen::Index d) {
  const int cap = std::min<Eigen::Index>(9, n / (5 * d));
  std::vector<int> ks;
  for (int k = 1; k <= std::max(1, cap); ++k) ks.push_back(k);
  return ks;
}

EevFit fit_eev(const DataMatrix& X, const std::vector<int>& k_candidates,
               uint64_t seed, Notes* notes) {
  std::vector<EevFit> fits;
  for (int k : k_candidates) {
    if (!(X.n() > static_cast<Eigen::Index>(k) * X.dim())) {
      note(notes, "eev: skipped K=" + std::to_string(k) + " (n <= K*d)");
      continue;
    }
    try {
      fits.push_back(fit_eev_single(X, k, splitmix64(seed + static_cast<uint64_t>(k))));
    } catch (Degenerate&) {
      note(notes, "eev: K=" + std::to_string(k) + " degenerated");
    }
  }
  if (fits.empty())
    throw Error(Errc::SingularCovariance,
                "every EEV candidate degenerated; use a global or identity model");
  double best_bic = fits[0].bic;
  for (const auto& f : fits) best_bic = std::min(best_bic, f.bic);
  // Fewer components are preferred within the weak-evidence margin.
  for (const auto& f : fits)
    if (f.bic < best_bic + 2.0) return f;
  return fits.front();
}

const char* CovarianceModel::kind_name(Kind k) {
  switch (k) {
    case Kind::Global: return "global";
    case Kind::Identity: return "identity";
    case Kind::PerClusterEev: return "eev";
  }
  return "?";
}

CovarianceModel select_covariance_model(const DataMatrix& X, uint64_t seed,
                                        Notes* notes) {
  const Eigen::Index n = X.n();
  const Eigen::Index d = X.dim();
  CovarianceModel identity;
  identity.kind = CovarianceModel::Kind::Identity;
  identity.matrices = {Eigen::MatrixXd::Identity(d, d)};
  identity.assignment.assign(n, 0);

  Eigen::MatrixXd global_cov = sample_covariance(X.values);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(global_cov);
  if (es.info() != Eigen::Success) {
    note(notes, "covariance: global eigendecomposition failed; using identity");
    return identity;
  }
  Eigen::VectorXd evals = es.eigenvalues().reverse();
  if (evals[d - 1] <= 1e-12 * std::max(1.0, evals[0])) {
    note(notes, "covariance: global covariance is singular; using identity");
    return identity;
  }
  if (pca_gate(eigen_proportions(evals)) == PcaGate::Pass) {
    CovarianceModel m;
    m.kind = CovarianceModel::Kind::Global;
    m.matrices = {global_cov};
    m.assignment.assign(n, 0);
    return m;
  }

  EevFit fit;
  try {
    fit = fit_eev(X, default_k_candidates(n, d), seed, notes);
  } catch (const Error& e) {
    note(notes, std::string("covariance: ") + e.what() + "; using identity");
    return identity;
  }
  // Second gate run on the common EEV shape spectrum.
  if (pca_gate(eigen_proportions(fit.delta)) == PcaGate::Pass) {
    CovarianceModel m;
    m.kind = CovarianceModel::Kind::PerClusterEev;
    for (int c = 0; c < fit.k; ++c) m.matrices.push_back(fit.covariance(c));
    m.assignment = fit.assignment;
    return m;
  }
  return identity;
}

}  // namespace dlcc
