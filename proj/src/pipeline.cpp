#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <unordered_set>

namespace dlcc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<std::vector<int>> labels_to_clusters(const std::vector<int>& labels,
                                                 int k_count) {
  std::vector<std::vector<int>> clusters(k_count);
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) clusters[labels[i] - 1].push_back(static_cast<int>(i));
  return clusters;
}

}  // namespace

int refine_maxdepth(std::vector<int>& labels, const DataMatrix& X, DepthKind kind,
                    int cap, bool* converged, Notes* notes) {
  if (converged) *converged = true;
  if (cap <= 0) return 0;
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  std::unordered_set<uint64_t> seen{hash_labels(labels)};

  int sweeps = 0;
  for (; sweeps < cap; ++sweeps) {
    ClusterDepth eval(X, labels_to_clusters(labels, k_count), kind, notes);
    std::vector<int> next(labels.size());
    parallel_for(0, labels.size(), [&](size_t i) {
      int best = 1;
      double best_depth = -1.0;
      for (int k = 0; k < k_count; ++k) {
        const double d = eval.depth(static_cast<int>(i), k);
        if (d > best_depth) {
          best_depth = d;
          best = k + 1;
        }
      }
      next[i] = best;
    });
    if (next == labels) break;
    std::vector<int> sizes(k_count, 0);
    for (int l : next) sizes[l - 1]++;
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
      note(notes, "maxdepth: sweep would empty a cluster; reverted");
      break;
    }
    labels = std::move(next);
    const uint64_t h = hash_labels(labels);
    if (!seen.insert(h).second) {
      note(notes, "maxdepth: assignment cycle detected; stopping");
      if (converged) *converged = false;
      ++sweeps;
      break;
    }
  }
  if (sweeps == cap && converged) *converged = false;
  return sweeps;
}

int run_ifloop(std::vector<int>& labels,
               const std::vector<std::vector<int>>& group_center_obs,
               const Eigen::MatrixXd& S_sym, const DataMatrix& X, DepthKind kind,
               int cap, bool* converged, Notes* notes) {
  if (converged) *converged = true;
  if (cap <= 0) return 0;
  int k_count = 0;
  for (int l : labels) k_count = std::max(k_count, l);
  if (k_count < 2) return 0;
  std::vector<int> all_centers;
  for (const auto& g : group_center_obs)
    all_centers.insert(all_centers.end(), g.begin(), g.end());

  std::vector<int> reps(k_count, -1);
  std::unordered_set<uint64_t> seen{hash_labels(labels)};
  int iters = 0;
  for (; iters < cap; ++iters) {
    // Deepest filtered center within each cluster, by depth w.r.t. its
    // current members; a cluster holding no center falls back to its
    // original group's centers.
    auto clusters = labels_to_clusters(labels, k_count);
    ClusterDepth eval(X, clusters, kind, notes);
    for (int k = 0; k < k_count; ++k) {
      int best = -1;
      double best_depth = -1.0;
      auto consider = [&](int c) {
        const double d = eval.depth(c, k);
        if (d > best_depth || (d == best_depth && best >= 0 && c < best)) {
          best_depth = d;
          best = c;
        }
      };
      for (int c : all_centers)
        if (labels[c] == k + 1) consider(c);
      if (best < 0 && k < static_cast<int>(group_center_obs.size()))
        for (int c : group_center_obs[k]) consider(c);
      if (best >= 0) reps[k] = best;
      if (reps[k] < 0)
        throw Error(Errc::Internal, "ifloop: a cluster has no filtered center");
    }

    std::vector<int> next(labels.size());
    parallel_for(0, labels.size(), [&](size_t i) {
      int best = labels[i];
      double best_sim = -1.0;
      for (int k = 0; k < k_count; ++k) {
        const double v = S_sym(reps[k], static_cast<int>(i));
        if (v > best_sim) {
          best_sim = v;
          best = k + 1;
        }
      }
      next[i] = best_sim > 0.0 ? best : labels[i];
    });
    if (next == labels) break;
    std::vector<int> sizes(k_count, 0);
    for (int l : next) sizes[l - 1]++;
    if (std::find(sizes.begin(), sizes.end(), 0) != sizes.end()) {
      note(notes, "ifloop: iteration would empty a cluster; reverted");
      break;
    }
    labels = std::move(next);
    const uint64_t h = hash_labels(labels);
    if (!seen.insert(h).second) {
      note(notes, "ifloop: assignment cycle detected; stopping");
      if (converged) *converged = false;
      ++iters;
      break;
    }
  }
  if (iters == cap && converged) *converged = false;
  return iters;
}

SimilarityMatrix build_similarity(const DataMatrix& X, const DlccConfig& cfg,
                                  Notes* notes, std::string* model_name) {
  if (cfg.depth == DepthKind::SD) {
    if (model_name) *model_name = "none";
    return build_sd_similarity(X);
  }
  const bool force_global =
      cfg.md_force_global == 1 ||
      (cfg.md_force_global < 0 && cfg.strategy == Strategy::Max);
  CovarianceModel model;
  if (force_global) {
    model.kind = CovarianceModel::Kind::Global;
    model.matrices = {sample_covariance(X.values)};
    model.assignment.assign(X.n(), 0);
    Eigen::LLT<Eigen::MatrixXd> llt(model.matrices[0]);
    if (llt.info() != Eigen::Success) {
      note(notes, "similarity: global covariance singular; identity model");
      model.kind = CovarianceModel::Kind::Identity;
      model.matrices = {Eigen::MatrixXd::Identity(X.dim(), X.dim())};
    }
  } else {
    model = select_covariance_model(X, cfg.seed, notes);
  }
  SimilarityMatrix S = build_md_similarity(X, model, notes);
  if (model_name) *model_name = CovarianceModel::kind_name(model.kind);
  note(notes, std::string("similarity: md covariance model = ") +
                  CovarianceModel::kind_name(model.kind));
  return S;
}

namespace {

const char* classifier_name(Classifier c) {
  switch (c) {
    case Classifier::MDC: return "mdc";
    case Classifier::KNN: return "knn";
    case Classifier::RF: return "rf";
  }
  return "?";
}

void run_classifier(std::vector<int>& labels, const DlccConfig& cfg, const DataMatrix& X,
                    const Eigen::MatrixXd& S_sym, Notes* notes) {
  if (std::find(labels.begin(), labels.end(), 0) == labels.end()) return;
  switch (cfg.classifier) {
    case Classifier::MDC:
      classify_mdc(labels, X, cfg.depth, notes);
      break;
    case Classifier::KNN:
      classify_knn(labels, S_sym, cfg.knn_k);
      break;
    case Classifier::RF:
      classify_rf(labels, X, cfg.rf, notes);
      break;
  }
}

// Renumbers groups so cluster ids follow ascending smallest-center index.
std::vector<std::vector<int>> ordered_groups(std::vector<std::vector<int>> groups,
                                             const CenterSet& cs) {
  for (auto& g : groups) {
    std::sort(g.begin(), g.end(), [&](int a, int b) {
      return cs.centers[a].index < cs.centers[b].index;
    });
  }
  std::sort(groups.begin(), groups.end(), [&](const auto& a, const auto& b) {
    return cs.centers[a.front()].index < cs.centers[b.front()].index;
  });
  return groups;
}

}  // namespace

ClusteringResult run_dlcc(const DataMatrix& X, const DlccConfig& cfg,
                      const SimilarityMatrix* precomputed, const std::vector<int>* truth) {
  (void)truth;
  const int n = static_cast<int>(X.n());
  ClusteringResult result;
  result.strategy = cfg.strategy;
  Diagnostics& diag = result.diag;
  Notes* notes = &diag.notes;
  diag.classifier = classifier_name(cfg.classifier);

  int s = cfg.s;
  if (s <= 0) {
    s = cfg.strategy == Strategy::Min
            ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))))
            : 12;
    s = std::clamp(s, 2, n);
  }
  diag.s = s;
  if (cfg.ifloop && cfg.strategy == Strategy::Max)
    note(notes, "config: ifloop is only meaningful under the min strategy; ignored");

  auto t0 = Clock::now();
  SimilarityMatrix S;
  if (precomputed) {
    S = *precomputed;
    diag.covariance_model = "precomputed";
  } else {
    S = build_similarity(X, cfg, notes, &diag.covariance_model);
  }
  diag.timing_ms["similarity"] = ms_since(t0);

  t0 = Clock::now();
  std::vector<Neighborhood> neighborhoods = build_neighborhoods(S, s);
  CenterDetection det = detect_centers(neighborhoods, X, cfg.depth);
  CenterSet cs;
  cs.centers = det.centers;
  cs.M = center_similarity(det.centers, neighborhoods, s);
  cs.neighborhoods = &neighborhoods;
  cs.s = s;
  cs.n = n;
  diag.timing_ms["centers"] = ms_since(t0);

  t0 = Clock::now();
  Eigen::MatrixXd S_sym = symmetrize(S).values;
  std::vector<int> labels(n, 0);
  std::vector<std::vector<int>> group_center_obs;

  if (cfg.strategy == Strategy::Min) {
    std::vector<int> survivors = filter_min(cs, cfg.group_delta_lo, cfg.group_delta_hi, notes);
    GroupingState grouped = group_by_local_depth(survivors, cs, cfg.group_delta_lo,
                                                 cfg.group_delta_hi, notes);
    grouped = trim_groups(std::move(grouped), cs, cfg.k, notes);
    auto groups = ordered_groups(grouped.groups, cs);
    result.k = static_cast<int>(groups.size());
    for (const auto& g : groups) {
      std::vector<int> obs;
      for (int pos : g) obs.push_back(cs.centers[pos].index);
      group_center_obs.push_back(std::move(obs));
    }

    if (result.k == 1) {
      std::fill(labels.begin(), labels.end(), 1);
    } else {
      auto u = unique_neighbors(groups, cs);
      ScorePools pools = init_score_pools(group_center_obs, u, S_sym, n);
      pools = update_temporary_clusters(std::move(pools), s);
      for (size_t g = 0; g < pools.accepted.size(); ++g)
        for (auto& [obs, sc] : pools.accepted[g]) labels[obs] = static_cast<int>(g) + 1;
    }
  } else {
    CenterPartition part = partition_centers(cs);
    std::vector<int> kept = segregate_nonconvex(part, cs, notes);
    Eigen::MatrixXd M_c(kept.size(), kept.size());
    for (size_t a = 0; a < kept.size(); ++a)
      for (size_t b = 0; b < kept.size(); ++b) M_c(a, b) = cs.M(kept[a], kept[b]);

    double delta;
    if (cfg.delta) {
      delta = *cfg.delta;
    } else if (cfg.k) {
      HierarchyTrace trace = hierarchy_trace(M_c);
      delta = -1.0;
      for (size_t m = 0; m < trace.group_counts.size(); ++m)
        if (trace.group_counts[m] == *cfg.k) {
          delta = trace.deltas[m];
          break;
        }
      if (delta < 0.0)
        throw Error(Errc::UnsatisfiableK,
                    "no similarity threshold yields K=" + std::to_string(*cfg.k) + " groups");
    } else {
      throw Error(Errc::InvalidArgument,
                  "max strategy needs --delta or --k (or a sweep)");
    }
    diag.delta = delta;

    auto groups_local = group_at_delta(M_c, delta);
    std::vector<std::vector<int>> groups;
    for (auto& g : groups_local) {
      std::vector<int> full;
      for (int idx : g) full.push_back(kept[idx]);
      groups.push_back(std::move(full));
    }
    groups = ordered_groups(std::move(groups), cs);
    result.k = static_cast<int>(groups.size());
    for (const auto& g : groups) {
      std::vector<int> obs;
      for (int pos : g) obs.push_back(cs.centers[pos].index);
      group_center_obs.push_back(std::move(obs));
    }

    if (result.k == 1) {
      std::fill(labels.begin(), labels.end(), 1);
    } else {
      for (int i = 0; i < n; ++i) {
        std::vector<double> scores = score_max(i, groups, cs);
        int best = -1;
        bool unique = false;
        double best_score = 0.0;
        for (size_t g = 0; g < scores.size(); ++g) {
          if (scores[g] > best_score) {
            best_score = scores[g];
            best = static_cast<int>(g);
            unique = true;
          } else if (scores[g] == best_score && best >= 0) {
            unique = false;
          }
        }
        labels[i] = (best >= 0 && unique && best_score > 0.0) ? best + 1 : 0;
      }
    }
  }
  diag.timing_ms["grouping"] = ms_since(t0);

  t0 = Clock::now();
  run_classifier(labels, cfg, X, S_sym, notes);
  diag.timing_ms["classification"] = ms_since(t0);

  t0 = Clock::now();
  diag.refine_iterations = 0;
  diag.converged = true;
  if (cfg.ifloop && cfg.strategy == Strategy::Min && result.k >= 2) {
    bool conv = true;
    diag.refine_iterations += run_ifloop(labels, group_center_obs, S_sym, X, cfg.depth,
                                         cfg.iteration_cap, &conv, notes);
    diag.converged = diag.converged && conv;
  }
  if (cfg.maxdepth && result.k >= 2) {
    bool conv = true;
    diag.refine_iterations +=
        refine_maxdepth(labels, X, cfg.depth, cfg.iteration_cap, &conv, notes);
    diag.converged = diag.converged && conv;
  }
  diag.timing_ms["refinement"] = ms_since(t0);

  result.labels = std::move(labels);
  try {
    diag.dc = dc_metric(S_sym, result.labels, cfg.ntilde).dc;
  } catch (const Error& e) {
    note(notes, std::string("dc: ") + e.what());
  }
  return result;
}

std::vector<int> default_s_grid(const DlccConfig& cfg, Eigen::Index n) {
  std::set<int> grid;
  if (cfg.strategy == Strategy::Min) {
    const int root = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    grid = {std::max(4, (root + 1) / 2), root, 2 * root};
  } else {
    grid = {8, 12, 16, 24};
  }
  std::vector<int> out;
  for (int s : grid)
    if (s >= 2 && s <= n) out.push_back(s);
  if (out.empty()) out.push_back(std::min<int>(static_cast<int>(n), 4));
  return out;
}

SweepOutcome sweep(const DataMatrix& X, const DlccConfig& cfg,
                   const std::vector<int>& s_values, const std::vector<int>* truth) {
  Notes sim_notes;
  SimilarityMatrix S = build_similarity(X, cfg, &sim_notes);

  struct Cell {
    DlccConfig cfg;
    SweepCell entry;
    std::optional<ClusteringResult> result;
  };
  std::vector<Cell> cells;
  for (int s : s_values) {
    if (cfg.strategy == Strategy::Min) {
      Cell c;
      c.cfg = cfg;
      c.cfg.s = s;
      c.entry.s = s;
      cells.push_back(std::move(c));
      continue;
    }
    // Max strategy: delta candidates come from the hierarchy at this s.
    std::vector<double> deltas;
    try {
      std::vector<Neighborhood> nbh = build_neighborhoods(S, s);
      CenterDetection det = detect_centers(nbh, X, cfg.depth);
      CenterSet cs;
      cs.centers = det.centers;
      cs.M = center_similarity(det.centers, nbh, s);
      cs.neighborhoods = &nbh;
      cs.s = s;
      cs.n = static_cast<int>(X.n());
      std::vector<int> kept = segregate_nonconvex(partition_centers(cs), cs, nullptr);
      Eigen::MatrixXd M_c(kept.size(), kept.size());
      for (size_t a = 0; a < kept.size(); ++a)
        for (size_t b = 0; b < kept.size(); ++b) M_c(a, b) = cs.M(kept[a], kept[b]);
      if (cfg.delta) {
        deltas = {*cfg.delta};
      } else {
        HierarchyTrace trace = hierarchy_trace(M_c);
        for (size_t m = 0; m < trace.group_counts.size(); ++m) {
          if (cfg.k && trace.group_counts[m] != *cfg.k) continue;
          deltas.push_back(trace.deltas[m]);
        }
      }
    } catch (const Error& e) {
      Cell c;
      c.cfg = cfg;
      c.cfg.s = s;
      c.entry.s = s;
      c.entry.status = e.what();
      cells.push_back(std::move(c));
      continue;
    }
    for (double d : deltas) {
      Cell c;
      c.cfg = cfg;
      c.cfg.s = s;
      c.cfg.delta = d;
      c.cfg.k.reset();
      c.entry.s = s;
      c.entry.delta = d;
      cells.push_back(std::move(c));
    }
  }

  parallel_for(0, cells.size(), [&](size_t i) {
    Cell& c = cells[i];
    if (!c.entry.status.empty()) return;  // construction already failed
    try {
      ClusteringResult r = run_dlcc(X, c.cfg, &S, truth);
      c.entry.k = r.k;
      c.entry.dc = r.diag.dc;
      c.entry.delta = r.diag.delta;
      if (truth) c.entry.ari = ari(r.labels, *truth);
      c.entry.status = std::isnan(r.diag.dc) ? "dc unavailable" : "ok";
      c.result = std::move(r);
    } catch (const Error& e) {
      c.entry.status = e.what();
    } catch (const std::exception& e) {
      c.entry.status = e.what();
    }
  });

  std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    const bool ok_a = a.entry.status == "ok", ok_b = b.entry.status == "ok";
    if (ok_a != ok_b) return ok_a;
    if (ok_a && a.entry.dc != b.entry.dc) return a.entry.dc > b.entry.dc;
    if (a.entry.s != b.entry.s) return a.entry.s < b.entry.s;
    return a.entry.delta.value_or(-1.0) > b.entry.delta.value_or(-1.0);
  });

  SweepOutcome out;
  for (auto& c : cells) out.leaderboard.push_back(c.entry);
  for (auto& c : cells)
    if (c.entry.status == "ok" && c.result) {
      out.best = std::move(*c.result);
      for (auto& c2 : cells) c2.result.reset();
      return out;
    }
  throw Error(Errc::NoCenters, "sweep: every cell failed (" +
                                   (cells.empty() ? std::string("empty grid")
                                                  : cells.front().entry.status) +
                                   ")");
}

}  // namespace dlcc
