#include "dlcc/dlcc.h"

#include <cmath>
#include <cstring>
#include <string>

#include "dataset.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "report.hpp"
#include "similarity.hpp"

using namespace dlcc;

struct dlcc_dataset {
  Dataset ds;
};

struct dlcc_result {
  RunReport report;
};

namespace {

thread_local std::string g_last_error;

dlcc_status to_status(const Error& e) {
  switch (e.code()) {
    case Errc::InvalidArgument: return DLCC_ERR_INVALID_ARGUMENT;
    case Errc::Io: return DLCC_ERR_IO;
    case Errc::Parse: return DLCC_ERR_PARSE;
    case Errc::DuplicateRows: return DLCC_ERR_DUPLICATE_ROWS;
    case Errc::SingularCovariance: return DLCC_ERR_SINGULAR;
    case Errc::NoCenters: return DLCC_ERR_NO_CENTERS;
    case Errc::UnsatisfiableK: return DLCC_ERR_UNSATISFIABLE_K;
    case Errc::UndersizedCluster: return DLCC_ERR_UNDERSIZED_CLUSTER;
    case Errc::Internal: return DLCC_ERR_INTERNAL;
  }
  return DLCC_ERR_INTERNAL;
}

template <typename Fn>
dlcc_status guarded(Fn&& fn) {
  try {
    fn();
    return DLCC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DLCC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DLCC_ERR_INTERNAL;
  }
}

DlccConfig to_internal(const dlcc_config& c) {
  DlccConfig cfg;
  cfg.depth = c.depth == DLCC_DEPTH_SD ? DepthKind::SD : DepthKind::MD;
  cfg.strategy = c.strategy == DLCC_STRATEGY_MAX ? Strategy::Max : Strategy::Min;
  cfg.s = c.s;
  if (c.delta >= 0.0) cfg.delta = c.delta;
  if (c.k > 0) cfg.k = c.k;
  cfg.classifier = c.classifier == DLCC_CLASSIFIER_KNN  ? Classifier::KNN
                   : c.classifier == DLCC_CLASSIFIER_RF ? Classifier::RF
                                                        : Classifier::MDC;
  cfg.maxdepth = c.maxdepth != 0;
  cfg.ifloop = c.ifloop != 0;
  cfg.knn_k = c.knn_k;
  cfg.rf.trees = c.rf_trees;
  cfg.rf.max_features = c.rf_max_features;
  cfg.rf.seed = c.rf_seed;
  cfg.iteration_cap = c.iteration_cap;
  cfg.md_force_global = c.md_force_global;
  cfg.group_delta_lo = c.group_delta_lo;
  cfg.group_delta_hi = c.group_delta_hi;
  cfg.seed = c.seed;
  cfg.ntilde = c.ntilde;
  return cfg;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void attach_truth_metrics(RunReport& report, const Dataset& ds) {
  if (!ds.has_labels()) return;
  report.ari_value = ari(report.result.labels, ds.labels);
  report.ce_value = ce(report.result.labels, ds.labels);
}

}  // namespace

extern "C" {

void dlcc_config_init(dlcc_config* cfg) {
  if (!cfg) return;
  cfg->depth = DLCC_DEPTH_MD;
  cfg->strategy = DLCC_STRATEGY_MIN;
  cfg->s = 0;
  cfg->delta = -1.0;
  cfg->k = 0;
  cfg->classifier = DLCC_CLASSIFIER_MDC;
  cfg->maxdepth = 0;
  cfg->ifloop = 0;
  cfg->knn_k = 0;
  cfg->rf_trees = 200;
  cfg->rf_max_features = 0;
  cfg->rf_seed = 1;
  cfg->iteration_cap = 100;
  cfg->md_force_global = -1;
  cfg->group_delta_lo = 0.4;
  cfg->group_delta_hi = 0.75;
  cfg->seed = 1;
  cfg->ntilde = 3;
}

const char* dlcc_last_error(void) { return g_last_error.c_str(); }

dlcc_status dlcc_dataset_from_csv(const char* path, const char* label_column,
                                  dlcc_dataset** out) {
  return guarded([&] {
    if (!path || !out) throw Error(Errc::InvalidArgument, "null argument");
    std::optional<std::string> label;
    if (label_column) label = label_column;
    *out = new dlcc_dataset{load_csv(path, label)};
  });
}

dlcc_status dlcc_dataset_from_values(const double* values, size_t n, size_t d,
                                     dlcc_dataset** out) {
  return guarded([&] {
    if (!values || !out) throw Error(Errc::InvalidArgument, "null argument");
    Eigen::MatrixXd m(n, d);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < d; ++j) m(i, j) = values[i * d + j];
    Dataset ds;
    ds.X = DataMatrix::validated(std::move(m));
    *out = new dlcc_dataset{std::move(ds)};
  });
}

dlcc_status dlcc_dataset_generate(const char* kind, size_t n, double noise,
                                  uint64_t seed, dlcc_dataset** out) {
  return guarded([&] {
    if (!kind || !out) throw Error(Errc::InvalidArgument, "null argument");
    *out = new dlcc_dataset{generate(kind, n, noise, seed)};
  });
}

size_t dlcc_dataset_rows(const dlcc_dataset* ds) {
  return ds ? static_cast<size_t>(ds->ds.X.n()) : 0;
}

size_t dlcc_dataset_cols(const dlcc_dataset* ds) {
  return ds ? static_cast<size_t>(ds->ds.X.dim()) : 0;
}

int dlcc_dataset_has_labels(const dlcc_dataset* ds) {
  return ds && ds->ds.has_labels() ? 1 : 0;
}

dlcc_status dlcc_dataset_labels(const dlcc_dataset* ds, int32_t* out) {
  return guarded([&] {
    if (!ds || !out) throw Error(Errc::InvalidArgument, "null argument");
    if (!ds->ds.has_labels()) throw Error(Errc::InvalidArgument, "dataset has no labels");
    for (size_t i = 0; i < ds->ds.labels.size(); ++i) out[i] = ds->ds.labels[i];
  });
}

dlcc_status dlcc_dataset_write_csv(const dlcc_dataset* ds, const char* path,
                                   int include_labels) {
  return guarded([&] {
    if (!ds || !path) throw Error(Errc::InvalidArgument, "null argument");
    save_csv(ds->ds, path, include_labels != 0);
  });
}

void dlcc_dataset_free(dlcc_dataset* ds) { delete ds; }

dlcc_status dlcc_run(const dlcc_dataset* ds, const dlcc_config* cfg, dlcc_result** out) {
  return guarded([&] {
    if (!ds || !cfg || !out) throw Error(Errc::InvalidArgument, "null argument");
    RunReport report;
    report.config = to_internal(*cfg);
    report.result = run_dlcc(ds->ds.X, report.config);
    report.config.s = report.result.diag.s;
    attach_truth_metrics(report, ds->ds);
    *out = new dlcc_result{std::move(report)};
  });
}

dlcc_status dlcc_sweep(const dlcc_dataset* ds, const dlcc_config* cfg,
                       const int* s_values, size_t s_count, dlcc_result** out) {
  return guarded([&] {
    if (!ds || !cfg || !out) throw Error(Errc::InvalidArgument, "null argument");
    DlccConfig internal = to_internal(*cfg);
    std::vector<int> grid;
    if (s_values && s_count > 0)
      grid.assign(s_values, s_values + s_count);
    else
      grid = default_s_grid(internal, ds->ds.X.n());
    const std::vector<int>* truth = ds->ds.has_labels() ? &ds->ds.labels : nullptr;
    SweepOutcome outcome = sweep(ds->ds.X, internal, grid, truth);
    RunReport report;
    report.config = internal;
    report.config.s = outcome.best.diag.s;
    report.config.delta = outcome.best.diag.delta;
    report.result = std::move(outcome.best);
    report.leaderboard = std::move(outcome.leaderboard);
    attach_truth_metrics(report, ds->ds);
    *out = new dlcc_result{std::move(report)};
  });
}

size_t dlcc_result_size(const dlcc_result* r) {
  return r ? r->report.result.labels.size() : 0;
}

int dlcc_result_k(const dlcc_result* r) { return r ? r->report.result.k : 0; }

dlcc_status dlcc_result_labels(const dlcc_result* r, int32_t* out) {
  return guarded([&] {
    if (!r || !out) throw Error(Errc::InvalidArgument, "null argument");
    for (size_t i = 0; i < r->report.result.labels.size(); ++i)
      out[i] = r->report.result.labels[i];
  });
}

double dlcc_result_dc(const dlcc_result* r) {
  return r ? r->report.result.diag.dc : std::nan("");
}

double dlcc_result_ari(const dlcc_result* r) {
  return r && r->report.ari_value ? *r->report.ari_value : std::nan("");
}

double dlcc_result_ce(const dlcc_result* r) {
  return r && r->report.ce_value ? *r->report.ce_value : std::nan("");
}

dlcc_status dlcc_result_report_json(const dlcc_result* r, int stable_output, char** out) {
  return guarded([&] {
    if (!r || !out) throw Error(Errc::InvalidArgument, "null argument");
    *out = dup_string(report_json(r->report, stable_output != 0));
  });
}

dlcc_status dlcc_result_labels_csv(const dlcc_result* r, char** out) {
  return guarded([&] {
    if (!r || !out) throw Error(Errc::InvalidArgument, "null argument");
    *out = dup_string(labels_csv_string(r->report.result.labels));
  });
}

dlcc_status dlcc_result_svg(const dlcc_result* r, const dlcc_dataset* ds, char** out) {
  return guarded([&] {
    if (!r || !ds || !out) throw Error(Errc::InvalidArgument, "null argument");
    *out = dup_string(svg_scatter(ds->ds.X, r->report.result.labels));
  });
}

void dlcc_result_free(dlcc_result* r) { delete r; }

void dlcc_string_free(char* s) { std::free(s); }

dlcc_status dlcc_similarity_save(const dlcc_dataset* ds, const dlcc_config* cfg,
                                 const char* path, int symmetric) {
  return guarded([&] {
    if (!ds || !cfg || !path) throw Error(Errc::InvalidArgument, "null argument");
    DlccConfig internal = to_internal(*cfg);
    SimilarityMatrix S = build_similarity(ds->ds.X, internal);
    if (symmetric) S = symmetrize(S);
    save_similarity(S, path);
  });
}

dlcc_status dlcc_score_labels(const char* labels_csv_path,
                              const char* similarity_cache_path,
                              const char* truth_csv_path_or_null, int ntilde,
                              char** json_out) {
  return guarded([&] {
    if (!labels_csv_path || !similarity_cache_path || !json_out)
      throw Error(Errc::InvalidArgument, "null argument");
    std::vector<int> labels = load_labels_csv(labels_csv_path);
    SimilarityMatrix S = load_similarity(similarity_cache_path);
    if (static_cast<size_t>(S.n()) != labels.size())
      throw Error(Errc::InvalidArgument,
                  "labels and similarity cache describe different sizes");
    if (!S.symmetric) S = symmetrize(S);
    DcReport dc = dc_metric(S.values, labels, ntilde > 0 ? ntilde : 3);
    std::string json = "{\n  \"schema\": \"dlcc-score/1\",\n  \"dc\": " +
                       std::to_string(dc.dc) + ",\n  \"eta_x\": " +
                       std::to_string(dc.eta_x);
    if (truth_csv_path_or_null) {
      std::vector<int> truth = load_labels_csv(truth_csv_path_or_null);
      if (truth.size() != labels.size())
        throw Error(Errc::InvalidArgument, "truth labels length mismatch");
      json += ",\n  \"ari\": " + std::to_string(ari(labels, truth));
      json += ",\n  \"ce\": " + std::to_string(ce(labels, truth));
    }
    json += "\n}\n";
    *json_out = dup_string(json);
  });
}

double dlcc_ari(const int32_t* a, const int32_t* b, size_t n) {
  std::vector<int> va(a, a + n), vb(b, b + n);
  try {
    return ari(va, vb);
  } catch (...) {
    return std::nan("");
  }
}

double dlcc_ce(const int32_t* a, const int32_t* b, size_t n) {
  std::vector<int> va(a, a + n), vb(b, b + n);
  try {
    return ce(va, vb);
  } catch (...) {
    return std::nan("");
  }
}

}  // extern "C"
