/* dlcc.h - C API for the DLCC clustering library.
 *
 * All functions returning dlcc_status report failure details through
 * dlcc_last_error(), a thread-local message. Objects are opaque handles
 * released with their matching *_free function. Strings returned through
 * char** out-parameters are released with dlcc_string_free.
 */
#ifndef DLCC_H
#define DLCC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dlcc_status {
  DLCC_OK = 0,
  DLCC_ERR_INVALID_ARGUMENT = 1,
  DLCC_ERR_IO = 2,
  DLCC_ERR_PARSE = 3,
  DLCC_ERR_DUPLICATE_ROWS = 4,
  DLCC_ERR_SINGULAR = 5,
  DLCC_ERR_NO_CENTERS = 6,
  DLCC_ERR_UNSATISFIABLE_K = 7,
  DLCC_ERR_UNDERSIZED_CLUSTER = 8,
  DLCC_ERR_INTERNAL = 9
} dlcc_status;

typedef struct dlcc_dataset dlcc_dataset;
typedef struct dlcc_result dlcc_result;

enum { DLCC_DEPTH_MD = 0, DLCC_DEPTH_SD = 1 };
enum { DLCC_STRATEGY_MIN = 0, DLCC_STRATEGY_MAX = 1 };
enum { DLCC_CLASSIFIER_MDC = 0, DLCC_CLASSIFIER_KNN = 1, DLCC_CLASSIFIER_RF = 2 };

typedef struct dlcc_config {
  int depth;              /* DLCC_DEPTH_* */
  int strategy;           /* DLCC_STRATEGY_* */
  int s;                  /* neighborhood size; <= 0 selects the default */
  double delta;           /* max-strategy threshold; < 0 means unset */
  int k;                  /* target cluster count; <= 0 means unset */
  int classifier;         /* DLCC_CLASSIFIER_* */
  int maxdepth;           /* nonzero enables maxdepth refinement */
  int ifloop;             /* nonzero enables ifloop (min strategy only) */
  int knn_k;              /* 0 selects ceil(sqrt(#labeled)) */
  int rf_trees;           /* default 200 */
  int rf_max_features;    /* 0 selects ceil(sqrt(d)) */
  uint64_t rf_seed;       /* random forest seed */
  int iteration_cap;      /* maxdepth / ifloop sweep cap, default 100 */
  int md_force_global;    /* -1 auto (global under max strategy), 0 off, 1 on */
  double group_delta_lo;  /* grouping threshold clamp, default 0.4 */
  double group_delta_hi;  /* grouping threshold clamp, default 0.75 */
  uint64_t seed;          /* covariance-model fitting seed */
  int ntilde;             /* DC metric minimum cluster size, default 3 */
} dlcc_config;

void dlcc_config_init(dlcc_config* cfg);

/* Thread-local message describing the most recent failure. */
const char* dlcc_last_error(void);

/* ---- datasets ---- */
dlcc_status dlcc_dataset_from_csv(const char* path, const char* label_column,
                                  dlcc_dataset** out);
dlcc_status dlcc_dataset_from_values(const double* values, size_t n, size_t d,
                                     dlcc_dataset** out);
dlcc_status dlcc_dataset_generate(const char* kind, size_t n, double noise,
                                  uint64_t seed, dlcc_dataset** out);
size_t dlcc_dataset_rows(const dlcc_dataset* ds);
size_t dlcc_dataset_cols(const dlcc_dataset* ds);
int dlcc_dataset_has_labels(const dlcc_dataset* ds);
/* Fills `out` (length dlcc_dataset_rows) with ground-truth labels, 1-based. */
dlcc_status dlcc_dataset_labels(const dlcc_dataset* ds, int32_t* out);
dlcc_status dlcc_dataset_write_csv(const dlcc_dataset* ds, const char* path,
                                   int include_labels);
void dlcc_dataset_free(dlcc_dataset* ds);

/* ---- clustering ---- */
dlcc_status dlcc_run(const dlcc_dataset* ds, const dlcc_config* cfg,
                     dlcc_result** out);
/* Sweeps s (and, under the max strategy, the delta candidates derived from the
 * grouping hierarchy), ranking cells by the DC metric. s_values may be NULL to
 * use the default grid. */
dlcc_status dlcc_sweep(const dlcc_dataset* ds, const dlcc_config* cfg,
                       const int* s_values, size_t s_count, dlcc_result** out);

size_t dlcc_result_size(const dlcc_result* r);
int dlcc_result_k(const dlcc_result* r);
/* Labels are 1..K; `out` must hold dlcc_result_size entries. */
dlcc_status dlcc_result_labels(const dlcc_result* r, int32_t* out);
double dlcc_result_dc(const dlcc_result* r);  /* NaN when unavailable */
double dlcc_result_ari(const dlcc_result* r); /* NaN without ground truth */
double dlcc_result_ce(const dlcc_result* r);  /* NaN without ground truth */
/* JSON report ("schema": "dlcc-report/1"). stable_output nonzero drops
 * timings so identical runs produce byte-identical documents. */
dlcc_status dlcc_result_report_json(const dlcc_result* r, int stable_output,
                                    char** out);
dlcc_status dlcc_result_labels_csv(const dlcc_result* r, char** out);
/* SVG scatter of the clustering (first two PCs when d > 2). */
dlcc_status dlcc_result_svg(const dlcc_result* r, const dlcc_dataset* ds,
                            char** out);
void dlcc_result_free(dlcc_result* r);
void dlcc_string_free(char* s);

/* ---- similarity cache + scoring ---- */
dlcc_status dlcc_similarity_save(const dlcc_dataset* ds,
                                 const dlcc_config* cfg, const char* path,
                                 int symmetric);
/* Scores a labels CSV (index,label) against a cached similarity matrix,
 * optionally with a ground-truth labels CSV. Produces a JSON document. */
dlcc_status dlcc_score_labels(const char* labels_csv_path,
                              const char* similarity_cache_path,
                              const char* truth_csv_path_or_null, int ntilde,
                              char** json_out);

/* ---- external metrics on raw label arrays ---- */
double dlcc_ari(const int32_t* a, const int32_t* b, size_t n);
double dlcc_ce(const int32_t* a, const int32_t* b, size_t n);

#ifdef __cplusplus
}
#endif

#endif /* DLCC_H */
