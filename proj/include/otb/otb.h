/*
 * C interface to the outside-the-box monitoring library.
 *
 * Every object is an opaque handle created by a *_load / *_train / *_new
 * function and released with the matching *_free. Functions that can fail
 * return an otb_status; on failure otb_last_error() describes the problem
 * (the message is per thread and stays valid until the next failing call on
 * that thread). Handles are immutable once created and may be shared
 * between threads.
 */
#ifndef OTB_OTB_H
#define OTB_OTB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define OTB_API __declspec(dllexport)
#else
#  define OTB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum otb_status {
  OTB_OK = 0,
  OTB_ERR_USAGE = 1,        /* invalid argument or configuration */
  OTB_ERR_DATA = 2,         /* unreadable, malformed or inconsistent input */
  OTB_ERR_UNSUPPORTED = 3,  /* operation undefined for the domain */
  OTB_ERR_INTERNAL = 4
} otb_status;

typedef enum otb_domain {
  OTB_DOMAIN_BOX = 0,
  OTB_DOMAIN_OCTAGON = 1,
  OTB_DOMAIN_BALL = 2
} otb_domain;

typedef enum otb_detector {
  OTB_DETECTOR_MONITOR = 0,
  OTB_DETECTOR_THRESHOLD = 1
} otb_detector;

typedef struct otb_network otb_network;
typedef struct otb_dump otb_dump;
typedef struct otb_monitor otb_monitor;

OTB_API const char* otb_version(void);
OTB_API const char* otb_last_error(void);

/* 0 uses one worker per hardware thread. */
OTB_API void otb_set_threads(size_t n);
/* Silences warnings written to stderr. */
OTB_API void otb_set_quiet(int quiet);

OTB_API otb_status otb_parse_domain(const char* text, otb_domain* out);
OTB_API otb_status otb_parse_detector(const char* text, otb_detector* out);
/* "-1,-2" -> {-1, -2}. out_len receives the count even when capacity is
 * too small (then OTB_ERR_USAGE is returned). */
OTB_API otb_status otb_parse_layers(const char* text, int* out, size_t capacity, size_t* out_len);
/* "start:stop:step" -> inclusive grid. */
OTB_API otb_status otb_parse_gamma_grid(const char* text, double* out, size_t capacity,
                                        size_t* out_len);

/* ---- networks ----------------------------------------------------------- */

OTB_API otb_status otb_network_load(const char* path, otb_network** out);
OTB_API void otb_network_free(otb_network* net);
OTB_API size_t otb_network_input_dim(const otb_network* net);
OTB_API size_t otb_network_layer_count(const otb_network* net);
/* Output of one layer (negative keys count from the end). */
OTB_API otb_status otb_network_watch(const otb_network* net, const double* x, size_t n,
                                     int layer, double* out, size_t capacity,
                                     size_t* out_len);
OTB_API otb_status otb_network_classify(const otb_network* net, const double* x, size_t n,
                                        size_t* out_class);
/* Runs the network over a `label,features...` CSV and writes an activation
 * dump with the requested layers. */
OTB_API otb_status otb_infer_csv(const otb_network* net, const char* csv_path,
                                 const int* layers, size_t n_layers, const char* dump_path,
                                 size_t* out_records);

/* ---- activation dumps ----------------------------------------------------- */

OTB_API otb_status otb_dump_load(const char* path, otb_dump** out);
OTB_API otb_status otb_dump_save(const otb_dump* dump, const char* path);
OTB_API void otb_dump_free(otb_dump* dump);
OTB_API size_t otb_dump_record_count(const otb_dump* dump);
OTB_API size_t otb_dump_class_count(const otb_dump* dump);

typedef struct otb_synthetic_config {
  size_t n_classes;
  size_t k_known;
  size_t dim;
  size_t hidden_dim;
  double separation;
  double spread;
  double elongation;
  size_t train_per_class;
  size_t test_per_class;
  uint64_t seed;
} otb_synthetic_config;

OTB_API void otb_synthetic_config_init(otb_synthetic_config* cfg);
OTB_API otb_status otb_synthetic_dumps(const otb_synthetic_config* cfg, otb_dump** train,
                                       otb_dump** test);

/* ---- monitors --------------------------------------------------------------- */

typedef struct otb_cluster_config {
  double tau;
  uint64_t seed;
  size_t max_k;
  size_t lloyd_max_iters;
  size_t restarts;
} otb_cluster_config;

OTB_API void otb_cluster_config_init(otb_cluster_config* cfg);

/* Trains on records with truth == pred < n_classes. n_classes == 0 takes
 * the dump's class count. */
OTB_API otb_status otb_monitor_train(const otb_dump* dump, const int* layers, size_t n_layers,
                                     size_t n_classes, otb_domain domain,
                                     const otb_cluster_config* cfg, otb_monitor** out);
OTB_API otb_status otb_monitor_load(const char* path, otb_monitor** out);
OTB_API otb_status otb_monitor_save(const otb_monitor* monitor, const char* path);
OTB_API void otb_monitor_free(otb_monitor* monitor);
/* New handle whose verdicts enlarge every box/octagon by gamma. */
OTB_API otb_status otb_monitor_enlarge(const otb_monitor* monitor, double gamma,
                                       otb_monitor** out);
OTB_API double otb_monitor_gamma(const otb_monitor* monitor);
OTB_API size_t otb_monitor_class_count(const otb_monitor* monitor);
OTB_API size_t otb_monitor_layer_count(const otb_monitor* monitor);

/* vectors[i] has dims[i] entries and belongs to layers[i]. layer_contained,
 * when non-null, receives one flag per monitored layer in monitor order. */
OTB_API otb_status otb_monitor_verdict(const otb_monitor* monitor, size_t pred,
                                       const int* layers, const double* const* vectors,
                                       const size_t* dims, size_t n_layers, int* accepted,
                                       int* layer_contained);
OTB_API otb_status otb_monitor_min_gamma(const otb_monitor* monitor, size_t pred,
                                         const int* layers, const double* const* vectors,
                                         const size_t* dims, size_t n_layers, double* out);
/* Writes `id,truth,pred,verdict,contained_<layer>...` for every record. */
OTB_API otb_status otb_monitor_run(const otb_monitor* monitor, const otb_dump* dump,
                                   const char* csv_path, size_t* out_rejects);

/* ---- experiments ------------------------------------------------------------ */

typedef struct otb_experiment_config {
  size_t k_known;
  size_t n_total;             /* 0: test dump's class count */
  const int* layers;
  size_t n_layers;
  otb_domain domain;
  otb_cluster_config clustering;
  double gamma;
  int include_test_training;
  otb_detector detector;
  double alpha;
  int normalize;
  int output_layer;
} otb_experiment_config;

typedef struct otb_counts {
  size_t tp, fp, fn, tn;
  double tp_pct, fp_pct, fn_pct, tn_pct;
} otb_counts;

OTB_API void otb_experiment_config_init(otb_experiment_config* cfg);

/* csv_path may be null; otherwise outcomes.csv rows are written there. */
OTB_API otb_status otb_evaluate(const otb_dump* train, const otb_dump* test,
                                const otb_experiment_config* cfg, const char* csv_path,
                                otb_counts* out);
/* rows (nullable) receives n_gammas entries. Box domain only. */
OTB_API otb_status otb_sweep_gamma(const otb_dump* train, const otb_dump* test,
                                   const otb_experiment_config* cfg, const double* gammas,
                                   size_t n_gammas, const char* csv_path, otb_counts* rows);
/* Subsets are concatenated in `layers`; subset_sizes gives each length. */
OTB_API otb_status otb_layer_study(const otb_dump* train, const otb_dump* test,
                                   const otb_experiment_config* cfg, const int* layers,
                                   const size_t* subset_sizes, size_t n_subsets,
                                   const char* csv_path, otb_counts* rows);
OTB_API otb_status otb_compare_domains(const otb_dump* train, const otb_dump* test,
                                       const otb_experiment_config* cfg,
                                       const otb_domain* domains, size_t n_domains,
                                       int shared_clusters, const char* csv_path,
                                       otb_counts* rows);

#ifdef __cplusplus
}
#endif

#endif /* OTB_OTB_H */
