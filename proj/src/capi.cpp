#include "otb/otb.h"

#include <cstring>
#include <memory>
#include <new>

#include "otb/evaluation.hpp"
#include "otb/numfmt.hpp"
#include "otb/parallel.hpp"
#include "otb/synthetic.hpp"

struct otb_network {
  otb::NetworkModel model;
};

struct otb_dump {
  otb::Dump dump;
};

struct otb_monitor {
  otb::Monitor monitor;
};

namespace {

thread_local std::string g_last_error;

otb_status status_of(otb::ErrorKind kind) {
  switch (kind) {
    case otb::ErrorKind::usage: return OTB_ERR_USAGE;
    case otb::ErrorKind::unsupported: return OTB_ERR_UNSUPPORTED;
    default: return OTB_ERR_DATA;
  }
}

template <class F>
otb_status guarded(F&& body) {
  try {
    body();
    return OTB_OK;
  } catch (const otb::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return OTB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OTB_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) otb::fail(otb::ErrorKind::usage, std::string(what) + " must not be null");
}

otb::DomainKind domain_of(otb_domain d) {
  switch (d) {
    case OTB_DOMAIN_BOX: return otb::DomainKind::box;
    case OTB_DOMAIN_OCTAGON: return otb::DomainKind::octagon;
    case OTB_DOMAIN_BALL: return otb::DomainKind::ball;
  }
  otb::fail(otb::ErrorKind::usage, "unknown domain value");
}

otb::ClusteringConfig clustering_of(const otb_cluster_config& c) {
  return {c.tau, c.seed, c.max_k, c.lloyd_max_iters, c.restarts};
}

otb::ExperimentConfig experiment_of(const otb_experiment_config* c) {
  require(c, "experiment config");
  otb::ExperimentConfig e;
  e.k_known = c->k_known;
  e.n_total = c->n_total;
  if (c->n_layers > 0) require(c->layers, "layers");
  e.layers.assign(c->layers, c->layers + c->n_layers);
  e.domain = domain_of(c->domain);
  e.clustering = clustering_of(c->clustering);
  e.gamma = c->gamma;
  e.include_test_training = c->include_test_training != 0;
  e.detector = c->detector == OTB_DETECTOR_THRESHOLD ? otb::Detector::threshold
                                                     : otb::Detector::monitor;
  e.alpha = c->alpha;
  e.normalize = c->normalize != 0;
  e.output_layer = c->output_layer;
  return e;
}

otb_counts counts_of(const otb::OutcomeCounts& c) {
  return {c.tp, c.fp, c.fn, c.tn, c.pct(c.tp), c.pct(c.fp), c.pct(c.fn), c.pct(c.tn)};
}

otb::LayerVectors watched_of(const int* layers, const double* const* vectors, const size_t* dims,
                             size_t n) {
  if (n > 0) {
    require(layers, "layers");
    require(vectors, "vectors");
    require(dims, "dims");
  }
  otb::LayerVectors w;
  for (size_t i = 0; i < n; ++i) {
    require(vectors[i], "vector");
    w[layers[i]] = otb::Vector(vectors[i], vectors[i] + dims[i]);
  }
  return w;
}

template <class T>
void copy_out(const std::vector<T>& src, T* out, size_t capacity, size_t* out_len) {
  if (out_len) *out_len = src.size();
  if (src.size() > capacity)
    otb::fail(otb::ErrorKind::usage, "output buffer holds " + std::to_string(capacity) +
                                         " values, " + std::to_string(src.size()) + " needed");
  if (!src.empty()) {
    require(out, "output buffer");
    std::copy(src.begin(), src.end(), out);
  }
}

}  // namespace

extern "C" {

const char* otb_version(void) { return "1.0.0"; }
const char* otb_last_error(void) { return g_last_error.c_str(); }

void otb_set_threads(size_t n) { otb::set_max_threads(n); }
void otb_set_quiet(int quiet) { otb::set_quiet(quiet != 0); }

otb_status otb_parse_domain(const char* text, otb_domain* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = static_cast<otb_domain>(otb::parse_domain(text));
  });
}

otb_status otb_parse_detector(const char* text, otb_detector* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = otb::parse_detector(text) == otb::Detector::threshold ? OTB_DETECTOR_THRESHOLD
                                                                 : OTB_DETECTOR_MONITOR;
  });
}

otb_status otb_parse_layers(const char* text, int* out, size_t capacity, size_t* out_len) {
  return guarded([&] {
    require(text, "text");
    std::vector<int> layers;
    try {
      layers = otb::parse_layer_list(text);
    } catch (const otb::Error& e) {
      otb::fail(otb::ErrorKind::usage, e.what());
    }
    copy_out(layers, out, capacity, out_len);
  });
}

otb_status otb_parse_gamma_grid(const char* text, double* out, size_t capacity, size_t* out_len) {
  return guarded([&] {
    require(text, "text");
    std::vector<double> grid;
    try {
      grid = otb::parse_gamma_grid(text);
    } catch (const otb::Error& e) {
      otb::fail(otb::ErrorKind::usage, e.what());
    }
    copy_out(grid, out, capacity, out_len);
  });
}

// ---- networks ---------------------------------------------------------------

otb_status otb_network_load(const char* path, otb_network** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new otb_network{otb::NetworkModel::load(path)};
  });
}

void otb_network_free(otb_network* net) { delete net; }

size_t otb_network_input_dim(const otb_network* net) { return net ? net->model.input_dim() : 0; }
size_t otb_network_layer_count(const otb_network* net) {
  return net ? net->model.layer_count() : 0;
}

otb_status otb_network_watch(const otb_network* net, const double* x, size_t n, int layer,
                             double* out, size_t capacity, size_t* out_len) {
  return guarded([&] {
    require(net, "network");
    if (n > 0) require(x, "input");
    copy_out(net->model.watch({x, n}, layer), out, capacity, out_len);
  });
}

otb_status otb_network_classify(const otb_network* net, const double* x, size_t n,
                                size_t* out_class) {
  return guarded([&] {
    require(net, "network");
    require(out_class, "out_class");
    if (n > 0) require(x, "input");
    *out_class = net->model.classify({x, n});
  });
}

otb_status otb_infer_csv(const otb_network* net, const char* csv_path, const int* layers,
                         size_t n_layers, const char* dump_path, size_t* out_records) {
  return guarded([&] {
    require(net, "network");
    require(csv_path, "csv_path");
    require(dump_path, "dump_path");
    if (n_layers == 0) otb::fail(otb::ErrorKind::usage, "at least one layer is required");
    require(layers, "layers");
    std::vector<int> keys(layers, layers + n_layers);
    try {
      for (int key : keys) net->model.resolve(key);
    } catch (const otb::Error& e) {
      otb::fail(otb::ErrorKind::usage, e.what());
    }
    const auto inputs = otb::read_labeled_csv(csv_path, net->model.input_dim());
    const auto dump = otb::make_network_dump(net->model, inputs, keys, csv_path);
    otb::write_dump(dump, dump_path);
    if (out_records) *out_records = dump.records.size();
  });
}

// ---- dumps --------------------------------------------------------------------

otb_status otb_dump_load(const char* path, otb_dump** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new otb_dump{otb::read_dump(path)};
  });
}

otb_status otb_dump_save(const otb_dump* dump, const char* path) {
  return guarded([&] {
    require(dump, "dump");
    require(path, "path");
    otb::write_dump(dump->dump, path);
  });
}

void otb_dump_free(otb_dump* dump) { delete dump; }
size_t otb_dump_record_count(const otb_dump* dump) { return dump ? dump->dump.records.size() : 0; }
size_t otb_dump_class_count(const otb_dump* dump) { return dump ? dump->dump.meta.n_classes : 0; }

void otb_synthetic_config_init(otb_synthetic_config* cfg) {
  if (!cfg) return;
  const otb::SyntheticConfig d;
  *cfg = {d.n_classes,  d.k_known,         d.dim,           d.hidden_dim, d.separation,
          d.spread,     d.elongation,      d.train_per_class, d.test_per_class, d.seed};
}

otb_status otb_synthetic_dumps(const otb_synthetic_config* cfg, otb_dump** train,
                               otb_dump** test) {
  return guarded([&] {
    require(cfg, "config");
    require(train, "train");
    require(test, "test");
    otb::SyntheticConfig c{cfg->n_classes,  cfg->k_known,   cfg->dim,
                           cfg->hidden_dim, cfg->separation, cfg->spread,
                           cfg->elongation, cfg->train_per_class, cfg->test_per_class,
                           cfg->seed};
    auto data = otb::make_gaussian_blobs(c);
    auto tr = std::make_unique<otb_dump>(otb_dump{std::move(data.train)});
    auto te = std::make_unique<otb_dump>(otb_dump{std::move(data.test)});
    *train = tr.release();
    *test = te.release();
  });
}

// ---- monitors ---------------------------------------------------------------------

void otb_cluster_config_init(otb_cluster_config* cfg) {
  if (!cfg) return;
  const otb::ClusteringConfig d;
  *cfg = {d.tau, d.seed, d.max_k, d.lloyd_max_iters, d.restarts};
}

otb_status otb_monitor_train(const otb_dump* dump, const int* layers, size_t n_layers,
                             size_t n_classes, otb_domain domain, const otb_cluster_config* cfg,
                             otb_monitor** out) {
  return guarded([&] {
    require(dump, "dump");
    require(cfg, "clustering config");
    require(out, "out");
    if (n_layers == 0) otb::fail(otb::ErrorKind::usage, "at least one layer is required");
    require(layers, "layers");
    const auto clustering = clustering_of(*cfg);
    clustering.validate();
    const std::size_t k = n_classes == 0 ? dump->dump.meta.n_classes : n_classes;
    const std::vector<int> keys(layers, layers + n_layers);
    for (int key : keys)
      if (!dump->dump.meta.layer_dims.contains(key))
        otb::fail(otb::ErrorKind::schema, "dump has no layer " + otb::layer_key_text(key));
    *out = new otb_monitor{
        otb::Monitor::train(dump->dump.records, keys, k, domain_of(domain), clustering)};
  });
}

otb_status otb_monitor_load(const char* path, otb_monitor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new otb_monitor{otb::Monitor::load(path)};
  });
}

otb_status otb_monitor_save(const otb_monitor* monitor, const char* path) {
  return guarded([&] {
    require(monitor, "monitor");
    require(path, "path");
    monitor->monitor.save(path);
  });
}

void otb_monitor_free(otb_monitor* monitor) { delete monitor; }

otb_status otb_monitor_enlarge(const otb_monitor* monitor, double gamma, otb_monitor** out) {
  return guarded([&] {
    require(monitor, "monitor");
    require(out, "out");
    *out = new otb_monitor{monitor->monitor.enlarged(gamma)};
  });
}

double otb_monitor_gamma(const otb_monitor* m) { return m ? m->monitor.gamma() : 0.0; }
size_t otb_monitor_class_count(const otb_monitor* m) { return m ? m->monitor.n_classes() : 0; }
size_t otb_monitor_layer_count(const otb_monitor* m) {
  return m ? m->monitor.layers().size() : 0;
}

otb_status otb_monitor_verdict(const otb_monitor* monitor, size_t pred, const int* layers,
                               const double* const* vectors, const size_t* dims, size_t n_layers,
                               int* accepted, int* layer_contained) {
  return guarded([&] {
    require(monitor, "monitor");
    require(accepted, "accepted");
    const auto v = monitor->monitor.verdict(pred, watched_of(layers, vectors, dims, n_layers));
    *accepted = v.accepted ? 1 : 0;
    if (layer_contained)
      for (size_t i = 0; i < v.layers.size(); ++i) layer_contained[i] = v.layers[i].contained;
  });
}

otb_status otb_monitor_min_gamma(const otb_monitor* monitor, size_t pred, const int* layers,
                                 const double* const* vectors, const size_t* dims,
                                 size_t n_layers, double* out) {
  return guarded([&] {
    require(monitor, "monitor");
    require(out, "out");
    *out = monitor->monitor.min_gamma_to_accept(pred, watched_of(layers, vectors, dims, n_layers));
  });
}

otb_status otb_monitor_run(const otb_monitor* monitor, const otb_dump* dump, const char* csv_path,
                           size_t* out_rejects) {
  return guarded([&] {
    require(monitor, "monitor");
    require(dump, "dump");
    require(csv_path, "csv_path");
    const auto& m = monitor->monitor;
    std::string csv = "id,truth,pred,verdict";
    for (const auto& lm : m.layers()) csv += ",contained_" + otb::layer_key_text(lm.layer);
    csv += '\n';
    size_t rejects = 0;
    for (const auto& r : dump->dump.records) {
      const auto v = m.verdict(r.pred, r.layers);
      rejects += v.accepted ? 0 : 1;
      csv += std::to_string(r.id) + ',' + std::to_string(r.truth) + ',' + std::to_string(r.pred) +
             ',' + (v.accepted ? "accept" : "reject");
      for (const auto& lv : v.layers) csv += lv.contained ? ",1" : ",0";
      csv += '\n';
    }
    otb::write_text_file(csv_path, csv);
    if (out_rejects) *out_rejects = rejects;
  });
}

// ---- experiments ------------------------------------------------------------------

void otb_experiment_config_init(otb_experiment_config* cfg) {
  if (!cfg) return;
  static const int default_layers[] = {-2};
  const otb::ExperimentConfig d;
  cfg->k_known = d.k_known;
  cfg->n_total = d.n_total;
  cfg->layers = default_layers;
  cfg->n_layers = 1;
  cfg->domain = OTB_DOMAIN_BOX;
  otb_cluster_config_init(&cfg->clustering);
  cfg->gamma = d.gamma;
  cfg->include_test_training = 0;
  cfg->detector = OTB_DETECTOR_MONITOR;
  cfg->alpha = d.alpha;
  cfg->normalize = 0;
  cfg->output_layer = d.output_layer;
}

otb_status otb_evaluate(const otb_dump* train, const otb_dump* test,
                        const otb_experiment_config* cfg, const char* csv_path, otb_counts* out) {
  return guarded([&] {
    require(train, "train");
    require(test, "test");
    const auto config = experiment_of(cfg);
    const auto result = otb::run_experiment(train->dump, test->dump, config);
    if (csv_path) {
      const otb::OutcomeRow row = otb::make_outcome_row(config, result.counts);
      otb::write_text_file(csv_path, otb::outcomes_csv({&row, 1}));
    }
    if (out) *out = counts_of(result.counts);
  });
}

otb_status otb_sweep_gamma(const otb_dump* train, const otb_dump* test,
                           const otb_experiment_config* cfg, const double* gammas,
                           size_t n_gammas, const char* csv_path, otb_counts* rows) {
  return guarded([&] {
    require(train, "train");
    require(test, "test");
    if (n_gammas == 0) otb::fail(otb::ErrorKind::usage, "empty gamma grid");
    require(gammas, "gammas");
    auto config = experiment_of(cfg);
    if (config.detector != otb::Detector::monitor)
      otb::fail(otb::ErrorKind::usage, "gamma sweeps need the monitor detector");
    if (config.domain != otb::DomainKind::box)
      otb::fail(otb::ErrorKind::unsupported, "gamma sweeps are defined for box monitors only");
    config.gamma = 0.0;
    const auto monitor = otb::train_experiment_monitor(train->dump, test->dump, config);
    const auto table =
        otb::gamma_sweep(monitor, test->dump, config.k_known, {gammas, n_gammas});
    if (csv_path) otb::write_text_file(csv_path, otb::gamma_sweep_csv(table));
    if (rows)
      for (size_t i = 0; i < table.size(); ++i) rows[i] = counts_of(table[i].counts);
  });
}

otb_status otb_layer_study(const otb_dump* train, const otb_dump* test,
                           const otb_experiment_config* cfg, const int* layers,
                           const size_t* subset_sizes, size_t n_subsets, const char* csv_path,
                           otb_counts* rows) {
  return guarded([&] {
    require(train, "train");
    require(test, "test");
    if (n_subsets == 0) otb::fail(otb::ErrorKind::usage, "no layer subsets given");
    require(layers, "layers");
    require(subset_sizes, "subset_sizes");
    std::vector<std::vector<int>> subsets;
    size_t offset = 0;
    for (size_t s = 0; s < n_subsets; ++s) {
      subsets.emplace_back(layers + offset, layers + offset + subset_sizes[s]);
      offset += subset_sizes[s];
    }
    const auto config = experiment_of(cfg);
    const auto table = otb::layer_combination_study(train->dump, test->dump, config, subsets);
    std::vector<otb::OutcomeRow> csv_rows;
    for (size_t i = 0; i < table.size(); ++i) {
      auto c = config;
      c.detector = otb::Detector::monitor;
      c.layers = table[i].layers;
      csv_rows.push_back(otb::make_outcome_row(c, table[i].result.counts));
      if (rows) rows[i] = counts_of(table[i].result.counts);
    }
    if (csv_path) otb::write_text_file(csv_path, otb::outcomes_csv(csv_rows));
  });
}

otb_status otb_compare_domains(const otb_dump* train, const otb_dump* test,
                               const otb_experiment_config* cfg, const otb_domain* domains,
                               size_t n_domains, int shared_clusters, const char* csv_path,
                               otb_counts* rows) {
  return guarded([&] {
    require(train, "train");
    require(test, "test");
    if (n_domains == 0) otb::fail(otb::ErrorKind::usage, "no domains given");
    require(domains, "domains");
    std::vector<otb::DomainKind> kinds;
    for (size_t i = 0; i < n_domains; ++i) kinds.push_back(domain_of(domains[i]));
    const auto config = experiment_of(cfg);
    const auto table =
        otb::compare_abstractions(train->dump, test->dump, config, kinds, shared_clusters != 0);
    std::vector<otb::OutcomeRow> csv_rows;
    for (size_t i = 0; i < table.size(); ++i) {
      auto c = config;
      c.detector = otb::Detector::monitor;
      c.domain = table[i].domain;
      csv_rows.push_back(otb::make_outcome_row(c, table[i].result.counts));
      if (rows) rows[i] = counts_of(table[i].result.counts);
    }
    if (csv_path) otb::write_text_file(csv_path, otb::outcomes_csv(csv_rows));
  });
}

}  // extern "C"
