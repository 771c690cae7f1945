// otb: train and run outside-the-box novelty monitors, and reproduce the
// evaluation tables, from the command line. Talks to the library only
// through its C interface.

#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "otb/otb.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2 };

struct UsageError {
  std::string message;
};

int exit_code(otb_status s) {
  switch (s) {
    case OTB_OK: return kOk;
    case OTB_ERR_USAGE:
    case OTB_ERR_UNSUPPORTED: return kUsage;
    default: return kData;
  }
}

// Throws on failure so subcommands read top to bottom.
struct StatusError {
  otb_status status;
};

void check(otb_status s) {
  if (s != OTB_OK) throw StatusError{s};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DumpPtr = std::unique_ptr<otb_dump, Deleter<otb_dump, otb_dump_free>>;
using MonitorPtr = std::unique_ptr<otb_monitor, Deleter<otb_monitor, otb_monitor_free>>;
using NetworkPtr = std::unique_ptr<otb_network, Deleter<otb_network, otb_network_free>>;

DumpPtr load_dump(const std::string& path) {
  otb_dump* d = nullptr;
  check(otb_dump_load(path.c_str(), &d));
  return DumpPtr(d);
}

std::vector<int> parse_layers(const std::string& text) {
  size_t n = 0;
  otb_parse_layers(text.c_str(), nullptr, 0, &n);
  std::vector<int> out(n);
  check(otb_parse_layers(text.c_str(), out.data(), out.size(), &n));
  return out;
}

std::vector<std::vector<int>> parse_subsets(const std::string& text) {
  std::vector<std::vector<int>> out;
  size_t start = 0;
  while (true) {
    const auto semi = text.find(';', start);
    out.push_back(parse_layers(text.substr(start, semi - start)));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return out;
}

otb_domain parse_domain(const std::string& text) {
  otb_domain d{};
  check(otb_parse_domain(text.c_str(), &d));
  return d;
}

void log_counts(const char* label, const otb_counts& c) {
  std::fprintf(stderr, "%s: tp=%zu fp=%zu fn=%zu tn=%zu (tp %.2f%%, fp %.2f%%, fn %.2f%%)\n",
               label, c.tp, c.fp, c.fn, c.tn, c.tp_pct, c.fp_pct, c.fn_pct);
}

// Flags shared by the experiment subcommands.
struct ExperimentFlags {
  std::string train, test, out;
  size_t k = 0;
  std::string layers = "-2";
  double tau = 0.07;
  std::string domain = "box";
  double gamma = 0.0;
  bool include_test_training = false;
  size_t max_k = 50;
  size_t restarts = 3;

  void add_to(CLI::App* app, bool with_domain = true, bool with_gamma = true) {
    app->add_option("--train", train, "training activation dump")->required();
    app->add_option("--test", test, "test activation dump")->required();
    app->add_option("--k", k, "number of known classes (first k)")->required();
    app->add_option("--layers", layers, "watched layers, e.g. -2 or -2,-3");
    app->add_option("--tau", tau, "clustering threshold in (0, 1]");
    if (with_domain) app->add_option("--domain", domain, "box|octagon|ball");
    if (with_gamma) app->add_option("--gamma", gamma, "enlargement factor");
    app->add_flag("--include-test-training", include_test_training,
                  "also train on known-class test records");
    app->add_option("--max-k", max_k, "cluster count cap per class");
    app->add_option("--restarts", restarts, "k-means restarts");
    app->add_option("--out", out, "output CSV")->required();
  }

  otb_experiment_config config(std::vector<int>& layer_store, uint64_t seed) const {
    otb_experiment_config c;
    otb_experiment_config_init(&c);
    layer_store = parse_layers(layers);
    c.k_known = k;
    c.layers = layer_store.data();
    c.n_layers = layer_store.size();
    c.domain = parse_domain(domain);
    c.clustering.tau = tau;
    c.clustering.seed = seed;
    c.clustering.max_k = max_k;
    c.clustering.restarts = restarts;
    c.gamma = gamma;
    c.include_test_training = include_test_training ? 1 : 0;
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"otb - outside-the-box novelty monitors for neural-network classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", otb_version());

  uint64_t seed = 0;
  size_t threads = 0;
  bool quiet = false;
  app.add_option("--seed", seed, "seed for all randomness")->capture_default_str();
  app.add_option("--threads", threads, "worker thread cap (fallback: OTB_THREADS)");
  app.add_flag("--quiet", quiet, "suppress diagnostics");
  app.fallthrough();

  // infer
  auto* infer = app.add_subcommand("infer", "run a network over labeled inputs and dump activations");
  std::string net_path, inputs_path, infer_layers = "-2,-1", infer_out;
  infer->add_option("--network", net_path, "network model JSON")->required();
  infer->add_option("--inputs", inputs_path, "CSV: label,features...")->required();
  infer->add_option("--layers", infer_layers, "layers to record");
  infer->add_option("--out", infer_out, "output dump (JSONL)")->required();

  // train
  auto* train = app.add_subcommand("train", "build a monitor from an activation dump");
  std::string train_dump, train_layers = "-2", train_domain = "box", train_out;
  double train_tau = 0.07, train_enlarge = 0.0;
  size_t train_classes = 0, train_max_k = 50, train_restarts = 3;
  train->add_option("--dump", train_dump, "training activation dump")->required();
  train->add_option("--layers", train_layers, "watched layers");
  train->add_option("--tau", train_tau, "clustering threshold in (0, 1]");
  train->add_option("--domain", train_domain, "box|octagon|ball");
  train->add_option("--classes", train_classes, "known classes (default: all in dump)");
  train->add_option("--enlarge", train_enlarge, "enlargement factor stored with the monitor");
  train->add_option("--max-k", train_max_k, "cluster count cap per class");
  train->add_option("--restarts", train_restarts, "k-means restarts");
  train->add_option("--out", train_out, "output monitor JSON")->required();

  // run
  auto* run = app.add_subcommand("run", "apply a monitor to every record of a dump");
  std::string run_monitor, run_dump, run_out;
  run->add_option("--monitor", run_monitor, "monitor JSON")->required();
  run->add_option("--dump", run_dump, "activation dump")->required();
  run->add_option("--out", run_out, "verdict CSV")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a detector on a test dump (outcomes.csv)");
  ExperimentFlags eval_flags;
  std::string detector = "monitor";
  double alpha = 0.9;
  bool normalize = false;
  int output_layer = -1;
  eval_flags.add_to(evaluate);
  evaluate->add_option("--detector", detector, "monitor|threshold");
  evaluate->add_option("--alpha", alpha, "threshold detector: probability threshold");
  evaluate->add_flag("--normalize", normalize, "threshold detector: rescale alpha into [1/k, 1]");
  evaluate->add_option("--output-layer", output_layer, "threshold detector: output layer key");

  // sweep-gamma
  auto* sweep = app.add_subcommand("sweep-gamma", "outcomes over a grid of box enlargements");
  ExperimentFlags sweep_flags;
  std::string gammas = "0:1:0.05";
  sweep_flags.add_to(sweep, true, false);
  sweep->add_option("--gammas", gammas, "grid start:stop:step");

  // layers
  auto* layers = app.add_subcommand("layers", "compare combinations of watched layers");
  ExperimentFlags layer_flags;
  std::string subsets_text;
  layer_flags.add_to(layers);
  layers->add_option("--layer-subsets", subsets_text, "subsets, e.g. \"-2;-3;-2,-3\"")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "compare abstraction domains on shared clusters");
  ExperimentFlags compare_flags;
  std::string domains_text = "box,octagon,ball";
  bool recluster = false;
  compare_flags.add_to(compare, false);
  compare->add_option("--domains", domains_text, "comma-separated domains");
  compare->add_flag("--recluster", recluster, "cluster separately for every domain");

  // synth
  auto* synth = app.add_subcommand("synth", "write seeded Gaussian-blob train/test dumps");
  otb_synthetic_config synth_cfg;
  otb_synthetic_config_init(&synth_cfg);
  std::string synth_train, synth_test;
  synth->add_option("--classes", synth_cfg.n_classes, "total classes");
  synth->add_option("--k", synth_cfg.k_known, "known classes");
  synth->add_option("--dim", synth_cfg.dim, "feature layer width");
  synth->add_option("--hidden-dim", synth_cfg.hidden_dim, "projected layer width");
  synth->add_option("--separation", synth_cfg.separation, "distance between class centers");
  synth->add_option("--spread", synth_cfg.spread, "per-class standard deviation");
  synth->add_option("--elongation", synth_cfg.elongation, "spread multiplier on axis 0");
  synth->add_option("--train-per-class", synth_cfg.train_per_class);
  synth->add_option("--test-per-class", synth_cfg.test_per_class);
  synth->add_option("--out-train", synth_train, "train dump path")->required();
  synth->add_option("--out-test", synth_test, "test dump path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (threads == 0) {
    if (const char* env = std::getenv("OTB_THREADS")) threads = std::strtoull(env, nullptr, 10);
  }
  otb_set_threads(threads);
  otb_set_quiet(quiet ? 1 : 0);

  try {
    if (infer->parsed()) {
      const auto keys = parse_layers(infer_layers);
      otb_network* raw = nullptr;
      check(otb_network_load(net_path.c_str(), &raw));
      NetworkPtr net(raw);
      size_t n = 0;
      check(otb_infer_csv(net.get(), inputs_path.c_str(), keys.data(), keys.size(),
                          infer_out.c_str(), &n));
      if (!quiet) std::fprintf(stderr, "wrote %zu records to %s\n", n, infer_out.c_str());
    } else if (train->parsed()) {
      const auto keys = parse_layers(train_layers);
      const otb_domain domain = parse_domain(train_domain);
      otb_cluster_config cc;
      otb_cluster_config_init(&cc);
      cc.tau = train_tau;
      cc.seed = seed;
      cc.max_k = train_max_k;
      cc.restarts = train_restarts;
      if (!(train_tau > 0.0 && train_tau <= 1.0)) throw UsageError{"--tau must lie in (0, 1]"};
      if (!(train_enlarge >= 0.0)) throw UsageError{"--enlarge must be >= 0"};
      const auto dump = load_dump(train_dump);
      otb_monitor* raw = nullptr;
      check(otb_monitor_train(dump.get(), keys.data(), keys.size(), train_classes, domain, &cc,
                              &raw));
      MonitorPtr monitor(raw);
      check(otb_monitor_enlarge(monitor.get(), train_enlarge, &raw));
      monitor.reset(raw);
      check(otb_monitor_save(monitor.get(), train_out.c_str()));
      if (!quiet) std::fprintf(stderr, "wrote monitor to %s\n", train_out.c_str());
    } else if (run->parsed()) {
      otb_monitor* raw = nullptr;
      check(otb_monitor_load(run_monitor.c_str(), &raw));
      MonitorPtr monitor(raw);
      const auto dump = load_dump(run_dump);
      size_t rejects = 0;
      check(otb_monitor_run(monitor.get(), dump.get(), run_out.c_str(), &rejects));
      if (!quiet)
        std::fprintf(stderr, "%zu of %zu records rejected\n", rejects,
                     otb_dump_record_count(dump.get()));
    } else if (evaluate->parsed()) {
      otb_detector det{};
      check(otb_parse_detector(detector.c_str(), &det));
      std::vector<int> store;
      auto cfg = eval_flags.config(store, seed);
      cfg.detector = det;
      cfg.alpha = alpha;
      cfg.normalize = normalize ? 1 : 0;
      cfg.output_layer = output_layer;
      const auto tr = load_dump(eval_flags.train);
      const auto te = load_dump(eval_flags.test);
      otb_counts counts{};
      check(otb_evaluate(tr.get(), te.get(), &cfg, eval_flags.out.c_str(), &counts));
      if (!quiet) log_counts(detector.c_str(), counts);
    } else if (sweep->parsed()) {
      size_t n = 0;
      otb_parse_gamma_grid(gammas.c_str(), nullptr, 0, &n);
      std::vector<double> grid(n);
      check(otb_parse_gamma_grid(gammas.c_str(), grid.data(), grid.size(), &n));
      std::vector<int> store;
      const auto cfg = sweep_flags.config(store, seed);
      const auto tr = load_dump(sweep_flags.train);
      const auto te = load_dump(sweep_flags.test);
      check(otb_sweep_gamma(tr.get(), te.get(), &cfg, grid.data(), grid.size(),
                            sweep_flags.out.c_str(), nullptr));
      if (!quiet) std::fprintf(stderr, "wrote %zu gamma rows\n", grid.size());
    } else if (layers->parsed()) {
      const auto subsets = parse_subsets(subsets_text);
      std::vector<int> flat;
      std::vector<size_t> sizes;
      for (const auto& s : subsets) {
        flat.insert(flat.end(), s.begin(), s.end());
        sizes.push_back(s.size());
      }
      std::vector<int> store;
      const auto cfg = layer_flags.config(store, seed);
      const auto tr = load_dump(layer_flags.train);
      const auto te = load_dump(layer_flags.test);
      check(otb_layer_study(tr.get(), te.get(), &cfg, flat.data(), sizes.data(), sizes.size(),
                            layer_flags.out.c_str(), nullptr));
      if (!quiet) std::fprintf(stderr, "wrote %zu layer-subset rows\n", sizes.size());
    } else if (compare->parsed()) {
      std::vector<otb_domain> domains;
      size_t start = 0;
      while (true) {
        const auto comma = domains_text.find(',', start);
        domains.push_back(parse_domain(domains_text.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      std::vector<int> store;
      const auto cfg = compare_flags.config(store, seed);
      const auto tr = load_dump(compare_flags.train);
      const auto te = load_dump(compare_flags.test);
      check(otb_compare_domains(tr.get(), te.get(), &cfg, domains.data(), domains.size(),
                                recluster ? 0 : 1, compare_flags.out.c_str(), nullptr));
      if (!quiet) std::fprintf(stderr, "wrote %zu domain rows\n", domains.size());
    } else if (synth->parsed()) {
      synth_cfg.seed = seed;
      otb_dump* tr = nullptr;
      otb_dump* te = nullptr;
      check(otb_synthetic_dumps(&synth_cfg, &tr, &te));
      DumpPtr train_dump_ptr(tr), test_dump_ptr(te);
      check(otb_dump_save(tr, synth_train.c_str()));
      check(otb_dump_save(te, synth_test.c_str()));
      if (!quiet)
        std::fprintf(stderr, "wrote %zu train and %zu test records\n", otb_dump_record_count(tr),
                     otb_dump_record_count(te));
    }
  } catch (const StatusError& e) {
    std::fprintf(stderr, "error: %s\n", otb_last_error());
    return exit_code(e.status);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.message.c_str());
    return kUsage;
  }
  return kOk;
}
