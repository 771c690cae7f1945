#include "otb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "otb/numfmt.hpp"
#include "otb/parallel.hpp"

namespace otb {

Outcome classify_outcome(ClassId truth, ClassId pred, bool accepted) {
  const bool correct = truth == pred;
  if (correct) return accepted ? Outcome::tn : Outcome::fp;
  return accepted ? Outcome::fn : Outcome::tp;
}

std::vector<ClassId> select_known_classes(std::size_t k) {
  std::vector<ClassId> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = i;
  return out;
}

void OutcomeCounts::add(Outcome o) {
  switch (o) {
    case Outcome::tp: ++tp; break;
    case Outcome::fp: ++fp; break;
    case Outcome::fn: ++fn; break;
    case Outcome::tn: ++tn; break;
  }
}

double OutcomeCounts::pct(std::size_t count) const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(count) * 100.0 / static_cast<double>(n);
}

std::string_view to_string(Detector d) {
  return d == Detector::monitor ? "monitor" : "threshold";
}

Detector parse_detector(std::string_view text) {
  if (text == "monitor") return Detector::monitor;
  if (text == "threshold") return Detector::threshold;
  fail(ErrorKind::usage, "unknown detector '" + std::string(text) + "' (monitor|threshold)");
}

void ExperimentConfig::validate(std::size_t test_classes) const {
  const std::size_t n = n_total == 0 ? test_classes : n_total;
  if (k_known < 2) fail(ErrorKind::usage, "k must be >= 2");
  if (k_known >= n)
    fail(ErrorKind::usage, "k must be smaller than the total class count (" + std::to_string(n) + ")");
  if (detector == Detector::monitor) {
    if (layers.empty()) fail(ErrorKind::usage, "at least one layer must be watched");
    clustering.validate();
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
      fail(ErrorKind::usage, "gamma must be finite and >= 0");
  } else {
    threshold().validate();
  }
}

std::vector<ActivationRecord> training_records(const Dump& train, const Dump& test,
                                               const ExperimentConfig& config) {
  std::vector<ActivationRecord> out;
  for (const auto& r : train.records)
    if (!is_novel(r.truth, config.k_known)) out.push_back(r);
  if (config.include_test_training)
    for (const auto& r : test.records)
      if (!is_novel(r.truth, config.k_known)) out.push_back(r);
  return out;
}

Monitor train_experiment_monitor(const Dump& train, const Dump& test,
                                 const ExperimentConfig& config) {
  config.validate(test.meta.n_classes);
  const auto records = training_records(train, test, config);
  return Monitor::train(records, config.layers, config.k_known, config.domain, config.clustering)
      .enlarged(config.gamma);
}

namespace {

void check_pred(const ActivationRecord& r, std::size_t k_known) {
  if (r.pred >= k_known)
    fail(ErrorKind::schema, "test record " + std::to_string(r.id) + " predicts class " +
                                std::to_string(r.pred) + ", but only " + std::to_string(k_known) +
                                " classes are known");
}

ExperimentResult tally(const Dump& test, std::vector<bool> accepted) {
  ExperimentResult res;
  for (std::size_t i = 0; i < test.records.size(); ++i)
    res.counts.add(classify_outcome(test.records[i].truth, test.records[i].pred, accepted[i]));
  res.accepted = std::move(accepted);
  return res;
}

// std::vector<bool> is not safe for concurrent writes to distinct elements.
std::vector<bool> to_bools(const std::vector<char>& flags) {
  return {flags.begin(), flags.end()};
}

}  // namespace

ExperimentResult evaluate_monitor(const Monitor& monitor, const Dump& test, std::size_t k_known) {
  for (const auto& r : test.records) check_pred(r, k_known);
  std::vector<char> accepted(test.records.size(), 0);
  parallel_for(test.records.size(), [&](std::size_t i) {
    const auto& r = test.records[i];
    accepted[i] = monitor.accepts(r.pred, r.layers);
  });
  return tally(test, to_bools(accepted));
}

ExperimentResult evaluate_threshold(const ThresholdConfig& config, const Dump& test,
                                    LayerKey output_layer) {
  std::vector<char> accepted(test.records.size(), 0);
  for (std::size_t i = 0; i < test.records.size(); ++i) {
    const auto& r = test.records[i];
    check_pred(r, config.n_known);
    auto it = r.layers.find(output_layer);
    if (it == r.layers.end())
      fail(ErrorKind::schema, "test record " + std::to_string(r.id) + " lacks output layer " +
                                  layer_key_text(output_layer));
    accepted[i] = threshold_accepts(it->second, r.pred, config);
  }
  return tally(test, to_bools(accepted));
}

ExperimentResult run_experiment(const Dump& train, const Dump& test,
                                const ExperimentConfig& config) {
  config.validate(test.meta.n_classes);
  if (config.detector == Detector::threshold)
    return evaluate_threshold(config.threshold(), test, config.output_layer);
  return evaluate_monitor(train_experiment_monitor(train, test, config), test, config.k_known);
}

// ---------------------------------------------------------------------------

std::vector<double> parse_gamma_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) fail(ErrorKind::usage, "gamma grid must be start:stop:step");
  const double lo = parse_real(parts[0]);
  const double hi = parse_real(parts[1]);
  const double step = parse_real(parts[2]);
  if (!(lo >= 0.0) || !(hi >= lo) || !(step > 0.0) || !std::isfinite(hi))
    fail(ErrorKind::usage, "gamma grid needs 0 <= start <= stop and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

std::vector<double> min_gamma_factors(const Monitor& monitor, const Dump& test,
                                      std::size_t k_known) {
  for (const auto& r : test.records) check_pred(r, k_known);
  std::vector<double> factors(test.records.size());
  parallel_for(test.records.size(), [&](std::size_t i) {
    const auto& r = test.records[i];
    factors[i] = monitor.min_gamma_to_accept(r.pred, r.layers);
  });
  return factors;
}

std::vector<GammaRow> gamma_sweep(const Monitor& monitor, const Dump& test, std::size_t k_known,
                                  std::span<const double> grid) {
  const auto factors = min_gamma_factors(monitor, test, k_known);
  std::vector<GammaRow> rows;
  for (double g : grid) {
    if (!(g >= 0.0)) fail(ErrorKind::usage, "gamma values must be >= 0");
    GammaRow row{g, {}};
    for (std::size_t i = 0; i < factors.size(); ++i)
      row.counts.add(classify_outcome(test.records[i].truth, test.records[i].pred, factors[i] <= g));
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<LayerKey> parse_layer_list(std::string_view spec) {
  std::vector<LayerKey> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = spec.find(',', start);
    std::string_view item = spec.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    const LayerKey key = parse_layer_key(item);
    if (std::find(out.begin(), out.end(), key) != out.end())
      fail(ErrorKind::usage, "layer " + std::string(item) + " listed twice");
    out.push_back(key);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::vector<LayerKey>> parse_layer_subsets(std::string_view spec) {
  std::vector<std::vector<LayerKey>> out;
  std::size_t start = 0;
  while (true) {
    const auto semi = spec.find(';', start);
    out.push_back(parse_layer_list(spec.substr(start, semi - start)));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return out;
}

std::string layer_list_text(std::span<const LayerKey> layers, char sep) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) s += sep;
    s += layer_key_text(layers[i]);
  }
  return s;
}

std::vector<LayerStudyRow> layer_combination_study(const Dump& train, const Dump& test,
                                                   const ExperimentConfig& config,
                                                   std::span<const std::vector<LayerKey>> subsets) {
  if (subsets.empty()) fail(ErrorKind::usage, "no layer subsets given");
  ExperimentConfig base = config;
  base.detector = Detector::monitor;
  base.validate(test.meta.n_classes);
  const auto records = training_records(train, test, base);

  // Each layer's monitor does not depend on the other layers, so train every
  // distinct layer once and assemble subsets from them.
  std::map<LayerKey, LayerMonitor> trained;
  for (const auto& subset : subsets) {
    if (subset.empty()) fail(ErrorKind::usage, "empty layer subset");
    for (LayerKey key : subset)
      if (!trained.contains(key))
        trained.emplace(key, train_layer_monitor(records, key, base.k_known, base.domain,
                                                 base.clustering));
  }
  std::vector<LayerStudyRow> rows;
  for (const auto& subset : subsets) {
    std::vector<LayerMonitor> parts;
    for (LayerKey key : subset) parts.push_back(trained.at(key));
    const Monitor m = Monitor(std::move(parts), base.k_known).enlarged(base.gamma);
    rows.push_back({subset, evaluate_monitor(m, test, base.k_known)});
  }
  return rows;
}

std::vector<DomainRow> compare_abstractions(const Dump& train, const Dump& test,
                                            const ExperimentConfig& config,
                                            std::span<const DomainKind> domains,
                                            bool shared_clusters) {
  if (domains.empty()) fail(ErrorKind::usage, "no domains given");
  ExperimentConfig base = config;
  base.detector = Detector::monitor;
  base.validate(test.meta.n_classes);
  const auto records = training_records(train, test, base);

  std::vector<ClassClusters> clusters;
  if (shared_clusters)
    for (LayerKey key : base.layers)
      clusters.push_back(cluster_layer(records, key, base.k_known, base.clustering));

  std::vector<DomainRow> rows;
  for (DomainKind domain : domains) {
    std::vector<LayerMonitor> parts;
    for (std::size_t l = 0; l < base.layers.size(); ++l) {
      parts.push_back(shared_clusters
                          ? abstract_clusters(clusters[l], domain)
                          : train_layer_monitor(records, base.layers[l], base.k_known, domain,
                                                base.clustering));
    }
    const Monitor m = Monitor(std::move(parts), base.k_known).enlarged(base.gamma);
    rows.push_back({domain, evaluate_monitor(m, test, base.k_known)});
  }
  return rows;
}

// ---------------------------------------------------------------------------

OutcomeRow make_outcome_row(const ExperimentConfig& config, const OutcomeCounts& counts) {
  OutcomeRow row;
  row.k = config.k_known;
  row.detector = config.detector;
  row.counts = counts;
  if (config.detector == Detector::threshold) {
    row.domain = "-";
    row.layers = layer_key_text(config.output_layer);
    row.tau = "-";
    row.gamma = "-";
  } else {
    row.domain = std::string(to_string(config.domain));
    row.layers = layer_list_text(config.layers);
    row.tau = format_real(config.clustering.tau);
    row.gamma = format_real(config.gamma);
  }
  return row;
}

std::string outcomes_csv(std::span<const OutcomeRow> rows) {
  std::string out = "k,detector,domain,layers,tau,gamma,tp,fp,fn,tn,tp_pct,fp_pct,fn_pct,tn_pct\n";
  for (const auto& r : rows) {
    const auto& c = r.counts;
    out += std::to_string(r.k) + ',' + std::string(to_string(r.detector)) + ',' + r.domain + ',' +
           r.layers + ',' + r.tau + ',' + r.gamma + ',' + std::to_string(c.tp) + ',' +
           std::to_string(c.fp) + ',' + std::to_string(c.fn) + ',' + std::to_string(c.tn);
    for (std::size_t n : {c.tp, c.fp, c.fn, c.tn}) {
      out += ',';
      append_real(out, c.pct(n));
    }
    out += '\n';
  }
  return out;
}

std::string gamma_sweep_csv(std::span<const GammaRow> rows) {
  std::string out = "gamma,fp_pct,fn_pct,tp_pct\n";
  for (const auto& r : rows) {
    append_real(out, r.gamma);
    for (std::size_t n : {r.counts.fp, r.counts.fn, r.counts.tp}) {
      out += ',';
      append_real(out, r.counts.pct(n));
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

}  // namespace otb
