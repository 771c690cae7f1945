#pragma once

#include <filesystem>
#include <span>
#include <string_view>

#include "otb/baseline.hpp"
#include "otb/dumps.hpp"
#include "otb/monitor.hpp"

namespace otb {

// Outcome taxonomy. "Correct" means pred == truth; "outside" means the
// detector rejected the prediction.
//   TP: wrong prediction rejected (every detected novelty is one)
//   FP: correct prediction rejected
//   FN: wrong prediction accepted
//   TN: correct prediction accepted
enum class Outcome { tp, fp, fn, tn };

Outcome classify_outcome(ClassId truth, ClassId pred, bool accepted);

/// The first k classes.
std::vector<ClassId> select_known_classes(std::size_t k);
inline bool is_novel(ClassId truth, std::size_t k_known) { return truth >= k_known; }

struct OutcomeCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  void add(Outcome o);
  std::size_t total() const { return tp + fp + fn + tn; }
  /// count / total * 100; 0 for an empty set.
  double pct(std::size_t count) const;

  friend bool operator==(const OutcomeCounts&, const OutcomeCounts&) = default;
};

enum class Detector { monitor, threshold };
std::string_view to_string(Detector d);
Detector parse_detector(std::string_view text);

struct ExperimentConfig {
  std::size_t k_known = 2;
  std::size_t n_total = 0;  // 0: take n_classes from the test dump
  std::vector<LayerKey> layers{-2};
  DomainKind domain = DomainKind::box;
  ClusteringConfig clustering;
  double gamma = 0.0;
  bool include_test_training = false;
  Detector detector = Detector::monitor;
  double alpha = 0.9;       // threshold detector only
  bool normalize = false;   // threshold detector only
  LayerKey output_layer = -1;

  void validate(std::size_t test_classes) const;
  ThresholdConfig threshold() const { return {alpha, normalize, k_known}; }
};

struct ExperimentResult {
  OutcomeCounts counts;
  std::vector<bool> accepted;  // per test record, in dump order
};

/// Known-class training records: train records with truth < k, plus
/// known-class test records when include_test_training is set.
std::vector<ActivationRecord> training_records(const Dump& train, const Dump& test,
                                               const ExperimentConfig& config);

Monitor train_experiment_monitor(const Dump& train, const Dump& test,
                                 const ExperimentConfig& config);

/// Runs the monitor on every test record and tallies outcomes.
ExperimentResult evaluate_monitor(const Monitor& monitor, const Dump& test, std::size_t k_known);
ExperimentResult evaluate_threshold(const ThresholdConfig& config, const Dump& test,
                                    LayerKey output_layer);

ExperimentResult run_experiment(const Dump& train, const Dump& test,
                                const ExperimentConfig& config);

// -- gamma sweep ------------------------------------------------------------

/// Parses "start:stop:step" into an inclusive grid.
std::vector<double> parse_gamma_grid(std::string_view spec);

struct GammaRow {
  double gamma;
  OutcomeCounts counts;
};

/// Per-record minimal acceptance factors (see Monitor::min_gamma_to_accept).
std::vector<double> min_gamma_factors(const Monitor& monitor, const Dump& test,
                                      std::size_t k_known);

/// Outcomes for every gamma in the grid, derived from one factor per record:
/// a record is accepted at gamma iff its factor is <= gamma.
std::vector<GammaRow> gamma_sweep(const Monitor& monitor, const Dump& test, std::size_t k_known,
                                  std::span<const double> grid);

// -- layer combinations and domain comparison -------------------------------

struct LayerStudyRow {
  std::vector<LayerKey> layers;
  ExperimentResult result;
};

/// Parses "-1,-2;-2;-3" into subsets.
std::vector<std::vector<LayerKey>> parse_layer_subsets(std::string_view spec);
std::vector<LayerKey> parse_layer_list(std::string_view spec);
std::string layer_list_text(std::span<const LayerKey> layers, char sep = ';');

std::vector<LayerStudyRow> layer_combination_study(const Dump& train, const Dump& test,
                                                   const ExperimentConfig& config,
                                                   std::span<const std::vector<LayerKey>> subsets);

struct DomainRow {
  DomainKind domain;
  ExperimentResult result;
};

/// One run per domain. With shared_clusters the vectors are clustered once per
/// layer and every domain abstracts the same clusters.
std::vector<DomainRow> compare_abstractions(const Dump& train, const Dump& test,
                                            const ExperimentConfig& config,
                                            std::span<const DomainKind> domains,
                                            bool shared_clusters = true);

// -- CSV ----------------------------------------------------------------------

struct OutcomeRow {
  std::size_t k = 0;
  Detector detector = Detector::monitor;
  std::string domain;  // "-" for the threshold detector
  std::string layers;
  std::string tau;
  std::string gamma;
  OutcomeCounts counts;
};

OutcomeRow make_outcome_row(const ExperimentConfig& config, const OutcomeCounts& counts);

std::string outcomes_csv(std::span<const OutcomeRow> rows);
std::string gamma_sweep_csv(std::span<const GammaRow> rows);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace otb
