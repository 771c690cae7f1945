#pragma once

#include <span>

#include "otb/monitor.hpp"

namespace otb {

/// Softmax-probability threshold detector.
struct ThresholdConfig {
  double alpha = 0.9;
  bool normalize = false;   // rescale alpha into [1/n, 1]
  std::size_t n_known = 2;

  void validate() const;
};

/// alpha' = 1/n + (1 - 1/n) * alpha when normalizing, alpha otherwise.
double effective_threshold(const ThresholdConfig& config);

/// Accepts iff the plainly normalized output probability of pred is at least
/// the effective threshold.
bool threshold_accepts(std::span<const double> outputs, ClassId pred,
                       const ThresholdConfig& config);

/// The threshold detector restated as a box monitor on the normalized
/// output layer: class i gets one box [alpha', 1] in dimension i and
/// [-1e30, 1e30] elsewhere. Query it with normalize_sum(outputs).
Monitor threshold_as_box_monitor(const ThresholdConfig& config, std::size_t n_outputs,
                                 LayerKey output_layer = -1);

}  // namespace otb
