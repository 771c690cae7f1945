#include "otb/baseline.hpp"

#include "otb/network.hpp"

namespace otb {

void ThresholdConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::usage, "alpha must lie in [0, 1]");
  if (normalize && n_known < 2)
    fail(ErrorKind::usage, "threshold normalization needs at least two known classes");
}

double effective_threshold(const ThresholdConfig& config) {
  config.validate();
  if (!config.normalize) return config.alpha;
  const double floor = 1.0 / static_cast<double>(config.n_known);
  return floor + (1.0 - floor) * config.alpha;
}

bool threshold_accepts(std::span<const double> outputs, ClassId pred,
                       const ThresholdConfig& config) {
  if (pred >= outputs.size())
    fail(ErrorKind::usage, "predicted class outside the output vector");
  const double threshold = effective_threshold(config);
  return normalize_sum(outputs)[pred] >= threshold;
}

Monitor threshold_as_box_monitor(const ThresholdConfig& config, std::size_t n_outputs,
                                 LayerKey output_layer) {
  constexpr double wide = 1e30;
  const double threshold = effective_threshold(config);
  LayerMonitor lm{output_layer, DomainKind::box, 1.0, {}};
  for (std::size_t c = 0; c < n_outputs; ++c) {
    Vector low(n_outputs, -wide), high(n_outputs, wide);
    low[c] = threshold;
    high[c] = 1.0;
    lm.classes.push_back({Box::from_bounds(std::move(low), std::move(high))});
  }
  return Monitor({std::move(lm)}, n_outputs);
}

}  // namespace otb
