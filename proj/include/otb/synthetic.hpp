#pragma once

#include <cstdint>

#include "otb/dumps.hpp"

namespace otb {

/// Seeded Gaussian-blob stand-in for a trained classifier's activations.
///
/// Each class is an axis-aligned Gaussian around its own center; centers are
/// pairwise `separation` apart. Records expose three layers:
///   -3  relu(P x) for a fixed random projection P (hidden_dim wide)
///   -2  the sample x itself (dim wide)
///   -1  scores 1 / (1 + |x - c_i|^2) for the k known centers
/// pred is the nearest known center, so novel classes are always
/// mispredicted. The train dump holds known classes only; the test dump
/// holds all n_classes.
struct SyntheticConfig {
  std::size_t n_classes = 4;
  std::size_t k_known = 2;
  std::size_t dim = 10;  // smallest width where tau=0.07 keeps an isotropic blob at k=1
  std::size_t hidden_dim = 6;
  double separation = 20.0;
  double spread = 1.0;
  double elongation = 1.0;  // spread multiplier along axis 0
  std::size_t train_per_class = 500;
  std::size_t test_per_class = 100;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dump train;
  Dump test;
  std::vector<Vector> centers;
};

SyntheticData make_gaussian_blobs(const SyntheticConfig& config);

}  // namespace otb
