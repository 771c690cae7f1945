#pragma once

#include <cstdint>
#include <span>

#include "otb/types.hpp"

namespace otb {

struct ClusteringConfig {
  double tau = 0.07;           // relative sum-of-squares improvement threshold
  std::uint64_t seed = 0;
  std::size_t max_k = 50;
  std::size_t lloyd_max_iters = 300;
  std::size_t restarts = 3;

  void validate() const;
};

struct Clustering {
  std::vector<std::size_t> assignments;  // per point
  std::vector<Vector> centroids;
  double inertia = 0.0;                  // within-cluster sum of squares

  std::size_t k() const { return centroids.size(); }
  /// Points grouped by cluster, preserving input order within each group.
  std::vector<std::vector<Vector>> groups(std::span<const Vector> points) const;
};

/// Optional observer of per-iteration inertia (restart index, inertia).
using InertiaTrace = std::vector<std::pair<std::size_t, double>>;

/// Lloyd's algorithm with k-means++ seeding; best of config.restarts by
/// inertia, ties broken by restart index. Deterministic for a fixed seed.
Clustering kmeans(std::span<const Vector> points, std::size_t k,
                  const ClusteringConfig& config, InertiaTrace* trace = nullptr);

/// Grows k from 1 while the relative improvement SS(k) -> SS(k+1) is at least
/// tau; stops on SS(k) == 0 or when k reaches min(max_k, point count).
Clustering adaptive_cluster(std::span<const Vector> points,
                            const ClusteringConfig& config);

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace otb
