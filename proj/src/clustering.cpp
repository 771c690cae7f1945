#include "otb/clustering.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace otb {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t nearest(std::span<const double> p, const std::vector<Vector>& centroids,
                    double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

std::vector<Vector> seed_plus_plus(std::span<const Vector> points, std::size_t k,
                                   std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Vector> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n));
  centers.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centers[0]);

  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = npos;
    if (total > 0.0) {
      const double r = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // All remaining points coincide with a center.
      for (std::size_t i = 0; i < n && pick == npos; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
  }
  return centers;
}

bool assign(std::span<const Vector> points, const std::vector<Vector>& centroids,
            std::vector<std::size_t>& assignments) {
  bool changed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t c = nearest(points[i], centroids);
    if (c != assignments[i]) {
      assignments[i] = c;
      changed = true;
    }
  }
  return changed;
}

// Moves the point farthest from its centroid into each empty cluster.
void repair_empty(std::span<const Vector> points, std::vector<Vector>& centroids,
                  std::vector<std::size_t>& assignments) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assignments) ++sizes[a];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = npos;
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sizes[assignments[i]] <= 1) continue;
      const double d = squared_distance(points[i], centroids[assignments[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    --sizes[assignments[far]];
    assignments[far] = c;
    sizes[c] = 1;
    centroids[c] = points[far];
  }
}

void update_means(std::span<const Vector> points, std::vector<Vector>& centroids,
                  const std::vector<std::size_t>& assignments) {
  const std::size_t d = points.front().size();
  std::vector<std::size_t> sizes(centroids.size(), 0);
  for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& c = centroids[assignments[i]];
    for (std::size_t j = 0; j < d; ++j) c[j] += points[i][j];
    ++sizes[assignments[i]];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c)
    for (auto& x : centroids[c]) x /= static_cast<double>(sizes[c]);
}

double inertia_of(std::span<const Vector> points, const std::vector<Vector>& centroids,
                  const std::vector<std::size_t>& assignments) {
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    s += squared_distance(points[i], centroids[assignments[i]]);
  return s;
}

Clustering lloyd(std::span<const Vector> points, std::size_t k,
                 const ClusteringConfig& config, std::mt19937_64& rng,
                 std::size_t restart, InertiaTrace* trace) {
  Clustering out;
  out.centroids = seed_plus_plus(points, k, rng);
  out.assignments.assign(points.size(), npos);
  assign(points, out.centroids, out.assignments);

  for (std::size_t iter = 0;; ++iter) {
    repair_empty(points, out.centroids, out.assignments);
    update_means(points, out.centroids, out.assignments);
    if (trace) trace->emplace_back(restart, inertia_of(points, out.centroids, out.assignments));
    if (iter + 1 >= config.lloyd_max_iters) {
      // Leave every point on its nearest centroid.
      assign(points, out.centroids, out.assignments);
      repair_empty(points, out.centroids, out.assignments);
      break;
    }
    if (!assign(points, out.centroids, out.assignments)) break;
  }
  out.inertia = inertia_of(points, out.centroids, out.assignments);
  return out;
}

}  // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void ClusteringConfig::validate() const {
  if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorKind::usage, "tau must lie in (0, 1]");
  if (max_k < 1) fail(ErrorKind::usage, "max_k must be >= 1");
  if (lloyd_max_iters < 1) fail(ErrorKind::usage, "lloyd_max_iters must be >= 1");
  if (restarts < 1) fail(ErrorKind::usage, "restarts must be >= 1");
}

std::vector<std::vector<Vector>> Clustering::groups(std::span<const Vector> points) const {
  std::vector<std::vector<Vector>> out(k());
  for (std::size_t i = 0; i < points.size(); ++i) out[assignments[i]].push_back(points[i]);
  return out;
}

Clustering kmeans(std::span<const Vector> points, std::size_t k,
                  const ClusteringConfig& config, InertiaTrace* trace) {
  config.validate();
  if (points.empty()) fail(ErrorKind::usage, "cannot cluster an empty point set");
  if (k == 0) fail(ErrorKind::usage, "k must be >= 1");
  if (k > points.size())
    fail(ErrorKind::usage, "k = " + std::to_string(k) + " exceeds the number of points (" +
                               std::to_string(points.size()) + ")");
  for (const auto& p : points) check_dim(points.front().size(), p.size(), "clustering point");

  Clustering best;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    std::mt19937_64 rng(config.seed + 0x9E3779B97F4A7C15ULL * (r + 1));
    Clustering run = lloyd(points, k, config, rng, r, trace);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Clustering adaptive_cluster(std::span<const Vector> points, const ClusteringConfig& config) {
  config.validate();
  const std::size_t cap = std::min(config.max_k, points.size());
  Clustering current = kmeans(points, 1, config);
  while (current.inertia > 0.0 && current.k() < cap) {
    Clustering next = kmeans(points, current.k() + 1, config);
    if ((current.inertia - next.inertia) / current.inertia < config.tau) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace otb
