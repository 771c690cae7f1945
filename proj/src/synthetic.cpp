#include "otb/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "otb/clustering.hpp"
#include "otb/network.hpp"

namespace otb {

namespace {

// Portable draws: the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::vector<Vector> make_centers(const SyntheticConfig& c, Rng& rng) {
  std::vector<Vector> centers;
  if (c.dim >= c.n_classes) {
    const double scale = c.separation / std::numbers::sqrt2;
    for (std::size_t i = 0; i < c.n_classes; ++i) {
      Vector v(c.dim, 0.0);
      v[i] = scale;
      centers.push_back(std::move(v));
    }
    return centers;
  }
  // Too few axes for one-hot placement: rejection-sample inside a cube.
  const double side = c.separation * static_cast<double>(c.n_classes);
  const double min_d2 = c.separation * c.separation;
  for (int attempt = 0; centers.size() < c.n_classes; ++attempt) {
    if (attempt > 100000) fail(ErrorKind::usage, "cannot place class centers that far apart");
    Vector v(c.dim);
    for (auto& x : v) x = (rng.uniform() - 0.5) * side;
    bool ok = true;
    for (const auto& other : centers) ok = ok && squared_distance(v, other) >= min_d2;
    if (ok) centers.push_back(std::move(v));
  }
  return centers;
}

}  // namespace

SyntheticData make_gaussian_blobs(const SyntheticConfig& c) {
  if (c.n_classes < 2 || c.k_known < 1 || c.k_known > c.n_classes)
    fail(ErrorKind::usage, "synthetic data needs 1 <= k_known <= n_classes, n_classes >= 2");
  if (c.dim == 0 || c.hidden_dim == 0) fail(ErrorKind::usage, "synthetic dimensions must be >= 1");
  if (!(c.spread > 0.0) || !(c.elongation > 0.0) || !(c.separation > 0.0))
    fail(ErrorKind::usage, "synthetic spread, elongation and separation must be > 0");

  Rng rng(c.seed);
  SyntheticData out;
  out.centers = make_centers(c, rng);

  std::vector<Vector> projection(c.hidden_dim, Vector(c.dim));
  for (auto& row : projection)
    for (auto& w : row) w = rng.normal() / std::sqrt(static_cast<double>(c.dim));

  auto fill_meta = [&](Dump& d, const char* split) {
    d.meta.n_classes = c.n_classes;
    d.meta.layer_dims = {{-3, c.hidden_dim}, {-2, c.dim}, {-1, c.k_known}};
    d.meta.source = std::string("synthetic gaussian blobs, seed ") + std::to_string(c.seed) +
                    ", " + split;
  };
  fill_meta(out.train, "train");
  fill_meta(out.test, "test");

  auto sample = [&](ClassId y, std::uint64_t id) {
    Vector x = out.centers[y];
    for (std::size_t i = 0; i < c.dim; ++i)
      x[i] += rng.normal() * c.spread * (i == 0 ? c.elongation : 1.0);
    Vector hidden(c.hidden_dim);
    for (std::size_t h = 0; h < c.hidden_dim; ++h) {
      double s = 0.0;
      for (std::size_t i = 0; i < c.dim; ++i) s += projection[h][i] * x[i];
      hidden[h] = std::max(0.0, s);
    }
    Vector scores(c.k_known);
    for (std::size_t k = 0; k < c.k_known; ++k)
      scores[k] = 1.0 / (1.0 + squared_distance(x, out.centers[k]));
    ActivationRecord r;
    r.id = id;
    r.truth = y;
    r.pred = argmax(scores);
    r.layers = {{-3, std::move(hidden)}, {-2, std::move(x)}, {-1, std::move(scores)}};
    return r;
  };

  std::uint64_t id = 0;
  for (ClassId y = 0; y < c.k_known; ++y)
    for (std::size_t i = 0; i < c.train_per_class; ++i) out.train.records.push_back(sample(y, id++));
  id = 0;
  for (ClassId y = 0; y < c.n_classes; ++y)
    for (std::size_t i = 0; i < c.test_per_class; ++i) out.test.records.push_back(sample(y, id++));
  return out;
}

}  // namespace otb
