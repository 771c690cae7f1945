#include "otb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otb {

namespace {

thread_local std::uint64_t g_checks = 0;

std::size_t common_dim(std::span<const Vector> points) {
  if (points.empty()) fail(ErrorKind::usage, "cannot abstract empty cluster");
  const std::size_t d = points.front().size();
  if (d == 0) fail(ErrorKind::dimension, "points must have dimension >= 1");
  for (const auto& p : points) check_dim(d, p.size(), "abstraction point");
  return d;
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0)) fail(ErrorKind::usage, "enlargement factor must be >= 0");
}

void check_bounds(const Vector& low, const Vector& high, const char* what) {
  check_dim(low.size(), high.size(), what);
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (!(low[i] <= high[i])) {
      fail(ErrorKind::schema, std::string(what) + ": low > high at index " +
                                  std::to_string(i));
    }
  }
}

bool in_bounds(double x, double low, double high, double tol) {
  return low - tol <= x && x <= high + tol;
}

bool in_scaled(double x, double low, double high, double gamma, double tol) {
  const Interval s = scale_about_midpoint(low, high, gamma);
  return in_bounds(x, s.low, s.high, tol);
}

}  // namespace

std::uint64_t constraint_checks() { return g_checks; }
void reset_constraint_checks() { g_checks = 0; }

Interval scale_about_midpoint(double low, double high, double gamma) {
  if (gamma == 0.0) return {low, high};
  const double center = low + (high - low) / 2;
  const double half = (high - low) / 2 * (1.0 + gamma);
  return {std::min(low, center - half), std::max(high, center + half)};
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  check_dim(a.size(), b.size(), "distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Box

Box Box::create(std::span<const Vector> points) {
  const std::size_t d = common_dim(points);
  Vector low = points.front();
  Vector high = points.front();
  for (const auto& p : points.subspan(1)) {
    for (std::size_t i = 0; i < d; ++i) {
      low[i] = std::min(low[i], p[i]);
      high[i] = std::max(high[i], p[i]);
    }
  }
  return Box(std::move(low), std::move(high));
}

Box Box::from_bounds(Vector low, Vector high) {
  if (low.empty()) fail(ErrorKind::schema, "box must have dimension >= 1");
  check_bounds(low, high, "box");
  return Box(std::move(low), std::move(high));
}

bool Box::contains(std::span<const double> v, double tolerance) const {
  check_dim(dim(), v.size(), "box membership");
  for (std::size_t i = 0; i < low_.size(); ++i) {
    ++g_checks;
    if (!in_bounds(v[i], low_[i], high_[i], tolerance)) return false;
  }
  return true;
}

bool Box::contains_enlarged(std::span<const double> v, double gamma,
                            double tolerance) const {
  check_gamma(gamma);
  if (gamma == 0.0) return contains(v, tolerance);
  check_dim(dim(), v.size(), "box membership");
  for (std::size_t i = 0; i < low_.size(); ++i) {
    ++g_checks;
    if (!in_scaled(v[i], low_[i], high_[i], gamma, tolerance)) return false;
  }
  return true;
}

Box Box::enlarged(double gamma) const {
  check_gamma(gamma);
  Box out = *this;
  for (std::size_t i = 0; i < dim(); ++i) {
    const Interval s = scale_about_midpoint(low_[i], high_[i], gamma);
    out.low_[i] = s.low;
    out.high_[i] = s.high;
  }
  return out;
}

Box Box::enlarged_absolute(double margin) const {
  if (!(margin >= 0.0)) fail(ErrorKind::usage, "margin must be >= 0");
  Box out = *this;
  for (std::size_t i = 0; i < dim(); ++i) {
    out.low_[i] -= margin;
    out.high_[i] += margin;
  }
  return out;
}

double Box::gamma_factor(std::span<const double> v) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (contains(v)) return 0.0;

  double ratio = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double half = (high_[i] - low_[i]) / 2;
    const double offset = std::abs(v[i] - (low_[i] + half));
    if (half == 0.0) {
      if (v[i] != low_[i]) return inf;
      continue;
    }
    ratio = std::max(ratio, offset / half);
  }
  double gamma = std::max(0.0, ratio - 1.0);
  if (!std::isfinite(gamma)) return inf;

  // The closed form can land a few ulps short of what the scaled bounds
  // actually admit; walk up until it does. No downward walk: 1 + gamma
  // rounds, so a "smaller" gamma would just be an ulp artefact.
  for (int step = 0; !contains_enlarged(v, gamma); ++step) {
    gamma = step < 64 ? std::nextafter(gamma, inf)
                      : gamma * (1.0 + 1e-12) + std::numeric_limits<double>::min();
    if (!std::isfinite(gamma)) return inf;
  }
  return gamma;
}

// ---------------------------------------------------------------------------
// Octagon

Octagon Octagon::create(std::span<const Vector> points) {
  const std::size_t d = common_dim(points);
  const std::size_t pairs = pair_count(d);
  constexpr double inf = std::numeric_limits<double>::infinity();
  Bounds b{Vector(d, inf),     Vector(d, -inf),     Vector(pairs, inf),
           Vector(pairs, -inf), Vector(pairs, inf), Vector(pairs, -inf)};
  for (const auto& p : points) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < d; ++i) {
      b.unary_low[i] = std::min(b.unary_low[i], p[i]);
      b.unary_high[i] = std::max(b.unary_high[i], p[i]);
      for (std::size_t j = i + 1; j < d; ++j, ++k) {
        const double s = p[i] + p[j];
        const double t = p[i] - p[j];
        b.sum_low[k] = std::min(b.sum_low[k], s);
        b.sum_high[k] = std::max(b.sum_high[k], s);
        b.diff_low[k] = std::min(b.diff_low[k], t);
        b.diff_high[k] = std::max(b.diff_high[k], t);
      }
    }
  }
  return Octagon(std::move(b));
}

Octagon Octagon::from_bounds(Bounds b) {
  const std::size_t d = b.unary_low.size();
  if (d == 0) fail(ErrorKind::schema, "octagon must have dimension >= 1");
  check_bounds(b.unary_low, b.unary_high, "octagon unary bounds");
  check_dim(pair_count(d), b.sum_low.size(), "octagon sum bounds");
  check_dim(pair_count(d), b.diff_low.size(), "octagon difference bounds");
  check_bounds(b.sum_low, b.sum_high, "octagon sum bounds");
  check_bounds(b.diff_low, b.diff_high, "octagon difference bounds");
  return Octagon(std::move(b));
}

bool Octagon::contains(std::span<const double> v, double tolerance) const {
  return contains_enlarged(v, 0.0, tolerance);
}

bool Octagon::contains_enlarged(std::span<const double> v, double gamma,
                                double tolerance) const {
  check_gamma(gamma);
  const std::size_t d = dim();
  check_dim(d, v.size(), "octagon membership");
  for (std::size_t i = 0; i < d; ++i) {
    ++g_checks;
    if (!in_scaled(v[i], b_.unary_low[i], b_.unary_high[i], gamma, tolerance))
      return false;
  }
  std::size_t k = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j, ++k) {
      g_checks += 2;
      if (!in_scaled(v[i] + v[j], b_.sum_low[k], b_.sum_high[k], gamma, tolerance) ||
          !in_scaled(v[i] - v[j], b_.diff_low[k], b_.diff_high[k], gamma, tolerance))
        return false;
    }
  }
  return true;
}

Octagon Octagon::enlarged(double gamma) const {
  check_gamma(gamma);
  Bounds b = b_;
  auto scale = [gamma](Vector& low, Vector& high) {
    for (std::size_t i = 0; i < low.size(); ++i) {
      const Interval s = scale_about_midpoint(low[i], high[i], gamma);
      low[i] = s.low;
      high[i] = s.high;
    }
  };
  scale(b.unary_low, b.unary_high);
  scale(b.sum_low, b.sum_high);
  scale(b.diff_low, b.diff_high);
  return Octagon(std::move(b));
}

// ---------------------------------------------------------------------------
// Ball

Ball Ball::create(std::span<const Vector> points) {
  const std::size_t d = common_dim(points);
  Vector center(d, 0.0);
  for (const auto& p : points)
    for (std::size_t i = 0; i < d; ++i) center[i] += p[i];
  for (auto& c : center) c /= static_cast<double>(points.size());
  double radius = 0.0;
  for (const auto& p : points) radius = std::max(radius, euclidean_distance(p, center));
  return Ball(std::move(center), radius);
}

Ball Ball::from_center_radius(Vector center, double radius) {
  if (center.empty()) fail(ErrorKind::schema, "ball must have dimension >= 1");
  if (!(radius >= 0.0)) fail(ErrorKind::schema, "ball radius must be >= 0");
  return Ball(std::move(center), radius);
}

bool Ball::contains(std::span<const double> v, double tolerance) const {
  check_dim(dim(), v.size(), "ball membership");
  g_checks += dim();
  return euclidean_distance(v, center_) <= radius_ + tolerance;
}

}  // namespace otb
