#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "otb/types.hpp"

namespace otb {

// Abstractions over R^d built from finite point sets. All three domains are
// immutable after creation; membership and enlargement are const and
// reentrant.

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Rescales [low, high] about its midpoint by (1 + gamma). gamma == 0 returns
/// the bounds untouched, and the result never shrinks below the input bounds
/// even when the midpoint arithmetic rounds inward.
Interval scale_about_midpoint(double low, double high, double gamma);

/// Number of scalar constraint checks performed by membership tests on the
/// calling thread. Used to verify the per-domain cost model.
std::uint64_t constraint_checks();
void reset_constraint_checks();

class Box {
 public:
  /// Tight box: interval i is [min_p p_i, max_p p_i].
  static Box create(std::span<const Vector> points);
  /// Validates low <= high in every dimension.
  static Box from_bounds(Vector low, Vector high);

  std::size_t dim() const { return low_.size(); }
  const Vector& low() const { return low_; }
  const Vector& high() const { return high_; }
  Interval interval(std::size_t i) const { return {low_[i], high_[i]}; }

  /// Closed-interval membership; tolerance widens every bound absolutely.
  bool contains(std::span<const double> v, double tolerance = 0.0) const;
  /// Same answer as enlarged(gamma).contains(v) without materializing it.
  bool contains_enlarged(std::span<const double> v, double gamma,
                         double tolerance = 0.0) const;

  Box enlarged(double gamma) const;
  /// Adds a fixed margin to every bound.
  Box enlarged_absolute(double margin) const;

  /// Minimal gamma with enlarged(gamma).contains(v); +infinity when a
  /// zero-width dimension disagrees with v. 0 when v is already inside.
  double gamma_factor(std::span<const double> v) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  Box(Vector low, Vector high) : low_(std::move(low)), high_(std::move(high)) {}

  Vector low_;
  Vector high_;
};

/// Box plus min/max bounds on every pairwise sum x_i + x_j and difference
/// x_i - x_j (i < j). Stored as a flat constraint table; no closure.
class Octagon {
 public:
  static Octagon create(std::span<const Vector> points);

  struct Bounds {
    Vector unary_low, unary_high;
    Vector sum_low, sum_high;    // upper-triangular, see pair_index
    Vector diff_low, diff_high;  // upper-triangular, see pair_index
    friend bool operator==(const Bounds&, const Bounds&) = default;
  };
  static Octagon from_bounds(Bounds bounds);

  /// Flat index of the pair (i, j), i < j, in row-major upper-triangular
  /// order.
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t dim) {
    return i * (2 * dim - i - 1) / 2 + (j - i - 1);
  }
  static std::size_t pair_count(std::size_t dim) { return dim * (dim - 1) / 2; }

  std::size_t dim() const { return b_.unary_low.size(); }
  const Bounds& bounds() const { return b_; }

  bool contains(std::span<const double> v, double tolerance = 0.0) const;
  bool contains_enlarged(std::span<const double> v, double gamma,
                         double tolerance = 0.0) const;
  /// Every (min, max) pair rescaled about its midpoint, as for boxes.
  Octagon enlarged(double gamma) const;

  friend bool operator==(const Octagon&, const Octagon&) = default;

 private:
  explicit Octagon(Bounds b) : b_(std::move(b)) {}

  Bounds b_;
};

/// Euclidean ball around the mean of the creation points.
class Ball {
 public:
  static Ball create(std::span<const Vector> points);
  static Ball from_center_radius(Vector center, double radius);

  std::size_t dim() const { return center_.size(); }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(std::span<const double> v, double tolerance = 0.0) const;

  friend bool operator==(const Ball&, const Ball&) = default;

 private:
  Ball(Vector center, double radius)
      : center_(std::move(center)), radius_(radius) {}

  Vector center_;
  double radius_ = 0.0;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace otb
