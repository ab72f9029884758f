#pragma once

#include <vector>

#include "boco/common.hpp"

namespace boco {

enum class SetKind { Box, Ball };

// Compact convex decision set containing the origin. Two shapes are
// supported: an axis-aligned box [lower, upper] with lower <= 0 <= upper
// componentwise, and an origin-centered Euclidean ball.
class DecisionSet {
 public:
  static DecisionSet box(Vec lower, Vec upper);
  static DecisionSet ball(int dim, double radius);

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lower() const;
  const Vec& upper() const;
  double radius() const;

  // Euclidean diameter of the set.
  double diameter() const;

  // Radius of the largest origin-centered ball inside the set. Zero when the
  // origin sits on the boundary (e.g. a box with a zero lower bound).
  double origin_inradius() const;

  // Largest Euclidean norm attained on the set.
  double max_norm() const;

  bool contains(const Vec& p, double tol = 1e-12) const;

  // All corners of a box (2^dim points). Usable up to dim 12.
  std::vector<Vec> vertices() const;

 private:
  DecisionSet() = default;
  SetKind kind_ = SetKind::Box;
  int dim_ = 0;
  Vec lower_, upper_;
  double radius_ = 0.0;
};

// Exact Euclidean projection onto (1 - shrink) * set, scaling about the
// origin. shrink = 0 projects onto the set itself. Closed form for both
// shapes: componentwise clamp for boxes, radial rescale for balls.
Vec project(const DecisionSet& set, double shrink, const Vec& p);

// Uniform draw from the unit sphere in dimension d (normalized gaussians).
Vec sample_unit_sphere(RngStream& rng, int d);

}  // namespace boco
