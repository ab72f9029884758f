#include "boco/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace boco {

DecisionSet DecisionSet::box(Vec lower, Vec upper) {
  if (lower.empty() || lower.size() != upper.size())
    throw ConfigError("box bounds must be nonempty and of equal dimension");
  for (size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] <= upper[j]))
      throw ConfigError("box has lower > upper in coordinate " + std::to_string(j));
    if (lower[j] > 0.0 || upper[j] < 0.0)
      throw ConfigError("decision set must contain the origin (coordinate " +
                        std::to_string(j) + ")");
  }
  DecisionSet s;
  s.kind_ = SetKind::Box;
  s.dim_ = int(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

DecisionSet DecisionSet::ball(int dim, double radius) {
  if (dim < 1) throw ConfigError("ball dimension must be positive");
  if (!(radius > 0.0)) throw ConfigError("ball radius must be positive");
  DecisionSet s;
  s.kind_ = SetKind::Ball;
  s.dim_ = dim;
  s.radius_ = radius;
  return s;
}

const Vec& DecisionSet::lower() const {
  if (kind_ != SetKind::Box) throw UsageError("lower() on a non-box set");
  return lower_;
}

const Vec& DecisionSet::upper() const {
  if (kind_ != SetKind::Box) throw UsageError("upper() on a non-box set");
  return upper_;
}

double DecisionSet::radius() const {
  if (kind_ != SetKind::Ball) throw UsageError("radius() on a non-ball set");
  return radius_;
}

double DecisionSet::diameter() const {
  if (kind_ == SetKind::Ball) return 2.0 * radius_;
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) {
    double e = upper_[j] - lower_[j];
    s += e * e;
  }
  return std::sqrt(s);
}

double DecisionSet::origin_inradius() const {
  if (kind_ == SetKind::Ball) return radius_;
  double r = std::numeric_limits<double>::infinity();
  for (int j = 0; j < dim_; ++j)
    r = std::min(r, std::min(-lower_[j], upper_[j]));
  return r;
}

double DecisionSet::max_norm() const {
  if (kind_ == SetKind::Ball) return radius_;
  double s = 0.0;
  for (int j = 0; j < dim_; ++j) {
    double m = std::max(std::abs(lower_[j]), std::abs(upper_[j]));
    s += m * m;
  }
  return std::sqrt(s);
}

bool DecisionSet::contains(const Vec& p, double tol) const {
  if (int(p.size()) != dim_) return false;
  if (kind_ == SetKind::Ball) return norm(p) <= radius_ + tol;
  for (int j = 0; j < dim_; ++j)
    if (p[j] < lower_[j] - tol || p[j] > upper_[j] + tol) return false;
  return true;
}

std::vector<Vec> DecisionSet::vertices() const {
  if (kind_ != SetKind::Box) throw UsageError("vertices() on a non-box set");
  if (dim_ > 12) throw UsageError("vertex enumeration capped at dimension 12");
  std::vector<Vec> out;
  out.reserve(size_t(1) << dim_);
  for (size_t mask = 0; mask < (size_t(1) << dim_); ++mask) {
    Vec v(dim_);
    for (int j = 0; j < dim_; ++j)
      v[j] = (mask >> j) & 1 ? upper_[j] : lower_[j];
    out.push_back(std::move(v));
  }
  return out;
}

Vec project(const DecisionSet& set, double shrink, const Vec& p) {
  if (!(shrink >= 0.0 && shrink < 1.0))
    throw UsageError("projection shrink factor must lie in [0, 1)");
  if (int(p.size()) != set.dim())
    throw ConfigError("projection point has wrong dimension");
  double c = 1.0 - shrink;
  if (set.kind() == SetKind::Ball) {
    double r = c * set.radius();
    double n = norm(p);
    if (n <= r) return p;
    Vec q = scaled(p, r / n);
    // rounding in the rescale can leave the norm an ulp above r; push it
    // under the same comparison so a second projection is a no-op
    for (double m = norm(q); m > r; m = norm(q)) {
      Vec next = scaled(q, r / m);
      if (next == q)
        for (double& v : next) v *= 1.0 - 0x1.0p-51;
      q = std::move(next);
    }
    return q;
  }
  Vec q(p);
  for (int j = 0; j < set.dim(); ++j)
    q[j] = std::clamp(q[j], c * set.lower()[j], c * set.upper()[j]);
  return q;
}

Vec sample_unit_sphere(RngStream& rng, int d) {
  if (d < 1) throw ConfigError("sphere dimension must be positive");
  Vec u(d);
  double n2;
  do {
    for (int j = 0; j < d; ++j) u[j] = rng.gaussian();
    n2 = norm2(u);
  } while (n2 == 0.0);
  double inv = 1.0 / std::sqrt(n2);
  for (double& v : u) v *= inv;
  return u;
}

}  // namespace boco
