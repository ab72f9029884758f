#include "boco/scenarios.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace boco {
namespace {

constexpr uint64_t kBoundsSeed = 0x5ca1ab1eull;
constexpr int kMcSamples = 100000;
constexpr int kMcChunk = 4096;

// Max of w*x - q*x^2 over [lo, hi] for scalar coordinate, q >= 0.
double coord_max(double w, double q, double lo, double hi) {
  double best = std::max(w * lo - q * lo * lo, w * hi - q * hi * hi);
  if (q > 0.0) {
    double x = w / (2.0 * q);
    if (x > lo && x < hi) best = std::max(best, w * x - q * x * x);
  }
  return best;
}

// Exact max of min_j (w_j.x + b_j) over a box, as the LP
//   max t  s.t.  w_j.x - t >= -b_j,  lo <= x <= hi.
// The feasible polyhedron is pointed (only recession direction is t -> -inf),
// so the optimum sits at a vertex with d+1 active constraints; with few
// pieces and small d all candidate active sets can be enumerated.
std::optional<double> minaffine_box_max(const std::vector<AffinePiece>& pieces,
                                        const Vec& lo, const Vec& hi) {
  int d = int(lo.size());
  int m = int(pieces.size());
  int rows = m + 2 * d;
  if (d > 6) return std::nullopt;
  double combos = 1.0;
  for (int i = 0; i < d + 1; ++i) combos *= double(rows - i) / double(i + 1);
  if (combos > 20000.0) return std::nullopt;

  // row r: a.x + s*t >= c  with (a, s, c) per constraint
  std::vector<Vec> A(rows, Vec(d, 0.0));
  Vec S(rows, 0.0), Cst(rows, 0.0);
  for (int j = 0; j < m; ++j) {
    A[j] = pieces[j].w;
    S[j] = -1.0;
    Cst[j] = -pieces[j].b;
  }
  for (int i = 0; i < d; ++i) {
    A[m + i][i] = 1.0;
    Cst[m + i] = lo[i];
    A[m + d + i][i] = -1.0;
    Cst[m + d + i] = -hi[i];
  }

  double scale = 1.0;
  for (int r = 0; r < rows; ++r)
    scale = std::max({scale, std::abs(Cst[r]), norm(A[r])});
  double tol = 1e-9 * scale;

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(d + 1);
  // lexicographic enumeration of (d+1)-subsets of the constraint rows
  for (int i = 0; i <= d; ++i) idx[i] = i;
  while (true) {
    Eigen::MatrixXd M(d + 1, d + 1);
    Eigen::VectorXd rhs(d + 1);
    for (int i = 0; i <= d; ++i) {
      for (int j = 0; j < d; ++j) M(i, j) = A[idx[i]][j];
      M(i, d) = S[idx[i]];
      rhs(i) = Cst[idx[i]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) {
      Eigen::VectorXd z = lu.solve(rhs);
      bool feasible = true;
      for (int r = 0; r < rows && feasible; ++r) {
        double lhs = S[r] * z(d);
        for (int j = 0; j < d; ++j) lhs += A[r][j] * z(j);
        if (lhs < Cst[r] - tol) feasible = false;
      }
      if (feasible && z(d) > best) best = z(d);
    }
    int i = d;
    while (i >= 0 && idx[i] == rows - 1 - (d - i)) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j <= d; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

Vec sample_point(const DecisionSet& set, RngStream& rng) {
  int d = set.dim();
  if (set.kind() == SetKind::Box) {
    Vec x(d);
    for (int j = 0; j < d; ++j)
      x[j] = set.lower()[j] + (set.upper()[j] - set.lower()[j]) * rng.uniform();
    return x;
  }
  Vec x = sample_unit_sphere(rng, d);
  double r = set.radius() * std::pow(rng.uniform(), 1.0 / d);
  for (double& v : x) v *= r;
  return x;
}

// Smallest sampled value; an upper bound on the true minimum. Chunked
// substreams keep the result identical for any thread count.
double mc_sample_min(const ConcaveFunction& fn, const DecisionSet& set,
                     int n, uint64_t seed) {
  int chunks = (n + kMcChunk - 1) / kMcChunk;
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : best) schedule(static)
  for (int c = 0; c < chunks; ++c) {
    RngStream rng(seed, uint64_t(c) + 1);
    int count = std::min(kMcChunk, n - c * kMcChunk);
    for (int i = 0; i < count; ++i) {
      double v = fn.value(sample_point(set, rng));
      if (v < best) best = v;
    }
  }
  return best;
}

// Sampled minimum deflated by a Lipschitz covering term, so the result is a
// (possibly loose) lower bound on the true minimum.
double mc_lower_inflated(const ConcaveFunction& fn, const DecisionSet& set) {
  double sampled = mc_sample_min(fn, set, kMcSamples, kBoundsSeed);
  double slack =
      set.diameter() * std::pow(std::log(double(kMcSamples)) / kMcSamples,
                                1.0 / set.dim());
  return sampled - fn.lipschitz(set) * slack;
}

}  // namespace

ConcaveFunction ConcaveFunction::min_affine(std::vector<AffinePiece> pieces) {
  if (pieces.empty()) throw ConfigError("min-affine function needs at least one piece");
  size_t d = pieces[0].w.size();
  if (d == 0) throw ConfigError("affine piece has empty weight vector");
  for (const auto& p : pieces)
    if (p.w.size() != d)
      throw ConfigError("affine pieces disagree on dimension");
  ConcaveFunction f;
  f.dim_ = int(d);
  f.pieces_ = std::move(pieces);
  return f;
}

ConcaveFunction ConcaveFunction::quadratic(double c0, Vec w, std::vector<Vec> Q) {
  size_t d = w.size();
  if (d == 0) throw ConfigError("quadratic function has empty weight vector");
  if (Q.size() != d) throw ConfigError("quadratic matrix must be square of the weight dimension");
  Eigen::MatrixXd m(d, d);
  for (size_t i = 0; i < d; ++i) {
    if (Q[i].size() != d) throw ConfigError("quadratic matrix row has wrong length");
    for (size_t j = 0; j < d; ++j) m(i, j) = Q[i][j];
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("quadratic matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-10)
    throw ConfigError("quadratic matrix must be positive semidefinite (min eigenvalue " +
                      std::to_string(min_eig) + ")");
  ConcaveFunction f;
  f.dim_ = int(d);
  f.c0_ = c0;
  f.w_ = std::move(w);
  f.Q_ = std::move(Q);
  f.q_norm_ = es.eigenvalues().cwiseAbs().maxCoeff();
  f.q_diagonal_ = true;
  for (size_t i = 0; i < d && f.q_diagonal_; ++i)
    for (size_t j = 0; j < d; ++j)
      if (i != j && f.Q_[i][j] != 0.0) {
        f.q_diagonal_ = false;
        break;
      }
  return f;
}

double ConcaveFunction::value(const Vec& x) const {
  if (int(x.size()) != dim_) throw ConfigError("function evaluated at wrong dimension");
  if (is_min_affine()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) best = std::min(best, dot(p.w, x) + p.b);
    return best;
  }
  double quad = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim_; ++j) row += Q_[i][j] * x[j];
    quad += x[i] * row;
  }
  return c0_ + dot(w_, x) - quad;
}

std::optional<QuadraticForm> ConcaveFunction::to_quadratic() const {
  QuadraticForm q;
  if (is_min_affine()) {
    if (pieces_.size() != 1) return std::nullopt;
    q.c0 = pieces_[0].b;
    q.w = pieces_[0].w;
    q.Q.assign(dim_, Vec(dim_, 0.0));
    return q;
  }
  q.c0 = c0_;
  q.w = w_;
  q.Q = Q_;
  return q;
}

double ConcaveFunction::lipschitz(const DecisionSet& set) const {
  if (is_min_affine()) {
    double best = 0.0;
    for (const auto& p : pieces_) best = std::max(best, norm(p.w));
    return best;
  }
  return norm(w_) + 2.0 * q_norm_ * set.max_norm();
}

double ConcaveFunction::upper_bound(const DecisionSet& set) const {
  if (int(set.dim()) != dim_) throw UsageError("set dimension mismatch");
  if (is_min_affine()) {
    if (set.kind() == SetKind::Box)
      if (auto m = minaffine_box_max(pieces_, set.lower(), set.upper()))
        return *m;
    // f <= each piece, so the smallest per-piece max is a valid upper bound.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pieces_) {
      double m = p.b;
      if (set.kind() == SetKind::Box) {
        for (int j = 0; j < dim_; ++j)
          m += std::max(p.w[j] * set.lower()[j], p.w[j] * set.upper()[j]);
      } else {
        m += norm(p.w) * set.radius();
      }
      best = std::min(best, m);
    }
    return best;
  }
  if (set.kind() == SetKind::Box && q_diagonal_) {
    double m = c0_;
    for (int j = 0; j < dim_; ++j)
      m += coord_max(w_[j], Q_[j][j], set.lower()[j], set.upper()[j]);
    return m;
  }
  // Dropping -x'Qx <= 0 leaves the affine part's max.
  double m = c0_;
  if (set.kind() == SetKind::Box) {
    for (int j = 0; j < dim_; ++j)
      m += std::max(w_[j] * set.lower()[j], w_[j] * set.upper()[j]);
  } else {
    m += norm(w_) * set.radius();
  }
  return m;
}

double ConcaveFunction::lower_bound(const DecisionSet& set) const {
  if (int(set.dim()) != dim_) throw UsageError("set dimension mismatch");
  if (auto m = exact_min(*this, set)) return *m;
  return mc_lower_inflated(*this, set);
}

std::optional<double> exact_min(const ConcaveFunction& fn, const DecisionSet& set) {
  if (fn.is_min_affine()) {
    // min over x of min over pieces commutes, and each piece's min is closed form.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : fn.pieces()) {
      double m = p.b;
      if (set.kind() == SetKind::Box) {
        for (int j = 0; j < fn.dim(); ++j)
          m += std::min(p.w[j] * set.lower()[j], p.w[j] * set.upper()[j]);
      } else {
        m -= norm(p.w) * set.radius();
      }
      best = std::min(best, m);
    }
    return best;
  }
  if (set.kind() == SetKind::Box && set.dim() <= 12) {
    // Concave functions attain their minimum over a box at a corner.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : set.vertices()) best = std::min(best, fn.value(v));
    return best;
  }
  return std::nullopt;
}

double grid_min(const ConcaveFunction& fn, const DecisionSet& set, int resolution) {
  if (resolution < 1) throw UsageError("grid resolution must be positive");
  int d = set.dim();
  double total = std::pow(double(resolution) + 1.0, d);
  if (total > 2e7) throw UsageError("grid too large; lower the resolution");
  Vec lo(d), hi(d);
  if (set.kind() == SetKind::Box) {
    lo = set.lower();
    hi = set.upper();
  } else {
    lo.assign(d, -set.radius());
    hi.assign(d, set.radius());
  }
  long n = std::lround(total);
  double best = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : best) schedule(static)
  for (long idx = 0; idx < n; ++idx) {
    Vec x(d);
    long rem = idx;
    for (int j = 0; j < d; ++j) {
      int i = int(rem % (resolution + 1));
      rem /= (resolution + 1);
      x[j] = lo[j] + (hi[j] - lo[j]) * double(i) / resolution;
    }
    if (set.kind() == SetKind::Ball && !set.contains(x, 1e-12)) continue;
    double v = fn.value(x);
    if (v < best) best = v;
  }
  return best;
}

std::pair<double, Vec> evaluate(const Scenario& s, const Vec& x) {
  double fv = s.f.value(x);
  Vec gv(s.g.size());
  for (size_t k = 0; k < s.g.size(); ++k) gv[k] = s.g[k].value(x);
  return {fv, gv};
}

ScenarioBounds compute_bounds(const std::vector<Scenario>& support,
                              const DecisionSet& set) {
  if (support.empty()) throw ConfigError("support must hold at least one scenario");
  ScenarioBounds b;
  for (const auto& s : support) {
    double fu = s.f.upper_bound(set);
    double fl = s.f.lower_bound(set);
    b.f_bar = std::max(b.f_bar, std::max(std::abs(fu), std::abs(fl)));
    b.lipschitz = std::max(b.lipschitz, s.f.lipschitz(set));
    for (const auto& g : s.g) {
      double gu = g.upper_bound(set);
      double gl = g.lower_bound(set);
      b.g_bar = std::max(b.g_bar, std::max(std::abs(gu), std::abs(gl)));
      b.lipschitz = std::max(b.lipschitz, g.lipschitz(set));
    }
  }
  return b;
}

SupportReport validate_scenarios(const std::vector<Scenario>& support,
                                 const DecisionSet& set) {
  if (support.empty()) throw ConfigError("support must hold at least one scenario");
  size_t K = support[0].g.size();
  if (K == 0) throw ConfigError("each scenario needs at least one constraint");
  SupportReport rep;
  rep.min_f = std::numeric_limits<double>::infinity();
  rep.min_constraint = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < support.size(); ++i) {
    const Scenario& s = support[i];
    if (s.f.dim() != set.dim())
      throw ConfigError("scenario " + std::to_string(i) + " reward dimension mismatch");
    if (s.g.size() != K)
      throw ConfigError("scenario " + std::to_string(i) + " has inconsistent constraint count");
    double fl = s.f.lower_bound(set);
    rep.min_f = std::min(rep.min_f, fl);
    if (fl < -1e-9)
      throw ConfigError("reward of scenario " + std::to_string(i) +
                        " goes negative on the decision set (certified lower bound " +
                        std::to_string(fl) + ")");
    for (const auto& g : s.g) {
      if (g.dim() != set.dim())
        throw ConfigError("scenario " + std::to_string(i) + " constraint dimension mismatch");
      double m;
      if (auto em = exact_min(g, set)) {
        m = *em;
      } else if (set.dim() <= 3) {
        m = grid_min(g, set, set.dim() <= 2 ? 256 : 64);
      } else {
        m = mc_sample_min(g, set, kMcSamples, kBoundsSeed);
      }
      rep.min_constraint = std::min(rep.min_constraint, m);
    }
  }
  rep.constraints_can_bind = rep.min_constraint < 0.0;
  return rep;
}

SafeCheck validate_safe_action(const std::vector<Scenario>& support,
                               const DecisionSet& set, const SafeAction& safe) {
  SafeCheck check;
  check.margin = std::numeric_limits<double>::infinity();
  if (int(safe.point.size()) != set.dim()) {
    check.reason = "safe point has wrong dimension";
    check.margin = 0.0;
    return check;
  }
  if (!set.contains(safe.point, 1e-12)) {
    check.reason = "safe point lies outside the decision set";
    check.margin = 0.0;
    return check;
  }
  if (!(safe.beta_bar > 0.0)) {
    check.reason = "safe margin beta_bar must be positive";
    check.margin = 0.0;
    return check;
  }
  for (size_t i = 0; i < support.size(); ++i)
    for (const auto& g : support[i].g)
      check.margin = std::min(check.margin, g.value(safe.point));
  if (check.margin <= safe.beta_bar) {
    check.reason = "safe point margin " + std::to_string(check.margin) +
                   " does not exceed claimed beta_bar " + std::to_string(safe.beta_bar);
    return check;
  }
  check.ok = true;
  return check;
}

}  // namespace boco
