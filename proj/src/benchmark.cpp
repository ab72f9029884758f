#include "boco/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace boco {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kChunk = 16384;

double max_lipschitz(const std::vector<Scenario>& support, const DecisionSet& set) {
  double L = 0.0;
  for (const auto& s : support) {
    L = std::max(L, s.f.lipschitz(set));
    for (const auto& g : s.g) L = std::max(L, g.lipschitz(set));
  }
  return L;
}

// Rounds grouped by exactly equal marginals, in first-occurrence order.
struct Groups {
  std::vector<Vec> probs;
  std::vector<long> counts;
  std::vector<int> of_round;
  int M = 0;
};

Groups group_marginals(const std::vector<Distribution>& marginals) {
  Groups g;
  std::map<Vec, int> seen;
  g.of_round.reserve(marginals.size());
  for (const auto& d : marginals) {
    auto [it, fresh] = seen.try_emplace(d.probs, g.M);
    if (fresh) {
      g.probs.push_back(d.probs);
      g.counts.push_back(0);
      ++g.M;
    }
    g.counts[it->second] += 1;
    g.of_round.push_back(it->second);
  }
  return g;
}

// Uniform tensor grid over the set's bounding box; ball grids exclude
// points outside the ball. Indices are flattened row-major.
struct Grid {
  const DecisionSet* set;
  int d = 0;
  int res = 0;
  long n = 0;
  Vec lo, hi;

  Grid(const DecisionSet& s, int resolution) : set(&s) {
    d = s.dim();
    res = resolution;
    n = 1;
    for (int j = 0; j < d; ++j) n *= res + 1;
    if (s.kind() == SetKind::Box) {
      lo = s.lower();
      hi = s.upper();
    } else {
      lo.assign(d, -s.radius());
      hi.assign(d, s.radius());
    }
  }

  Vec point(long idx) const {
    Vec x(d);
    long rem = idx;
    for (int j = 0; j < d; ++j) {
      int i = int(rem % (res + 1));
      rem /= res + 1;
      x[j] = lo[j] + (hi[j] - lo[j]) * double(i) / res;
    }
    return x;
  }

  bool inside(const Vec& x) const {
    return set->kind() == SetKind::Box || set->contains(x, 1e-12);
  }
};

// Expected payoff/constraint values per marginal group over the grid.
// Tables are materialized when they fit; otherwise values are recomputed
// from the scenarios on demand. Either way results are deterministic and
// independent of the thread count.
class Oracle {
 public:
  Oracle(const HindsightProblem& p, const Grid& grid, const Groups& groups,
         bool parallel)
      : p_(&p), grid_(&grid), groups_(&groups), parallel_(parallel) {
    K_ = p.num_constraints;
    long cells = grid.n * groups.M * (K_ + 1);
    tabled_ = cells <= 12'000'000;
    if (!tabled_) return;
    F_.assign(groups.M, std::vector<double>(grid.n));
    G_.assign(groups.M, std::vector<double>(grid.n * K_));
    for (int m = 0; m < groups.M; ++m) {
      auto& F = F_[m];
      auto& G = G_[m];
      const Vec& prob = groups.probs[m];
      const long n = grid.n;
#pragma omp parallel for if (parallel_) schedule(static)
      for (long i = 0; i < n; ++i) {
        Vec x = grid.point(i);
        if (!grid.inside(x)) {
          F[i] = -kInf;
          for (int k = 0; k < K_; ++k) G[k * n + i] = 0.0;
          continue;
        }
        double f = 0.0;
        Vec g(K_, 0.0);
        for (size_t s = 0; s < prob.size(); ++s) {
          if (prob[s] == 0.0) continue;
          f += prob[s] * p.support[s].f.value(x);
          for (int k = 0; k < K_; ++k)
            g[k] += prob[s] * p.support[s].g[k].value(x);
        }
        F[i] = f;
        for (int k = 0; k < K_; ++k) G[k * n + i] = g[k];
      }
    }
  }

  int K() const { return K_; }
  long n() const { return grid_->n; }

  double f_at(int m, long i) const {
    if (tabled_) return F_[m][i];
    Vec x = grid_->point(i);
    if (!grid_->inside(x)) return -kInf;
    double f = 0.0;
    const Vec& prob = groups_->probs[m];
    for (size_t s = 0; s < prob.size(); ++s)
      if (prob[s] != 0.0) f += prob[s] * p_->support[s].f.value(x);
    return f;
  }

  Vec g_at(int m, long i) const {
    Vec g(K_, 0.0);
    if (tabled_) {
      for (int k = 0; k < K_; ++k) g[k] = G_[m][k * grid_->n + i];
      return g;
    }
    Vec x = grid_->point(i);
    if (!grid_->inside(x)) return g;
    const Vec& prob = groups_->probs[m];
    for (size_t s = 0; s < prob.size(); ++s)
      if (prob[s] != 0.0)
        for (int k = 0; k < K_; ++k)
          g[k] += prob[s] * p_->support[s].g[k].value(x);
    return g;
  }

  // argmax over the grid of f + lambda.g for one group; ties resolve to the
  // lowest index. Chunks are merged in order, so any thread count yields the
  // same answer.
  std::pair<double, long> argmax(int m, const Vec& lambda) const {
    const long n = grid_->n;
    const long chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> best_val(chunks, -kInf);
    std::vector<long> best_idx(chunks, -1);
#pragma omp parallel for if (parallel_) schedule(static)
    for (long c = 0; c < chunks; ++c) {
      double bv = -kInf;
      long bi = -1;
      const long end = std::min(n, (c + 1) * kChunk);
      if (tabled_) {
        const auto& F = F_[m];
        const auto& G = G_[m];
        for (long i = c * kChunk; i < end; ++i) {
          double h = F[i];
          for (int k = 0; k < K_; ++k) h += lambda[k] * G[k * n + i];
          if (h > bv) {
            bv = h;
            bi = i;
          }
        }
      } else {
        for (long i = c * kChunk; i < end; ++i) {
          double h = f_at(m, i);
          if (h == -kInf) continue;
          Vec g = g_at(m, i);
          for (int k = 0; k < K_; ++k) h += lambda[k] * g[k];
          if (h > bv) {
            bv = h;
            bi = i;
          }
        }
      }
      best_val[c] = bv;
      best_idx[c] = bi;
    }
    double bv = -kInf;
    long bi = -1;
    for (long c = 0; c < chunks; ++c)
      if (best_val[c] > bv) {
        bv = best_val[c];
        bi = best_idx[c];
      }
    return {bv, bi};
  }

  // Best uniform slack of the time-averaged constraints on the grid, plus
  // the grid payoff maximum. Used to bound the optimal multiplier.
  std::pair<double, double> slater_and_fmax() const {
    const long n = grid_->n;
    const int M = groups_->M;
    const double T = double(p_->marginals.size());
    double best_margin = -kInf;
    double fmax = -kInf;
#pragma omp parallel for if (parallel_) schedule(static) \
    reduction(max : best_margin, fmax)
    for (long i = 0; i < n; ++i) {
      bool ok = true;
      Vec avg(K_, 0.0);
      for (int m = 0; m < M; ++m) {
        double f = f_at(m, i);
        if (f == -kInf) {
          ok = false;
          break;
        }
        if (f > fmax) fmax = f;
        Vec g = g_at(m, i);
        double w = double(groups_->counts[m]) / T;
        for (int k = 0; k < K_; ++k) avg[k] += w * g[k];
      }
      if (!ok) continue;
      double margin = kInf;
      for (int k = 0; k < K_; ++k) margin = std::min(margin, avg[k]);
      if (margin > best_margin) best_margin = margin;
    }
    return {best_margin, fmax};
  }

 private:
  const HindsightProblem* p_;
  const Grid* grid_;
  const Groups* groups_;
  bool parallel_;
  bool tabled_ = false;
  int K_ = 0;
  std::vector<std::vector<double>> F_, G_;
};

struct DualEval {
  double q = 0.0;
  Vec sigma;              // subgradient: summed constraint values at maximizers
  std::vector<long> idx;  // per-group maximizer
};

DualEval eval_dual(const Oracle& oracle, const Groups& groups, const Vec& lambda) {
  DualEval e;
  e.sigma.assign(oracle.K(), 0.0);
  e.idx.resize(groups.M);
  for (int m = 0; m < groups.M; ++m) {
    auto [val, idx] = oracle.argmax(m, lambda);
    if (idx < 0) throw DataError("grid holds no points inside the set");
    e.q += double(groups.counts[m]) * val;
    e.idx[m] = idx;
    Vec g = oracle.g_at(m, idx);
    for (int k = 0; k < oracle.K(); ++k)
      e.sigma[k] += double(groups.counts[m]) * g[k];
  }
  return e;
}

struct BestTracker {
  double q = kInf;
  Vec lambda;
  std::vector<long> idx;

  void offer(const Vec& lam, const DualEval& e) {
    if (e.q < q) {
      q = e.q;
      lambda = lam;
      idx = e.idx;
    }
  }
};

// Scalar bisection on the k-th subgradient component with the other
// component (if any) held fixed. Returns the evaluation at the final best
// multiplier for the outer level to inspect.
DualEval bisect_component(const Oracle& oracle, const Groups& groups, Vec lambda,
                          int k, double hi_cap, BestTracker& best) {
  lambda[k] = 0.0;
  DualEval at_lo = eval_dual(oracle, groups, lambda);
  best.offer(lambda, at_lo);
  if (at_lo.sigma[k] >= 0.0) return at_lo;

  double lo = 0.0, hi = hi_cap;
  lambda[k] = hi;
  DualEval at_hi = eval_dual(oracle, groups, lambda);
  best.offer(lambda, at_hi);
  for (int grow = 0; grow < 8 && at_hi.sigma[k] < 0.0; ++grow) {
    hi *= 2.0;
    lambda[k] = hi;
    at_hi = eval_dual(oracle, groups, lambda);
    best.offer(lambda, at_hi);
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * (1.0 + hi_cap); ++it) {
    double mid = 0.5 * (lo + hi);
    lambda[k] = mid;
    DualEval at_mid = eval_dual(oracle, groups, lambda);
    best.offer(lambda, at_mid);
    if (at_mid.sigma[k] < 0.0) {
      lo = mid;
      at_lo = at_mid;
    } else {
      hi = mid;
      at_hi = at_mid;
    }
  }
  return at_hi.q < at_lo.q ? at_hi : at_lo;
}

std::vector<Vec> expand_points(const Groups& groups, const Grid& grid,
                               const std::vector<long>& idx) {
  std::vector<Vec> pts;
  pts.reserve(groups.of_round.size());
  std::vector<Vec> group_pts(groups.M);
  for (int m = 0; m < groups.M; ++m) group_pts[m] = grid.point(idx[m]);
  for (int g : groups.of_round) pts.push_back(group_pts[g]);
  return pts;
}

}  // namespace

HindsightProblem make_hindsight(const DecisionSet& set,
                                const std::vector<Scenario>& support,
                                const WorldModel& world, int T) {
  if (support.empty()) throw ConfigError("support must hold at least one scenario");
  world.validate(T, int(support.size()));
  return HindsightProblem{set, support, marginals(world, T),
                          int(support[0].g.size())};
}

OptResult opt_grid(const HindsightProblem& p, int resolution, bool parallel) {
  if (p.set.dim() > 2)
    throw UsageError("grid oracle handles dimension <= 2; use the dual solver");
  if (p.num_constraints > 2)
    throw UsageError("grid oracle handles at most 2 constraints; use the dual solver");
  if (resolution < 2) throw UsageError("grid resolution must be at least 2");
  if (p.marginals.empty()) throw UsageError("hindsight problem covers no rounds");

  Groups groups = group_marginals(p.marginals);
  Grid grid(p.set, resolution);
  if (double(groups.M) * double(grid.n) > 1e7)
    throw UsageError("distinct marginals times grid size exceeds 1e7; "
                     "use the dual solver or a coarser resolution");

  const long T = long(p.marginals.size());
  Oracle oracle(p, grid, groups, parallel);

  OptResult r;
  r.solver = SolverKind::Grid;
  r.certified_gap = max_lipschitz(p.support, p.set) * p.set.diameter() /
                    double(resolution) * double(T);

  if (groups.M == 1) {
    // Identical marginals: one shared point is optimal, so filter the grid
    // for per-round feasibility and take the best payoff.
    const long n = grid.n;
    const long chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> best_val(chunks, -kInf);
    std::vector<long> best_idx(chunks, -1);
#pragma omp parallel for if (parallel) schedule(static)
    for (long c = 0; c < chunks; ++c) {
      double bv = -kInf;
      long bi = -1;
      const long end = std::min(n, (c + 1) * kChunk);
      for (long i = c * kChunk; i < end; ++i) {
        double f = oracle.f_at(0, i);
        if (f == -kInf || f <= bv) continue;
        Vec g = oracle.g_at(0, i);
        bool feasible = true;
        for (int k = 0; k < p.num_constraints && feasible; ++k)
          feasible = g[k] >= 0.0;
        if (feasible) {
          bv = f;
          bi = i;
        }
      }
      best_val[c] = bv;
      best_idx[c] = bi;
    }
    double bv = -kInf;
    long bi = -1;
    for (long c = 0; c < chunks; ++c)
      if (best_val[c] > bv) {
        bv = best_val[c];
        bi = best_idx[c];
      }
    if (bi < 0)
      throw DataError("no feasible grid point; raise the resolution or check "
                      "the constraints");
    r.value = double(T) * bv;
    r.per_round_points = {grid.point(bi)};
    r.collapsed = true;
    return r;
  }

  auto [slater, fmax] = oracle.slater_and_fmax();
  if (!(slater > 0.0))
    throw DataError("grid finds no strictly feasible point for the averaged "
                    "constraints; the hindsight problem looks degenerate");
  double hi_cap = 1.1 * std::max(fmax, 0.0) / slater + 1.0;

  BestTracker best;
  Vec lambda(p.num_constraints, 0.0);
  if (p.num_constraints == 1) {
    bisect_component(oracle, groups, lambda, 0, hi_cap, best);
  } else {
    // Nested bisection: the outer level drives the second component using
    // the subgradient at the inner-optimal first component.
    auto inner = [&](double lam2) {
      Vec l(2, 0.0);
      l[1] = lam2;
      return bisect_component(oracle, groups, l, 0, hi_cap, best);
    };
    DualEval at_lo = inner(0.0);
    if (at_lo.sigma[1] < 0.0) {
      double lo = 0.0, hi = hi_cap;
      DualEval at_hi = inner(hi);
      for (int grow = 0; grow < 8 && at_hi.sigma[1] < 0.0; ++grow) {
        hi *= 2.0;
        at_hi = inner(hi);
      }
      for (int it = 0; it < 48 && hi - lo > 1e-10 * (1.0 + hi_cap); ++it) {
        double mid = 0.5 * (lo + hi);
        DualEval at_mid = inner(mid);
        (at_mid.sigma[1] < 0.0 ? lo : hi) = mid;
      }
    }
  }

  r.value = best.q;
  r.dual = best.lambda;
  r.per_round_points = expand_points(groups, grid, best.idx);
  return r;
}

OptResult opt_dual(const HindsightProblem& p, double tolerance, bool parallel) {
  if (p.set.dim() > 3)
    throw UsageError("dual solver handles dimension <= 3");
  if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
  if (p.marginals.empty()) throw UsageError("hindsight problem covers no rounds");

  const int inner_res = p.set.dim() <= 2 ? 320 : 48;
  Groups groups = group_marginals(p.marginals);
  Grid grid(p.set, inner_res);
  Oracle oracle(p, grid, groups, parallel);
  const int K = p.num_constraints;
  const long T = long(p.marginals.size());

  auto [slater, fmax] = oracle.slater_and_fmax();
  if (!(slater > 0.0))
    throw DataError("inner grid finds no strictly feasible point for the "
                    "averaged constraints");
  double lambda_cap = 2.0 * std::max(fmax, 0.0) / slater + 1.0;

  Vec lambda(K, 0.0);
  BestTracker best;
  std::vector<Vec> sum_x(groups.M, Vec(p.set.dim(), 0.0));
  long iters_done = 0;

  // True (non-grid) group expectations for the recovered primal points.
  auto group_values = [&](int m, const Vec& x) {
    double f = 0.0;
    Vec g(K, 0.0);
    const Vec& prob = groups.probs[m];
    for (size_t s = 0; s < prob.size(); ++s) {
      if (prob[s] == 0.0) continue;
      f += prob[s] * p.support[s].f.value(x);
      for (int k = 0; k < K; ++k) g[k] += prob[s] * p.support[s].g[k].value(x);
    }
    return std::make_pair(f, g);
  };

  double primal_value = 0.0;
  bool primal_ok = false;
  std::vector<Vec> avg(groups.M);
  auto refresh_primal = [&]() {
    primal_value = 0.0;
    Vec feas(K, 0.0);
    for (int m = 0; m < groups.M; ++m) {
      avg[m] = scaled(sum_x[m], 1.0 / double(iters_done));
      avg[m] = project(p.set, 0.0, avg[m]);
      auto [f, g] = group_values(m, avg[m]);
      primal_value += double(groups.counts[m]) * f;
      for (int k = 0; k < K; ++k) feas[k] += double(groups.counts[m]) * g[k];
    }
    primal_ok = true;
    for (int k = 0; k < K; ++k)
      if (feas[k] < -1e-9 * double(T)) primal_ok = false;
  };

  const int max_iters = 2000;
  bool converged = false;
  for (int it = 1; it <= max_iters; ++it) {
    DualEval e = eval_dual(oracle, groups, lambda);
    best.offer(lambda, e);
    for (int m = 0; m < groups.M; ++m) axpy(sum_x[m], 1.0, grid.point(e.idx[m]));
    iters_done = it;

    double snorm = norm(e.sigma);
    if (snorm > 0.0) {
      double step = (lambda_cap / 4.0) / std::sqrt(double(it));
      for (int k = 0; k < K; ++k)
        lambda[k] = std::clamp(lambda[k] - step * e.sigma[k] / snorm, 0.0,
                               4.0 * lambda_cap);
    }

    if (it % 50 == 0 || it == max_iters) {
      refresh_primal();
      if (primal_ok && best.q - primal_value <= tolerance * std::max(1.0, std::abs(best.q))) {
        converged = true;
        break;
      }
    }
  }
  if (iters_done > 0 && avg[0].empty()) refresh_primal();

  OptResult r;
  r.solver = SolverKind::DualDecomposition;
  r.value = best.q;
  r.dual = best.lambda;
  r.converged = converged;
  r.certified_gap = primal_ok ? std::max(0.0, best.q - primal_value) : kInf;
  r.collapsed = groups.M == 1;
  if (r.collapsed) {
    r.per_round_points = {avg[0]};
  } else {
    std::vector<Vec> pts;
    pts.reserve(groups.of_round.size());
    for (int g : groups.of_round) pts.push_back(avg[g]);
    r.per_round_points = std::move(pts);
  }
  return r;
}

RegretSummary regret(const OptResult& opt, const Trajectory& traj) {
  if (traj.rows.empty()) throw UsageError("regret needs a complete trajectory");
  for (size_t i = 0; i < traj.rows.size(); ++i)
    if (traj.rows[i].t != int(i) + 1)
      throw UsageError("trajectory rounds must run contiguously from 1");
  if (!opt.collapsed && opt.per_round_points.size() != traj.rows.size())
    throw UsageError("trajectory covers " + std::to_string(traj.rows.size()) +
                     " rounds, benchmark covers " +
                     std::to_string(opt.per_round_points.size()));
  RegretSummary s;
  s.violations.assign(traj.num_constraints, 0.0);
  double reward = 0.0;
  for (const auto& row : traj.rows) {
    reward += row.f;
    for (int k = 0; k < traj.num_constraints; ++k) s.violations[k] += row.g[k];
  }
  s.regret = opt.value - reward;
  return s;
}

CompetitiveConstant competitive_xi(const std::vector<Scenario>& support,
                                   const DecisionSet& set, const SafeAction& safe,
                                   int resolution) {
  if (!(safe.beta_bar > 0.0))
    throw UsageError("competitive constant needs a positive beta_bar");
  CompetitiveConstant c;
  c.min_constraint = kInf;
  for (const auto& s : support)
    for (const auto& g : s.g) {
      double m;
      if (auto em = exact_min(g, set))
        m = *em;
      else
        m = grid_min(g, set, resolution);
      c.min_constraint = std::min(c.min_constraint, m);
    }
  c.degenerate = c.min_constraint >= 0.0;
  c.xi = 1.0 - c.min_constraint / safe.beta_bar;
  return c;
}

GradCheckResult check_gradient_estimator(const ConcaveFunction& f,
                                         const std::vector<ConcaveFunction>& gs,
                                         const Vec& lambda, const Vec& x,
                                         double rho, long n_samples,
                                         uint64_t seed, bool parallel) {
  if (lambda.size() != gs.size())
    throw UsageError("dual weights and constraint functions disagree on count");
  if (!(rho > 0.0)) throw UsageError("smoothing radius must be positive");
  if (n_samples < 1) throw UsageError("need at least one sample");
  const int d = f.dim();
  if (int(x.size()) != d) throw UsageError("evaluation point has wrong dimension");

  // Analytic reference: combine everything into one quadratic. Sphere
  // smoothing of a quadratic shifts only the constant term, so the smoothed
  // gradient is w - 2 Q x of the combination.
  auto combined = f.to_quadratic();
  if (!combined)
    throw UsageError("gradient check needs quadratic or single-piece affine parts");
  for (size_t k = 0; k < gs.size(); ++k) {
    auto q = gs[k].to_quadratic();
    if (!q)
      throw UsageError("gradient check needs quadratic or single-piece affine parts");
    combined->c0 += lambda[k] * q->c0;
    for (int j = 0; j < d; ++j) {
      combined->w[j] += lambda[k] * q->w[j];
      for (int j2 = 0; j2 < d; ++j2)
        combined->Q[j][j2] += lambda[k] * q->Q[j][j2];
    }
  }
  GradCheckResult res;
  res.reference.assign(d, 0.0);
  for (int j = 0; j < d; ++j) {
    double qx = 0.0;
    for (int j2 = 0; j2 < d; ++j2) qx += combined->Q[j][j2] * x[j2];
    res.reference[j] = combined->w[j] - 2.0 * qx;
  }

  const long chunk = 8192;
  const long chunks = (n_samples + chunk - 1) / chunk;
  std::vector<Vec> partial(chunks, Vec(d, 0.0));
#pragma omp parallel for if (parallel) schedule(static)
  for (long c = 0; c < chunks; ++c) {
    RngStream rng(seed, uint64_t(c) + 1);
    Vec acc(d, 0.0);
    const long count = std::min(chunk, n_samples - c * chunk);
    for (long i = 0; i < count; ++i) {
      Vec u = sample_unit_sphere(rng, d);
      Vec y = x;
      axpy(y, rho, u);
      double h = f.value(y);
      for (size_t k = 0; k < gs.size(); ++k) h += lambda[k] * gs[k].value(y);
      axpy(acc, (double(d) / rho) * h, u);
    }
    partial[c] = std::move(acc);
  }
  res.mc_grad.assign(d, 0.0);
  for (long c = 0; c < chunks; ++c) axpy(res.mc_grad, 1.0, partial[c]);
  for (double& v : res.mc_grad) v /= double(n_samples);

  for (int j = 0; j < d; ++j)
    res.max_abs_err = std::max(res.max_abs_err,
                               std::abs(res.mc_grad[j] - res.reference[j]));
  return res;
}

SlacknessCheck check_dual_slackness(const Trajectory& traj, const AlgoParams& params) {
  SlacknessCheck out;
  out.worst_slack = -kInf;
  const int K = traj.num_constraints;
  if (K != params.num_constraints)
    throw UsageError("trajectory and parameters disagree on the constraint count");
  const double eta = params.eta;
  const double cap = params.dual_cap;
  const double g_bar = params.bounds.g_bar;
  const int tau = traj.tau();

  double lhs0 = 0.0;          // running sum of lambda_s . g_s
  Vec prefix_g(K, 0.0);       // running per-constraint sums
  for (const auto& row : traj.rows) {
    if (row.t > tau) break;
    lhs0 += dot(row.lambda, row.g);
    for (int k = 0; k < K; ++k) prefix_g[k] += row.g[k];
    double rhs0 = 0.5 * eta * double(row.t) * double(K) * g_bar * g_bar;
    out.worst_slack = std::max(out.worst_slack, lhs0 - rhs0);
    double probe_pen = cap * cap / (2.0 * eta);
    for (int k = 0; k < K; ++k) {
      double lhs = lhs0 - cap * prefix_g[k];
      out.worst_slack = std::max(out.worst_slack, lhs - rhs0 - probe_pen);
    }
  }
  if (traj.rows.empty()) out.worst_slack = 0.0;
  out.ok = out.worst_slack <= 1e-6;
  return out;
}

}  // namespace boco
