#pragma once

#include <string>
#include <vector>

#include "boco/algorithm.hpp"
#include "boco/scenarios.hpp"
#include "boco/trajectory.hpp"
#include "boco/worlds.hpp"

namespace boco {

// Offline comparison problem: choose one point per round, knowing every
// round's scenario distribution, to maximize the summed expected payoff
// subject to each summed expected constraint being nonnegative.
struct HindsightProblem {
  DecisionSet set;
  std::vector<Scenario> support;
  std::vector<Distribution> marginals;  // length T
  int num_constraints = 0;
};

HindsightProblem make_hindsight(const DecisionSet& set,
                                const std::vector<Scenario>& support,
                                const WorldModel& world, int T);

enum class SolverKind { Grid, DualDecomposition };

struct OptResult {
  double value = 0.0;
  // One point per round; a single entry when every round shares a marginal.
  std::vector<Vec> per_round_points;
  bool collapsed = false;
  SolverKind solver = SolverKind::Grid;
  double certified_gap = 0.0;
  bool converged = true;
  Vec dual;  // multiplier at the solution (empty for the collapsed grid path)
  std::string tie_break = "lowest-grid-index";
};

// Grid oracle. Groups rounds by identical marginals, collapses to a single
// feasibility-filtered argmax when one group remains, and otherwise
// minimizes the grid Lagrangian dual by (nested) bisection. Limits: dim <= 2,
// at most 2 constraints, groups * (resolution+1)^dim <= 1e7.
// certified_gap = lipschitz * diameter / resolution * T.
OptResult opt_grid(const HindsightProblem& p, int resolution, bool parallel = true);

// Lagrangian dual solver: projected subgradient descent on the dual with an
// inner grid maximization, primal recovery by averaging inner maximizers.
// Handles dim <= 3. Reports the best dual bound even without convergence.
OptResult opt_dual(const HindsightProblem& p, double tolerance, bool parallel = true);

struct RegretSummary {
  double regret = 0.0;  // opt value minus realized cumulative payoff
  Vec violations;       // per-constraint cumulative totals (positive = satisfied)
};

RegretSummary regret(const OptResult& opt, const Trajectory& traj);

struct CompetitiveConstant {
  double xi = 0.0;
  bool degenerate = false;   // no constraint can go negative anywhere
  double min_constraint = 0.0;
};

// xi = 1 - (min over support, constraints, and the set of g) / beta_bar.
// Exact where vertex or closed-form minima apply, grid otherwise.
CompetitiveConstant competitive_xi(const std::vector<Scenario>& support,
                                   const DecisionSet& set, const SafeAction& safe,
                                   int resolution = 256);

struct GradCheckResult {
  Vec mc_grad;
  Vec reference;
  double max_abs_err = 0.0;
};

// Monte Carlo check of the one-point gradient estimator against the analytic
// gradient of the sphere-smoothed payoff. Requires every component to have a
// quadratic view (quadratics or single-piece affine functions): for those the
// smoothing only shifts the constant, so the reference is w - 2 Q x of the
// dual-weighted combination. Chunked substreams make the estimate independent
// of the thread count.
GradCheckResult check_gradient_estimator(const ConcaveFunction& f,
                                         const std::vector<ConcaveFunction>& gs,
                                         const Vec& lambda, const Vec& x,
                                         double rho, long n_samples,
                                         uint64_t seed, bool parallel = true);

struct SlacknessCheck {
  bool ok = false;
  double worst_slack = 0.0;  // max over prefixes and probes of lhs - rhs
};

// Deterministic dual-descent certificate. For every prefix t up to the stop
// round and every probe multiplier y in {0} union {dual_cap * e_k}:
//   sum_{s<=t} (lambda_s - y) . g_s  <=  (eta/2) t K G_bar^2 + |y|^2 / (2 eta)
// within 1e-6 absolute slack. Any recorded trajectory must satisfy it.
SlacknessCheck check_dual_slackness(const Trajectory& traj, const AlgoParams& params);

}  // namespace boco
