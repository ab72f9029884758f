#pragma once

#include "boco/geometry.hpp"
#include "boco/scenarios.hpp"

namespace boco {

// Hyperparameters of the primal-dual bandit learner. Usually produced by
// derive_params from the horizon; every field can be overridden before
// validation for experiments.
struct AlgoParams {
  int horizon = 0;          // T
  int num_constraints = 0;  // K
  int dim = 0;              // d
  double eta = 0.0;         // dual step size
  double rho = 0.0;         // exploration radius around the aggregate
  double epsilon = 0.0;     // learning rate of the expert weights
  double beta = 0.0;        // safety buffer per remaining round
  double alpha = 0.0;       // domain shrink factor keeping perturbations inside
  double dual_cap = 0.0;    // upper bound of the dual box [0, dual_cap]^K
  Vec gammas;               // expert step sizes, halving from gammas[0]
  ScenarioBounds bounds;
  SafeAction safe;

  void validate(const DecisionSet& set) const;  // throws ConfigError
};

// Default schedule for a horizon-T run:
//   eta = 1/sqrt(K T)           rho = K^{1/3} T^{-1/4}
//   epsilon = T^{-1/2}          beta = 1/ln T
//   dual_cap = F_bar ln T       gamma_max = K^{-1/6} sqrt(1 + D T) T^{-3/4}
//   N = max(1, ceil(log2(1 + D T) / 2)) experts on a halving grid
//   alpha = min(rho / r0, 1/2)
// The perturbed point is feasible by construction when the origin-inradius
// r0 is positive; a boundary origin (r0 = 0) falls back to alpha = 1/2 and
// relies on the final projection guard in decide().
AlgoParams derive_params(int T, int K, const DecisionSet& set,
                         const ScenarioBounds& bounds, const SafeAction& safe);

struct Feedback {
  double f_val = 0.0;
  Vec g_vals;
};

enum class Phase { Running, Stopped };

// One-point-feedback gradient estimate: (d / rho) * (f + lambda.g) * u.
Vec gradient_estimate(double f_val, const Vec& g_vals, const Vec& lambda,
                      const Vec& u, double rho, int d);

// The learner. Each round: decide() returns the point to play, then
// observe() consumes the realized payoff and constraint values. A safety
// stop watches the constraint balances; once the remaining-round buffer
// cannot cover a worst-case round, the learner locks onto the safe action
// for the rest of the horizon and freezes all learning state.
class Algorithm {
 public:
  Algorithm(AlgoParams params, DecisionSet set);

  const Vec& decide(RngStream& perturbation_rng);
  void observe(const Feedback& fb);

  int t() const { return t_; }
  Phase phase() const { return phase_; }
  // First stopped round; horizon + 1 while running.
  int tau() const { return tau_; }
  const Vec& duals() const { return lambda_; }
  const Vec& balances() const { return balances_; }
  const Vec& aggregate() const { return aggregate_; }
  const std::vector<Vec>& expert_points() const { return experts_; }
  Vec normalized_weights() const;
  const AlgoParams& params() const { return params_; }

 private:
  AlgoParams params_;
  DecisionSet set_;
  int t_ = 1;
  Phase phase_ = Phase::Running;
  int tau_ = 0;
  Vec lambda_, balances_;
  Vec log_weights_;
  std::vector<Vec> experts_;
  Vec aggregate_, u_, decision_;
  bool awaiting_observe_ = false;
};

}  // namespace boco
