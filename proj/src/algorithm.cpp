#include "boco/algorithm.hpp"

#include <algorithm>
#include <cmath>

namespace boco {

void AlgoParams::validate(const DecisionSet& set) const {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  if (num_constraints < 1) throw ConfigError("need at least one constraint");
  if (dim != set.dim()) throw ConfigError("parameter dimension disagrees with the set");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(dual_cap > 0.0)) throw ConfigError("dual cap must be positive");
  if (gammas.empty()) throw ConfigError("need at least one expert step size");
  for (size_t i = 0; i < gammas.size(); ++i) {
    if (!(gammas[i] > 0.0)) throw ConfigError("expert step sizes must be positive");
    double expected = gammas[0] * std::ldexp(1.0, -int(i));
    if (std::abs(gammas[i] - expected) > 1e-12 * gammas[0])
      throw ConfigError("expert step sizes must halve from the largest");
  }
  if (!(bounds.f_bar > 0.0) || !(bounds.g_bar > 0.0))
    throw ConfigError("payoff and constraint bounds must be positive");
  if (int(safe.point.size()) != dim)
    throw ConfigError("safe point has wrong dimension");
  if (!(beta < safe.beta_bar))
    throw ConfigError(
        "safety buffer beta = " + std::to_string(beta) +
        " must stay strictly below the safe action margin beta_bar = " +
        std::to_string(safe.beta_bar) +
        "; long-run constraint satisfaction is only guaranteed under that gap");
  double r0 = set.origin_inradius();
  if (r0 > 0.0 && rho > alpha * r0 + 1e-15)
    throw ConfigError("perturbation radius rho = " + std::to_string(rho) +
                      " exceeds alpha * inradius = " + std::to_string(alpha * r0) +
                      "; perturbed points would leave the set");
}

AlgoParams derive_params(int T, int K, const DecisionSet& set,
                         const ScenarioBounds& bounds, const SafeAction& safe) {
  if (T < 3) throw ConfigError("horizon must be at least 3");
  if (K < 1) throw ConfigError("need at least one constraint");
  AlgoParams p;
  p.horizon = T;
  p.num_constraints = K;
  p.dim = set.dim();
  double dT = double(T);
  p.eta = 1.0 / std::sqrt(double(K) * dT);
  p.rho = std::pow(double(K), 1.0 / 3.0) * std::pow(dT, -0.25);
  p.epsilon = 1.0 / std::sqrt(dT);
  p.beta = 1.0 / std::log(dT);
  p.dual_cap = bounds.f_bar * std::log(dT);

  double D = set.diameter();
  double gamma_max =
      std::pow(double(K), -1.0 / 6.0) * std::sqrt(1.0 + D * dT) * std::pow(dT, -0.75);
  int N = std::max(1, int(std::ceil(0.5 * std::log2(1.0 + D * dT))));
  p.gammas.resize(N);
  for (int i = 0; i < N; ++i) p.gammas[i] = gamma_max * std::ldexp(1.0, -i);

  double r0 = set.origin_inradius();
  if (r0 > 0.0) {
    p.alpha = std::min(p.rho / r0, 0.5);
    if (p.rho > p.alpha * r0 + 1e-15)
      throw ConfigError("horizon too small for this geometry: perturbation radius " +
                        std::to_string(p.rho) + " cannot fit inside the set "
                        "(inradius " + std::to_string(r0) + "); increase the horizon");
  } else {
    // Origin on the boundary: no shrink factor makes perturbations feasible,
    // so use the cap and let the projection guard clamp the played point.
    p.alpha = 0.5;
  }

  p.bounds = bounds;
  p.safe = safe;
  p.validate(set);
  return p;
}

Vec gradient_estimate(double f_val, const Vec& g_vals, const Vec& lambda,
                      const Vec& u, double rho, int d) {
  if (g_vals.size() != lambda.size())
    throw UsageError("constraint values and duals disagree on dimension");
  if (int(u.size()) != d) throw UsageError("direction has wrong dimension");
  double scale = (double(d) / rho) * (f_val + dot(lambda, g_vals));
  return scaled(u, scale);
}

Algorithm::Algorithm(AlgoParams params, DecisionSet set)
    : params_(std::move(params)), set_(std::move(set)) {
  params_.validate(set_);
  tau_ = params_.horizon + 1;
  lambda_.assign(params_.num_constraints, 0.0);
  balances_.assign(params_.num_constraints, 0.0);
  log_weights_.assign(params_.gammas.size(), 0.0);
  experts_.assign(params_.gammas.size(), Vec(params_.dim, 0.0));
  aggregate_.assign(params_.dim, 0.0);
}

Vec Algorithm::normalized_weights() const {
  double m = *std::max_element(log_weights_.begin(), log_weights_.end());
  Vec w(log_weights_.size());
  double sum = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights_[i] - m);
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

const Vec& Algorithm::decide(RngStream& perturbation_rng) {
  if (awaiting_observe_)
    throw UsageError("decide called twice in round " + std::to_string(t_) +
                     " without an intervening observe");
  if (phase_ == Phase::Running) {
    // Stop as soon as some balance can no longer absorb a worst-case round
    // for every remaining one.
    double buffer = params_.beta * double(params_.horizon - t_ - 1);
    for (int k = 0; k < params_.num_constraints; ++k) {
      if (balances_[k] - params_.bounds.g_bar + buffer < 0.0) {
        phase_ = Phase::Stopped;
        tau_ = t_;
        break;
      }
    }
  }
  if (phase_ == Phase::Stopped) {
    decision_ = params_.safe.point;
    awaiting_observe_ = true;
    return decision_;
  }
  Vec w = normalized_weights();
  aggregate_.assign(params_.dim, 0.0);
  for (size_t i = 0; i < experts_.size(); ++i)
    axpy(aggregate_, w[i], experts_[i]);
  u_ = sample_unit_sphere(perturbation_rng, params_.dim);
  Vec raw = aggregate_;
  axpy(raw, params_.rho, u_);
  // Final guard; an exact no-op whenever rho <= alpha * r0 holds.
  decision_ = project(set_, 0.0, raw);
  awaiting_observe_ = true;
  return decision_;
}

void Algorithm::observe(const Feedback& fb) {
  if (!awaiting_observe_)
    throw UsageError("observe called without a preceding decide");
  if (int(fb.g_vals.size()) != params_.num_constraints)
    throw UsageError("feedback has wrong constraint count");
  if (fb.f_val < -1e-9)
    throw DataError("negative payoff " + std::to_string(fb.f_val) +
                    " violates the nonnegativity bound");
  if (std::abs(fb.f_val) > params_.bounds.f_bar + 1e-9)
    throw DataError("payoff " + std::to_string(fb.f_val) +
                    " exceeds the certified bound " + std::to_string(params_.bounds.f_bar));
  for (int k = 0; k < params_.num_constraints; ++k)
    if (std::abs(fb.g_vals[k]) > params_.bounds.g_bar + 1e-9)
      throw DataError("constraint " + std::to_string(k) + " value " +
                      std::to_string(fb.g_vals[k]) + " exceeds the certified bound " +
                      std::to_string(params_.bounds.g_bar));

  for (int k = 0; k < params_.num_constraints; ++k) balances_[k] += fb.g_vals[k];

  if (phase_ == Phase::Running) {
    Vec grad = gradient_estimate(fb.f_val, fb.g_vals, lambda_, u_,
                                 params_.rho, params_.dim);
    // Surrogate loss of expert i is grad . (aggregate - expert_i); weights
    // live in log space and get max-shifted, which leaves the aggregation
    // ratio exactly unchanged.
    for (size_t i = 0; i < experts_.size(); ++i) {
      double loss = dot(grad, aggregate_) - dot(grad, experts_[i]);
      log_weights_[i] -= params_.epsilon * loss;
    }
    double m = *std::max_element(log_weights_.begin(), log_weights_.end());
    for (double& lw : log_weights_) lw -= m;

    for (size_t i = 0; i < experts_.size(); ++i) {
      Vec step = experts_[i];
      axpy(step, params_.gammas[i], grad);
      experts_[i] = project(set_, params_.alpha, step);
    }

    for (int k = 0; k < params_.num_constraints; ++k)
      lambda_[k] = std::clamp(lambda_[k] - params_.eta * fb.g_vals[k], 0.0,
                              params_.dual_cap);
  }
  t_ += 1;
  awaiting_observe_ = false;
}

}  // namespace boco
