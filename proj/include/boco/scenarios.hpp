#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boco/geometry.hpp"

namespace boco {

struct AffinePiece {
  Vec w;
  double b = 0.0;
};

struct QuadraticForm {
  double c0 = 0.0;
  Vec w;
  std::vector<Vec> Q;  // symmetric PSD, row-major
};

// Concave payoff or constraint function. Either the minimum of affine pieces
// or a quadratic c0 + w.x - x'Qx with Q symmetric positive semidefinite.
class ConcaveFunction {
 public:
  static ConcaveFunction min_affine(std::vector<AffinePiece> pieces);
  static ConcaveFunction quadratic(double c0, Vec w, std::vector<Vec> Q);

  double value(const Vec& x) const;
  int dim() const { return dim_; }
  bool is_min_affine() const { return !pieces_.empty(); }
  const std::vector<AffinePiece>& pieces() const { return pieces_; }

  // Quadratic view when one exists exactly: quadratics themselves and
  // single-piece affine functions. Multi-piece minima have none.
  std::optional<QuadraticForm> to_quadratic() const;

  // Lipschitz constant valid on the given set.
  double lipschitz(const DecisionSet& set) const;

  // Certified envelope over the set: upper never below the true sup,
  // lower never above the true inf. Exact where a closed form or vertex
  // enumeration applies; Monte Carlo with Lipschitz inflation otherwise.
  double upper_bound(const DecisionSet& set) const;
  double lower_bound(const DecisionSet& set) const;

 private:
  ConcaveFunction() = default;
  int dim_ = 0;
  std::vector<AffinePiece> pieces_;  // empty for quadratics
  double c0_ = 0.0;
  Vec w_;
  std::vector<Vec> Q_;
  double q_norm_ = 0.0;  // spectral norm of Q, cached at construction
  bool q_diagonal_ = false;
};

// Exact minimum over the set when a closed form or vertex route exists.
std::optional<double> exact_min(const ConcaveFunction& fn, const DecisionSet& set);

// Grid minimum (resolution intervals per dimension). An upper bound on the
// true minimum; used where no exact route applies.
double grid_min(const ConcaveFunction& fn, const DecisionSet& set, int resolution);

// One reward function and K constraint functions over a shared domain.
struct Scenario {
  ConcaveFunction f;
  std::vector<ConcaveFunction> g;
};

struct ScenarioBounds {
  double f_bar = 0.0;      // sup |f| over set and support
  double g_bar = 0.0;      // sup max_k |g_k| over set and support
  double lipschitz = 0.0;  // max Lipschitz constant over all functions
};

struct SafeAction {
  Vec point;
  double beta_bar = 0.0;
};

// (f(x), [g_1(x) ... g_K(x)]) for one scenario.
std::pair<double, Vec> evaluate(const Scenario& s, const Vec& x);

ScenarioBounds compute_bounds(const std::vector<Scenario>& support,
                              const DecisionSet& set);

struct SupportReport {
  double min_f = 0.0;           // certified lower bound on f over the support
  double min_constraint = 0.0;  // best-effort min over scenarios, k, set of g_k
  bool constraints_can_bind = false;
};

// Structural checks on the support: equal dimensions, equal constraint
// counts, f nonnegative on the set (hard error). Reports whether any
// constraint goes negative somewhere (if none does, they can never bind
// and the problem is degenerate; callers may warn).
SupportReport validate_scenarios(const std::vector<Scenario>& support,
                                 const DecisionSet& set);

struct SafeCheck {
  bool ok = false;
  double margin = 0.0;  // min over scenarios and k of g_k(point)
  std::string reason;   // empty when ok
};

// Checks point membership and g_k(point) > beta_bar for every scenario and
// constraint. Reports instead of raising.
SafeCheck validate_safe_action(const std::vector<Scenario>& support,
                               const DecisionSet& set, const SafeAction& safe);

}  // namespace boco
