#include "boco/worlds.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace boco {
namespace {

int draw_index(const Distribution& d, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  int last = int(d.probs.size()) - 1;
  for (int i = 0; i < last; ++i) {
    acc += d.probs[i];
    if (u < acc) return i;
  }
  return last;
}

// Strong connectivity of the positive-entry digraph via forward and
// backward reachability from state 0.
bool strongly_connected(const std::vector<Vec>& P) {
  int n = int(P.size());
  auto reach = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v = 0; v < n; ++v) {
        double w = forward ? P[u][v] : P[v][u];
        if (w > 0.0 && !seen[v]) {
          seen[v] = 1;
          q.push(v);
        }
      }
    }
    return std::count(seen.begin(), seen.end(), 1) == n;
  };
  return reach(true) && reach(false);
}

// Chain period via BFS levels: gcd over edges of level[u] + 1 - level[v].
// Aperiodic iff the period is 1. Assumes strong connectivity.
int chain_period(const std::vector<Vec>& P) {
  int n = int(P.size());
  std::vector<int> level(n, -1);
  std::queue<int> q;
  q.push(0);
  level[0] = 0;
  int g = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      if (P[u][v] <= 0.0) continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

ChainDiagnostics analyze_chain(const std::vector<Vec>& P) {
  ChainDiagnostics d;
  int n = int(P.size());
  d.irreducible = strongly_connected(P);
  d.aperiodic = d.irreducible && chain_period(P) == 1;

  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = P[i][j];
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  std::vector<double> mods(n);
  for (int i = 0; i < n; ++i) mods[i] = std::abs(es.eigenvalues()[i]);
  std::sort(mods.begin(), mods.end(), std::greater<double>());
  d.slem = n > 1 ? mods[1] : 0.0;

  if (d.irreducible && d.aperiodic) {
    // Power iteration on the row-stochastic matrix converges geometrically.
    Vec mu(n, 1.0 / n), next(n);
    for (int it = 0; it < 100000; ++it) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += mu[i] * P[i][j];
        next[j] = s;
      }
      double diff = 0.0;
      for (int j = 0; j < n; ++j) diff += std::abs(next[j] - mu[j]);
      mu.swap(next);
      if (diff < 1e-14) break;
    }
    d.stationary = mu;
  }
  return d;
}

}  // namespace

Distribution make_distribution(Vec probs) {
  if (probs.empty()) throw ConfigError("distribution must be nonempty");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw ConfigError("distribution has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ConfigError("distribution entries sum to " + std::to_string(sum) +
                      ", expected 1");
  return Distribution{std::move(probs)};
}

double tv_distance(const Distribution& p, const Distribution& q) {
  if (p.probs.size() != q.probs.size())
    throw UsageError("TV distance needs distributions over the same support");
  double s = 0.0;
  for (size_t i = 0; i < p.probs.size(); ++i)
    s += std::abs(p.probs[i] - q.probs[i]);
  return 0.5 * s;
}

WorldModel WorldModel::stochastic(Distribution p) {
  WorldModel w;
  w.kind_ = WorldKind::Stochastic;
  w.base_ = std::move(p);
  return w;
}

WorldModel WorldModel::corrupted(Distribution base,
                                 std::map<int, Distribution> replacements) {
  WorldModel w;
  w.kind_ = WorldKind::Corrupted;
  for (const auto& [t, d] : replacements) {
    if (t < 1) throw ConfigError("corrupted round indices are 1-based");
    if (d.probs.size() != base.probs.size())
      throw ConfigError("corrupted replacement at round " + std::to_string(t) +
                        " has wrong support size");
  }
  w.base_ = std::move(base);
  w.replacements_ = std::move(replacements);
  return w;
}

WorldModel WorldModel::adversarial(std::vector<Distribution> sequence) {
  if (sequence.empty()) throw ConfigError("adversarial sequence must be nonempty");
  size_t n = sequence[0].probs.size();
  for (const auto& d : sequence)
    if (d.probs.size() != n)
      throw ConfigError("adversarial sequence mixes support sizes");
  WorldModel w;
  w.kind_ = WorldKind::Adversarial;
  w.sequence_ = std::move(sequence);
  return w;
}

WorldModel WorldModel::periodic(std::vector<Distribution> cycle) {
  if (cycle.empty()) throw ConfigError("periodic cycle must be nonempty");
  size_t n = cycle[0].probs.size();
  for (const auto& d : cycle)
    if (d.probs.size() != n)
      throw ConfigError("periodic cycle mixes support sizes");
  WorldModel w;
  w.kind_ = WorldKind::Periodic;
  w.cycle_ = std::move(cycle);
  return w;
}

WorldModel WorldModel::ergodic(std::vector<Vec> transition,
                               std::vector<Distribution> emissions,
                               Distribution initial) {
  size_t M = transition.size();
  if (M == 0) throw ConfigError("ergodic chain needs at least one state");
  if (emissions.size() != M)
    throw ConfigError("ergodic chain needs one emission per state");
  if (initial.probs.size() != M)
    throw ConfigError("ergodic initial distribution must cover the states");
  size_t n = emissions[0].probs.size();
  for (const auto& e : emissions)
    if (e.probs.size() != n)
      throw ConfigError("ergodic emissions mix support sizes");
  for (size_t i = 0; i < M; ++i) {
    if (transition[i].size() != M)
      throw ConfigError("ergodic transition matrix must be square");
    double sum = 0.0;
    for (double p : transition[i]) {
      if (p < 0.0) throw ConfigError("ergodic transition has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("ergodic transition row " + std::to_string(i) +
                        " sums to " + std::to_string(sum));
  }
  WorldModel w;
  w.kind_ = WorldKind::Ergodic;
  w.diag_ = analyze_chain(transition);
  w.transition_ = std::move(transition);
  w.emissions_ = std::move(emissions);
  w.initial_ = std::move(initial);
  return w;
}

int WorldModel::support_size() const {
  switch (kind_) {
    case WorldKind::Stochastic:
    case WorldKind::Corrupted:
      return int(base_.probs.size());
    case WorldKind::Adversarial:
      return int(sequence_[0].probs.size());
    case WorldKind::Periodic:
      return int(cycle_[0].probs.size());
    case WorldKind::Ergodic:
      return int(emissions_[0].probs.size());
  }
  return 0;
}

const ChainDiagnostics& WorldModel::chain_diagnostics() const {
  if (kind_ != WorldKind::Ergodic)
    throw UsageError("chain diagnostics only exist for the ergodic regime");
  return diag_;
}

void WorldModel::validate(int horizon, int support) const {
  if (horizon < 1) throw ConfigError("horizon must be positive");
  if (support_size() != support)
    throw ConfigError("world distributions cover " + std::to_string(support_size()) +
                      " scenarios, support holds " + std::to_string(support));
  switch (kind_) {
    case WorldKind::Corrupted:
      for (const auto& [t, d] : replacements_)
        if (t > horizon)
          throw ConfigError("corrupted round " + std::to_string(t) +
                            " exceeds horizon " + std::to_string(horizon));
      break;
    case WorldKind::Adversarial:
      if (int(sequence_.size()) != horizon)
        throw ConfigError("adversarial sequence covers " +
                          std::to_string(sequence_.size()) + " rounds, horizon is " +
                          std::to_string(horizon));
      break;
    case WorldKind::Periodic: {
      int q = int(cycle_.size());
      if (horizon % q != 0 || horizon / q < 2)
        throw ConfigError("periodic horizon must be a multiple of the cycle length "
                          "with at least two full cycles");
      break;
    }
    default:
      break;
  }
}

WorldCursor make_cursor(const WorldModel& w, RngStream& rng) {
  WorldCursor c;
  if (w.kind() == WorldKind::Ergodic)
    c.state = draw_index(w.initial_, rng);
  return c;
}

Distribution distribution_at(const WorldModel& w, int t, const WorldCursor& cursor) {
  if (t < 1) throw UsageError("rounds are 1-based");
  switch (w.kind_) {
    case WorldKind::Stochastic:
      return w.base_;
    case WorldKind::Corrupted: {
      auto it = w.replacements_.find(t);
      return it == w.replacements_.end() ? w.base_ : it->second;
    }
    case WorldKind::Adversarial:
      if (t > int(w.sequence_.size()))
        throw UsageError("round beyond the adversarial sequence");
      return w.sequence_[t - 1];
    case WorldKind::Periodic:
      return w.cycle_[(t - 1) % w.cycle_.size()];
    case WorldKind::Ergodic:
      if (cursor.state < 0 || cursor.state >= w.num_states())
        throw UsageError("ergodic cursor holds no valid hidden state");
      return w.emissions_[cursor.state];
  }
  throw UsageError("unknown world kind");
}

std::pair<int, WorldCursor> sample(const WorldModel& w, const WorldCursor& cursor,
                                   RngStream& rng) {
  Distribution d = distribution_at(w, cursor.t, cursor);
  int idx = draw_index(d, rng);
  WorldCursor next = cursor;
  next.t += 1;
  if (w.kind_ == WorldKind::Ergodic) {
    Distribution row{w.transition_[cursor.state]};
    next.state = draw_index(row, rng);
  }
  return {idx, next};
}

std::vector<Distribution> marginals(const WorldModel& w, int T) {
  if (T < 1) throw UsageError("horizon must be positive");
  std::vector<Distribution> out;
  out.reserve(T);
  if (w.kind_ == WorldKind::Ergodic) {
    Vec mu = w.initial_.probs;
    int M = w.num_states();
    int n = w.support_size();
    for (int t = 1; t <= T; ++t) {
      Vec probs(n, 0.0);
      for (int s = 0; s < M; ++s)
        for (int i = 0; i < n; ++i) probs[i] += mu[s] * w.emissions_[s].probs[i];
      out.push_back(make_distribution(std::move(probs)));
      Vec next(M, 0.0);
      for (int s = 0; s < M; ++s)
        for (int j = 0; j < M; ++j) next[j] += mu[s] * w.transition_[s][j];
      mu.swap(next);
    }
    return out;
  }
  WorldCursor dummy;
  for (int t = 1; t <= T; ++t) out.push_back(distribution_at(w, t, dummy));
  return out;
}

}  // namespace boco
