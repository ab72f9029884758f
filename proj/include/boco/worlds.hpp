#pragma once

#include <map>
#include <vector>

#include "boco/common.hpp"

namespace boco {

// Probability vector over scenario indices (finite support only).
struct Distribution {
  Vec probs;
};

// Validates nonnegativity and unit sum (1e-12) and returns the input.
Distribution make_distribution(Vec probs);

// Total variation distance: half the L1 distance between the vectors.
double tv_distance(const Distribution& p, const Distribution& q);

enum class WorldKind { Stochastic, Corrupted, Adversarial, Periodic, Ergodic };

struct ChainDiagnostics {
  bool irreducible = false;
  bool aperiodic = false;
  double slem = 0.0;  // second-largest eigenvalue modulus, diagnostic only
  Vec stationary;     // empty unless irreducible and aperiodic
};

// Non-stationary input process: which scenario distribution governs each
// round. Five regimes share one interface.
class WorldModel {
 public:
  static WorldModel stochastic(Distribution p);
  static WorldModel corrupted(Distribution base, std::map<int, Distribution> replacements);
  static WorldModel adversarial(std::vector<Distribution> sequence);
  static WorldModel periodic(std::vector<Distribution> cycle);
  // transition is row-stochastic over hidden states; emissions map each state
  // to a distribution over scenarios; initial is over hidden states.
  static WorldModel ergodic(std::vector<Vec> transition,
                            std::vector<Distribution> emissions,
                            Distribution initial);

  WorldKind kind() const { return kind_; }
  int support_size() const;
  int num_states() const { return int(transition_.size()); }
  int cycle_length() const { return int(cycle_.size()); }
  int corrupted_count() const { return int(replacements_.size()); }
  const std::map<int, Distribution>& replacements() const { return replacements_; }
  const ChainDiagnostics& chain_diagnostics() const;

  // Structural checks against a run: distribution sizes match the support,
  // periodic horizons are a multiple of the cycle with at least two cycles,
  // adversarial sequences cover exactly T rounds, corrupted rounds fall in
  // [1, T]. Throws ConfigError.
  void validate(int horizon, int support_size) const;

 private:
  WorldModel() = default;
  WorldKind kind_ = WorldKind::Stochastic;
  Distribution base_;                          // stochastic / corrupted
  std::map<int, Distribution> replacements_;   // corrupted
  std::vector<Distribution> sequence_;         // adversarial
  std::vector<Distribution> cycle_;            // periodic
  std::vector<Vec> transition_;                // ergodic
  std::vector<Distribution> emissions_;        // ergodic
  Distribution initial_;                       // ergodic
  ChainDiagnostics diag_;                      // ergodic

  friend Distribution distribution_at(const WorldModel&, int, const struct WorldCursor&);
  friend std::vector<Distribution> marginals(const WorldModel&, int);
  friend struct WorldCursor make_cursor(const WorldModel&, RngStream&);
  friend std::pair<int, struct WorldCursor> sample(const WorldModel&,
                                                   const struct WorldCursor&, RngStream&);
};

struct WorldCursor {
  int t = 1;       // next round to be sampled, 1-based
  int state = -1;  // hidden state, ergodic only
};

// Fresh cursor at round 1. Draws the ergodic initial hidden state (one draw);
// consumes no randomness for the other regimes.
WorldCursor make_cursor(const WorldModel& w, RngStream& rng);

// Scenario distribution governing round t. For the ergodic regime this is the
// emission of the cursor's realized hidden state.
Distribution distribution_at(const WorldModel& w, int t, const WorldCursor& cursor);

// Draws the round's scenario index and advances the cursor. The ergodic
// hidden state advances exactly once per round, independent of the learner.
std::pair<int, WorldCursor> sample(const WorldModel& w, const WorldCursor& cursor,
                                   RngStream& rng);

// Unconditional per-round scenario marginals for rounds 1..T. For the ergodic
// regime these compose the evolving state distribution with the emissions.
std::vector<Distribution> marginals(const WorldModel& w, int T);

}  // namespace boco
