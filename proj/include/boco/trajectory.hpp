#pragma once

#include <vector>

#include "boco/common.hpp"

namespace boco {

// One recorded round: the played point, realized payoff and constraint
// values, the dual vector in force during the round, cumulative constraint
// balances after the round, and whether the safety stop had triggered.
struct TrajectoryRow {
  int t = 0;
  Vec x;
  double f = 0.0;
  Vec g;
  Vec lambda;
  Vec balance;
  bool stopped = false;
};

struct Trajectory {
  int dim = 0;
  int num_constraints = 0;
  std::vector<TrajectoryRow> rows;

  // First stopped round, or T + 1 when the safety stop never triggered.
  int tau() const {
    for (const auto& r : rows)
      if (r.stopped) return r.t;
    return int(rows.size()) + 1;
  }
};

}  // namespace boco
