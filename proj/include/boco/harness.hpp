#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "boco/algorithm.hpp"
#include "boco/benchmark.hpp"
#include "boco/trajectory.hpp"
#include "boco/worlds.hpp"

namespace boco {

// World description as configured. Corrupted rounds may be listed explicitly
// or drawn uniformly (delta rounds, dedicated seed) once the horizon is known,
// so the same spec can be bound to different horizons.
struct WorldSpec {
  WorldKind kind = WorldKind::Stochastic;
  Vec base;                                  // stochastic / corrupted
  std::vector<std::pair<int, Vec>> corrupted_rounds;  // explicit form
  int delta = 0;                             // drawn form
  uint64_t draw_seed = 0;
  Vec replacement;                           // drawn form: one distribution
  std::vector<Vec> sequence;                 // adversarial
  std::vector<Vec> cycle;                    // periodic
  std::vector<Vec> transition;               // ergodic
  std::vector<Vec> emissions;                // ergodic
  Vec initial;                               // ergodic

  WorldModel build(int T) const;
};

struct ExperimentConfig {
  DecisionSet set = DecisionSet::ball(1, 1.0);
  std::vector<Scenario> support;
  SafeAction safe;
  WorldSpec world;
  int horizon = 0;
  int num_constraints = 0;
  std::string out_dir = ".";
  std::string solver;  // "grid", "dual", or empty for no hindsight oracle
  int resolution = 200;
  double dual_tolerance = 1e-3;
  nlohmann::json overrides;  // AlgoParams field overrides, may be null
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Horizon-derived parameters for T plus any configured overrides, fully
// validated (including beta < beta_bar and the world's shape checks).
AlgoParams resolve_params(const ExperimentConfig& cfg, int T);

struct RunResult {
  uint64_t seed = 0;
  int tau = 0;  // first stopped round, horizon + 1 if never stopped
  double cumulative_reward = 0.0;
  Vec violations;
  std::optional<double> regret_value;
  bool slackness_ok = false;
  double wall_seconds = 0.0;  // reported on stdout only, never serialized
};

struct RunOutput {
  RunResult result;
  Trajectory trajectory;
  AlgoParams params;
  std::optional<OptResult> opt;
};

// One full episode: fresh learner, fresh world cursor, T rounds of
// decide / sample / evaluate / observe. Identical (config, T, seed) yields
// bit-identical outputs. Environment and perturbation draws come from
// separate streams of the seed, so expert-count changes never shift the
// world's randomness. Pass an oracle result to get the regret filled in.
RunOutput run(const ExperimentConfig& cfg, int T, uint64_t seed,
              const OptResult* opt = nullptr);

// Hindsight oracle for the configured world at horizon T using the
// configured solver ("grid" or "dual").
OptResult solve_opt(const ExperimentConfig& cfg, int T);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

nlohmann::json params_json(const AlgoParams& p);
AlgoParams params_from_json(const nlohmann::json& j);
nlohmann::json opt_json(const OptResult& opt);
nlohmann::json summary_json(const RunOutput& out);
void write_summary(const std::string& path, const RunOutput& out);

struct SweepCell {
  int horizon = 0;
  int completed = 0;
  int failed = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  double mean_reward = 0.0;
  double opt_value = 0.0;
  double certified_gap = 0.0;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  double slope = 0.0;           // least-squares slope of log mean regret vs log T
  bool degenerate = false;      // some cell was unusable for the fit
  int total_runs = 0;
  int total_failures = 0;
  bool failure_budget_exceeded = false;  // more than 10% of runs failed
  std::vector<std::string> failures;
  std::vector<std::string> notes;  // why cells were excluded from the fit
};

// Cross product of horizons and seeds with per-horizon schedule and oracle.
// Runs fan out over a bounded worker pool; each run stays sequential inside.
SweepReport sweep(const ExperimentConfig& cfg, const std::vector<int>& horizons,
                  const std::vector<uint64_t>& seeds, int jobs);

nlohmann::json sweep_json(const SweepReport& report);

}  // namespace boco
