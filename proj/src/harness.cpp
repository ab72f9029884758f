#include "boco/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

namespace boco {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + ": missing \"" + key + "\"");
  return *it;
}

void expect_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
}

void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                 const std::string& ctx) {
  expect_object(j, ctx);
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) throw ConfigError(ctx + ": unknown key \"" + item.key() + "\"");
  }
}

double as_double(const json& j, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) throw ConfigError(ctx + ": expected an integer");
  return j.get<int>();
}

Vec as_vec(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ConfigError(ctx + ": expected an array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& el : j) v.push_back(as_double(el, ctx));
  return v;
}

std::vector<Vec> as_matrix(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ConfigError(ctx + ": expected an array of rows");
  std::vector<Vec> m;
  m.reserve(j.size());
  for (const auto& row : j) m.push_back(as_vec(row, ctx));
  return m;
}

DecisionSet parse_set(const json& j) {
  expect_object(j, "set");
  std::string type = field(j, "type", "set").get<std::string>();
  if (type == "box") {
    expect_keys(j, {"type", "lower", "upper"}, "set");
    return DecisionSet::box(as_vec(field(j, "lower", "set"), "set.lower"),
                            as_vec(field(j, "upper", "set"), "set.upper"));
  }
  if (type == "ball") {
    expect_keys(j, {"type", "dim", "radius"}, "set");
    return DecisionSet::ball(as_int(field(j, "dim", "set"), "set.dim"),
                             as_double(field(j, "radius", "set"), "set.radius"));
  }
  throw ConfigError("set: unknown type \"" + type + "\" (box or ball)");
}

ConcaveFunction parse_function(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  std::string type = field(j, "type", ctx).get<std::string>();
  if (type == "quadratic") {
    expect_keys(j, {"type", "c0", "w", "Q"}, ctx);
    Vec w = as_vec(field(j, "w", ctx), ctx + ".w");
    std::vector<Vec> Q(w.size(), Vec(w.size(), 0.0));
    if (j.contains("Q")) Q = as_matrix(j["Q"], ctx + ".Q");
    return ConcaveFunction::quadratic(as_double(field(j, "c0", ctx), ctx + ".c0"),
                                      std::move(w), std::move(Q));
  }
  if (type == "affine") {
    expect_keys(j, {"type", "w", "b"}, ctx);
    AffinePiece piece{as_vec(field(j, "w", ctx), ctx + ".w"),
                      as_double(field(j, "b", ctx), ctx + ".b")};
    return ConcaveFunction::min_affine({piece});
  }
  if (type == "min_affine") {
    expect_keys(j, {"type", "pieces"}, ctx);
    const json& arr = field(j, "pieces", ctx);
    if (!arr.is_array() || arr.empty())
      throw ConfigError(ctx + ".pieces: expected a nonempty array");
    std::vector<AffinePiece> pieces;
    for (const auto& pj : arr) {
      expect_keys(pj, {"w", "b"}, ctx + ".pieces[]");
      pieces.push_back({as_vec(field(pj, "w", ctx), ctx + ".pieces[].w"),
                        as_double(field(pj, "b", ctx), ctx + ".pieces[].b")});
    }
    return ConcaveFunction::min_affine(std::move(pieces));
  }
  throw ConfigError(ctx + ": unknown function type \"" + type +
                    "\" (quadratic, affine, or min_affine)");
}

Scenario parse_scenario(const json& j, const std::string& ctx) {
  expect_keys(j, {"f", "g"}, ctx);
  const json& garr = field(j, "g", ctx);
  if (!garr.is_array() || garr.empty())
    throw ConfigError(ctx + ".g: expected a nonempty array of functions");
  std::vector<ConcaveFunction> gs;
  int k = 0;
  for (const auto& gj : garr)
    gs.push_back(parse_function(gj, ctx + ".g[" + std::to_string(k++) + "]"));
  return Scenario{parse_function(field(j, "f", ctx), ctx + ".f"), std::move(gs)};
}

SafeAction parse_safe(const json& j) {
  expect_keys(j, {"point", "beta_bar"}, "safe_action");
  SafeAction safe;
  safe.point = as_vec(field(j, "point", "safe_action"), "safe_action.point");
  safe.beta_bar = as_double(field(j, "beta_bar", "safe_action"), "safe_action.beta_bar");
  return safe;
}

WorldSpec parse_world(const json& j) {
  expect_object(j, "world");
  std::string type = field(j, "type", "world").get<std::string>();
  WorldSpec w;
  if (type == "stochastic") {
    expect_keys(j, {"type", "p"}, "world");
    w.kind = WorldKind::Stochastic;
    w.base = as_vec(field(j, "p", "world"), "world.p");
    return w;
  }
  if (type == "corrupted") {
    expect_keys(j, {"type", "base", "rounds", "replacements", "replacement",
                    "delta", "draw_seed"},
                "world");
    w.kind = WorldKind::Corrupted;
    w.base = as_vec(field(j, "base", "world"), "world.base");
    bool explicit_rounds = j.contains("rounds");
    bool drawn = j.contains("delta");
    if (explicit_rounds && drawn)
      throw ConfigError("world: give either explicit rounds or delta, not both");
    if (explicit_rounds) {
      const json& rj = j["rounds"];
      if (!rj.is_array()) throw ConfigError("world.rounds: expected an array");
      std::vector<int> rounds;
      for (const auto& r : rj) rounds.push_back(as_int(r, "world.rounds"));
      if (j.contains("replacements")) {
        auto reps = as_matrix(j["replacements"], "world.replacements");
        if (reps.size() != rounds.size())
          throw ConfigError("world.replacements: need one row per corrupted round");
        for (size_t i = 0; i < rounds.size(); ++i)
          w.corrupted_rounds.emplace_back(rounds[i], reps[i]);
      } else if (j.contains("replacement")) {
        Vec rep = as_vec(j["replacement"], "world.replacement");
        for (int r : rounds) w.corrupted_rounds.emplace_back(r, rep);
      } else {
        throw ConfigError("world: rounds given without replacement distribution(s)");
      }
    } else if (drawn) {
      w.delta = as_int(j["delta"], "world.delta");
      if (w.delta < 0) throw ConfigError("world.delta: must be nonnegative");
      if (w.delta > 0 && !j.contains("replacement"))
        throw ConfigError("world: delta given without a replacement distribution");
      if (j.contains("replacement"))
        w.replacement = as_vec(j["replacement"], "world.replacement");
      if (j.contains("draw_seed"))
        w.draw_seed = uint64_t(as_int(j["draw_seed"], "world.draw_seed"));
    }
    return w;
  }
  if (type == "adversarial") {
    expect_keys(j, {"type", "sequence"}, "world");
    w.kind = WorldKind::Adversarial;
    w.sequence = as_matrix(field(j, "sequence", "world"), "world.sequence");
    return w;
  }
  if (type == "periodic") {
    expect_keys(j, {"type", "cycle"}, "world");
    w.kind = WorldKind::Periodic;
    w.cycle = as_matrix(field(j, "cycle", "world"), "world.cycle");
    return w;
  }
  if (type == "ergodic") {
    expect_keys(j, {"type", "transition", "emissions", "initial"}, "world");
    w.kind = WorldKind::Ergodic;
    w.transition = as_matrix(field(j, "transition", "world"), "world.transition");
    w.emissions = as_matrix(field(j, "emissions", "world"), "world.emissions");
    w.initial = as_vec(field(j, "initial", "world"), "world.initial");
    return w;
  }
  throw ConfigError("world: unknown type \"" + type + "\"");
}

const std::set<std::string> kOverrideKeys = {
    "eta",   "rho",      "epsilon", "beta",  "alpha",
    "dual_cap", "gammas", "f_bar",   "g_bar", "lipschitz"};

void check_overrides(const json& j) {
  if (j.is_null()) return;
  expect_object(j, "overrides");
  for (const auto& item : j.items()) {
    if (!kOverrideKeys.count(item.key()))
      throw ConfigError("overrides: unknown key \"" + item.key() + "\"");
    if (item.key() == "gammas") {
      as_vec(item.value(), "overrides.gammas");
    } else {
      as_double(item.value(), "overrides." + item.key());
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double_cell(const std::string& cell, int line_no) {
  const char* s = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    throw DataError("trajectory line " + std::to_string(line_no) +
                    ": bad number \"" + cell + "\"");
  return v;
}

}  // namespace

WorldModel WorldSpec::build(int T) const {
  switch (kind) {
    case WorldKind::Stochastic:
      return WorldModel::stochastic(make_distribution(base));
    case WorldKind::Corrupted: {
      std::map<int, Distribution> reps;
      if (!corrupted_rounds.empty()) {
        for (const auto& [round, probs] : corrupted_rounds)
          reps.insert_or_assign(round, make_distribution(probs));
      } else if (delta > 0) {
        if (T < 1) throw ConfigError("corrupted world needs a positive horizon");
        if (delta > T)
          throw ConfigError("corrupted world: delta exceeds the horizon");
        Distribution rep = make_distribution(replacement);
        // Dedicated stream so corrupted-round placement never interacts with
        // the run's own randomness and is reproducible across solvers.
        RngStream rng(draw_seed, 3);
        std::set<int> rounds;
        while (int(rounds.size()) < delta) {
          int r = 1 + int(rng.uniform() * T);
          if (r > T) r = T;
          rounds.insert(r);
        }
        for (int r : rounds) reps.emplace(r, rep);
      }
      return WorldModel::corrupted(make_distribution(base), std::move(reps));
    }
    case WorldKind::Adversarial: {
      std::vector<Distribution> seq;
      seq.reserve(sequence.size());
      for (const auto& row : sequence) seq.push_back(make_distribution(row));
      return WorldModel::adversarial(std::move(seq));
    }
    case WorldKind::Periodic: {
      std::vector<Distribution> cyc;
      cyc.reserve(cycle.size());
      for (const auto& row : cycle) cyc.push_back(make_distribution(row));
      return WorldModel::periodic(std::move(cyc));
    }
    case WorldKind::Ergodic: {
      std::vector<Distribution> em;
      em.reserve(emissions.size());
      for (const auto& row : emissions) em.push_back(make_distribution(row));
      return WorldModel::ergodic(transition, std::move(em), make_distribution(initial));
    }
  }
  throw UsageError("unreachable world kind");
}

ExperimentConfig parse_config(const json& j) {
  expect_keys(j, {"set", "support", "safe_action", "world", "run", "overrides"},
              "config");
  ExperimentConfig cfg;
  cfg.set = parse_set(field(j, "set", "config"));

  const json& sup = field(j, "support", "config");
  if (!sup.is_array() || sup.empty())
    throw ConfigError("support: expected a nonempty array of scenarios");
  int idx = 0;
  for (const auto& sj : sup)
    cfg.support.push_back(parse_scenario(sj, "support[" + std::to_string(idx++) + "]"));

  cfg.safe = parse_safe(field(j, "safe_action", "config"));
  cfg.world = parse_world(field(j, "world", "config"));

  validate_scenarios(cfg.support, cfg.set);
  cfg.num_constraints = int(cfg.support.front().g.size());

  SafeCheck sc = validate_safe_action(cfg.support, cfg.set, cfg.safe);
  if (!sc.ok) throw ConfigError("safe_action: " + sc.reason);

  if (j.contains("run")) {
    const json& r = j["run"];
    expect_keys(r, {"T", "K", "out", "solver", "resolution", "dual_tolerance"},
                "run");
    if (r.contains("T")) {
      cfg.horizon = as_int(r["T"], "run.T");
      if (cfg.horizon < 1) throw ConfigError("run.T: must be positive");
    }
    if (r.contains("K") && as_int(r["K"], "run.K") != cfg.num_constraints)
      throw ConfigError("run.K: does not match the constraint count of the support");
    if (r.contains("out")) cfg.out_dir = r["out"].get<std::string>();
    if (r.contains("solver")) {
      cfg.solver = r["solver"].get<std::string>();
      if (!cfg.solver.empty() && cfg.solver != "grid" && cfg.solver != "dual")
        throw ConfigError("run.solver: expected \"grid\" or \"dual\"");
    }
    if (r.contains("resolution")) {
      cfg.resolution = as_int(r["resolution"], "run.resolution");
      if (cfg.resolution < 2) throw ConfigError("run.resolution: must be at least 2");
    }
    if (r.contains("dual_tolerance")) {
      cfg.dual_tolerance = as_double(r["dual_tolerance"], "run.dual_tolerance");
      if (cfg.dual_tolerance <= 0)
        throw ConfigError("run.dual_tolerance: must be positive");
    }
  }
  if (j.contains("overrides")) {
    check_overrides(j["overrides"]);
    cfg.overrides = j["overrides"];
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

AlgoParams resolve_params(const ExperimentConfig& cfg, int T) {
  ScenarioBounds bounds = compute_bounds(cfg.support, cfg.set);
  AlgoParams p = derive_params(T, cfg.num_constraints, cfg.set, bounds, cfg.safe);
  if (!cfg.overrides.is_null() && !cfg.overrides.empty()) {
    const json& o = cfg.overrides;
    if (o.contains("eta")) p.eta = o["eta"].get<double>();
    if (o.contains("rho")) p.rho = o["rho"].get<double>();
    if (o.contains("epsilon")) p.epsilon = o["epsilon"].get<double>();
    if (o.contains("beta")) p.beta = o["beta"].get<double>();
    if (o.contains("alpha")) p.alpha = o["alpha"].get<double>();
    if (o.contains("dual_cap")) p.dual_cap = o["dual_cap"].get<double>();
    if (o.contains("gammas")) p.gammas = as_vec(o["gammas"], "overrides.gammas");
    if (o.contains("f_bar")) p.bounds.f_bar = o["f_bar"].get<double>();
    if (o.contains("g_bar")) p.bounds.g_bar = o["g_bar"].get<double>();
    if (o.contains("lipschitz")) p.bounds.lipschitz = o["lipschitz"].get<double>();
    p.validate(cfg.set);
  }
  return p;
}

OptResult solve_opt(const ExperimentConfig& cfg, int T) {
  if (cfg.solver.empty())
    throw ConfigError("no hindsight solver configured (run.solver)");
  WorldModel world = cfg.world.build(T);
  HindsightProblem p = make_hindsight(cfg.set, cfg.support, world, T);
  if (cfg.solver == "grid") return opt_grid(p, cfg.resolution);
  return opt_dual(p, cfg.dual_tolerance);
}

RunOutput run(const ExperimentConfig& cfg, int T, uint64_t seed,
              const OptResult* opt) {
  RunOutput out;
  out.params = resolve_params(cfg, T);
  WorldModel world = cfg.world.build(T);
  world.validate(T, int(cfg.support.size()));

  // Separate streams: the world consumes only the environment stream, the
  // learner's sphere directions only the perturbation stream. Changing the
  // learner never changes the realized scenario sequence.
  RngStream env_rng(seed, 1);
  RngStream pert_rng(seed, 2);
  WorldCursor cursor = make_cursor(world, env_rng);

  Algorithm algo(out.params, cfg.set);
  out.trajectory.dim = cfg.set.dim();
  out.trajectory.num_constraints = cfg.num_constraints;
  out.trajectory.rows.reserve(size_t(T));

  double reward = 0.0;
  auto clock_start = std::chrono::steady_clock::now();
  for (int t = 1; t <= T; ++t) {
    try {
      TrajectoryRow row;
      row.t = t;
      row.x = algo.decide(pert_rng);
      row.stopped = (algo.phase() == Phase::Stopped);
      row.lambda = algo.duals();
      auto [idx, next] = sample(world, cursor, env_rng);
      cursor = next;
      auto [f, g] = evaluate(cfg.support[size_t(idx)], row.x);
      row.f = f;
      row.g = g;
      algo.observe({f, g});
      row.balance = algo.balances();
      reward += f;
      out.trajectory.rows.push_back(std::move(row));
    } catch (const DataError& e) {
      throw DataError("round " + std::to_string(t) + ": " + e.what());
    }
  }
  auto clock_end = std::chrono::steady_clock::now();

  out.result.seed = seed;
  out.result.tau = algo.tau();
  out.result.cumulative_reward = reward;
  out.result.violations = algo.balances();
  out.result.wall_seconds =
      std::chrono::duration<double>(clock_end - clock_start).count();

  // With a validated safe action, beta below its margin, and in-bound
  // feedback, every cumulative constraint total must come out positive.
  // A nonpositive total can only mean a broken learner, so fail loudly.
  for (int k = 0; k < cfg.num_constraints; ++k) {
    if (!(out.result.violations[size_t(k)] > 0.0))
      throw DataError("cumulative total of constraint " + std::to_string(k + 1) +
                      " is " + std::to_string(out.result.violations[size_t(k)]) +
                      " at the horizon; expected strictly positive");
  }

  out.result.slackness_ok = check_dual_slackness(out.trajectory, out.params).ok;
  if (opt != nullptr) {
    out.opt = *opt;
    out.result.regret_value = regret(*opt, out.trajectory).regret;
  }
  return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << "t";
  for (int i = 1; i <= traj.dim; ++i) out << ",x_" << i;
  out << ",f";
  for (int k = 1; k <= traj.num_constraints; ++k) out << ",g_" << k;
  for (int k = 1; k <= traj.num_constraints; ++k) out << ",lambda_" << k;
  for (int k = 1; k <= traj.num_constraints; ++k) out << ",B_" << k;
  out << ",phase\n";
  for (const auto& r : traj.rows) {
    out << r.t;
    for (double v : r.x) out << ',' << fmt17(v);
    out << ',' << fmt17(r.f);
    for (double v : r.g) out << ',' << fmt17(v);
    for (double v : r.lambda) out << ',' << fmt17(v);
    for (double v : r.balance) out << ',' << fmt17(v);
    out << ',' << (r.stopped ? "stopped" : "running") << '\n';
  }
  if (!out) throw DataError("write to " + path + " failed");
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  auto header = split_csv_line(line);
  size_t pos = 0;
  if (header.empty() || header[0] != "t")
    throw DataError(path + ": unrecognized trajectory header");
  ++pos;
  int dim = 0;
  while (pos < header.size() && header[pos] == "x_" + std::to_string(dim + 1)) {
    ++dim;
    ++pos;
  }
  if (pos >= header.size() || header[pos] != "f" || dim == 0)
    throw DataError(path + ": unrecognized trajectory header");
  ++pos;
  int K = 0;
  while (pos < header.size() && header[pos] == "g_" + std::to_string(K + 1)) {
    ++K;
    ++pos;
  }
  for (int k = 1; k <= K; ++k, ++pos)
    if (pos >= header.size() || header[pos] != "lambda_" + std::to_string(k))
      throw DataError(path + ": unrecognized trajectory header");
  for (int k = 1; k <= K; ++k, ++pos)
    if (pos >= header.size() || header[pos] != "B_" + std::to_string(k))
      throw DataError(path + ": unrecognized trajectory header");
  if (K == 0 || pos + 1 != header.size() || header[pos] != "phase")
    throw DataError(path + ": unrecognized trajectory header");

  Trajectory traj;
  traj.dim = dim;
  traj.num_constraints = K;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (int(cells.size()) != 1 + dim + 1 + 3 * K + 1)
      throw DataError("trajectory line " + std::to_string(line_no) +
                      ": wrong column count");
    TrajectoryRow r;
    size_t c = 0;
    r.t = int(parse_double_cell(cells[c++], line_no));
    for (int i = 0; i < dim; ++i) r.x.push_back(parse_double_cell(cells[c++], line_no));
    r.f = parse_double_cell(cells[c++], line_no);
    for (int k = 0; k < K; ++k) r.g.push_back(parse_double_cell(cells[c++], line_no));
    for (int k = 0; k < K; ++k)
      r.lambda.push_back(parse_double_cell(cells[c++], line_no));
    for (int k = 0; k < K; ++k)
      r.balance.push_back(parse_double_cell(cells[c++], line_no));
    if (cells[c] == "stopped") {
      r.stopped = true;
    } else if (cells[c] == "running") {
      r.stopped = false;
    } else {
      throw DataError("trajectory line " + std::to_string(line_no) +
                      ": bad phase \"" + cells[c] + "\"");
    }
    traj.rows.push_back(std::move(r));
  }
  return traj;
}

json params_json(const AlgoParams& p) {
  json j;
  j["horizon"] = p.horizon;
  j["num_constraints"] = p.num_constraints;
  j["dim"] = p.dim;
  j["eta"] = p.eta;
  j["rho"] = p.rho;
  j["epsilon"] = p.epsilon;
  j["beta"] = p.beta;
  j["alpha"] = p.alpha;
  j["dual_cap"] = p.dual_cap;
  j["gammas"] = p.gammas;
  j["num_experts"] = p.gammas.size();
  j["bounds"] = {{"f_bar", p.bounds.f_bar},
                 {"g_bar", p.bounds.g_bar},
                 {"lipschitz", p.bounds.lipschitz}};
  j["safe"] = {{"point", p.safe.point}, {"beta_bar", p.safe.beta_bar}};
  return j;
}

AlgoParams params_from_json(const json& j) {
  AlgoParams p;
  p.horizon = as_int(field(j, "horizon", "params"), "params.horizon");
  p.num_constraints =
      as_int(field(j, "num_constraints", "params"), "params.num_constraints");
  p.dim = as_int(field(j, "dim", "params"), "params.dim");
  p.eta = as_double(field(j, "eta", "params"), "params.eta");
  p.rho = as_double(field(j, "rho", "params"), "params.rho");
  p.epsilon = as_double(field(j, "epsilon", "params"), "params.epsilon");
  p.beta = as_double(field(j, "beta", "params"), "params.beta");
  p.alpha = as_double(field(j, "alpha", "params"), "params.alpha");
  p.dual_cap = as_double(field(j, "dual_cap", "params"), "params.dual_cap");
  p.gammas = as_vec(field(j, "gammas", "params"), "params.gammas");
  const json& b = field(j, "bounds", "params");
  p.bounds.f_bar = as_double(field(b, "f_bar", "params.bounds"), "params.bounds.f_bar");
  p.bounds.g_bar = as_double(field(b, "g_bar", "params.bounds"), "params.bounds.g_bar");
  p.bounds.lipschitz =
      as_double(field(b, "lipschitz", "params.bounds"), "params.bounds.lipschitz");
  const json& s = field(j, "safe", "params");
  p.safe.point = as_vec(field(s, "point", "params.safe"), "params.safe.point");
  p.safe.beta_bar =
      as_double(field(s, "beta_bar", "params.safe"), "params.safe.beta_bar");
  return p;
}

json opt_json(const OptResult& opt) {
  json j;
  j["value"] = opt.value;
  j["solver"] = (opt.solver == SolverKind::Grid) ? "grid" : "dual";
  j["collapsed"] = opt.collapsed;
  j["certified_gap"] = opt.certified_gap;
  j["converged"] = opt.converged;
  j["dual"] = opt.dual;
  j["tie_break"] = opt.tie_break;
  return j;
}

json summary_json(const RunOutput& out) {
  json j;
  j["seed"] = out.result.seed;
  j["horizon"] = out.params.horizon;
  j["tau"] = out.result.tau;
  j["cumulative_reward"] = out.result.cumulative_reward;
  j["violations"] = out.result.violations;
  if (out.result.regret_value.has_value()) {
    j["regret"] = *out.result.regret_value;
  } else {
    j["regret"] = nullptr;
  }
  j["slackness_ok"] = out.result.slackness_ok;
  j["params"] = params_json(out.params);
  if (out.opt.has_value()) j["opt"] = opt_json(*out.opt);
  return j;
}

void write_summary(const std::string& path, const RunOutput& out) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << summary_json(out).dump(2) << '\n';
  if (!f) throw DataError("write to " + path + " failed");
}

SweepReport sweep(const ExperimentConfig& cfg, const std::vector<int>& horizons,
                  const std::vector<uint64_t>& seeds, int jobs) {
  if (horizons.empty() || seeds.empty())
    throw UsageError("sweep needs at least one horizon and one seed");
  if (cfg.solver.empty())
    throw ConfigError("sweep needs a hindsight solver (run.solver) to measure regret");
  if (jobs < 1) jobs = 1;

  const int nT = int(horizons.size());
  const int nS = int(seeds.size());
  std::vector<OptResult> opts;
  opts.reserve(size_t(nT));
  for (int T : horizons) opts.push_back(solve_opt(cfg, T));

  std::vector<std::vector<RunResult>> results(
      static_cast<size_t>(nT), std::vector<RunResult>(static_cast<size_t>(nS)));
  std::vector<std::vector<bool>> done(static_cast<size_t>(nT),
                                      std::vector<bool>(static_cast<size_t>(nS)));
  std::vector<std::vector<std::string>> errors(
      static_cast<size_t>(nT), std::vector<std::string>(static_cast<size_t>(nS)));

  const int total = nT * nS;
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
  for (int job = 0; job < total; ++job) {
    const int hi = job / nS;
    const int si = job % nS;
    try {
      RunOutput ro = run(cfg, horizons[size_t(hi)], seeds[size_t(si)],
                         &opts[size_t(hi)]);
      results[size_t(hi)][size_t(si)] = ro.result;
      done[size_t(hi)][size_t(si)] = true;
    } catch (const std::exception& e) {
      errors[size_t(hi)][size_t(si)] =
          "T=" + std::to_string(horizons[size_t(hi)]) +
          " seed=" + std::to_string(seeds[size_t(si)]) + ": " + e.what();
    }
  }

  SweepReport report;
  report.total_runs = total;
  for (int hi = 0; hi < nT; ++hi) {
    SweepCell cell;
    cell.horizon = horizons[size_t(hi)];
    cell.opt_value = opts[size_t(hi)].value;
    cell.certified_gap = opts[size_t(hi)].certified_gap;
    std::vector<double> regs;
    double reward_sum = 0.0;
    for (int si = 0; si < nS; ++si) {
      if (!done[size_t(hi)][size_t(si)]) {
        ++cell.failed;
        report.failures.push_back(errors[size_t(hi)][size_t(si)]);
        continue;
      }
      const RunResult& r = results[size_t(hi)][size_t(si)];
      regs.push_back(r.regret_value.value());
      reward_sum += r.cumulative_reward;
      ++cell.completed;
    }
    report.total_failures += cell.failed;
    if (cell.completed > 0) {
      double sum = 0.0;
      for (double r : regs) sum += r;
      cell.mean_regret = sum / cell.completed;
      cell.mean_reward = reward_sum / cell.completed;
      if (cell.completed > 1) {
        double ss = 0.0;
        for (double r : regs) ss += (r - cell.mean_regret) * (r - cell.mean_regret);
        cell.stderr_regret =
            std::sqrt(ss / (double(cell.completed) * (cell.completed - 1)));
      }
    }
    report.cells.push_back(cell);
  }

  report.failure_budget_exceeded =
      report.total_failures * 10 > report.total_runs;

  // Log-log fit over horizons with a usable mean. A mean at or below the
  // oracle's certified gap (nonpositive means included) carries no trend
  // information; report the cell as degenerate instead of clamping.
  std::vector<double> xs, ys;
  for (const auto& cell : report.cells) {
    if (cell.completed == 0) {
      report.degenerate = true;
      report.notes.push_back("T=" + std::to_string(cell.horizon) +
                             ": no completed runs; excluded from the fit");
      continue;
    }
    if (cell.mean_regret <= cell.certified_gap) {
      report.degenerate = true;
      report.notes.push_back(
          "T=" + std::to_string(cell.horizon) + ": mean regret " +
          std::to_string(cell.mean_regret) + " not above the certified gap " +
          std::to_string(cell.certified_gap) + "; excluded from the fit");
      continue;
    }
    xs.push_back(std::log(double(cell.horizon)));
    ys.push_back(std::log(cell.mean_regret));
  }
  if (xs.size() < 2) {
    report.degenerate = true;
    report.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= double(xs.size());
    my /= double(xs.size());
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    report.slope = sxy / sxx;
  }
  return report;
}

json sweep_json(const SweepReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"horizon", c.horizon},
                     {"completed", c.completed},
                     {"failed", c.failed},
                     {"mean_regret", c.mean_regret},
                     {"stderr_regret", c.stderr_regret},
                     {"mean_reward", c.mean_reward},
                     {"opt_value", c.opt_value},
                     {"certified_gap", c.certified_gap}});
  }
  json j;
  j["cells"] = std::move(cells);
  if (std::isfinite(report.slope)) {
    j["slope"] = report.slope;
  } else {
    j["slope"] = nullptr;
  }
  j["degenerate"] = report.degenerate;
  j["total_runs"] = report.total_runs;
  j["total_failures"] = report.total_failures;
  j["failure_budget_exceeded"] = report.failure_budget_exceeded;
  j["failures"] = report.failures;
  j["notes"] = report.notes;
  return j;
}

}  // namespace boco
