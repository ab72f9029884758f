// Command-line front end: validate configs, run single episodes, sweep
// horizons and seeds, query the hindsight oracle, and audit result files.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "boco/harness.hpp"

namespace {

using boco::ExperimentConfig;

std::vector<long long> parse_list(const std::string& text, const char* what) {
  std::vector<long long> out;
  std::istringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) throw boco::ConfigError(std::string(what) + ": empty entry");
    auto dots = token.find("..");
    try {
      if (dots == std::string::npos) {
        size_t used = 0;
        long long v = std::stoll(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        out.push_back(v);
      } else {
        size_t used = 0;
        long long lo = std::stoll(token.substr(0, dots), &used);
        long long hi = std::stoll(token.substr(dots + 2), &used);
        if (hi < lo) throw boco::ConfigError(std::string(what) + ": range " + token +
                                             " is empty");
        for (long long v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::invalid_argument&) {
      throw boco::ConfigError(std::string(what) + ": bad entry \"" + token + "\"");
    } catch (const std::out_of_range&) {
      throw boco::ConfigError(std::string(what) + ": entry out of range \"" + token +
                              "\"");
    }
  }
  if (out.empty()) throw boco::ConfigError(std::string(what) + ": empty list");
  return out;
}

int require_horizon(const ExperimentConfig& cfg, int cli_T) {
  int T = cli_T > 0 ? cli_T : cfg.horizon;
  if (T <= 0)
    throw boco::ConfigError("no horizon: set run.T in the config or pass --T");
  return T;
}

int cmd_validate(const std::string& path) {
  ExperimentConfig cfg = boco::load_config(path);
  std::cout << "config ok: " << path << "\n";

  auto report = boco::validate_scenarios(cfg.support, cfg.set);
  std::printf("support: %zu scenarios, K=%d, d=%d, min f >= %.6g\n",
              cfg.support.size(), cfg.num_constraints, cfg.set.dim(), report.min_f);
  if (!report.constraints_can_bind)
    std::cout << "warning: no constraint can go negative anywhere; "
                 "the safety machinery is inert on this instance\n";

  auto sc = boco::validate_safe_action(cfg.support, cfg.set, cfg.safe);
  std::printf("safe action margin: %.6g (beta_bar %.6g)\n", sc.margin,
              cfg.safe.beta_bar);

  auto xi = boco::competitive_xi(cfg.support, cfg.set, cfg.safe);
  if (xi.degenerate) {
    std::cout << "competitive constant: degenerate (constraints never bind)\n";
  } else {
    std::printf("competitive constant xi: %.6g\n", xi.xi);
  }

  if (cfg.horizon > 0) {
    boco::WorldModel world = cfg.world.build(cfg.horizon);
    world.validate(cfg.horizon, int(cfg.support.size()));
    if (world.kind() == boco::WorldKind::Ergodic) {
      const auto& d = world.chain_diagnostics();
      std::printf("ergodic chain: irreducible=%s aperiodic=%s slem=%.6g\n",
                  d.irreducible ? "yes" : "no", d.aperiodic ? "yes" : "no", d.slem);
      if (!d.irreducible || !d.aperiodic)
        std::cout << "warning: chain does not mix; marginals may stay "
                     "initial-state dependent\n";
    }
    auto params = boco::resolve_params(cfg, cfg.horizon);
    std::cout << "resolved params:\n"
              << boco::params_json(params).dump(2) << "\n";
  } else {
    std::cout << "no run.T in config; schedule left unresolved\n";
  }
  return 0;
}

int cmd_run(const std::string& path, long long seed, int cli_T,
            const std::string& cli_out) {
  ExperimentConfig cfg = boco::load_config(path);
  int T = require_horizon(cfg, cli_T);

  std::optional<boco::OptResult> opt;
  if (!cfg.solver.empty()) opt = boco::solve_opt(cfg, T);

  boco::RunOutput out =
      boco::run(cfg, T, uint64_t(seed), opt ? &*opt : nullptr);

  std::string dir = cli_out.empty() ? cfg.out_dir : cli_out;
  std::filesystem::create_directories(dir);
  std::string stem =
      dir + "/T" + std::to_string(T) + "_seed" + std::to_string(seed);
  boco::write_trajectory_csv(stem + ".trajectory.csv", out.trajectory);
  boco::write_summary(stem + ".summary.json", out);

  std::printf("T=%d seed=%lld tau=%d reward=%.6f", T, seed, out.result.tau,
              out.result.cumulative_reward);
  if (out.result.regret_value) std::printf(" regret=%.6f", *out.result.regret_value);
  std::printf(" violations=[");
  for (size_t k = 0; k < out.result.violations.size(); ++k)
    std::printf("%s%.6f", k ? " " : "", out.result.violations[k]);
  std::printf("] slackness=%s wall=%.3fs\n",
              out.result.slackness_ok ? "ok" : "VIOLATED", out.result.wall_seconds);
  std::cout << "wrote " << stem << ".trajectory.csv and " << stem
            << ".summary.json\n";
  return out.result.slackness_ok ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& horizons_text,
              const std::string& seeds_text, int jobs, const std::string& cli_out) {
  ExperimentConfig cfg = boco::load_config(path);
  std::vector<int> horizons;
  for (long long h : parse_list(horizons_text, "--horizons"))
    horizons.push_back(int(h));
  std::vector<uint64_t> seeds;
  for (long long s : parse_list(seeds_text, "--seeds")) seeds.push_back(uint64_t(s));

  boco::SweepReport report = boco::sweep(cfg, horizons, seeds, jobs);

  std::printf("%10s %12s %12s %10s %6s %6s\n", "T", "mean_regret", "stderr",
              "opt", "done", "fail");
  for (const auto& c : report.cells)
    std::printf("%10d %12.4f %12.4f %10.2f %6d %6d\n", c.horizon, c.mean_regret,
                c.stderr_regret, c.opt_value, c.completed, c.failed);
  if (std::isfinite(report.slope)) {
    std::printf("log-log slope: %.4f%s\n", report.slope,
                report.degenerate ? " (degenerate cells excluded)" : "");
  } else {
    std::cout << "log-log slope: degenerate (too few positive means)\n";
  }
  for (const auto& n : report.notes) std::cout << "note: " << n << "\n";
  for (const auto& f : report.failures) std::cout << "failed run: " << f << "\n";

  std::string dir = cli_out.empty() ? cfg.out_dir : cli_out;
  std::filesystem::create_directories(dir);
  std::string out_path = dir + "/sweep.json";
  std::ofstream f(out_path);
  f << boco::sweep_json(report).dump(2) << "\n";
  std::cout << "wrote " << out_path << "\n";

  if (report.failure_budget_exceeded) {
    std::cerr << "more than 10% of runs failed\n";
    return 4;
  }
  return 0;
}

int cmd_opt(const std::string& path, int cli_T, const std::string& solver,
            int resolution, double tolerance) {
  ExperimentConfig cfg = boco::load_config(path);
  if (!solver.empty()) cfg.solver = solver;
  if (cfg.solver.empty()) cfg.solver = "grid";
  if (resolution > 0) cfg.resolution = resolution;
  if (tolerance > 0) cfg.dual_tolerance = tolerance;
  int T = require_horizon(cfg, cli_T);

  boco::OptResult res = boco::solve_opt(cfg, T);
  nlohmann::json j = boco::opt_json(res);
  j["num_points"] = res.per_round_points.size();
  if (res.collapsed && !res.per_round_points.empty())
    j["point"] = res.per_round_points.front();
  std::cout << j.dump(2) << "\n";
  return res.converged ? 0 : 1;
}

bool check_line(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s%s%s\n", ok ? "PASS" : "FAIL", name,
              detail.empty() ? "" : ": ", detail.c_str());
  return ok;
}

int cmd_check(const std::string& traj_path, const std::string& summary_path) {
  boco::Trajectory traj = boco::read_trajectory_csv(traj_path);
  std::ifstream in(summary_path);
  if (!in) throw boco::DataError("cannot open " + summary_path);
  nlohmann::json j;
  in >> j;
  boco::AlgoParams params = boco::params_from_json(j.at("params"));

  bool all = true;
  all &= check_line("dimensions", traj.dim == params.dim &&
                                      traj.num_constraints == params.num_constraints,
                    "");
  all &= check_line("row count", int(traj.rows.size()) == params.horizon,
                    std::to_string(traj.rows.size()) + " rows for horizon " +
                        std::to_string(params.horizon));

  double reward = 0.0;
  boco::Vec totals(size_t(traj.num_constraints), 0.0);
  bool balances_ok = true;
  for (const auto& r : traj.rows) {
    reward += r.f;
    for (int k = 0; k < traj.num_constraints; ++k) {
      totals[size_t(k)] += r.g[size_t(k)];
      if (r.balance[size_t(k)] != totals[size_t(k)]) balances_ok = false;
    }
  }
  all &= check_line("balance columns", balances_ok,
                    balances_ok ? "prefix sums match" : "prefix sums differ");

  double claimed_reward = j.at("cumulative_reward").get<double>();
  all &= check_line("cumulative reward", reward == claimed_reward,
                    "recomputed " + std::to_string(reward) + ", claimed " +
                        std::to_string(claimed_reward));

  auto claimed_viol = j.at("violations").get<std::vector<double>>();
  bool viol_ok = claimed_viol.size() == totals.size();
  for (size_t k = 0; viol_ok && k < totals.size(); ++k)
    viol_ok = (claimed_viol[k] == totals[k]);
  all &= check_line("constraint totals", viol_ok, "");

  bool positive = true;
  for (double v : totals) positive &= (v > 0.0);
  all &= check_line("totals positive", positive, "");

  all &= check_line("tau", traj.tau() == j.at("tau").get<int>(),
                    "recomputed " + std::to_string(traj.tau()));

  bool lambda_ok = true;
  for (const auto& r : traj.rows)
    for (double l : r.lambda)
      if (l < 0.0 || l > params.dual_cap + 1e-12) lambda_ok = false;
  all &= check_line("dual box", lambda_ok, "");

  auto slack = boco::check_dual_slackness(traj, params);
  bool slack_match = slack.ok == j.at("slackness_ok").get<bool>();
  all &= check_line("dual slackness", slack.ok && slack_match,
                    "worst slack " + std::to_string(slack.worst_slack));

  if (j.contains("regret") && !j.at("regret").is_null() && j.contains("opt")) {
    double opt_value = j.at("opt").at("value").get<double>();
    double claimed = j.at("regret").get<double>();
    all &= check_line("regret", opt_value - reward == claimed,
                      "recomputed " + std::to_string(opt_value - reward));
  }

  std::cout << (all ? "all checks passed" : "CHECKS FAILED") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit primal-dual learner with long-term constraints"};
  app.require_subcommand(1);

  std::string config_path, traj_path, summary_path, out_dir;
  std::string horizons_text, seeds_text = "0", solver;
  long long seed = 0;
  int cli_T = 0, jobs = 1, resolution = 0;
  double tolerance = 0.0;

  auto* validate = app.add_subcommand("validate", "Parse and cross-check a config");
  validate->add_option("config", config_path, "experiment config (json)")->required();

  auto* runc = app.add_subcommand("run", "One episode; writes trajectory and summary");
  runc->add_option("config", config_path)->required();
  runc->add_option("--seed", seed, "run seed (default 0)");
  runc->add_option("--T", cli_T, "horizon override");
  runc->add_option("--out", out_dir, "output directory (default from config)");

  auto* sweepc = app.add_subcommand("sweep", "Horizon x seed grid with regret slope");
  sweepc->add_option("config", config_path)->required();
  sweepc->add_option("--horizons", horizons_text, "e.g. 1000,2000,4000")->required();
  sweepc->add_option("--seeds", seeds_text, "e.g. 0..19 or 0,1,2");
  sweepc->add_option("--jobs", jobs, "parallel runs (default 1)");
  sweepc->add_option("--out", out_dir, "output directory");

  auto* optc = app.add_subcommand("opt", "Hindsight optimum for the configured world");
  optc->add_option("config", config_path)->required();
  optc->add_option("--T", cli_T, "horizon override");
  optc->add_option("--solver", solver, "grid or dual");
  optc->add_option("--resolution", resolution, "grid resolution override");
  optc->add_option("--tolerance", tolerance, "dual solver tolerance override");

  auto* checkc = app.add_subcommand("check", "Audit a trajectory/summary pair");
  checkc->add_option("trajectory", traj_path, "trajectory csv")->required();
  checkc->add_option("summary", summary_path, "summary json")->required();

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(validate)) return cmd_validate(config_path);
    if (app.got_subcommand(runc)) return cmd_run(config_path, seed, cli_T, out_dir);
    if (app.got_subcommand(sweepc))
      return cmd_sweep(config_path, horizons_text, seeds_text, jobs, out_dir);
    if (app.got_subcommand(optc))
      return cmd_opt(config_path, cli_T, solver, resolution, tolerance);
    if (app.got_subcommand(checkc)) return cmd_check(traj_path, summary_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const boco::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const boco::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
