// Times the OpenMP kernels against their serial twins on one instance and
// verifies both produce bit-identical results. Usage:
//   bench [config.json] [T]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "boco/harness.hpp"

namespace {

template <class F>
double time_s(F&& fn) {
  auto start = std::chrono::steady_clock::now();
  fn();
  auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - start).count();
}

void report(const char* name, double serial_s, double parallel_s, bool match) {
  std::printf("%-18s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", name,
              serial_s, parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0,
              match ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::string path = argc > 1 ? argv[1] : "configs/reference.json";
  int T = argc > 2 ? std::atoi(argv[2]) : 2000;

#ifdef _OPENMP
  std::printf("openmp enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled at build time; parallel paths run serially\n");
#endif

  try {
    boco::ExperimentConfig cfg = boco::load_config(path);
    boco::WorldModel world = cfg.world.build(T);
    boco::HindsightProblem prob =
        boco::make_hindsight(cfg.set, cfg.support, world, T);

    bool all_match = true;

    {
      const int res = 900;
      boco::OptResult serial, parallel;
      double ts = time_s([&] { serial = boco::opt_grid(prob, res, false); });
      double tp = time_s([&] { parallel = boco::opt_grid(prob, res, true); });
      bool match = serial.value == parallel.value &&
                   serial.per_round_points == parallel.per_round_points;
      all_match &= match;
      report("grid oracle", ts, tp, match);
    }

    {
      const auto& sc = cfg.support.front();
      boco::Vec lambda(size_t(cfg.num_constraints), 0.5);
      boco::Vec x(size_t(cfg.set.dim()), 0.0);
      if (cfg.set.kind() == boco::SetKind::Box)
        for (int i = 0; i < cfg.set.dim(); ++i)
          x[size_t(i)] = 0.5 * (cfg.set.lower()[size_t(i)] + cfg.set.upper()[size_t(i)]);
      const long n = 4000000;
      boco::GradCheckResult serial, parallel;
      double ts = time_s([&] {
        serial = boco::check_gradient_estimator(sc.f, sc.g, lambda, x, 0.1, n, 42,
                                                false);
      });
      double tp = time_s([&] {
        parallel = boco::check_gradient_estimator(sc.f, sc.g, lambda, x, 0.1, n, 42,
                                                  true);
      });
      bool match = serial.mc_grad == parallel.mc_grad;
      all_match &= match;
      report("gradient sampler", ts, tp, match);
    }

    {
      std::vector<int> horizons = {T / 2, T};
      std::vector<uint64_t> seeds = {0, 1, 2, 3};
      boco::SweepReport serial, parallel;
      double ts = time_s([&] { serial = boco::sweep(cfg, horizons, seeds, 1); });
      double tp = time_s([&] { parallel = boco::sweep(cfg, horizons, seeds, 4); });
      bool match = serial.cells.size() == parallel.cells.size();
      for (size_t i = 0; match && i < serial.cells.size(); ++i)
        match = serial.cells[i].mean_regret == parallel.cells[i].mean_regret &&
                serial.cells[i].stderr_regret == parallel.cells[i].stderr_regret;
      all_match &= match;
      report("run fan-out", ts, tp, match);
    }

    if (!all_match) {
      std::fprintf(stderr, "parallel kernels diverged from the serial reference\n");
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench failed: %s\n", e.what());
    return 1;
  }
}
