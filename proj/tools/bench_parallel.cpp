// Benchmark of the OpenMP kernels against their serial references. Both
// paths must produce identical numbers; this target reports the speedup.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "grenkit/asymptotics.hpp"
#include "grenkit/simulation.hpp"

namespace {

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

  grenkit::ChernoffConfig cfg;
  cfg.replications = 20000;
  grenkit::ChernoffTable parallel_table, serial_table;
  const double t_par = seconds([&] { parallel_table = grenkit::chernoff_oracle(cfg); });
  const double t_ser =
      seconds([&] { serial_table = grenkit::chernoff_oracle_serial(cfg); });
  std::printf("chernoff oracle (%d reps): parallel %.3fs, serial %.3fs, "
              "speedup %.2fx, identical %s\n",
              cfg.replications, t_par, t_ser, t_ser / t_par,
              parallel_table.variance == serial_table.variance ? "yes" : "NO");

  grenkit::RunManifest man = grenkit::default_manifest("iv");
  man.n = 500;
  man.reps = 60;
  man.x_eval = {0.5, 0.7};
  grenkit::StudyOptions opt;
  opt.chernoff_variance = parallel_table.variance;
  grenkit::StudyResult study_par, study_ser;
  const double s_par = seconds([&] { study_par = grenkit::run_study(man, opt); });
  const double s_ser =
      seconds([&] { study_ser = grenkit::run_study_serial(man, opt); });
  bool same = study_par.values == study_ser.values;
  std::printf("study (n=%d, reps=%d): parallel %.3fs, serial %.3fs, "
              "speedup %.2fx, identical %s\n",
              man.n, man.reps, s_par, s_ser, s_ser / s_par, same ? "yes" : "NO");
  return 0;
}
