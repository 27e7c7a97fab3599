// Times seeded episode evaluation with the serial reference path and the
// OpenMP path, and checks that both produce identical records (measured
// planning times aside). Usage: bench_episodes [seeds] [jobs].

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include <omp.h>

#include "stlswarm/eval/eval.hpp"
#include "stlswarm/stl/builtin.hpp"

using namespace stlswarm;

namespace {

double time_run(const eval::RunSetup& setup, int seeds, bool parallel,
                std::vector<eval::EpisodeRecord>& out) {
  const auto t0 = std::chrono::steady_clock::now();
  out = eval::run_episodes(setup, seeds, parallel);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool same_outcomes(const std::vector<eval::EpisodeRecord>& a,
                   const std::vector<eval::EpisodeRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].seed != b[i].seed) return false;
    if (a[i].metrics.finished != b[i].metrics.finished) return false;
    if (a[i].metrics.safe != b[i].metrics.safe) return false;
    if (a[i].metrics.ttr != b[i].metrics.ttr) return false;
    if (a[i].traj.states != b[i].traj.states) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  const int seeds = argc > 1 ? std::atoi(argv[1]) : 8;
  const int jobs = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  eval::RunSetup setup;
  setup.planner.name = "nominal";
  setup.spec = stl::builtin_spec("cover");
  setup.n_agents = 4;
  setup.seed_base = 1;
  setup.jobs = jobs;

  std::vector<eval::EpisodeRecord> serial, parallel;
  const double t_serial = time_run(setup, seeds, false, serial);
  const double t_parallel = time_run(setup, seeds, true, parallel);

  std::cout << "episodes: " << seeds << "  agents: " << setup.n_agents
            << "  spec: " << setup.spec.name << "\n";
  std::cout << "serial reference: " << t_serial << " s\n";
  std::cout << "openmp (" << jobs << " jobs): " << t_parallel << " s\n";
  if (t_parallel > 0.0) {
    std::cout << "speedup: " << t_serial / t_parallel << "x\n";
  }

  if (!same_outcomes(serial, parallel)) {
    std::cerr << "mismatch: parallel records differ from the serial "
                 "reference\n";
    return 1;
  }
  std::cout << "records identical across both paths\n";
  return 0;
}
