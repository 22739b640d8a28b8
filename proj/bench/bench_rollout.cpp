// Serial vs OpenMP rollout kernels on the racing and MountainCar plants.
//   bench_rollout --benchmark_filter=Car

#include "mpopi/env/mountain_car.hpp"
#include "mpopi/env/race_car.hpp"
#include "mpopi/gaussian.hpp"
#include "mpopi/rollout.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace mpopi;

namespace {

const Track& oval() {
  static const Track t = make_track("tracks/oval200.csv", true);
  return t;
}

template <class Env>
void run(benchmark::State& st, const Env& env, const typename Env::State& x0, int horizon,
         double sd, int threads) {
  const int K = static_cast<int>(st.range(0));
  const Eigen::Index n = static_cast<Eigen::Index>(horizon) * env.action_bounds().size();
  const auto p = JointProposal::dense(Eigen::VectorXd::Zero(n),
                                      sd * sd * Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd noise = p.sample_noise(K, 1);
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(n, 0.1);
  const InputShaper g(env.action_bounds());
  for (auto _ : st) {
    Eigen::VectorXd c = threads > 1 ? rollout_costs_parallel(env, x0, mean, noise, g, threads)
                                    : rollout_costs_serial(env, x0, mean, noise, g);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * K);
}

void CarSerial(benchmark::State& st) {
  run(st, RaceCarEnv(oval()), start_on_track(oval(), 0.0, 8.0), 20, 0.3, 1);
}
void CarParallel(benchmark::State& st) {
  run(st, RaceCarEnv(oval()), start_on_track(oval(), 0.0, 8.0), 20, 0.3, omp_get_max_threads());
}
void MountainCarSerial(benchmark::State& st) {
  run(st, MountainCarEnv(), MountainCarState{}, 50, 0.5, 1);
}
void MountainCarParallel(benchmark::State& st) {
  run(st, MountainCarEnv(), MountainCarState{}, 50, 0.5, omp_get_max_threads());
}

void NoiseSerial(benchmark::State& st) {
  const auto p = JointProposal::dense(Eigen::VectorXd::Zero(40), Eigen::MatrixXd::Identity(40, 40));
  for (auto _ : st) benchmark::DoNotOptimize(p.sample_noise(static_cast<int>(st.range(0)), 3).data());
}
void NoiseParallel(benchmark::State& st) {
  const auto p = JointProposal::dense(Eigen::VectorXd::Zero(40), Eigen::MatrixXd::Identity(40, 40));
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        p.sample_noise_parallel(static_cast<int>(st.range(0)), 3, omp_get_max_threads()).data());
  }
}

}  // namespace

BENCHMARK(CarSerial)->Arg(150)->Arg(450);
BENCHMARK(CarParallel)->Arg(150)->Arg(450);
BENCHMARK(MountainCarSerial)->Arg(20)->Arg(180);
BENCHMARK(MountainCarParallel)->Arg(20)->Arg(180);
BENCHMARK(NoiseSerial)->Arg(450);
BENCHMARK(NoiseParallel)->Arg(450);

BENCHMARK_MAIN();
