#include <benchmark/benchmark.h>

#include "mdensity/analytic.hpp"
#include "mdensity/estimators.hpp"
#include "mdensity/mlp.hpp"
#include "mdensity/samplers.hpp"

using namespace mdensity;

namespace {

GaussianMDensity two_mode_model(int M) {
  return GaussianMDensity(GaussianMixturePrior::symmetric_1d(2.0, 0.1), NoiseModel::homogeneous(1.0, M, 1));
}

void BM_MixtureScore(benchmark::State& state) {
  const GaussianMDensity model = two_mode_model(static_cast<int>(state.range(0)));
  Rng rng(1);
  const MultiY y = sample_mnm(model.prior().sample(rng), model.noise(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.score(y));
}
BENCHMARK(BM_MixtureScore)->Arg(2)->Arg(4)->Arg(16);

void BM_BayesEstimateMean(benchmark::State& state) {
  const GaussianMDensity model = two_mode_model(4);
  const ScoreSource src = model.score_source();
  Rng rng(2);
  const MultiY y = sample_mnm(model.prior().sample(rng), model.noise(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(bayes_estimate_mean(src, model.noise(), y));
}
BENCHMARK(BM_BayesEstimateMean);

void BM_IntegratorStep(benchmark::State& state) {
  const auto integ = static_cast<Integrator>(state.range(0));
  const int d = static_cast<int>(state.range(1));
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 1, d);
  const ScoreFn score = [](const MultiY& y) -> Vec { return -y.data(); };
  const SamplerParams params{0.05, 1.0, 1.0, 1};
  Rng rng(3);
  ChainState s = init_chain(noise, InitScheme::uniform, rng);
  for (auto _ : state) s = integrator_step(integ, std::move(s), score, params, rng);
  state.SetLabel(std::string(to_string(integ)));
}
BENCHMARK(BM_IntegratorStep)
    ->Args({static_cast<int>(Integrator::sachs), 32})
    ->Args({static_cast<int>(Integrator::cheng), 32})
    ->Args({static_cast<int>(Integrator::overdamped), 32})
    ->Args({static_cast<int>(Integrator::cheng), 1024});

void BM_WalkJumpTwoModes(benchmark::State& state) {
  const GaussianMDensity model = two_mode_model(2);
  WalkJumpOptions opt;
  opt.keep_records = false;
  for (auto _ : state) {
    Rng rng(4);
    benchmark::DoNotOptimize(walk_jump(model.score_source(), model.noise(), {0.5, 0.5, 1.0, 1000}, opt, rng));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_WalkJumpTwoModes);

void BM_MlpForward(benchmark::State& state) {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 4, 1);
  Rng rng(5);
  const MlpScoreNet net(MlpScoreNet::default_widths(noise), noise, rng);
  const MultiY y = sample_mnm(rng.normal_vector(1), noise, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(y));
}
BENCHMARK(BM_MlpForward);

void BM_MdaeGradientBatch(benchmark::State& state) {
  const NoiseModel noise = NoiseModel::homogeneous(1.0, 4, 1);
  Rng rng(6);
  const MlpScoreNet net(MlpScoreNet::default_widths(noise), noise, rng);
  const long n = state.range(0);
  Mat xs(1, n), ys(4, n);
  for (long i = 0; i < n; ++i) {
    xs(0, i) = rng.normal();
    ys.col(i) = sample_mnm(xs.col(i), noise, rng).data();
  }
  for (auto _ : state) benchmark::DoNotOptimize(grad_mdae_batch(net, xs, ys));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MdaeGradientBatch)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
