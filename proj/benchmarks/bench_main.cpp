#include <benchmark/benchmark.h>

#include <random>

#include "forgeline/control/voltage.hpp"
#include "forgeline/control/wrapper.hpp"
#include "forgeline/drl/dqn.hpp"
#include "forgeline/drl/ppo.hpp"
#include "forgeline/fabric/bus.hpp"
#include "forgeline/pipeline/parser.hpp"
#include "forgeline/pipeline/snapshot.hpp"
#include "forgeline/twin/twin.hpp"

using namespace forgeline;

static void BM_VoltageForPowerChange(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> vd(50, 500), pd(50, 600);
  for (auto _ : state) {
    benchmark::DoNotOptimize(control::voltage_for_power_change(vd(rng), pd(rng), pd(rng)));
  }
}
BENCHMARK(BM_VoltageForPowerChange);

static void BM_TwinAdvance(benchmark::State& state) {
  twin::TwinConfig cfg = twin::default_twin_config();
  twin::FurnaceTwin furnace(cfg);
  const double front = cfg.furnace_end();
  const twin::FurnaceState start =
      furnace.init({twin::make_rod("r", front, front, cfg.ambient_temp, cfg.segment_length)});
  twin::FurnaceState s = start;
  int n = 0;
  for (auto _ : state) {
    if (++n == 40) {  // stay on the track
      state.PauseTiming();
      s = start;
      n = 0;
      state.ResumeTiming();
    }
    furnace.advance(s);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_TwinAdvance);

static void BM_MlpForward(benchmark::State& state) {
  drl::Rng rng(2);
  const auto width = static_cast<std::size_t>(state.range(0));
  const drl::Mlp net = drl::Mlp::random({16, width, width, 3}, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(16);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(128)->Arg(256)->Arg(512);

static void BM_DqnTrainStep(benchmark::State& state) {
  drl::DqnConfig cfg;
  cfg.common.batch_size = static_cast<int>(state.range(0));
  drl::DqnAgent agent(cfg, 16);
  drl::TransitionBatch b;
  b.states = Eigen::MatrixXd::Random(16, cfg.common.batch_size);
  b.next_states = Eigen::MatrixXd::Random(16, cfg.common.batch_size);
  b.rewards = Eigen::VectorXd::Random(cfg.common.batch_size);
  b.dones = Eigen::VectorXd::Zero(cfg.common.batch_size);
  for (int i = 0; i < cfg.common.batch_size; ++i) b.actions.push_back(i % 3);
  for (auto _ : state) benchmark::DoNotOptimize(agent.train_step(b));
}
BENCHMARK(BM_DqnTrainStep)->Arg(64)->Arg(256);

static void BM_Gae(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> r(n, 0.5), v(n + 1, 0.1), m(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(drl::gae(r, v, m, 0.99, 0.95));
}
BENCHMARK(BM_Gae)->Arg(100)->Arg(2000);

static void BM_ParserHandle(benchmark::State& state) {
  auto bus = fabric::MessageBus::with_canonical_topics(1000);
  pipeline::TelemetryParser parser(bus);
  std::int64_t ts = 0;
  std::uint64_t offset = 0;
  for (auto _ : state) {
    const fabric::Message m{offset++, ts, pipeline::raw_payload("T_Z3_2", 1180.5, ts)};
    ++ts;
    benchmark::DoNotOptimize(parser.handle(m));
  }
}
BENCHMARK(BM_ParserHandle);

static void BM_WrappedDecision(benchmark::State& state) {
  const twin::TwinConfig tc = twin::default_twin_config();
  drl::Rng rng(3);
  std::vector<double> knots;
  for (std::size_t i : control::zone_temperature_features(3)) knots.push_back(tc.sensor_positions_forge[i]);
  const auto model = control::wrap_model(drl::Mlp::random({16, 128, 128, 3}, rng), 3, twin::SensorMode::Virtual,
                                         drl::NormBounds{}, true, knots, tc.sensor_positions_virtual[2]);
  control::Features x{};
  x.fill(1150.0);
  for (auto _ : state) benchmark::DoNotOptimize(control::decide(model, x));
}
BENCHMARK(BM_WrappedDecision);

BENCHMARK_MAIN();
