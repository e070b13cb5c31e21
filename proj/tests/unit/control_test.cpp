#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "forgeline/common/error.hpp"
#include "forgeline/control/manager.hpp"
#include "forgeline/control/voltage.hpp"
#include "forgeline/control/wrapper.hpp"
#include "forgeline/drl/checkpoint.hpp"
#include "oracles.hpp"

using namespace forgeline;
using namespace forgeline::control;
using twin::PowerAction;

TEST(Voltage, WorkedExamples) {
  EXPECT_EQ(voltage_for_power_change(100, 400, 500), 112);
  EXPECT_EQ(voltage_for_power_change(100, 200, 400), 142);
  EXPECT_EQ(voltage_for_power_change(250, 300, 300), 250);
  EXPECT_EQ(voltage_for_power_change(100, 100, 400), 200);  // exact square root, no rounding up
}

TEST(Voltage, MatchesExactRationalOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(50, 500), p(50, 600);
  for (int i = 0; i < 2000; ++i) {
    const double a = v(rng), b = p(rng), c = p(rng);
    ASSERT_EQ(voltage_for_power_change(a, b, c), forgeline::testing::exact_voltage(a, b, c)) << a << " " << b << " " << c;
  }
}

TEST(Voltage, PerfectSquaresAreNotRoundedUp) {
  // v * sqrt(pn / po) is an integer here; floating sqrt may land a hair above it.
  for (int k = 1; k < 200; ++k) {
    const double po = 3.0 * k, pn = 12.0 * k;
    EXPECT_EQ(voltage_for_power_change(49, po, pn), 98) << k;
  }
}

TEST(Voltage, MonotoneInNewPower) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> p(50, 600);
  for (int i = 0; i < 200; ++i) {
    const double v = 50 + (rng() % 450), po = p(rng);
    double prev = 0;
    for (double pn = 0; pn <= 600; pn += 7.5) {
      const double out = voltage_for_power_change(v, po, pn);
      ASSERT_GE(out, prev);
      prev = out;
    }
  }
}

TEST(Voltage, ZeroOldPower) {
  EXPECT_THROW(voltage_for_power_change(100, 0, 10), UndefinedRatioError);
  EXPECT_EQ(voltage_for_power_change(100, 0, 0), 100);
  EXPECT_THROW(voltage_for_power_change(0, 10, 10), ConfigError);
  VoltageVector out = power_to_voltage({100, 100, 100, 100, 100}, {0, 200, 200, 200, 200}, {5, 400, 200, 200, 200});
  EXPECT_TRUE(out.undefined[0]);
  EXPECT_EQ(out.voltages[0], 100);
  EXPECT_EQ(out.voltages[1], 142);
  EXPECT_TRUE(out.any_undefined());
}

TEST(Sanity, Rules) {
  PowerUpdate u;
  u.old_voltages = {100, 100, 100, 100, 100};
  u.new_voltages = {110, 100, 100, 100, 100};
  SanityLimits limits;
  EXPECT_TRUE(sanity_check(u, limits).accepted);
  u.new_voltages[2] = 450;
  auto r = sanity_check(u, limits);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.rule, "voltage_bound");
  u.new_voltages[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(sanity_check(u, limits).rule, "non_finite");
  u.new_voltages[2] = 100;
  limits.max_delta = 5;
  EXPECT_EQ(sanity_check(u, limits).rule, "max_delta");
}

TEST(Sanity, FuzzedUpdatesNeverPassWhenViolating) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> any(-100, 900);
  SanityLimits limits{1.0, 400.0, 80.0};
  for (int i = 0; i < 5000; ++i) {
    PowerUpdate u;
    bool violates = false;
    for (std::size_t z = 0; z < kZoneCount; ++z) {
      u.old_voltages[z] = std::uniform_real_distribution<double>(1, 400)(rng);
      u.new_voltages[z] = rng() % 50 == 0 ? std::numeric_limits<double>::infinity() : any(rng);
      const double v = u.new_voltages[z];
      if (!std::isfinite(v) || v < limits.min_voltage || v > limits.max_voltage ||
          std::abs(v - u.old_voltages[z]) > limits.max_delta) {
        violates = true;
      }
    }
    ASSERT_EQ(sanity_check(u, limits).accepted, !violates);
  }
}

TEST(Actions, ApplyActions) {
  const ZoneVector p = apply_actions({100, 100, 12, 598, 100},
                                     {PowerAction::Increase, PowerAction::Decrease, PowerAction::Decrease,
                                      PowerAction::Increase, PowerAction::DropToLow},
                                     5.0, {10.0, 600.0});
  EXPECT_EQ(p, (ZoneVector{105, 95, 10, 600, 10}));
}

TEST(Wrapper, DecideActionsTieOrderAndMask) {
  Scores s{};
  // zone 3 (0,0,1,0) means NoChange; zone 1 increase wins.
  s[0] = 2.0;
  s[8 + kNoChange] = 1.0;
  auto a = decide_actions(s, {true, false, true, false, false}, false);
  EXPECT_EQ(a[0], PowerAction::Increase);
  EXPECT_EQ(a[1], PowerAction::NoChange);
  EXPECT_EQ(a[2], PowerAction::NoChange);
  Scores ties{};
  EXPECT_EQ(decide_actions(ties, {true, true, true, true, true}, true)[0], PowerAction::Decrease);
  Scores drop{};
  drop[kDrop] = 5.0;
  EXPECT_EQ(decide_actions(drop, {true, false, false, false, false}, false)[0], PowerAction::Decrease);
  EXPECT_EQ(decide_actions(drop, {true, false, false, false, false}, true)[0], PowerAction::DropToLow);
}

TEST(Wrapper, ZoneThreeFeatureIndices) {
  EXPECT_EQ(zone_temperature_features(3), (std::vector<std::size_t>{6, 7, 8, 9}));
  EXPECT_EQ(zone_power_feature(3), 20u);
  EXPECT_EQ(zone_temperature_features(1), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(zone_temperature_features(6), WrappingError);
}

TEST(Interpolation, ExactAtKnotsAndConstantPreserved) {
  InterpolationSpec spec{{1.0, 2.25, 3.5, 4.75}, {0.0, 1.0, 2.25, 3.0, 4.75, 6.0}};
  const std::vector<double> ys{1100.3, 1201.7, 1189.1, 1250.9};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(spec.interpolate(ys, spec.knot_positions[i]), ys[i]);
  const std::vector<double> flat(4, 1234.5);
  for (double v : spec.evaluate(flat)) EXPECT_EQ(v, 1234.5);
  EXPECT_EQ(spec.interpolate(ys, -5.0), ys.front());
  EXPECT_EQ(spec.interpolate(ys, 50.0), ys.back());
  EXPECT_THROW(spec.interpolate(std::vector<double>{1.0}, 1.0), DimensionError);
}

namespace {

drl::Mlp random_agent(std::size_t inputs, std::uint64_t seed) {
  drl::Rng rng(seed);
  return drl::Mlp::random({inputs, 16, 16, 3}, rng);
}

WrappedModel virtual_zone3(const drl::Mlp& agent) {
  const twin::TwinConfig tc = twin::default_twin_config();
  std::vector<double> knots;
  for (std::size_t idx : zone_temperature_features(3)) knots.push_back(tc.sensor_positions_forge[idx]);
  return wrap_model(agent, 3, twin::SensorMode::Virtual, drl::NormBounds{}, true, knots,
                    tc.sensor_positions_virtual[2]);
}

}  // namespace

TEST(Wrapper, RejectsDimensionMismatch) {
  const twin::TwinConfig tc = twin::default_twin_config();
  EXPECT_THROW(wrap_model(random_agent(16, 1), 3, twin::SensorMode::Forge, {}, true, {}, {}), WrappingError);
  EXPECT_NO_THROW(wrap_model(random_agent(5, 1), 3, twin::SensorMode::Forge, {}, true, {}, {}));
  EXPECT_NO_THROW(virtual_zone3(random_agent(16, 1)));
  EXPECT_THROW(virtual_zone3(random_agent(5, 1)), WrappingError);
}

TEST(Wrapper, UncontrolledSlotsAreZero) {
  WrappedModel m = virtual_zone3(random_agent(16, 2));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    Features x{};
    for (double& v : x) v = std::uniform_real_distribution<double>(0, 1400)(rng);
    const Scores s = m.forward(x);
    for (std::size_t k = 0; k < kOutputFeatures; ++k) {
      if (k / kSlotsPerZone != 2 || k % kSlotsPerZone == kDrop) ASSERT_EQ(s[k], 0.0) << k;
    }
  }
}

TEST(Wrapper, ForgeModeMatchesNativeDecision) {
  drl::Mlp agent = random_agent(5, 3);
  drl::NormBounds norm{0, 1400, 0, 600};
  WrappedModel m = wrap_model(agent, 3, twin::SensorMode::Forge, norm, true, {}, {});
  std::mt19937_64 rng(10);
  for (int i = 0; i < 300; ++i) {
    Features x{};
    for (std::size_t k = 0; k < 18; ++k) x[k] = std::uniform_real_distribution<double>(800, 1400)(rng);
    for (std::size_t k = 18; k < 23; ++k) x[k] = std::uniform_real_distribution<double>(10, 600)(rng);
    Eigen::VectorXd native(5);
    for (int k = 0; k < 4; ++k) native(k) = x[static_cast<std::size_t>(6 + k)] / 1400.0;
    native(4) = x[20] / 600.0;
    const int expected = drl::argmax(agent.forward(native));
    const PowerAction want = expected == 0 ? PowerAction::Decrease : expected == 1 ? PowerAction::NoChange : PowerAction::Increase;
    ASSERT_EQ(decide(m, x)[2], want);
  }
}

TEST(Wrapper, BundleRoundTrip) {
  WrappedModel m = virtual_zone3(random_agent(16, 4));
  m.source_algorithm = "DQN";
  const std::string bytes = to_bundle(m);
  WrappedModel back = from_bundle(bytes);
  EXPECT_EQ(to_bundle(back), bytes);
  Features x{};
  x.fill(1100.0);
  EXPECT_EQ(back.forward(x), m.forward(x));
  EXPECT_THROW(from_bundle("{}"), Error);
}

TEST(RuleModel, MovesTowardBand) {
  RuleBasedModel rule;
  Features x{};
  x.fill(1200.0);
  for (std::size_t z = 0; z < kZoneCount; ++z) x[18 + z] = 100;
  // Zone 1 band is 850..1050; 1200 is above it.
  for (std::size_t k = 0; k < 2; ++k) x[k] = 1200.0;
  // Zone 3 band 1140..1275; drop it below.
  for (std::size_t k = 6; k < 10; ++k) x[k] = 1000.0;
  auto a = decide(rule, x);
  EXPECT_EQ(a[0], PowerAction::Decrease);
  EXPECT_EQ(a[2], PowerAction::Increase);
}

namespace {

pipeline::StateSnapshot full_snapshot(std::int64_t t, double temp = 1200.0, double power = 200.0) {
  pipeline::StateSnapshot s;
  s.snapshot_time_ns = t;
  for (auto& v : s.temps) v = temp;
  for (auto& p : s.powers) p = power;
  s.mode = Mode::NormalProduction;
  s.material_id = "C45";
  s.completeness = 1.0;
  return s;
}

class FixedModel final : public DecisionModel {
 public:
  explicit FixedModel(Scores s) : s_(s) {}
  Scores forward(const Features&) const override { return s_; }
  std::array<bool, kZoneCount> controlled_zones() const override { return {false, false, true, false, false}; }
  bool supports_drop() const override { return true; }

 private:
  Scores s_;
};

fabric::ForgeSensorsState cached_voltages(double v) {
  fabric::ForgeSensorsState c;
  c.voltages.fill(v);
  c.valid = true;
  return c;
}

}  // namespace

TEST(Manager, NoChangeLeavesVoltages) {
  Scores s{};
  s[8 + kNoChange] = 1.0;
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  auto out = decide_update(full_snapshot(0), Mode::NormalProduction, alg, cached_voltages(200), {}, 0);
  ASSERT_TRUE(out.update);
  EXPECT_EQ(out.update->new_voltages, out.update->old_voltages);
  EXPECT_EQ(out.update->provenance.version, "v1");
}

TEST(Manager, OnlyZoneThreeRecomputed) {
  Scores s{};
  s[8 + kIncrease] = 1.0;
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  auto out = decide_update(full_snapshot(0), Mode::NormalProduction, alg, cached_voltages(200), {}, 0);
  ASSERT_TRUE(out.update);
  for (std::size_t z = 0; z < kZoneCount; ++z) {
    if (z == 2) {
      EXPECT_EQ(out.update->new_voltages[z], voltage_for_power_change(200, 200, 205));
    } else {
      EXPECT_EQ(out.update->new_voltages[z], 200);
    }
  }
}

TEST(Manager, DropToLowUsesLowerBound) {
  Scores s{};
  s[8 + kDrop] = 1.0;
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  ControlSettings cs;
  cs.limits.max_delta = 400;
  auto out = decide_update(full_snapshot(0), Mode::NormalProduction, alg, cached_voltages(200), cs, 0);
  ASSERT_TRUE(out.update);
  EXPECT_EQ(out.update->new_powers[2], 10.0);
  EXPECT_EQ(out.update->new_voltages[2], forgeline::testing::exact_voltage(200, 200, 10));
}

TEST(Manager, StaleSnapshotAndMissingVoltagesAreNoOps) {
  Scores s{};
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  auto stale = decide_update(full_snapshot(0), Mode::NormalProduction, alg, cached_voltages(200), {}, 6 * kNanosPerSecond);
  EXPECT_FALSE(stale.update);
  ASSERT_EQ(stale.events.size(), 1u);
  EXPECT_EQ(stale.events[0].kind, "staleness");
  auto missing = decide_update(full_snapshot(0), Mode::NormalProduction, alg, fabric::ForgeSensorsState{}, {}, 0);
  EXPECT_FALSE(missing.update);
  EXPECT_EQ(missing.events.at(0).kind, "missing_voltages");
  pipeline::StateSnapshot partial = full_snapshot(0);
  partial.temps[3].reset();
  EXPECT_EQ(decide_update(partial, Mode::NormalProduction, alg, cached_voltages(200), {}, 0).events.at(0).kind,
            "incomplete_features");
}

TEST(Manager, ZeroPowerZoneFlaggedUndefined) {
  Scores s{};
  s[8 + kIncrease] = 1.0;
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  auto snap = full_snapshot(0);
  snap.powers[2] = 0.0;
  auto out = decide_update(snap, Mode::NormalProduction, alg, cached_voltages(200), {}, 0);
  ASSERT_TRUE(out.update);
  EXPECT_TRUE(out.update->undefined_ratio[2]);
  EXPECT_EQ(out.update->new_voltages[2], 200);
  EXPECT_EQ(out.events.at(0).kind, "undefined_ratio");
}

TEST(Manager, SanityRejectPublishesNothing) {
  Scores s{};
  s[8 + kIncrease] = 1.0;
  LoadedAlgorithm alg{"drl", "v1", std::make_shared<FixedModel>(s)};
  ControlSettings cs;
  cs.limits.max_voltage = 150;
  auto out = decide_update(full_snapshot(0), Mode::NormalProduction, alg, cached_voltages(200), cs, 0);
  EXPECT_FALSE(out.update);
  EXPECT_EQ(out.sanity->rule, "voltage_bound");
}

TEST(PowerUpdateJson, RoundTrip) {
  PowerUpdate u;
  u.mode = Mode::Warmholding;
  u.new_voltages = {1, 2, 3, 4, 5};
  u.actions = {PowerAction::Increase, PowerAction::Decrease, PowerAction::NoChange, PowerAction::DropToLow,
               PowerAction::NoChange};
  u.undefined_ratio[1] = true;
  u.provenance = {"drl", "abc", 5, 7};
  u.decided_ns = 99;
  nlohmann::json j = u;
  EXPECT_EQ(j.get<PowerUpdate>(), u);
}

namespace {

std::string store_version(fabric::Stores& stores, std::uint64_t seed) {
  drl::Rng rng(seed);
  const twin::TwinConfig tc = twin::default_twin_config();
  std::vector<double> knots;
  for (std::size_t idx : zone_temperature_features(3)) knots.push_back(tc.sensor_positions_forge[idx]);
  WrappedModel m = wrap_model(drl::Mlp::random({16, 8, 8, 3}, rng), 3, twin::SensorMode::Virtual, {}, true, knots,
                              tc.sensor_positions_virtual[2]);
  return stores.algorithms.put(to_bundle(m));
}

}  // namespace

TEST(HotSwap, UnknownVersionKeepsActive) {
  fabric::Stores stores;
  const std::string v1 = store_version(stores, 1);
  auto bus = fabric::MessageBus::with_canonical_topics();
  PowerControlService svc(bus, stores, std::make_shared<ManualClock>());
  svc.hot_swap(Mode::NormalProduction, {"drl", v1});
  EXPECT_THROW(svc.hot_swap(Mode::NormalProduction, {"drl", "ffffffffffffffff"}), NotFoundError);
  EXPECT_EQ(svc.active(Mode::NormalProduction)->version, v1);
  EXPECT_EQ(stores.power_config.get(Mode::NormalProduction).version, v1);
}

TEST(HotSwap, PerModeIsolation) {
  fabric::Stores stores;
  const std::string v1 = store_version(stores, 1);
  auto bus = fabric::MessageBus::with_canonical_topics();
  PowerControlService svc(bus, stores, std::make_shared<ManualClock>());
  svc.hot_swap(Mode::NormalProduction, {"drl", v1});
  svc.hot_swap(Mode::Warmholding, {"rule", "builtin"});
  EXPECT_EQ(svc.active(Mode::NormalProduction)->version, v1);
  EXPECT_EQ(svc.active(Mode::Warmholding)->manager_id, "rule");
}

TEST(HotSwap, InterleavedDecisionsSplitCleanly) {
  fabric::Stores stores;
  const std::string v1 = store_version(stores, 1);
  const std::string v2 = store_version(stores, 2);
  ASSERT_NE(v1, v2);
  auto clock = std::make_shared<ManualClock>(0);
  auto bus = fabric::MessageBus::with_canonical_topics(1000, clock);
  stores.forge_sensors.update(Mode::NormalProduction, {200, 200, 200, 200, 200}, "C45", 0);
  PowerControlService svc(bus, stores, clock);
  svc.hot_swap(Mode::NormalProduction, {"drl", v1});
  std::mt19937_64 rng(12);
  const int total = 200;
  const int swap_at = 1 + static_cast<int>(rng() % (total - 1));
  for (int i = 0; i < total; ++i) {
    if (i == swap_at) svc.hot_swap(Mode::NormalProduction, {"drl", v2});
    auto snap = full_snapshot(0);
    snap.seq = static_cast<std::uint64_t>(i);
    svc.process(snap, 0);
  }
  auto msgs = bus->read(fabric::topics::kNpPowerUpdates, 0);
  ASSERT_EQ(msgs.size(), static_cast<std::size_t>(total));
  int before = 0, after = 0;
  for (const auto& m : msgs) {
    auto u = nlohmann::json::parse(m.payload).get<PowerUpdate>();
    const bool pre = u.provenance.snapshot_seq < static_cast<std::uint64_t>(swap_at);
    EXPECT_EQ(u.provenance.version, pre ? v1 : v2);
    (pre ? before : after)++;
  }
  EXPECT_EQ(before + after, total);
  EXPECT_EQ(svc.stats().per_version.at(v1) + svc.stats().per_version.at(v2), static_cast<std::uint64_t>(total));
}
