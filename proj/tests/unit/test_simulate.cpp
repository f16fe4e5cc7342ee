#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "mvk/benchmarks.hpp"
#include "mvk/error.hpp"
#include "mvk/parallel.hpp"
#include "mvk/simulate.hpp"
#include "support.hpp"

using namespace mvk;
using mvk::test::ensemble1d;
using mvk::test::frozen_model;
using mvk::test::measure1d;

namespace {

double mean_of(const ParticleEnsemble& e) {
  return std::accumulate(e.data().begin(), e.data().end(), 0.0) / static_cast<double>(e.count());
}

ModelSpec deterministic_cormier(double J) {
  auto m = cormier_model(J);
  m.diffusion = [](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  return m;
}

}  // namespace

TEST(EulerStep, FrozenDynamics) {
  const std::vector<double> x{0.3, -2.0};
  const std::vector<double> dw{0.7, 0.1};
  EXPECT_EQ(euler_step(frozen_model(2), x, 0.0, EmpiricalMeasure(ParticleEnsemble(1, 2)), 0.1, dw), x);
}

TEST(EulerStep, PureDrift) {
  auto m = frozen_model(1);
  m.drift = [](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  const std::vector<double> x{0.0}, dw{0.0};
  EXPECT_EQ(euler_step(m, x, 0.0, measure1d({0.0}), 0.1, dw)[0], 0.1);
}

TEST(EulerStep, CormierHandEvaluation) {
  const std::vector<double> x{0.0}, dw{0.0};
  const double oracle = 0.0 + (-0.0 + 14.0 * std::cos(0.0)) * 0.1;
  EXPECT_NEAR(euler_step(cormier_model(14.0), x, 0.0, measure1d({0.0}), 0.1, dw)[0], 1.4, 1e-15);
  EXPECT_NEAR(euler_step(cormier_model(14.0), x, 0.0, measure1d({0.0}), 0.1, dw)[0], oracle, 1e-15);
}

TEST(EulerStep, NonFiniteDriftRejected) {
  auto m = frozen_model(1);
  m.drift = [](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = NAN; };
  const std::vector<double> x{1.0}, dw{0.0};
  try {
    euler_step(m, x, 0.5, measure1d({0.0}), 0.1, dw);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite value at t"), std::string::npos);
  }
}

TEST(SimulateIps, FrozenSnapshotsEqual) {
  const auto path = simulate_ips(frozen_model(1), 2, TimeGrid(1.0, 7), RngPlan(1));
  ASSERT_EQ(path.snapshots.size(), 8u);
  for (const auto& s : path.snapshots) EXPECT_EQ(s.particles(), path.snapshots.front().particles());
}

TEST(SimulateIps, NoiselessOuPreservesMean) {
  const auto path = simulate_ips(ou_model(1.0, 0.0, 0.3, 2.0), 1000, TimeGrid(2.0, 40), RngPlan(3));
  const double m0 = mean_of(path.snapshots.front().particles());
  for (const auto& s : path.snapshots) EXPECT_NEAR(mean_of(s.particles()), m0, 1e-12);
}

TEST(SimulateIps, MatchesTwoBufferReference) {
  const double J = 14.0, h = 0.1;
  const std::size_t n = 25, steps = 6;
  const RngPlan plan(17);
  const auto path = simulate_ips(cormier_model(J), n, TimeGrid(h * steps, steps), plan);

  std::vector<double> x(n);
  for (std::size_t m = 0; m < n; ++m) x[m] = -7.5 + 17.5 * plan.initial_stream(m).uniform();
  for (std::size_t k = 0; k < steps; ++k) {
    double mc = 0.0;
    for (double v : x) mc += std::cos(v);
    mc /= static_cast<double>(n);
    std::vector<double> next(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double z = plan.stream(m, static_cast<std::uint32_t>(k)).normal();
      next[m] = x[m] + (-x[m] + J * mc) * h + std::sqrt(2.0) * std::sqrt(h) * z;
    }
    x = next;
    for (std::size_t m = 0; m < n; ++m) EXPECT_NEAR(path.snapshots[k + 1].particles()(m, 0), x[m], 1e-12);
  }
}

TEST(SimulateIps, ThreadCountInvariant) {
  const auto run = [](std::size_t threads) {
    set_thread_count(threads);
    return simulate_ips(cormier_model(14.0), 3001, TimeGrid(0.5, 5), RngPlan(2));
  };
  const auto a = run(1);
  const auto b = run(3);
  const auto c = run(8);
  set_thread_count(1);
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    EXPECT_EQ(a.snapshots[k].particles(), b.snapshots[k].particles());
    EXPECT_EQ(a.snapshots[k].particles(), c.snapshots[k].particles());
  }
}

TEST(SimulateIps, RejectsSingleParticle) {
  EXPECT_THROW(simulate_ips(frozen_model(1), 1, TimeGrid(1.0, 2), RngPlan(1)), ConfigError);
}

TEST(SimulateDecoupled, FrozenDynamicsReturnsInitialPoints) {
  const auto path = simulate_ips(frozen_model(1), 4, TimeGrid(1.0, 10), RngPlan(1));
  const auto xi = ensemble1d({0.1, 0.2, 0.9});
  const auto pairs = simulate_decoupled(frozen_model(1), path, xi, TimeGrid(0.5, 5), RngPlan(4));
  EXPECT_EQ(pairs.x_t, xi);
  EXPECT_EQ(pairs.lag, 0.5);
}

TEST(SimulateDecoupled, ConstantMeasureCormierOneStep) {
  MeasurePath path{TimeGrid(1.0, 10), {}, 0, "const"};
  for (int k = 0; k <= 10; ++k) path.snapshots.push_back(measure1d({0.0}));
  const auto pairs = simulate_decoupled(deterministic_cormier(14.0), path, ensemble1d({0.0}), TimeGrid(0.1, 1), RngPlan(1));
  EXPECT_NEAR(pairs.x_t(0, 0), 1.4, 1e-15);
}

TEST(SimulateDecoupled, LagBeyondHorizon) {
  const auto path = simulate_ips(frozen_model(1), 4, TimeGrid(1.0, 10), RngPlan(1));
  try {
    simulate_decoupled(frozen_model(1), path, ensemble1d({0.0}), TimeGrid(2.0, 20), RngPlan(1));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("measure path too short"), std::string::npos);
  }
}

TEST(SimulateDecoupled, OutputIsFunctionOfPointAndStream) {
  const auto model = cormier_model(14.0);
  const auto path = simulate_ips(model, 200, TimeGrid(1.0, 10), RngPlan(8));
  const auto xi = ensemble1d({-3.0, 0.0, 1.5, 4.0, 7.0});
  const RngPlan plan(99);
  const auto base = simulate_decoupled(model, path, xi, TimeGrid(0.5, 5), plan);

  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  ParticleEnsemble xp(5, 1);
  std::vector<std::uint64_t> ids(5);
  for (std::size_t i = 0; i < 5; ++i) {
    xp(i, 0) = xi(perm[i], 0);
    ids[i] = perm[i];
  }
  const auto permuted = simulate_decoupled(model, path, xp, TimeGrid(0.5, 5), plan, ids);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(permuted.x_t(i, 0), base.x_t(perm[i], 0));

  // A trajectory does not depend on the others.
  const auto alone = simulate_decoupled(model, path, ensemble1d({1.5}), TimeGrid(0.5, 5), plan, std::vector<std::uint64_t>{2});
  EXPECT_EQ(alone.x_t(0, 0), base.x_t(2, 0));
}

TEST(IpsPairs, TakesSnapshotsAtLag) {
  const auto path = simulate_ips(cormier_model(14.0), 10, TimeGrid(1.0, 10), RngPlan(1));
  const auto pairs = ips_pairs(path, 0.5);
  EXPECT_EQ(pairs.xi, path.snapshots[0].particles());
  EXPECT_EQ(pairs.x_t, path.snapshots[5].particles());
}
