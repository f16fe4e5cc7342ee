#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "mvk/benchmarks.hpp"
#include "mvk/error.hpp"
#include "mvk/simulate.hpp"
#include "support.hpp"

using namespace mvk;
using mvk::test::Gen;
using mvk::test::measure1d;

namespace {

constexpr double kPi = std::numbers::pi;

double drift1(const ModelSpec& m, double x, const EmpiricalMeasure& mu) {
  const std::vector<double> xs{x};
  return m.drift_at(0.0, xs, mu)[0];
}

double bisect(double lo, double hi, double (*f)(double)) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == (f(lo) < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> unit_vector(Gen& g) {
  std::vector<double> v{g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)};
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  for (auto& c : v) c /= n;
  return v;
}

double dot3(const std::vector<double>& a, const std::vector<double>& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

TEST(Cormier, DriftExamples) {
  const auto m = cormier_model(14.0);
  EXPECT_NEAR(drift1(m, 0.0, measure1d({0.0})), 14.0, 1e-15);
  for (double x : {-3.0, 0.5, 8.0}) EXPECT_NEAR(drift1(m, x, measure1d({kPi / 2})), -x, 1e-14);
  const auto off = cormier_model(0.0);
  EXPECT_EQ(drift1(off, 2.5, measure1d({0.0, 1.0})), -2.5);
  EXPECT_NEAR(off.diffusion_at(0.0, std::vector<double>{0.0}, measure1d({0.0}))[0], std::sqrt(2.0), 1e-15);
}

TEST(Cormier, FixedPointsReplayTheirEquation) {
  const auto roots = cormier_fixed_points(14.0);
  ASSERT_EQ(roots.size(), 5u);
  const bool pattern[5] = {true, false, true, false, true};
  const double c = std::sqrt(std::numbers::e) / 14.0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double a = roots[i].alpha;
    EXPECT_LE(std::abs(c * a - std::cos(a)), 1e-10);
    EXPECT_EQ(roots[i].stable, a * std::tan(a) > -1.0);
    EXPECT_EQ(roots[i].stable, pattern[i]) << "root " << i;
    if (i > 0) {
      EXPECT_LT(roots[i - 1].alpha, a);
    }
  }
}

TEST(Cormier, UnitCouplingRootIsDottieNumber) {
  const auto roots = cormier_fixed_points(std::sqrt(std::numbers::e));
  ASSERT_EQ(roots.size(), 1u);
  const double oracle = bisect(0.0, 1.0, [](double a) { return a - std::cos(a); });
  EXPECT_NEAR(roots[0].alpha, oracle, 1e-10);
  EXPECT_NEAR(roots[0].alpha, 0.7390851, 1e-7);
  EXPECT_TRUE(roots[0].stable);
}

TEST(Cormier, NoCouplingMatchesOuTransitionLaw) {
  const auto model = cormier_model(0.0);
  const std::size_t n = 20000;
  MeasurePath path{TimeGrid(1.0, 100), {}, 0, "const"};
  for (int k = 0; k <= 100; ++k) path.snapshots.push_back(measure1d({0.0}));
  const ParticleEnsemble xi(n, 1, std::vector<double>(n, 1.0));
  const auto pairs = simulate_decoupled(model, path, xi, TimeGrid(1.0, 100), RngPlan(31));
  double s = 0, ss = 0;
  for (std::size_t m = 0; m < n; ++m) {
    s += pairs.x_t(m, 0);
    ss += pairs.x_t(m, 0) * pairs.x_t(m, 0);
  }
  const double mean = s / n, var = ss / n - mean * mean;
  const double exact_mean = std::exp(-1.0), exact_var = 1.0 - std::exp(-2.0);
  EXPECT_NEAR(mean, exact_mean, 3.0 * std::sqrt(exact_var / n));
  EXPECT_NEAR(var, exact_var, 3.0 * exact_var * std::sqrt(2.0 / n));
}

TEST(Ou, KoopmanEigenvalues) {
  const auto l = ou_koopman_eigenvalues(1.0, 0.5, 4);
  ASSERT_EQ(l.size(), 4u);
  EXPECT_EQ(l[0], 1.0);
  EXPECT_NEAR(l[1], 0.6065306597126334, 1e-15);
  EXPECT_NEAR(l[2], 0.36787944117144233, 1e-15);
  EXPECT_NEAR(l[3], 0.22313016014842982, 1e-15);
  for (double v : ou_koopman_eigenvalues(2.0, 1e-9, 5)) EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(KuramotoCircle, DriftExamples) {
  const auto m = kuramoto_circle_model(1.0);
  for (double x : {0.3, 1.0, 4.0}) EXPECT_NEAR(drift1(m, x, measure1d({x})), 2.0 * std::sin(2.0 * x), 1e-14);
  EXPECT_NEAR(drift1(m, 0.0, measure1d({kPi / 2})), 1.0, 1e-14);
  EXPECT_NEAR(drift1(m, kPi / 4, measure1d({kPi / 4})), 2.0, 1e-14);
}

TEST(KuramotoCircle, DriftIsPeriodic) {
  const auto m = kuramoto_circle_model(1.0);
  Gen g(41);
  for (int i = 0; i < 100; ++i) {
    const double x = g.uniform(0, 2 * kPi), y = g.uniform(0, 2 * kPi), z = g.uniform(0, 2 * kPi);
    EXPECT_NEAR(drift1(m, x, measure1d({y, z})), drift1(m, x + 2 * kPi, measure1d({y + 2 * kPi, z + 2 * kPi})), 1e-12);
  }
}

TEST(KuramotoCircle, StepWrapsIntoCircle) {
  const auto m = kuramoto_circle_model(1.0);
  const std::vector<double> x{6.2}, dw{0.5};
  const double y = euler_step(m, x, 0.0, measure1d({1.0}), 0.01, dw)[0];
  EXPECT_GE(y, 0.0);
  EXPECT_LT(y, 2 * kPi);
}

TEST(KuramotoDensity, NormalizedAndSymmetric) {
  const auto rho = kuramoto_invariant_density(1.0);
  EXPECT_TRUE(rho.unique);
  // Independent composite trapezoid on a fine periodic grid (spectrally accurate here).
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += rho(2 * kPi * i / n);
  EXPECT_NEAR(s * 2 * kPi / n, 1.0, 1e-9);
  EXPECT_NEAR(rho(kPi / 4), rho(3 * kPi / 4), 1e-14);
  EXPECT_GT(rho(kPi / 2), rho(kPi / 2 + 0.01));
  EXPECT_GT(rho(kPi / 2), rho(kPi / 2 - 0.01));
  EXPECT_NEAR(rho(kPi / 2), rho(3 * kPi / 2), 1e-14);
  EXPECT_LT(rho(0.0), rho(0.01));
  EXPECT_NEAR(rho(0.0), rho(kPi), 1e-14);
}

TEST(KuramotoDensity, BelowThresholdFlagged) {
  EXPECT_FALSE(kuramoto_invariant_density(0.7).unique);
  EXPECT_FALSE(kuramoto_invariant_density(kKuramotoCriticalSigma).unique);
}

TEST(KuramotoSphere, RadialDriftWithoutRotation) {
  SphereParams p;
  p.beta = 0.0;
  p.beta_mode = BetaMode::per_model;
  auto stream = RngPlan(1).stream(0, RngPlan::kModelStep);
  const auto m = kuramoto_sphere_model(p, stream);
  Gen g(42);
  for (int i = 0; i < 20; ++i) {
    const auto x = unit_vector(g);
    const EmpiricalMeasure mu(ParticleEnsemble(1, 3, x));
    const auto d = m.drift_at(0.0, x, mu);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(d[j], -0.25 * x[j], 1e-14);
    std::vector<double> y{3.0 * x[0], 3.0 * x[1], 3.0 * x[2]};
    m.post_step(y);
    EXPECT_NEAR(dot3(y, y), 1.0, 1e-14);
  }
}

TEST(KuramotoSphere, CouplingAndNoiseAreTangential) {
  Gen g(43);
  auto s = RngPlan(2).stream(0, 0);
  SphereParams p;
  p.A = random_antisymmetric(s);
  EXPECT_LE((p.A + p.A.transpose()).cwiseAbs().maxCoeff(), 0.0);
  p.beta_mode = BetaMode::per_model;
  auto ms = RngPlan(2).stream(1, 0);
  const auto m = kuramoto_sphere_model(p, ms);
  for (int i = 0; i < 50; ++i) {
    const auto x = unit_vector(g);
    std::vector<double> pts;
    for (int k = 0; k < 5; ++k) {
      const auto u = unit_vector(g);
      pts.insert(pts.end(), u.begin(), u.end());
    }
    const EmpiricalMeasure mu(ParticleEnsemble(5, 3, pts));
    // Subtract the linear part (A - g^2 I) x; the remainder is (I - x x^T) v.
    auto d = m.drift_at(0.0, x, mu);
    for (int r = 0; r < 3; ++r) {
      double lin = -p.gamma * p.gamma * x[r];
      for (int c = 0; c < 3; ++c) lin += p.A(r, c) * x[c];
      d[r] -= lin;
    }
    EXPECT_NEAR(dot3(d, x), 0.0, 1e-12);
    const auto sig = m.diffusion_at(0.0, x, mu);
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(sig[3 * r] * x[0] + sig[3 * r + 1] * x[1] + sig[3 * r + 2] * x[2], 0.0, 1e-14);
  }
}

TEST(KuramotoSphere, RejectsNonAntisymmetric) {
  SphereParams p;
  p.A(0, 1) = 0.5;
  auto s = RngPlan(1).stream(0, 0);
  EXPECT_THROW(kuramoto_sphere_model(p, s), ConfigError);
}

TEST(Registry, ResolvesAndRejects) {
  const RngPlan plan(7);
  const auto c = make_model("cormier", {{"J", 3.0}}, plan);
  EXPECT_EQ(c.params.at("J"), 3.0);
  EXPECT_EQ(c.params.at("init"), (std::vector<double>{-7.5, 10.0}));
  EXPECT_THROW(make_model("cormier", {{"K", 1.0}}, plan), ConfigError);
  EXPECT_THROW(make_model("lorenz", nlohmann::json::object(), plan), ConfigError);
  const auto a = make_model("kuramoto-sphere", nlohmann::json::object(), plan);
  const auto b = make_model("kuramoto-sphere", nlohmann::json::object(), plan);
  EXPECT_EQ(a.params, b.params);
  const auto again = make_model("kuramoto-sphere", a.params, RngPlan(99));
  EXPECT_EQ(again.params.at("A"), a.params.at("A"));
}

TEST(SignChanges, HysteresisBand) {
  const int n = 400;
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::cos(2 * kPi * i / n + 0.3);
  EXPECT_EQ(circular_sign_changes(f, 0.2).size(), 2u);
  for (int i = 0; i < n; ++i) f[i] = std::cos(2 * kPi * i / n) + 0.05 * std::sin(2 * kPi * 40 * i / n);
  EXPECT_EQ(circular_sign_changes(f, 0.2).size(), 2u);
  EXPECT_EQ(circular_sign_changes(std::vector<double>(10, 1.0), 0.2).size(), 0u);
}

TEST(SphereSplit, PoleSeparatingSplit) {
  const auto d = Dictionary::voronoi_sphere(200);
  // Two clouds around the poles +-z.
  Gen g(44);
  ParticleEnsemble mass(2000, 3);
  for (std::size_t m = 0; m < mass.count(); ++m) {
    const double sign = m % 2 ? 1.0 : -1.0;
    mass(m, 0) = g.uniform(-0.2, 0.2);
    mass(m, 1) = g.uniform(-0.2, 0.2);
    mass(m, 2) = sign;
  }
  std::vector<double> by_z, by_x;
  for (const auto& c : d.centers()) {
    by_z.push_back(c[2]);
    by_x.push_back(c[0]);
  }
  const auto good = sphere_split(d, by_z, mass);
  EXPECT_LT(good.antipodal_angle_deg, 1.0);
  EXPECT_LT(good.pole_angle_deg, 1.0);
  EXPECT_NEAR(good.pole[2], 1.0, 1e-3);
  // A split through both poles still has antipodal centroids but misses the poles.
  const auto bad = sphere_split(d, by_x, mass);
  EXPECT_LT(bad.antipodal_angle_deg, 10.0);
  EXPECT_GT(bad.pole_angle_deg, 60.0);
}
