#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "mvk/edmd.hpp"
#include "mvk/error.hpp"
#include "mvk/parallel.hpp"
#include "support.hpp"

using namespace mvk;
using mvk::test::ensemble1d;
using mvk::test::Gen;
using Eigen::MatrixXd;

namespace {

PairDataSet pairs1d(std::vector<double> xi, std::vector<double> xt) {
  return PairDataSet(ensemble1d(xi), ensemble1d(xt), 1.0);
}

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(rows.size(), rows.begin()->size());
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

double rel_defect(const MatrixXd& a, const MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.norm()); }

// Transition matrix of the deterministic map by direct counting of bin indices.
MatrixXd counted_transitions(const std::vector<std::size_t>& from, const std::vector<std::size_t>& to, std::size_t n) {
  MatrixXd t = MatrixXd::Zero(n, n);
  std::vector<double> visits(n, 0.0);
  for (std::size_t m = 0; m < from.size(); ++m) {
    t(from[m], to[m]) += 1.0;
    visits[from[m]] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) t.row(i) /= visits[i];
  return t;
}

}  // namespace

TEST(GramMatrix, Examples) {
  const auto g0 = gram_matrix(Dictionary::monomial(1, 1), ensemble1d({0.3, -4.0, 7.0}));
  EXPECT_EQ(g0(0, 0), 1.0);
  EXPECT_EQ(gram_matrix(Dictionary::indicator_1d(0, 1, 2), ensemble1d({0.25, 0.75})), mat({{0.5, 0}, {0, 0.5}}));
  EXPECT_EQ(gram_matrix(Dictionary::monomial(1, 1), ensemble1d({-1.0, 1.0})), mat({{1, 0}, {0, 1}}));
}

TEST(GramMatrix, ExactlySymmetricAndThreadInvariant) {
  Gen g(5);
  ParticleEnsemble x(20000, 1);
  for (std::size_t m = 0; m < x.count(); ++m) x(m, 0) = g.uniform(-1.3, 1.1);
  const auto d = Dictionary::monomial(1, 6);
  set_thread_count(1);
  const auto a = gram_matrix(d, x);
  set_thread_count(5);
  const auto b = gram_matrix(d, x);
  set_thread_count(1);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, a.transpose());
}

TEST(StructureMatrix, Examples) {
  const auto d = Dictionary::indicator_1d(0, 1, 2);
  const auto same = pairs1d({0.1, 0.6, 0.7}, {0.1, 0.6, 0.7});
  EXPECT_EQ(structure_matrix(d, same), gram_matrix(d, same.xi));
  EXPECT_EQ(structure_matrix(d, pairs1d({0.25}, {0.75})), mat({{0, 0}, {1, 0}}));
  EXPECT_EQ(structure_matrix(d, pairs1d({0.25, 0.75}, {0.75, 0.25})), mat({{0, 0.5}, {0.5, 0}}));
}

TEST(KoopmanMatrix, Examples) {
  const MatrixXd c = mat({{0.3, -1.0, 2.0}, {0.0, 4.0, 0.5}, {1.0, 1.0, 1.0}});
  EXPECT_LT((koopman_matrix(MatrixXd::Identity(3, 3), c) - c.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((perron_matrix(MatrixXd::Identity(3, 3), c) - c).cwiseAbs().maxCoeff(), 1e-15);

  const MatrixXd g = mat({{0.5, 0}, {0, 0.5}});
  const MatrixXd swap = mat({{0, 0.5}, {0.5, 0}});
  EXPECT_LT((koopman_matrix(g, swap).transpose() - mat({{0, 1}, {1, 0}})).cwiseAbs().maxCoeff(), 1e-15);

  Gen gen(6);
  std::vector<double> xs(50);
  for (auto& v : xs) v = gen.uniform(-1, 1);
  const auto d = Dictionary::monomial(1, 3);
  const auto same = pairs1d(xs, xs);
  const auto G = gram_matrix(d, same.xi);
  const auto C = structure_matrix(d, same);
  EXPECT_LT((koopman_matrix(G, C) - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((perron_matrix(G, C) - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(KoopmanMatrix, SingularGramRejected) {
  const auto d = Dictionary::monomial(1, 2);
  const auto data = pairs1d({0.0, 1.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 1.0});
  try {
    koopman_matrix(gram_matrix(d, data.xi), structure_matrix(d, data));
    FAIL() << "expected LinalgError";
  } catch (const LinalgError& e) {
    EXPECT_NE(std::string(e.what()).find("Gram matrix singular; increase samples, shrink dictionary, or set reg > 0"),
              std::string::npos);
    EXPECT_EQ(e.exit_code(), 4);
  }
  EXPECT_NO_THROW(koopman_matrix(gram_matrix(d, data.xi), structure_matrix(d, data), 1e-3));
}

TEST(Spectrum, Examples) {
  const auto s = spectrum(MatrixXd::Identity(3, 3), 2);
  ASSERT_EQ(s.count(), 2u);
  EXPECT_EQ(s.eigenvalues[0], std::complex<double>(1.0, 0.0));
  EXPECT_EQ(s.eigenvalues[1], std::complex<double>(1.0, 0.0));
  Eigen::VectorXd diag(3);
  diag << 0.1, 0.9, 0.5;
  const auto t = spectrum(MatrixXd(diag.asDiagonal()), 2);
  EXPECT_NEAR(t.eigenvalues[0].real(), 0.9, 1e-15);
  EXPECT_NEAR(t.eigenvalues[1].real(), 0.5, 1e-15);
}

TEST(Spectrum, OrderingAndResiduals) {
  Gen g(7);
  for (int trial = 0; trial < 30; ++trial) {
    const double th = g.uniform(0.1, 3.0), r = g.uniform(0.5, 2.0);
    MatrixXd a = MatrixXd::Zero(4, 4);
    a.block(0, 0, 2, 2) << r * std::cos(th), -r * std::sin(th), r * std::sin(th), r * std::cos(th);
    a(2, 2) = g.uniform(-0.4, 0.4);
    a(3, 3) = g.uniform(-0.4, 0.4);
    a(0, 3) = g.uniform(-1, 1);
    const auto s = spectrum(a, 4);
    EXPECT_NEAR(std::abs(s.eigenvalues[0]), r, 1e-12);
    EXPECT_NEAR(s.eigenvalues[0].imag(), r * std::sin(th), 1e-12);
    EXPECT_NEAR(s.eigenvalues[1].imag(), -r * std::sin(th), 1e-12);
    for (std::size_t l = 0; l + 1 < s.count(); ++l) EXPECT_GE(std::abs(s.eigenvalues[l]), std::abs(s.eigenvalues[l + 1]));
    for (std::size_t l = 0; l < s.count(); ++l) {
      const Eigen::VectorXcd v = s.eigenvectors.col(static_cast<Eigen::Index>(l));
      EXPECT_NEAR(v.norm(), 1.0, 1e-12);
      const double res = (a.cast<std::complex<double>>() * v - s.eigenvalues[l] * v).norm();
      EXPECT_LE(res, 1e-8 * a.norm());
      EXPECT_NEAR(res, s.residuals[l], 1e-12);
    }
  }
}

TEST(Eigenfunction, Examples) {
  const auto d = Dictionary::monomial(1, 1);
  const auto xs = ensemble1d({-2.0, 0.0, 3.5});
  Eigen::VectorXcd e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  const auto f1 = eval_eigenfunction(d, e1, xs);
  const auto f2 = eval_eigenfunction(d, e2, xs);
  for (std::size_t m = 0; m < xs.count(); ++m) {
    EXPECT_EQ(f1[m], std::complex<double>(1.0, 0.0));
    EXPECT_EQ(f2[m], std::complex<double>(xs(m, 0), 0.0));
  }
}

TEST(Eigenfunction, SwapPermutation) {
  const auto d = Dictionary::indicator_1d(0, 1, 2);
  const auto r = run_edmd(d, pairs1d({0.25, 0.75}, {0.75, 0.25}), {2, 0.0});
  ASSERT_EQ(r.koopman.count(), 2u);
  EXPECT_NEAR(r.koopman.eigenvalues[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(r.koopman.eigenvalues[1].real(), -1.0, 1e-14);
  const auto f = eval_eigenfunction(d, r.full_eigenvector(r.koopman, 1), ensemble1d({0.1, 0.9}));
  EXPECT_NEAR(f[0].real(), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f[1].real(), -1.0 / std::sqrt(2.0), 1e-14);
}

TEST(EdmdProperty, DualityOnRandomInstances) {
  Gen g(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 30 + g.index(200);
    std::vector<double> xi(m), xt(m);
    for (std::size_t i = 0; i < m; ++i) {
      xi[i] = g.uniform(-1.0, 1.0);
      xt[i] = 0.8 * xi[i] + g.uniform(-0.2, 0.2);
    }
    const auto data = pairs1d(xi, xt);
    const auto dict = trial % 2 ? Dictionary::monomial(1, 1 + g.index(4)) : Dictionary::indicator_1d(-1.0, 1.0, 2 + g.index(4));
    const auto G = gram_matrix(dict, data.xi);
    const auto C = structure_matrix(dict, data);
    const auto K = koopman_matrix(G, C);
    const auto P = perron_matrix(G, C);
    EXPECT_LE(rel_defect(K.transpose() * G, G * P), 1e-10) << "trial " << trial;
    EXPECT_LE(rel_defect(K.transpose() * G, C), 1e-10);
    EXPECT_LE(rel_defect(P.transpose() * G, C.transpose()), 1e-10);
  }
}

TEST(EdmdProperty, ConstantIsKoopmanFixed) {
  Gen g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + g.index(10);
    std::vector<double> xi, xt;
    for (std::size_t i = 0; i < 40 * n; ++i) {
      const double x = g.uniform();
      xi.push_back(x);
      xt.push_back(std::fmod(x + g.uniform(0.0, 0.3), 1.0));
    }
    const auto r = run_edmd(Dictionary::indicator_1d(0.0, 1.0, n), pairs1d(xi, xt), {1, 0.0});
    ASSERT_EQ(r.active.size(), n);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    EXPECT_LE((r.matrices.K * ones - ones).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(EdmdProperty, DeterministicMapsMatchCountedTransitions) {
  // Two-state swap and a three-state cycle on bin centers.
  for (std::size_t n : {2u, 3u}) {
    std::vector<double> xi, xt;
    std::vector<std::size_t> from, to;
    for (std::size_t rep = 0; rep < 3; ++rep) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        xi.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(n));
        xt.push_back((static_cast<double>(j) + 0.5) / static_cast<double>(n));
        from.push_back(i);
        to.push_back(j);
      }
    }
    const auto r = run_edmd(Dictionary::indicator_1d(0.0, 1.0, n), pairs1d(xi, xt), {n, 0.0});
    EXPECT_LE((r.matrices.K - counted_transitions(from, to, n)).cwiseAbs().maxCoeff(), 1e-12);
  }
  // Doubling map x -> 2x mod 1 on random points.
  Gen g(10);
  const std::size_t n = 8;
  std::vector<double> xi, xt;
  std::vector<std::size_t> from, to;
  for (int i = 0; i < 4000; ++i) {
    const double x = g.uniform();
    const double y = std::fmod(2.0 * x, 1.0);
    xi.push_back(x);
    xt.push_back(y);
    from.push_back(static_cast<std::size_t>(x * n));
    to.push_back(static_cast<std::size_t>(y * n));
  }
  const auto r = run_edmd(Dictionary::indicator_1d(0.0, 1.0, n), pairs1d(xi, xt), {1, 0.0});
  EXPECT_LE((r.matrices.K - counted_transitions(from, to, n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunEdmd, EmptyBinsDropped) {
  const auto d = Dictionary::indicator_1d(0.0, 4.0, 4);
  const auto r = run_edmd(d, pairs1d({0.5, 1.5, 3.5, 0.6}, {1.5, 3.5, 0.5, 0.7}), {3, 0.0});
  EXPECT_EQ(r.active, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(r.matrices.K.rows(), 3);
  const auto v = r.full_eigenvector(r.koopman, 0);
  ASSERT_EQ(v.size(), 4);
  EXPECT_EQ(v(2), std::complex<double>(0.0, 0.0));
}

TEST(RunEdmd, ResidualsSmall) {
  Gen g(11);
  std::vector<double> xi, xt;
  for (int i = 0; i < 3000; ++i) {
    const double x = g.uniform(-1.0, 1.0);
    xi.push_back(x);
    xt.push_back(0.5 * x + 0.3 * g.uniform(-1.0, 1.0));
  }
  const auto r = run_edmd(Dictionary::monomial(1, 5), pairs1d(xi, xt), {6, 0.0});
  for (const auto* s : {&r.koopman, &r.perron}) {
    const MatrixXd& a = s == &r.koopman ? r.matrices.K : r.matrices.P;
    for (double res : s->residuals) EXPECT_LE(res, 1e-8 * a.norm());
  }
  EXPECT_LE(r.matrices.duality_defect(), 1e-10);
}

TEST(SymmetryAugment, ShiftsAndWraps) {
  const auto aug = symmetry_augment(pairs1d({0.5, 4.0}, {1.0, 6.0}), std::numbers::pi, 2.0 * std::numbers::pi);
  ASSERT_EQ(aug.count(), 4u);
  EXPECT_EQ(aug.xi(0, 0), 0.5);
  EXPECT_NEAR(aug.xi(2, 0), 0.5 + std::numbers::pi, 1e-15);
  EXPECT_NEAR(aug.xi(3, 0), 4.0 - std::numbers::pi, 1e-15);
  EXPECT_NEAR(aug.x_t(3, 0), 6.0 - std::numbers::pi, 1e-15);
}

TEST(SpectrumJson, Layout) {
  const auto r = run_edmd(Dictionary::indicator_1d(0, 1, 2), pairs1d({0.25, 0.75}, {0.75, 0.25}), {2, 0.0});
  const auto j = spectrum_to_json(r.koopman, r.matrices);
  EXPECT_EQ(j.at("operator"), "koopman");
  EXPECT_EQ(j.at("eigenvalues").size(), 2u);
  EXPECT_TRUE(j.at("eigenvalues")[0].contains("re"));
  EXPECT_TRUE(j.at("eigenvalues")[0].contains("im"));
  EXPECT_EQ(j.at("N"), 2);
  EXPECT_EQ(j.at("M"), 2);
  EXPECT_TRUE(j.contains("cond_G"));
  EXPECT_TRUE(j.contains("residuals"));
}
