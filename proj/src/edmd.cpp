#include "mvk/edmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mvk/error.hpp"
#include "mvk/io.hpp"
#include "mvk/parallel.hpp"

namespace mvk {

namespace {

constexpr std::size_t kBlockRows = 4096;

Eigen::MatrixXd tree_sum(std::vector<Eigen::MatrixXd>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return std::move(parts[lo]);
  const std::size_t mid = lo + (hi - lo) / 2;
  Eigen::MatrixXd left = tree_sum(parts, lo, mid);
  left += tree_sum(parts, mid, hi);
  return left;
}

/// (1/M) sum over rows of psi_row(a)^T psi_row(b), accumulated per fixed-size
/// block and combined by a pairwise tree, so the result does not depend on
/// the thread count.
Eigen::MatrixXd outer_mean(const Dictionary& dict, const ParticleEnsemble& a, const ParticleEnsemble* b) {
  const std::size_t m = a.count();
  if (m == 0) throw ConfigError("EDMD needs at least one sample");
  const std::size_t blocks = (m + kBlockRows - 1) / kBlockRows;
  std::vector<Eigen::MatrixXd> parts(blocks);
  parallel_for(blocks, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t lo = k * kBlockRows;
      const std::size_t hi = std::min(m, lo + kBlockRows);
      const Eigen::MatrixXd pa = dict.eval_batch(a, lo, hi);
      if (b) {
        parts[k] = pa.transpose() * dict.eval_batch(*b, lo, hi);
      } else {
        parts[k] = pa.transpose() * pa;
      }
    }
  });
  Eigen::MatrixXd sum = tree_sum(parts, 0, blocks);
  sum /= static_cast<double>(m);
  return sum;
}

struct ScaledSystem {
  Eigen::VectorXd inv_sqrt_d;
  Eigen::LDLT<Eigen::MatrixXd> factor;
  double cond;
};

ScaledSystem factor_gram(const Eigen::MatrixXd& gram, double reg) {
  if (gram.rows() != gram.cols() || gram.rows() == 0) throw ConfigError("Gram matrix must be square and nonempty");
  if (!(reg >= 0.0)) throw ConfigError("ridge parameter must be nonnegative");
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += reg;
  ScaledSystem sys{Eigen::VectorXd(n), {}, std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a(i, i);
    sys.inv_sqrt_d(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  if ((sys.inv_sqrt_d.array() == 0.0).any()) return sys;
  const Eigen::MatrixXd s = sys.inv_sqrt_d.asDiagonal() * a * sys.inv_sqrt_d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return sys;
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().cwiseAbs().maxCoeff();
  sys.cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (sys.cond <= kSingularGramCondition) sys.factor.compute(s);
  return sys;
}

/// Solves (G + reg I) X = rhs in Jacobi-scaled form.
Eigen::MatrixXd solve_gram(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, double reg, double* cond_out) {
  if (rhs.rows() != gram.rows() || rhs.cols() != gram.cols()) throw ConfigError("structure and Gram matrix shapes differ");
  const ScaledSystem sys = factor_gram(gram, reg);
  if (cond_out) *cond_out = sys.cond;
  if (!(sys.cond <= kSingularGramCondition)) {
    throw LinalgError("Gram matrix singular; increase samples, shrink dictionary, or set reg > 0 (condition estimate " +
                      io::format_double(sys.cond) + ")");
  }
  const Eigen::MatrixXd scaled_rhs = sys.inv_sqrt_d.asDiagonal() * rhs;
  Eigen::MatrixXd x = sys.factor.solve(scaled_rhs);
  if (sys.factor.info() != Eigen::Success) throw LinalgError("Gram solve failed");
  return sys.inv_sqrt_d.asDiagonal() * x;
}

double modulus_tolerance(double modulus) { return 1e-12 * std::max(1.0, modulus); }

}  // namespace

Eigen::MatrixXd gram_matrix(const Dictionary& dict, const ParticleEnsemble& xi) {
  Eigen::MatrixXd g = outer_mean(dict, xi, nullptr);
  const Eigen::MatrixXd upper = g;
  g.triangularView<Eigen::StrictlyLower>() = upper.transpose();
  return g;
}

Eigen::MatrixXd structure_matrix(const Dictionary& dict, const PairDataSet& data) {
  return outer_mean(dict, data.x_t, &data.xi);
}

double gram_condition(const Eigen::MatrixXd& gram, double reg) { return factor_gram(gram, reg).cond; }

Eigen::MatrixXd koopman_matrix(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& structure, double reg,
                               double* cond_out) {
  return solve_gram(gram, structure.transpose(), reg, cond_out);
}

Eigen::MatrixXd perron_matrix(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& structure, double reg,
                              double* cond_out) {
  return solve_gram(gram, structure, reg, cond_out);
}

std::string to_string(OperatorKind kind) {
  return kind == OperatorKind::koopman ? "koopman" : "perron_frobenius";
}

SpectralResult spectrum(const Eigen::MatrixXd& a, std::size_t n_eig, OperatorKind op) {
  const auto n = static_cast<std::size_t>(a.rows());
  if (a.rows() != a.cols() || n == 0) throw ConfigError("spectrum: matrix must be square and nonempty");
  if (n_eig == 0 || n_eig > n) throw ConfigError("spectrum: n_eig must be in [1, N]");
  if (!a.allFinite()) throw LinalgError("spectrum: matrix has non-finite entries");

  Eigen::EigenSolver<Eigen::MatrixXd> es(a, true);
  if (es.info() != Eigen::Success) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto sv = svd.singularValues();
    std::ostringstream msg;
    msg << "eigensolver failed to converge (N=" << n << ", ||A||_F=" << a.norm()
        << ", sigma_max/sigma_min=" << sv(0) / sv(sv.size() - 1) << ")";
    throw LinalgError(msg.str());
  }
  const Eigen::VectorXcd values = es.eigenvalues();
  const Eigen::MatrixXcd vectors = es.eigenvectors();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::abs(values(x)) > std::abs(values(y)); });
  // Moduli equal up to rounding form one group, ordered by real then imaginary part.
  for (std::size_t g = 0; g < n;) {
    const double head = std::abs(values(order[g]));
    std::size_t end = g + 1;
    while (end < n && head - std::abs(values(order[end])) <= modulus_tolerance(head)) ++end;
    std::stable_sort(order.begin() + g, order.begin() + end, [&](std::size_t x, std::size_t y) {
      if (values(x).real() != values(y).real()) return values(x).real() > values(y).real();
      return values(x).imag() > values(y).imag();
    });
    g = end;
  }

  SpectralResult out;
  out.op = op;
  out.eigenvectors.resize(a.rows(), static_cast<Eigen::Index>(n_eig));
  const Eigen::MatrixXcd ac = a.cast<std::complex<double>>();
  for (std::size_t l = 0; l < n_eig; ++l) {
    const auto src = static_cast<Eigen::Index>(order[l]);
    const std::complex<double> lambda = values(src);
    Eigen::VectorXcd v = vectors.col(src);
    v /= v.norm();
    const double vmax = v.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(v(pivot)) < vmax - 1e-12) ++pivot;
    v *= std::conj(v(pivot)) / std::abs(v(pivot));
    v(pivot) = std::abs(v(pivot));
    out.eigenvalues.push_back(lambda);
    out.eigenvectors.col(static_cast<Eigen::Index>(l)) = v;
    out.residuals.push_back((ac * v - lambda * v).norm());
  }
  return out;
}

std::vector<std::complex<double>> eval_eigenfunction(const Dictionary& dict, const Eigen::VectorXcd& v,
                                                     const ParticleEnsemble& xs) {
  if (static_cast<std::size_t>(v.size()) != dict.size()) throw ConfigError("eigenvector length does not match dictionary");
  std::vector<std::complex<double>> out(xs.count());
  parallel_for(xs.count(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> psi(dict.size());
    for (std::size_t m = begin; m < end; ++m) {
      dict.eval(xs.row(m), psi);
      std::complex<double> f = 0.0;
      for (std::size_t i = 0; i < psi.size(); ++i) f += v(static_cast<Eigen::Index>(i)) * psi[i];
      out[m] = f;
    }
  });
  return out;
}

std::vector<std::complex<double>> eval_eigenfunction_interpolated(const Dictionary& dict, const Eigen::VectorXcd& v,
                                                                  std::span<const double> xs) {
  if (static_cast<std::size_t>(v.size()) != dict.size()) throw ConfigError("eigenvector length does not match dictionary");
  const auto centers = dict.bin_centers();
  const auto [a, b] = dict.interval();
  const std::size_t n = centers.size();
  std::vector<std::complex<double>> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double x = xs[k];
    if (!(x >= a && x <= b)) {
      out[k] = 0.0;
    } else if (x <= centers.front()) {
      out[k] = v(0);
    } else if (x >= centers.back()) {
      out[k] = v(static_cast<Eigen::Index>(n - 1));
    } else {
      const auto hi = static_cast<std::size_t>(std::upper_bound(centers.begin(), centers.end(), x) - centers.begin());
      const std::size_t lo = hi - 1;
      const double w = (x - centers[lo]) / (centers[hi] - centers[lo]);
      out[k] = (1.0 - w) * v(static_cast<Eigen::Index>(lo)) + w * v(static_cast<Eigen::Index>(hi));
    }
  }
  return out;
}

double OperatorMatrices::duality_defect() const {
  Eigen::MatrixXd a = G;
  a.diagonal().array() += reg;
  const Eigen::MatrixXd diff = K.transpose() * a - a * P;
  return diff.cwiseAbs().maxCoeff() / std::max(1.0, a.norm());
}

Eigen::VectorXcd EdmdResult::full_eigenvector(const SpectralResult& s, std::size_t l) const {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dictionary.size()));
  for (std::size_t i = 0; i < active.size(); ++i)
    full(static_cast<Eigen::Index>(active[i])) = s.eigenvectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
  return full;
}

EdmdResult run_edmd(const Dictionary& dict, const PairDataSet& data, const EdmdOptions& options) {
  if (data.count() == 0) throw ConfigError("EDMD needs a nonempty data set");
  const Eigen::MatrixXd g_full = gram_matrix(dict, data.xi);
  const Eigen::MatrixXd c_full = structure_matrix(dict, data);

  std::vector<std::size_t> active;
  std::vector<std::size_t> dropped;
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const bool empty = dict.is_partition() && g_full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) == 0.0;
    (empty ? dropped : active).push_back(i);
  }
  if (active.empty()) throw LinalgError("Gram matrix singular; increase samples, shrink dictionary, or set reg > 0 (no data in any basis function)");
  if (!dropped.empty()) {
    std::ostringstream msg;
    msg << "dropping " << dropped.size() << " of " << dict.size() << " basis functions with no samples:";
    for (std::size_t i : dropped) msg << ' ' << i;
    log_warning(msg.str());
  }

  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd g(n, n), c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = g_full(static_cast<Eigen::Index>(active[i]), static_cast<Eigen::Index>(active[j]));
      c(i, j) = c_full(static_cast<Eigen::Index>(active[i]), static_cast<Eigen::Index>(active[j]));
    }
  }

  EdmdResult res{dict, active, {}, {}, {}};
  auto& mats = res.matrices;
  mats.G = std::move(g);
  mats.C = std::move(c);
  mats.K = koopman_matrix(mats.G, mats.C, options.reg, &mats.cond_G);
  mats.P = perron_matrix(mats.G, mats.C, options.reg);
  mats.M = data.count();
  mats.reg = options.reg;
  mats.dictionary = dict.to_json();

  std::size_t n_eig = options.n_eig;
  if (n_eig > active.size()) {
    log_warning("n_eig " + std::to_string(n_eig) + " exceeds the " + std::to_string(active.size()) +
                " active basis functions; reporting all of them");
    n_eig = active.size();
  }
  res.koopman = spectrum(mats.K, n_eig, OperatorKind::koopman);
  res.perron = spectrum(mats.P, n_eig, OperatorKind::perron_frobenius);
  return res;
}

PairDataSet symmetry_augment(const PairDataSet& data, double shift, double period) {
  const std::size_t m = data.count();
  const std::size_t d = data.dim();
  auto augment = [&](const ParticleEnsemble& src) {
    ParticleEnsemble out(2 * m, d);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        out(k, j) = src(k, j);
        double y = src(k, j) + shift;
        if (period > 0.0) {
          y = std::fmod(y, period);
          if (y < 0.0) y += period;
          if (y >= period) y = 0.0;
        }
        out(m + k, j) = y;
      }
    }
    return out;
  };
  return PairDataSet(augment(data.xi), augment(data.x_t), data.lag);
}

std::pair<double, double> data_range(const PairDataSet& data) {
  if (data.dim() != 1) throw ConfigError("data range is defined for 1-D data only");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* e : {&data.xi, &data.x_t}) {
    for (double v : e->data()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo < hi)) throw ConfigError("data range is degenerate; give the dictionary interval explicitly");
  return {lo, hi};
}

nlohmann::json spectrum_to_json(const SpectralResult& s, const OperatorMatrices& m) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : s.eigenvalues) values.push_back({{"re", v.real()}, {"im", v.imag()}});
  return {{"operator", to_string(s.op)},
          {"eigenvalues", values},
          {"residuals", s.residuals},
          {"cond_G", m.cond_G},
          {"N", m.G.rows()},
          {"M", m.M}};
}

}  // namespace mvk
