#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvk/core.hpp"
#include "mvk/dictionary.hpp"

namespace mvk {

/// G_ij = (1/M) sum_m psi_i(xi_m) psi_j(xi_m). Exactly symmetric.
Eigen::MatrixXd gram_matrix(const Dictionary& dict, const ParticleEnsemble& xi);

/// C_ij = (1/M) sum_m psi_i(x_T^m) psi_j(xi^m): rows index the terminal point,
/// columns the initial point.
Eigen::MatrixXd structure_matrix(const Dictionary& dict, const PairDataSet& data);

/// Condition number of G + reg I after symmetric Jacobi scaling
/// D^{-1/2} (G + reg I) D^{-1/2}, D = diag(G + reg I).
double gram_condition(const Eigen::MatrixXd& gram, double reg);

inline constexpr double kSingularGramCondition = 1e14;

/// K with K^T = C (G + reg I)^{-1}, i.e. the solution of (G + reg I) K = C^T.
/// Throws LinalgError when cond(G + reg I) exceeds kSingularGramCondition.
Eigen::MatrixXd koopman_matrix(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& structure, double reg = 0.0,
                               double* cond_out = nullptr);
/// P with P^T = C^T (G + reg I)^{-1}, i.e. (G + reg I) P = C.
Eigen::MatrixXd perron_matrix(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& structure, double reg = 0.0,
                              double* cond_out = nullptr);

enum class OperatorKind { koopman, perron_frobenius };

std::string to_string(OperatorKind kind);

struct SpectralResult {
  OperatorKind op = OperatorKind::koopman;
  std::vector<std::complex<double>> eigenvalues;
  /// Column l pairs with eigenvalues[l].
  Eigen::MatrixXcd eigenvectors;
  /// ||A v - lambda v||_2 per pair.
  std::vector<double> residuals;

  std::size_t count() const noexcept { return eigenvalues.size(); }
};

/// Dense eigendecomposition of A, leading n_eig pairs by modulus (ties: larger
/// real part, then larger imaginary part). Eigenvectors have unit 2-norm and
/// their first largest-modulus entry is real positive.
SpectralResult spectrum(const Eigen::MatrixXd& a, std::size_t n_eig, OperatorKind op = OperatorKind::koopman);

/// f(x) = sum_i v_i psi_i(x) per row of xs.
std::vector<std::complex<double>> eval_eigenfunction(const Dictionary& dict, const Eigen::VectorXcd& v,
                                                     const ParticleEnsemble& xs);
/// Indicator dictionaries only: piecewise-linear interpolation of the bin
/// values between bin centers, constant beyond the outermost centers.
/// For plotting.
std::vector<std::complex<double>> eval_eigenfunction_interpolated(const Dictionary& dict, const Eigen::VectorXcd& v,
                                                                  std::span<const double> xs);

struct OperatorMatrices {
  Eigen::MatrixXd G, C, K, P;
  double cond_G = 0.0;
  std::size_t M = 0;
  double reg = 0.0;
  nlohmann::json dictionary;

  /// max |K^T A - A P| / max(1, ||A||_F), A = G + reg I.
  double duality_defect() const;
};

struct EdmdOptions {
  std::size_t n_eig = 5;
  double reg = 0.0;
};

struct EdmdResult {
  /// Dictionary as requested.
  Dictionary dictionary;
  /// active[i] = index in `dictionary` of row/column i of the matrices.
  /// Basis functions with zero Gram diagonal are left out.
  std::vector<std::size_t> active;
  OperatorMatrices matrices;
  SpectralResult koopman;
  SpectralResult perron;

  /// Eigenvector l of `s` scattered back onto the full dictionary (zeros at
  /// dropped basis functions).
  Eigen::VectorXcd full_eigenvector(const SpectralResult& s, std::size_t l) const;
};

/// Full EDMD: assemble G and C, drop basis functions with zero Gram diagonal
/// (logged), solve for K and P and decompose both.
EdmdResult run_edmd(const Dictionary& dict, const PairDataSet& data, const EdmdOptions& options);

/// Data augmentation: appends a copy of every pair with both coordinates
/// shifted by `shift`, wrapped into [0, period) when period > 0.
PairDataSet symmetry_augment(const PairDataSet& data, double shift, double period);

/// (min, max) over the union of xi and x_T (1-D data only).
std::pair<double, double> data_range(const PairDataSet& data);

nlohmann::json spectrum_to_json(const SpectralResult& s, const OperatorMatrices& m);

}  // namespace mvk
