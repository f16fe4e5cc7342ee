#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvk/core.hpp"
#include "mvk/dictionary.hpp"

namespace mvk {

/// sqrt((1/n) sum_k (a_(k) - b_(k))^2) over sorted samples of equal size.
double w2_1d(std::span<const double> a, std::span<const double> b);
/// Same on 1-D ensembles; throws "W2 implemented for d = 1 only" otherwise.
double w2_1d(const ParticleEnsemble& a, const ParticleEnsemble& b);

struct HistogramDistance {
  /// sum over bins of |empirical mass - integral of the density over the bin|.
  double l1 = 0.0;
  /// Fraction of samples outside [lo, hi].
  double outside_mass = 0.0;
};

/// Compares a sample cloud with a density on [lo, hi] using `bins` equal
/// bins (last bin closed). Bin integrals use composite Simpson; the density
/// must integrate to 1 on [lo, hi] within 1%.
HistogramDistance histogram_l1(std::span<const double> samples, const std::function<double(double)>& density,
                               std::size_t bins, double lo, double hi);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of the 95% confidence interval for the slope.
  double half_width = 0.0;
};

/// Least squares fit of log y against log x.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

struct SweepReport {
  std::string kind;
  std::string parameter;
  std::vector<double> values;
  std::vector<double> mean_error;
  std::vector<double> std_error;
  std::size_t seeds = 0;
  SlopeFit fit;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Builds the report: per-value mean and sample standard deviation of
/// errors[value][seed] and the slope of log mean against log value.
SweepReport make_sweep_report(std::string kind, std::string parameter, std::vector<double> values,
                              const std::vector<std::vector<double>>& errors);

struct StrongSweepOptions {
  /// Descending step sizes; each must be an integer multiple of the reference step.
  std::vector<double> steps{0.1, 0.05, 0.025, 0.0125};
  /// Reference step; 0 means steps.back() / 8.
  double reference_step = 0.0;
  double horizon = 1.0;
  std::size_t paths = 2000;
  /// Particles in the frozen measure the decoupled dynamics run against.
  std::size_t frozen_particles = 2000;
  std::size_t seeds = 5;
  std::uint64_t seed = 1;
};

/// Mean squared error at the horizon of the decoupled Euler scheme with step h
/// against the same scheme at the reference step, driven by the same Brownian
/// path (coarse increments are sums of fine ones). The law is frozen at an
/// initial-sampler ensemble.
SweepReport strong_error_sweep(const ModelSpec& model, const StrongSweepOptions& options);

struct MeasureSweepOptions {
  /// Ascending particle counts.
  std::vector<std::size_t> particles{100, 200, 400, 800, 1600};
  double step = 0.1;
  double horizon = 1.0;
  std::size_t seeds = 10;
  /// Reference IPS size = multiplier * max(particles), at least 16.
  std::size_t reference_multiplier = 16;
  std::uint64_t seed = 1;
};

/// E[W2^2] between the IPS empirical measure at the horizon and an
/// equal-size random subsample of a large reference IPS. 1-D models only.
SweepReport measure_error_sweep(const ModelSpec& model, const MeasureSweepOptions& options);

struct GramSweepOptions {
  std::vector<std::size_t> samples{100, 1000, 10000, 100000};
  std::size_t seeds = 20;
  std::uint64_t seed = 1;
};

/// ||G_hat - G||_F for monomials {1, x} under Unif[-1, 1], where
/// G = diag(1, 1/3).
SweepReport gram_error_sweep(const GramSweepOptions& options);

/// Uniform subsample of `count` distinct rows (partial Fisher-Yates).
ParticleEnsemble subsample(const ParticleEnsemble& source, std::size_t count, RngStream& stream);

}  // namespace mvk
