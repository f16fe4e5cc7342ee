#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvk/rng.hpp"

namespace mvk {

/// Uniform grid t_k = k * h, k = 0..steps.
class TimeGrid {
 public:
  /// Grid of `steps` equal intervals ending at t_end (h = t_end / steps).
  TimeGrid(double t_end, std::size_t steps);
  /// Grid with an exact step h (t_end = h * steps); used when reading files.
  static TimeGrid from_step(double step, std::size_t steps);
  /// Grid with step h covering [0, t_end]; t_end must be a multiple of h
  /// up to 1e-9 relative.
  static TimeGrid covering(double t_end, double step);

  double t_end() const noexcept { return t_end_; }
  double step() const noexcept { return step_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t points() const noexcept { return steps_ + 1; }
  /// t_k; returns t_end exactly for k == steps.
  double time(std::size_t k) const noexcept;

 private:
  TimeGrid(double t_end, double step, std::size_t steps) : t_end_(t_end), step_(step), steps_(steps) {}

  double t_end_;
  double step_;
  std::size_t steps_;
};

/// count x dim states, row-major with each particle contiguous.
class ParticleEnsemble {
 public:
  ParticleEnsemble(std::size_t count, std::size_t dim);
  ParticleEnsemble(std::size_t count, std::size_t dim, std::vector<double> states);

  std::size_t count() const noexcept { return count_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const double> row(std::size_t m) const noexcept { return {states_.data() + m * dim_, dim_}; }
  std::span<double> row(std::size_t m) noexcept { return {states_.data() + m * dim_, dim_}; }
  double operator()(std::size_t m, std::size_t j) const noexcept { return states_[m * dim_ + j]; }
  double& operator()(std::size_t m, std::size_t j) noexcept { return states_[m * dim_ + j]; }

  std::span<const double> data() const noexcept { return states_; }
  std::span<double> data() noexcept { return states_; }

  /// True when every entry is finite.
  bool all_finite() const noexcept;

  friend bool operator==(const ParticleEnsemble&, const ParticleEnsemble&) = default;

 private:
  std::size_t count_;
  std::size_t dim_;
  std::vector<double> states_;
};

/// Uniform-weight atomic measure (1/M) * sum_m delta_{x_m}.
class EmpiricalMeasure {
 public:
  /// Throws ConfigError("empty measure") when the ensemble has no particles.
  explicit EmpiricalMeasure(ParticleEnsemble particles);

  std::size_t size() const noexcept { return particles_.count(); }
  std::size_t dim() const noexcept { return particles_.dim(); }
  const ParticleEnsemble& particles() const noexcept { return particles_; }
  ParticleEnsemble to_ensemble() const { return particles_; }

 private:
  ParticleEnsemble particles_;
};

using Observable = std::function<double(std::span<const double>)>;

/// Pairwise (cascade) summation; result is independent of thread layout.
double pairwise_sum(std::span<const double> values) noexcept;

/// (1/M) * sum_m f(x_m).
double measure_expect(const EmpiricalMeasure& mu, const Observable& f);

/// Time-indexed family of empirical measures on a uniform grid.
struct MeasurePath {
  TimeGrid grid;
  std::vector<EmpiricalMeasure> snapshots;
  std::uint64_t seed = 0;
  std::string model;

  /// Checks snapshot count against the grid and shared (M, d).
  void validate() const;
  std::size_t particles() const { return snapshots.front().size(); }
  std::size_t dim() const { return snapshots.front().dim(); }
};

/// Index of the snapshot used at time t: floor(t / h + 1e-9).
std::size_t measure_index(const MeasurePath& path, double t);
/// Snapshot at or before t. Throws ConfigError("time out of range").
const EmpiricalMeasure& measure_lookup(const MeasurePath& path, double t);

/// Initial/terminal pairs (xi^m, X_T^m) at lag T.
struct PairDataSet {
  ParticleEnsemble xi;
  ParticleEnsemble x_t;
  double lag;

  PairDataSet(ParticleEnsemble initial, ParticleEnsemble terminal, double lag_time);

  std::size_t count() const noexcept { return xi.count(); }
  std::size_t dim() const noexcept { return xi.dim(); }
};

/// Per-step inputs to the model coefficients.
struct StepContext {
  double t = 0.0;
  /// Measure the coefficients are evaluated against (may be null when the
  /// model only reads `summary`).
  const EmpiricalMeasure* measure = nullptr;
  /// Output of ModelSpec::summarize for `measure` at t.
  std::span<const double> summary;
  /// Per-particle random coefficients for this step (ModelSpec::step_params).
  std::span<const double> random;
};

/// Coefficients b(t, x, mu), sigma(t, x, mu) of a mean-field SDE plus its
/// initial law and an optional state-space projection.
///
/// Mean-field dependence is routed through `summarize`, which reduces the
/// measure to a small feature vector once per step; drift and diffusion then
/// read the features instead of re-scanning every particle.
struct ModelSpec {
  using Summarize = std::function<std::vector<double>(double t, const EmpiricalMeasure&)>;
  using Drift = std::function<void(const StepContext&, std::span<const double> x, std::span<double> out)>;
  /// Writes the dim x dim diffusion matrix, row-major.
  using Diffusion = std::function<void(const StepContext&, std::span<const double> x, std::span<double> out)>;
  using Sampler = std::function<void(RngStream&, std::span<double> out)>;
  using PostStep = std::function<void(std::span<double> x)>;

  std::string name;
  std::size_t dim = 1;
  Summarize summarize;
  Drift drift;
  Diffusion diffusion;
  Sampler initial_sampler;
  PostStep post_step;
  /// Number of random coefficients redrawn per particle per step.
  std::size_t step_params = 0;
  Sampler sample_step_params;

  /// Summary features for mu at t (empty if the model defines none).
  std::vector<double> summary(double t, const EmpiricalMeasure& mu) const;
  /// b(t, x, mu) with no random coefficients.
  std::vector<double> drift_at(double t, std::span<const double> x, const EmpiricalMeasure& mu) const;
  /// sigma(t, x, mu), row-major.
  std::vector<double> diffusion_at(double t, std::span<const double> x, const EmpiricalMeasure& mu) const;
};

}  // namespace mvk
