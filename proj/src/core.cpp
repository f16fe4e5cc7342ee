#include "mvk/core.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

#include "mvk/error.hpp"

namespace mvk {

void log_warning(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

TimeGrid::TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), step_(0.0), steps_(steps) {
  if (steps == 0) throw ConfigError("time grid needs at least one step");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("time grid horizon must be positive and finite");
  step_ = t_end / static_cast<double>(steps);
}

TimeGrid TimeGrid::from_step(double step, std::size_t steps) {
  if (steps == 0) throw ConfigError("time grid needs at least one step");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("time grid step must be positive and finite");
  return TimeGrid(step * static_cast<double>(steps), step, steps);
}

TimeGrid TimeGrid::covering(double t_end, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("time grid step must be positive and finite");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("time grid horizon must be positive and finite");
  const double ratio = t_end / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "horizon " << t_end << " is not a multiple of step " << step;
    throw ConfigError(msg.str());
  }
  return TimeGrid(t_end, static_cast<std::size_t>(rounded));
}

double TimeGrid::time(std::size_t k) const noexcept {
  if (k >= steps_) return t_end_;
  return static_cast<double>(k) * step_;
}

ParticleEnsemble::ParticleEnsemble(std::size_t count, std::size_t dim)
    : count_(count), dim_(dim), states_(count * dim, 0.0) {
  if (dim == 0) throw ConfigError("ensemble dimension must be positive");
}

ParticleEnsemble::ParticleEnsemble(std::size_t count, std::size_t dim, std::vector<double> states)
    : count_(count), dim_(dim), states_(std::move(states)) {
  if (dim == 0) throw ConfigError("ensemble dimension must be positive");
  if (states_.size() != count * dim) throw ConfigError("ensemble state array has the wrong size");
}

bool ParticleEnsemble::all_finite() const noexcept {
  for (double v : states_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

EmpiricalMeasure::EmpiricalMeasure(ParticleEnsemble particles) : particles_(std::move(particles)) {
  if (particles_.count() == 0) throw ConfigError("empty measure");
}

double pairwise_sum(std::span<const double> values) noexcept {
  constexpr std::size_t kLeaf = 64;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double measure_expect(const EmpiricalMeasure& mu, const Observable& f) {
  const auto& p = mu.particles();
  if (p.count() == 0) throw ConfigError("empty measure");
  std::vector<double> values(p.count());
  for (std::size_t m = 0; m < p.count(); ++m) values[m] = f(p.row(m));
  return pairwise_sum(values) / static_cast<double>(p.count());
}

void MeasurePath::validate() const {
  if (snapshots.size() != grid.points()) throw ConfigError("measure path snapshot count does not match its grid");
  const std::size_t m = snapshots.front().size();
  const std::size_t d = snapshots.front().dim();
  for (const auto& s : snapshots) {
    if (s.size() != m || s.dim() != d) throw ConfigError("measure path snapshots differ in particle count or dimension");
  }
}

std::size_t measure_index(const MeasurePath& path, double t) {
  const double h = path.grid.step();
  if (!(t >= 0.0) || t > path.grid.t_end() + 1e-9 * h) {
    std::ostringstream msg;
    msg << "time out of range: t=" << t << " not in [0, " << path.grid.t_end() << "]";
    throw ConfigError(msg.str());
  }
  const auto k = static_cast<std::size_t>(std::floor(t / h + 1e-9));
  return std::min(k, path.grid.steps());
}

const EmpiricalMeasure& measure_lookup(const MeasurePath& path, double t) {
  return path.snapshots.at(measure_index(path, t));
}

PairDataSet::PairDataSet(ParticleEnsemble initial, ParticleEnsemble terminal, double lag_time)
    : xi(std::move(initial)), x_t(std::move(terminal)), lag(lag_time) {
  if (xi.count() != x_t.count() || xi.dim() != x_t.dim()) throw ConfigError("pair data: xi and x_T shapes differ");
  if (!(lag > 0.0)) throw ConfigError("pair data: lag must be positive");
}

std::vector<double> ModelSpec::summary(double t, const EmpiricalMeasure& mu) const {
  if (!summarize) return {};
  return summarize(t, mu);
}

std::vector<double> ModelSpec::drift_at(double t, std::span<const double> x, const EmpiricalMeasure& mu) const {
  const auto features = summary(t, mu);
  std::vector<double> zeros(step_params, 0.0);
  StepContext ctx{t, &mu, features, zeros};
  std::vector<double> out(dim);
  drift(ctx, x, out);
  return out;
}

std::vector<double> ModelSpec::diffusion_at(double t, std::span<const double> x, const EmpiricalMeasure& mu) const {
  const auto features = summary(t, mu);
  std::vector<double> zeros(step_params, 0.0);
  StepContext ctx{t, &mu, features, zeros};
  std::vector<double> out(dim * dim);
  diffusion(ctx, x, out);
  return out;
}

}  // namespace mvk
