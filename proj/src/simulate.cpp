#include "mvk/simulate.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include "mvk/error.hpp"
#include "mvk/parallel.hpp"

namespace mvk {

namespace {

std::string describe_state(double t, std::span<const double> x) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "model produced non-finite value at t=" << t << " x=(";
  for (std::size_t j = 0; j < x.size(); ++j) msg << (j ? ", " : "") << x[j];
  msg << ")";
  return msg.str();
}

bool finite(std::span<const double> v) {
  for (double e : v) {
    if (!std::isfinite(e)) return false;
  }
  return true;
}

void check_model(const ModelSpec& model) {
  if (model.dim == 0) throw ConfigError("model '" + model.name + "' has zero dimension");
  if (!model.drift || !model.diffusion) throw ConfigError("model '" + model.name + "' lacks drift or diffusion");
  if (model.step_params > 0 && !model.sample_step_params)
    throw ConfigError("model '" + model.name + "' declares random step coefficients without a sampler");
}

/// Fires the callback when the completed fraction crosses each tenth.
class ProgressTicker {
 public:
  ProgressTicker(const ProgressFn& fn, std::size_t total) : fn_(fn), total_(total) {}
  void step_done(std::size_t done) {
    if (!fn_ || total_ == 0) return;
    const std::size_t tenth = 10 * done / total_;
    if (tenth > last_tenth_) {
      last_tenth_ = tenth;
      fn_(done, total_);
    }
  }

 private:
  const ProgressFn& fn_;
  std::size_t total_;
  std::size_t last_tenth_ = 0;
};

/// Draws dW ~ N(0, dt I) and the per-step random coefficients, in that order.
void draw_increment(const ModelSpec& model, RngStream& stream, double sqrt_dt, std::span<double> dw,
                    std::span<double> random) {
  for (auto& w : dw) w = sqrt_dt * stream.normal();
  if (!random.empty()) model.sample_step_params(stream, random);
}

}  // namespace

ProgressFn stderr_progress(std::string label) {
  return [label = std::move(label)](std::size_t done, std::size_t total) {
    std::cerr << label << ": " << (100 * done / total) << "% (" << done << "/" << total << " steps)\n";
  };
}

void euler_advance(const ModelSpec& model, const StepContext& ctx, std::span<const double> x, double dt,
                   std::span<const double> dw, std::span<double> out, std::span<double> scratch) {
  const std::size_t d = model.dim;
  auto drift = scratch.first(d);
  auto sigma = scratch.subspan(d, d * d);
  model.drift(ctx, x, drift);
  model.diffusion(ctx, x, sigma);
  if (!finite(drift) || !finite(sigma)) throw NumericalError(describe_state(ctx.t, x));
  for (std::size_t i = 0; i < d; ++i) {
    double v = x[i] + drift[i] * dt;
    for (std::size_t j = 0; j < d; ++j) v += sigma[i * d + j] * dw[j];
    out[i] = v;
  }
  if (model.post_step) model.post_step(out);
  if (!finite(out)) throw NumericalError(describe_state(ctx.t, x));
}

std::vector<double> euler_step(const ModelSpec& model, std::span<const double> x, double t, const EmpiricalMeasure& mu,
                               double dt, std::span<const double> dw, std::span<const double> random) {
  check_model(model);
  if (!(dt > 0.0)) throw ConfigError("euler_step: dt must be positive");
  if (x.size() != model.dim || dw.size() != model.dim) throw ConfigError("euler_step: state/increment dimension mismatch");
  const auto features = model.summary(t, mu);
  std::vector<double> zeros;
  if (random.empty() && model.step_params > 0) {
    zeros.assign(model.step_params, 0.0);
    random = zeros;
  }
  StepContext ctx{t, &mu, features, random};
  std::vector<double> out(model.dim);
  std::vector<double> scratch(model.dim + model.dim * model.dim);
  euler_advance(model, ctx, x, dt, dw, out, scratch);
  return out;
}

ParticleEnsemble sample_initial(const ModelSpec& model, std::size_t count, const RngPlan& plan) {
  if (!model.initial_sampler) throw ConfigError("model '" + model.name + "' has no initial sampler");
  ParticleEnsemble out(count, model.dim);
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      auto stream = plan.initial_stream(m);
      model.initial_sampler(stream, out.row(m));
    }
  });
  if (!out.all_finite()) throw NumericalError("initial sampler produced non-finite states");
  return out;
}

MeasurePath simulate_ips(const ModelSpec& model, ParticleEnsemble initial, const TimeGrid& grid, const RngPlan& plan,
                         const ProgressFn& progress) {
  check_model(model);
  if (initial.count() < 2) throw ConfigError("interacting particle system needs at least 2 particles");
  if (initial.dim() != model.dim) throw ConfigError("initial ensemble dimension does not match the model");
  const std::size_t n = initial.count();
  const std::size_t d = model.dim;
  const double h = grid.step();
  const double sqrt_h = std::sqrt(h);

  MeasurePath path{grid, {}, plan.master_seed(), model.name};
  path.snapshots.reserve(grid.points());
  path.snapshots.emplace_back(std::move(initial));
  ProgressTicker ticker(progress, grid.steps());

  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const EmpiricalMeasure& current = path.snapshots.back();
    const double t = grid.time(k);
    const auto features = model.summary(t, current);
    ParticleEnsemble next(n, d);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> dw(d), random(model.step_params), scratch(d + d * d);
      for (std::size_t m = begin; m < end; ++m) {
        auto stream = plan.stream(m, static_cast<std::uint32_t>(k));
        draw_increment(model, stream, sqrt_h, dw, random);
        StepContext ctx{t, &current, features, random};
        try {
          euler_advance(model, ctx, current.particles().row(m), h, dw, next.row(m), scratch);
        } catch (const NumericalError& e) {
          throw NumericalError("particle " + std::to_string(m) + ": " + e.what());
        }
      }
    });
    path.snapshots.emplace_back(std::move(next));
    ticker.step_done(k + 1);
  }
  return path;
}

MeasurePath simulate_ips(const ModelSpec& model, std::size_t particles, const TimeGrid& grid, const RngPlan& plan,
                         const ProgressFn& progress) {
  if (particles < 2) throw ConfigError("interacting particle system needs at least 2 particles");
  return simulate_ips(model, sample_initial(model, particles, plan), grid, plan, progress);
}

PairDataSet simulate_decoupled(const ModelSpec& model, const MeasurePath& path, const ParticleEnsemble& xi,
                               const TimeGrid& grid, const RngPlan& plan, std::span<const std::uint64_t> stream_ids,
                               const ProgressFn& progress) {
  check_model(model);
  path.validate();
  if (xi.count() == 0) throw ConfigError("decoupled simulation needs at least one initial point");
  if (xi.dim() != model.dim || path.dim() != model.dim)
    throw ConfigError("decoupled simulation: dimension mismatch between model, path and initial points");
  if (!stream_ids.empty() && stream_ids.size() != xi.count())
    throw ConfigError("decoupled simulation: stream id count must match the number of initial points");
  if (grid.t_end() > path.grid.t_end() + 1e-9 * path.grid.step()) {
    std::ostringstream msg;
    msg << "measure path too short: lag " << grid.t_end() << " exceeds horizon " << path.grid.t_end();
    throw ConfigError(msg.str());
  }

  const std::size_t n = xi.count();
  const std::size_t d = model.dim;
  const double h = grid.step();
  const double sqrt_h = std::sqrt(h);

  // The law is frozen, so each snapshot's summary is computed once up front.
  std::vector<std::size_t> snapshot_of_step(grid.steps());
  std::vector<std::optional<std::vector<double>>> summaries(path.snapshots.size());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const std::size_t idx = measure_index(path, t);
    snapshot_of_step[k] = idx;
    if (!summaries[idx]) summaries[idx] = model.summary(path.grid.time(idx), path.snapshots[idx]);
  }

  ParticleEnsemble state = xi;
  ParticleEnsemble next(n, d);
  ProgressTicker ticker(progress, grid.steps());
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const std::size_t idx = snapshot_of_step[k];
    const EmpiricalMeasure& mu = path.snapshots[idx];
    const std::vector<double>& features = *summaries[idx];
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      std::vector<double> dw(d), random(model.step_params), scratch(d + d * d);
      for (std::size_t m = begin; m < end; ++m) {
        const std::uint64_t id = stream_ids.empty() ? m : stream_ids[m];
        auto stream = plan.stream(id, static_cast<std::uint32_t>(k));
        draw_increment(model, stream, sqrt_h, dw, random);
        StepContext ctx{t, &mu, features, random};
        try {
          euler_advance(model, ctx, state.row(m), h, dw, next.row(m), scratch);
        } catch (const NumericalError& e) {
          throw NumericalError("trajectory " + std::to_string(m) + ": " + e.what());
        }
      }
    });
    std::swap(state, next);
    ticker.step_done(k + 1);
  }
  return PairDataSet(xi, std::move(state), grid.t_end());
}

PairDataSet ips_pairs(const MeasurePath& path, double lag) {
  path.validate();
  const auto& terminal = measure_lookup(path, lag);
  return PairDataSet(path.snapshots.front().to_ensemble(), terminal.to_ensemble(), lag);
}

}  // namespace mvk
