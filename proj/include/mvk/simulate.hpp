#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvk/core.hpp"
#include "mvk/rng.hpp"

namespace mvk {

/// Called with (steps done, total steps) once per 10% of progress.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Progress reporter writing "label: NN% (k/K steps)" lines to stderr.
ProgressFn stderr_progress(std::string label);

/// One Euler-Maruyama step against an already-summarized measure:
///   out = post_step(x + b*dt + sigma*dW).
/// `scratch` must hold at least dim + dim*dim doubles.
/// Throws NumericalError when the coefficients or the result are not finite.
void euler_advance(const ModelSpec& model, const StepContext& ctx, std::span<const double> x, double dt,
                   std::span<const double> dw, std::span<double> out, std::span<double> scratch);

/// Single step evaluated directly against mu (summarizes mu first).
std::vector<double> euler_step(const ModelSpec& model, std::span<const double> x, double t, const EmpiricalMeasure& mu,
                               double dt, std::span<const double> dw, std::span<const double> random = {});

/// Draws `count` initial states from the model's sampler, particle m from
/// plan.initial_stream(m).
ParticleEnsemble sample_initial(const ModelSpec& model, std::size_t count, const RngPlan& plan);

/// Interacting particle system with a synchronous (two-buffer) update:
/// every particle's step k uses the empirical measure of all particles at t_k.
/// Particle m draws its increments from plan.stream(m, k) only.
MeasurePath simulate_ips(const ModelSpec& model, ParticleEnsemble initial, const TimeGrid& grid, const RngPlan& plan,
                         const ProgressFn& progress = {});
/// Same, sampling the initial ensemble from the model.
MeasurePath simulate_ips(const ModelSpec& model, std::size_t particles, const TimeGrid& grid, const RngPlan& plan,
                         const ProgressFn& progress = {});

/// Decoupled scheme: each trajectory starts at xi[m] and sees the frozen law
/// measure_lookup(path, t_k) at every step. Trajectory m uses stream
/// stream_ids[m] (defaults to m), so outputs are a pure function of
/// (xi[m], stream id).
PairDataSet simulate_decoupled(const ModelSpec& model, const MeasurePath& path, const ParticleEnsemble& xi,
                               const TimeGrid& grid, const RngPlan& plan, std::span<const std::uint64_t> stream_ids = {},
                               const ProgressFn& progress = {});

/// Experimental: pairs (X_0^m, X_lag^m) taken straight from IPS snapshots.
/// No convergence guarantee holds for such data.
PairDataSet ips_pairs(const MeasurePath& path, double lag);

}  // namespace mvk
