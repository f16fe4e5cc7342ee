#include "mvk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "mvk/edmd.hpp"
#include "mvk/error.hpp"
#include "mvk/io.hpp"
#include "mvk/parallel.hpp"
#include "mvk/simulate.hpp"

namespace mvk {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, std::size_t intervals) {
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return sum * h / 3.0;
}

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mu) * (v[i] - mu);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
}

/// Multiplier r with h = r * h_ref, or 0 when h is not an integer multiple.
std::size_t step_ratio(double h, double h_ref) {
  const double r = h / h_ref;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) return 0;
  return static_cast<std::size_t>(rounded);
}

}  // namespace

double w2_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("W2 needs nonempty sample sets");
  if (a.size() != b.size()) throw ConfigError("W2 needs equal-size sample sets");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> sq(sa.size());
  for (std::size_t k = 0; k < sa.size(); ++k) sq[k] = (sa[k] - sb[k]) * (sa[k] - sb[k]);
  return std::sqrt(pairwise_sum(sq) / static_cast<double>(sq.size()));
}

double w2_1d(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.dim() != 1 || b.dim() != 1) throw ConfigError("W2 implemented for d = 1 only");
  return w2_1d(a.data(), b.data());
}

HistogramDistance histogram_l1(std::span<const double> samples, const std::function<double(double)>& density,
                               std::size_t bins, double lo, double hi) {
  if (samples.empty()) throw ConfigError("histogram distance needs samples");
  if (bins == 0 || !(lo < hi)) throw ConfigError("histogram distance needs bins > 0 and lo < hi");
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> expected(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = lo + width * static_cast<double>(i);
    expected[i] = simpson(density, a, i + 1 == bins ? hi : a + width, 16);
  }
  const double total = pairwise_sum(expected);
  if (std::abs(total - 1.0) > 0.01) {
    throw ConfigError("density integrates to " + io::format_double(total) + " on the histogram range, not 1");
  }
  std::vector<std::size_t> counts(bins, 0);
  std::size_t outside = 0;
  for (double x : samples) {
    if (!(x >= lo && x <= hi)) {
      ++outside;
      continue;
    }
    const auto bin = static_cast<std::size_t>(std::floor((x - lo) / width));
    ++counts[std::min(bin, bins - 1)];
  }
  const auto n = static_cast<double>(samples.size());
  std::vector<double> diffs(bins);
  for (std::size_t i = 0; i < bins; ++i) diffs[i] = std::abs(static_cast<double>(counts[i]) / n - expected[i]);
  return {pairwise_sum(diffs), static_cast<double>(outside) / n};
}

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs at least two (x, y) points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("log-log slope fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("slope fit needs distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - fit.intercept - fit.slope * lx[i];
      ssr += r * r;
    }
    const double se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    fit.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  } else {
    fit.half_width = std::numeric_limits<double>::infinity();
  }
  return fit;
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "parameter,mean_error,std_error\n";
  for (std::size_t i = 0; i < values.size(); ++i)
    out << io::format_double(values[i]) << ',' << io::format_double(mean_error[i]) << ','
        << io::format_double(std_error[i]) << '\n';
  return out.str();
}

nlohmann::json SweepReport::to_json() const {
  return {{"kind", kind},
          {"parameter", parameter},
          {"values", values},
          {"mean_error", mean_error},
          {"std_error", std_error},
          {"seeds", seeds},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"half_width", fit.half_width},
          {"interval", {fit.slope - fit.half_width, fit.slope + fit.half_width}}};
}

SweepReport make_sweep_report(std::string kind, std::string parameter, std::vector<double> values,
                              const std::vector<std::vector<double>>& errors) {
  if (values.size() < 3) throw ConfigError("a sweep needs at least 3 parameter values");
  if (errors.size() != values.size()) throw ConfigError("sweep error table does not match the parameter list");
  SweepReport r;
  r.kind = std::move(kind);
  r.parameter = std::move(parameter);
  r.values = std::move(values);
  r.seeds = errors.front().size();
  for (const auto& e : errors) {
    r.mean_error.push_back(mean_of(e));
    r.std_error.push_back(sample_std(e));
  }
  const bool positive = std::all_of(r.mean_error.begin(), r.mean_error.end(), [](double e) { return e > 0.0; });
  if (positive) {
    r.fit = fit_loglog_slope(r.values, r.mean_error);
  } else {
    log_warning(r.kind + " sweep: some mean errors are zero; no slope fitted");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.fit = {nan, nan, nan};
  }
  return r;
}

SweepReport strong_error_sweep(const ModelSpec& model, const StrongSweepOptions& options) {
  if (model.step_params > 0) throw ConfigError("strong sweep does not support models with random step coefficients");
  if (options.steps.size() < 3) throw ConfigError("strong sweep needs at least 3 step sizes");
  for (std::size_t i = 1; i < options.steps.size(); ++i) {
    if (!(options.steps[i] < options.steps[i - 1])) throw ConfigError("strong sweep steps must be strictly descending");
  }
  if (options.paths == 0 || options.seeds == 0 || options.frozen_particles == 0)
    throw ConfigError("strong sweep needs positive paths, seeds and frozen particles");
  const double h_ref = options.reference_step > 0.0 ? options.reference_step : options.steps.back() / 8.0;
  std::vector<std::size_t> ratio;
  for (double h : options.steps) {
    const std::size_t r = step_ratio(h, h_ref);
    if (r == 0) throw ConfigError("reference step " + io::format_double(h_ref) + " does not divide h = " + io::format_double(h));
    ratio.push_back(r);
  }
  const TimeGrid fine = TimeGrid::covering(options.horizon, h_ref);
  for (std::size_t r : ratio) {
    if (fine.steps() % r != 0) throw ConfigError("horizon is not a multiple of every step in the sweep");
  }

  const std::size_t d = model.dim;
  const std::size_t n_fine = fine.steps();
  const double sqrt_ref = std::sqrt(fine.step());
  const RngPlan base = RngPlan(options.seed).derive(rng_purpose::sweep);
  std::vector<std::vector<double>> errors(options.steps.size(), std::vector<double>(options.seeds));

  for (std::size_t s = 0; s < options.seeds; ++s) {
    const RngPlan plan = base.derive(s);
    const EmpiricalMeasure mu(sample_initial(model, options.frozen_particles, plan.derive(1)));
    std::vector<std::vector<double>> summaries(n_fine);
    for (std::size_t k = 0; k < n_fine; ++k) summaries[k] = model.summary(fine.time(k), mu);
    const ParticleEnsemble x0 = sample_initial(model, options.paths, plan.derive(2));
    const RngPlan noise = plan.derive(3);

    std::vector<std::vector<double>> sq(options.steps.size(), std::vector<double>(options.paths));
    parallel_for(options.paths, [&](std::size_t begin, std::size_t end) {
      std::vector<double> dw_fine(n_fine * d), dw(d), x(d), next(d), reference(d), scratch(d + d * d);
      std::vector<double> coarse(d);
      // Euler from x0[m] with step r * h_ref, using sums of r fine increments.
      auto run = [&](std::size_t m, std::size_t r, std::span<double> result) {
        std::copy(x0.row(m).begin(), x0.row(m).end(), x.begin());
        for (std::size_t k = 0; k < n_fine; k += r) {
          std::fill(dw.begin(), dw.end(), 0.0);
          for (std::size_t q = k; q < k + r; ++q) {
            for (std::size_t j = 0; j < d; ++j) dw[j] += dw_fine[q * d + j];
          }
          StepContext ctx{fine.time(k), &mu, summaries[k], {}};
          euler_advance(model, ctx, x, fine.step() * static_cast<double>(r), dw, next, scratch);
          std::swap(x, next);
        }
        std::copy(x.begin(), x.end(), result.begin());
      };
      for (std::size_t m = begin; m < end; ++m) {
        for (std::size_t k = 0; k < n_fine; ++k) {
          auto stream = noise.stream(m, static_cast<std::uint32_t>(k));
          for (std::size_t j = 0; j < d; ++j) dw_fine[k * d + j] = sqrt_ref * stream.normal();
        }
        try {
          run(m, 1, reference);
          for (std::size_t i = 0; i < ratio.size(); ++i) {
            run(m, ratio[i], coarse);
            double e = 0.0;
            for (std::size_t j = 0; j < d; ++j) e += (coarse[j] - reference[j]) * (coarse[j] - reference[j]);
            sq[i][m] = e;
          }
        } catch (const NumericalError& e) {
          throw NumericalError("path " + std::to_string(m) + ": " + e.what());
        }
      }
    });
    for (std::size_t i = 0; i < ratio.size(); ++i) errors[i][s] = pairwise_sum(sq[i]) / static_cast<double>(options.paths);
  }
  return make_sweep_report("strong", "h", options.steps, errors);
}

ParticleEnsemble subsample(const ParticleEnsemble& source, std::size_t count, RngStream& stream) {
  const std::size_t n = source.count();
  if (count > n) throw ConfigError("cannot subsample more rows than the source has");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  ParticleEnsemble out(count, source.dim());
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + std::min(n - i - 1, static_cast<std::size_t>(stream.uniform() * static_cast<double>(n - i)));
    std::swap(idx[i], idx[j]);
    std::copy(source.row(idx[i]).begin(), source.row(idx[i]).end(), out.row(i).begin());
  }
  return out;
}

SweepReport measure_error_sweep(const ModelSpec& model, const MeasureSweepOptions& options) {
  if (model.dim != 1) throw ConfigError("W2 implemented for d = 1 only");
  if (options.particles.size() < 3) throw ConfigError("particle sweep needs at least 3 particle counts");
  for (std::size_t i = 1; i < options.particles.size(); ++i) {
    if (!(options.particles[i] > options.particles[i - 1])) throw ConfigError("particle counts must be strictly ascending");
  }
  if (options.particles.front() < 2) throw ConfigError("particle sweep needs at least 2 particles per cloud");
  if (options.reference_multiplier < 16) throw ConfigError("reference multiplier must be at least 16");
  if (options.seeds == 0) throw ConfigError("particle sweep needs at least one seed");
  const TimeGrid grid = TimeGrid::covering(options.horizon, options.step);
  const RngPlan base = RngPlan(options.seed).derive(rng_purpose::sweep);
  const RngPlan picks = RngPlan(options.seed).derive(rng_purpose::subsample);

  const std::size_t m_ref = options.reference_multiplier * options.particles.back();
  const MeasurePath ref_path = simulate_ips(model, m_ref, grid, base.derive(0));
  const ParticleEnsemble& reference = ref_path.snapshots.back().particles();

  std::vector<std::vector<double>> errors(options.particles.size(), std::vector<double>(options.seeds));
  for (std::size_t s = 0; s < options.seeds; ++s) {
    for (std::size_t i = 0; i < options.particles.size(); ++i) {
      const std::size_t m = options.particles[i];
      const MeasurePath path = simulate_ips(model, m, grid, base.derive(1).derive(s).derive(m));
      auto stream = picks.stream(s, static_cast<std::uint32_t>(i));
      const ParticleEnsemble ref_sub = subsample(reference, m, stream);
      const double w = w2_1d(path.snapshots.back().particles(), ref_sub);
      errors[i][s] = w * w;
    }
  }
  std::vector<double> values(options.particles.begin(), options.particles.end());
  return make_sweep_report("particles", "M", std::move(values), errors);
}

SweepReport gram_error_sweep(const GramSweepOptions& options) {
  if (options.samples.size() < 3) throw ConfigError("gram sweep needs at least 3 sample sizes");
  if (options.seeds == 0) throw ConfigError("gram sweep needs at least one seed");
  const Dictionary dict = Dictionary::monomial(1, 1);
  Eigen::Matrix2d exact;
  exact << 1.0, 0.0, 0.0, 1.0 / 3.0;
  const RngPlan base = RngPlan(options.seed).derive(rng_purpose::sweep);
  std::vector<std::vector<double>> errors(options.samples.size(), std::vector<double>(options.seeds));
  for (std::size_t s = 0; s < options.seeds; ++s) {
    for (std::size_t i = 0; i < options.samples.size(); ++i) {
      const std::size_t m = options.samples[i];
      if (m == 0) throw ConfigError("gram sweep sample sizes must be positive");
      const RngPlan plan = base.derive(s).derive(m);
      ParticleEnsemble xs(m, 1);
      parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
          auto stream = plan.initial_stream(k);
          xs(k, 0) = 2.0 * stream.uniform() - 1.0;
        }
      });
      errors[i][s] = (gram_matrix(dict, xs) - exact).norm();
    }
  }
  std::vector<double> values(options.samples.begin(), options.samples.end());
  return make_sweep_report("gram", "M", std::move(values), errors);
}

}  // namespace mvk
