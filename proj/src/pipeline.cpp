#include "mvk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "mvk/error.hpp"
#include "mvk/io.hpp"
#include "mvk/parallel.hpp"
#include "mvk/simulate.hpp"

namespace mvk {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& file, const json& j) { io::write_text(file, j.dump(2) + "\n"); }

json complex_list(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({{"re", z.real()}, {"im", z.imag()}});
  return out;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report_time(const char* what, const Stopwatch& w) {
  std::cerr << what << ": " << std::fixed << w.seconds() << " s\n" << std::defaultfloat;
}

ParticleEnsemble eigenfunction_grid(const RunConfig& cfg, const PairDataSet& data) {
  const std::size_t n = cfg.edmd.grid_points;
  if (data.dim() == 1) {
    double lo, hi;
    if (cfg.edmd.grid_lo && cfg.edmd.grid_hi) {
      lo = *cfg.edmd.grid_lo;
      hi = *cfg.edmd.grid_hi;
    } else {
      const auto range = data_range(data);
      lo = cfg.edmd.grid_lo.value_or(range.first);
      hi = cfg.edmd.grid_hi.value_or(range.second);
    }
    if (!(lo < hi)) throw ConfigError("eigenfunction grid needs grid_lo < grid_hi");
    ParticleEnsemble g(n, 1);
    const double denom = cfg.edmd.grid_periodic ? static_cast<double>(n) : static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g(i, 0) = lo + (hi - lo) * static_cast<double>(i) / denom;
    if (!cfg.edmd.grid_periodic) g(n - 1, 0) = hi;
    return g;
  }
  if (data.dim() == 3) {
    const auto pts = fibonacci_sphere(n);
    ParticleEnsemble g(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < 3; ++j) g(i, j) = pts[i][j];
    }
    return g;
  }
  // Other dimensions: tabulate at the initial points themselves.
  const std::size_t m = std::min(n, data.count());
  ParticleEnsemble g(m, data.dim());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) g(i, j) = data.xi(i, j);
  }
  return g;
}

std::vector<std::complex<double>> tabulate(const RunConfig& cfg, const EdmdStage& stage, const SpectralResult& s,
                                           std::size_t l) {
  const auto& r = stage.result;
  const Eigen::VectorXcd v = r.full_eigenvector(s, l);
  if (cfg.edmd.interpolate && r.dictionary.kind() == DictionaryKind::indicator1d)
    return eval_eigenfunction_interpolated(r.dictionary, v, stage.grid.data());
  return eval_eigenfunction(r.dictionary, v, stage.grid);
}

}  // namespace

RegisteredModel resolve_model(RunConfig& cfg) {
  RegisteredModel m = make_model(cfg.model, cfg.model_params, RngPlan(cfg.seed).derive(rng_purpose::model));
  cfg.model_params = m.params;
  return m;
}

MeasurePath run_ips_stage(const RunConfig& cfg, const ModelSpec& model, bool progress) {
  const TimeGrid grid = TimeGrid::covering(cfg.ips.horizon, cfg.ips.step);
  const RngPlan plan = RngPlan(cfg.seed).derive(rng_purpose::ips);
  MeasurePath path = simulate_ips(model, cfg.ips.particles, grid, plan, progress ? stderr_progress("ips") : ProgressFn{});
  path.seed = cfg.seed;
  return path;
}

ParticleEnsemble decoupled_initial_points(const RunConfig& cfg, const ModelSpec& model) {
  const RngPlan plan = RngPlan(cfg.seed).derive(rng_purpose::decoupled);
  const auto& init = cfg.decoupled.initial;
  if (init.kind == "model") return sample_initial(model, cfg.decoupled.trajectories, plan);
  if (init.kind == "uniform") {
    ParticleEnsemble out(cfg.decoupled.trajectories, model.dim);
    parallel_for(out.count(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t m = begin; m < end; ++m) {
        auto s = plan.initial_stream(m);
        for (auto& v : out.row(m)) v = init.lo + (init.hi - init.lo) * s.uniform();
      }
    });
    if (model.post_step) {
      for (std::size_t m = 0; m < out.count(); ++m) model.post_step(out.row(m));
    }
    return out;
  }
  throw ConfigError("unknown decoupled initial distribution '" + init.kind + "'");
}

PairDataSet run_decoupled_stage(const RunConfig& cfg, const ModelSpec& model, const MeasurePath& path, bool progress) {
  const TimeGrid grid = TimeGrid::covering(cfg.decoupled.lag, cfg.decoupled.step);
  const RngPlan plan = RngPlan(cfg.seed).derive(rng_purpose::decoupled);
  const ParticleEnsemble xi = decoupled_initial_points(cfg, model);
  return simulate_decoupled(model, path, xi, grid, plan, {}, progress ? stderr_progress("decoupled") : ProgressFn{});
}

EdmdStage run_edmd_stage(const RunConfig& cfg, PairDataSet pairs) {
  if (cfg.edmd.symmetry_augment) pairs = symmetry_augment(pairs, cfg.edmd.symmetry_shift, cfg.edmd.symmetry_period);
  std::optional<std::pair<double, double>> range;
  if (pairs.dim() == 1) range = data_range(pairs);
  const Dictionary dict = dictionary_from_json(cfg.dictionary, pairs.dim(), range);
  EdmdResult result = run_edmd(dict, pairs, {cfg.edmd.n_eig, cfg.edmd.reg});
  ParticleEnsemble grid = eigenfunction_grid(cfg, pairs);
  return {std::move(pairs), std::move(result), std::move(grid)};
}

PipelineResult run_pipeline(RunConfig& cfg, bool progress) {
  cfg.validate();
  RegisteredModel model = resolve_model(cfg);
  MeasurePath path = run_ips_stage(cfg, model.spec, progress);
  PairDataSet pairs = cfg.edmd.ips_data ? ips_pairs(path, cfg.decoupled.lag)
                                        : run_decoupled_stage(cfg, model.spec, path, progress);
  EdmdStage edmd = run_edmd_stage(cfg, pairs);
  return {std::move(model), std::move(path), std::move(pairs), std::move(edmd)};
}

json ensemble_summary(const ParticleEnsemble& e) {
  const std::size_t n = e.count();
  const std::size_t d = e.dim();
  json mean = json::array(), var = json::array(), lo = json::array(), hi = json::array();
  std::vector<double> col(n), sq(n);
  for (std::size_t j = 0; j < d; ++j) {
    double mn = e(0, j), mx = e(0, j);
    for (std::size_t m = 0; m < n; ++m) {
      col[m] = e(m, j);
      mn = std::min(mn, col[m]);
      mx = std::max(mx, col[m]);
    }
    const double mu = pairwise_sum(col) / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) sq[m] = (col[m] - mu) * (col[m] - mu);
    mean.push_back(mu);
    var.push_back(n > 1 ? pairwise_sum(sq) / static_cast<double>(n - 1) : 0.0);
    lo.push_back(mn);
    hi.push_back(mx);
  }
  return {{"particles", n}, {"mean", mean}, {"variance", var}, {"min", lo}, {"max", hi}};
}

std::vector<double> koopman_eigenfunction_on_grid(const RunConfig& cfg, const EdmdStage& stage, std::size_t l) {
  const auto values = tabulate(cfg, stage, stage.result.koopman, l);
  std::vector<double> re(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) re[i] = values[i].real();
  return re;
}

json bench_summary(const RunConfig& cfg, const PipelineResult& r) {
  const auto& edmd = r.edmd.result;
  json out = {{"model", cfg.model},
              {"koopman_eigenvalues", complex_list(edmd.koopman.eigenvalues)},
              {"perron_eigenvalues", complex_list(edmd.perron.eigenvalues)},
              {"cond_G", edmd.matrices.cond_G},
              {"final_ensemble", ensemble_summary(r.path.snapshots.back().particles())}};
  const std::size_t n = edmd.koopman.count();
  if (cfg.model == "cormier") {
    const double J = cfg.model_params.at("J").get<double>();
    out["reference_eigenvalues"] = ou_koopman_eigenvalues(1.0, cfg.decoupled.lag, n);
    json fps = json::array();
    for (const auto& fp : cormier_fixed_points(J)) fps.push_back({{"alpha", fp.alpha}, {"stable", fp.stable}});
    out["fixed_points"] = fps;
  } else if (cfg.model == "ou") {
    out["reference_eigenvalues"] = ou_koopman_eigenvalues(cfg.model_params.at("rate").get<double>(), cfg.decoupled.lag, n);
  } else if (cfg.model == "kuramoto-circle") {
    const double sigma = cfg.model_params.at("sigma").get<double>();
    const auto rho = kuramoto_invariant_density(sigma);
    const auto h = histogram_l1(r.path.snapshots.back().particles().data(), rho, 50, 0.0, kTwoPi);
    out["histogram_l1"] = h.l1;
    out["histogram_outside_mass"] = h.outside_mass;
    if (n >= 2 && r.edmd.grid.dim() == 1) {
      const auto f = koopman_eigenfunction_on_grid(cfg, r.edmd, 1);
      double fmax = 0.0;
      for (double v : f) fmax = std::max(fmax, std::abs(v));
      json where = json::array();
      for (std::size_t i : circular_sign_changes(f, 0.2 * fmax)) where.push_back(r.edmd.grid(i, 0));
      out["eigenfunction_2_sign_changes"] = where;
    }
  } else if (cfg.model == "kuramoto-sphere") {
    if (n >= 2) {
      const Eigen::VectorXcd v = edmd.full_eigenvector(edmd.koopman, 1);
      std::vector<double> re(static_cast<std::size_t>(v.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) re[static_cast<std::size_t>(i)] = v(i).real();
      const auto split = sphere_split(edmd.dictionary, re, r.path.snapshots.back().particles());
      out["eigenfunction_2_antipodal_angle_deg"] = split.antipodal_angle_deg;
      out["eigenfunction_2_pole_angle_deg"] = split.pole_angle_deg;
      out["ensemble_pole_axis"] = split.pole;
    }
  }
  return out;
}

void write_config_echo(const fs::path& dir, const RunConfig& cfg) {
  ensure_dir(dir);
  write_json(dir / "config.json", to_json(cfg));
}

void write_ips_outputs(const fs::path& dir, const RunConfig& cfg, const MeasurePath& path) {
  ensure_dir(dir);
  io::write_measure_path(dir / "measure_path.mvmp", path);
  json meta = {{"model", cfg.model},
               {"params", cfg.model_params},
               {"seed", cfg.seed},
               {"particles", path.particles()},
               {"step", path.grid.step()},
               {"steps", path.grid.steps()},
               {"horizon", path.grid.t_end()},
               {"final", ensemble_summary(path.snapshots.back().particles())}};
  write_json(dir / "ips_meta.json", meta);
}

json matrices_to_json(const EdmdResult& r) {
  const auto& m = r.matrices;
  return {{"dictionary", m.dictionary}, {"active", r.active}, {"M", m.M},          {"reg", m.reg},
          {"cond_G", m.cond_G},         {"G", matrix_rows(m.G)}, {"C", matrix_rows(m.C)}, {"K", matrix_rows(m.K)},
          {"P", matrix_rows(m.P)}};
}

std::string eigenfunctions_csv(const RunConfig& cfg, const EdmdStage& stage) {
  const auto& r = stage.result;
  const std::size_t d = stage.grid.dim();
  const std::size_t n = r.koopman.count();
  std::vector<std::vector<std::complex<double>>> cols;
  std::ostringstream out;
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << "x_" << (j + 1);
  for (const auto* s : {&r.koopman, &r.perron}) {
    const char* tag = s->op == OperatorKind::koopman ? "koopman" : "perron";
    for (std::size_t l = 0; l < n; ++l) {
      out << ',' << tag << '_' << (l + 1) << "_re," << tag << '_' << (l + 1) << "_im";
      cols.push_back(tabulate(cfg, stage, *s, l));
    }
  }
  out << '\n';
  for (std::size_t i = 0; i < stage.grid.count(); ++i) {
    for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << io::format_double(stage.grid(i, j));
    for (const auto& c : cols) out << ',' << io::format_double(c[i].real()) << ',' << io::format_double(c[i].imag());
    out << '\n';
  }
  return out.str();
}

void write_edmd_outputs(const fs::path& dir, const RunConfig& cfg, const EdmdStage& stage) {
  ensure_dir(dir);
  const auto& r = stage.result;
  json koop = spectrum_to_json(r.koopman, r.matrices);
  koop["lag"] = stage.data.lag;
  json perron = spectrum_to_json(r.perron, r.matrices);
  perron["lag"] = stage.data.lag;
  write_json(dir / "spectrum.json", koop);
  write_json(dir / "spectrum_perron.json", perron);
  io::write_text(dir / "eigenfunctions.csv", eigenfunctions_csv(cfg, stage));
  if (cfg.edmd.write_matrices) write_json(dir / "matrices.json", matrices_to_json(r));
}

int cmd_ips(RunConfig cfg, bool progress) {
  cfg.validate();
  Stopwatch w;
  const RegisteredModel model = resolve_model(cfg);
  const MeasurePath path = run_ips_stage(cfg, model.spec, progress);
  write_ips_outputs(cfg.output, cfg, path);
  write_config_echo(cfg.output, cfg);
  report_time("ips runtime", w);
  return 0;
}

int cmd_decoupled(RunConfig cfg, const std::string& path_file, bool progress) {
  cfg.validate();
  Stopwatch w;
  const RegisteredModel model = resolve_model(cfg);
  MeasurePath path = io::read_measure_path(path_file);
  path.model = cfg.model;
  if (path.dim() != model.spec.dim)
    throw ConfigError("measure path dimension " + std::to_string(path.dim()) + " does not match model '" + cfg.model + "'");
  const PairDataSet pairs = run_decoupled_stage(cfg, model.spec, path, progress);
  ensure_dir(cfg.output);
  io::write_pairs_csv(fs::path(cfg.output) / "pairs.csv", pairs);
  write_config_echo(cfg.output, cfg);
  report_time("decoupled runtime", w);
  return 0;
}

int cmd_edmd(RunConfig cfg, const std::string& pairs_file, const std::string& path_file) {
  cfg.validate();
  Stopwatch w;
  PairDataSet pairs = cfg.edmd.ips_data ? ips_pairs(io::read_measure_path(path_file), cfg.decoupled.lag)
                                        : io::read_pairs_csv(pairs_file, cfg.decoupled.lag);
  if (cfg.edmd.ips_data) log_warning("EDMD on IPS pairs is experimental; no convergence guarantee applies");
  const EdmdStage stage = run_edmd_stage(cfg, std::move(pairs));
  write_edmd_outputs(cfg.output, cfg, stage);
  write_config_echo(cfg.output, cfg);
  report_time("edmd runtime", w);
  return 0;
}

int cmd_sweep(RunConfig cfg, const std::string& kind) {
  cfg.validate();
  Stopwatch w;
  const std::size_t seeds = cfg.sweep.seeds ? cfg.sweep.seeds : default_seeds(kind);
  const SlopeWindow window = cfg.sweep.window.value_or(default_window(kind));
  SweepReport report;
  if (kind == "gram") {
    report = gram_error_sweep({cfg.sweep.samples, seeds, cfg.seed});
  } else if (kind == "strong") {
    const RegisteredModel model = resolve_model(cfg);
    StrongSweepOptions o;
    o.steps = cfg.sweep.steps;
    o.reference_step = cfg.sweep.reference_step;
    o.horizon = cfg.sweep.horizon;
    o.paths = cfg.sweep.paths;
    o.frozen_particles = cfg.sweep.frozen_particles;
    o.seeds = seeds;
    o.seed = cfg.seed;
    report = strong_error_sweep(model.spec, o);
  } else if (kind == "particles") {
    const RegisteredModel model = resolve_model(cfg);
    MeasureSweepOptions o;
    o.particles = cfg.sweep.particles;
    o.step = cfg.sweep.step;
    o.horizon = cfg.sweep.horizon;
    o.seeds = seeds;
    o.reference_multiplier = cfg.sweep.reference_multiplier;
    o.seed = cfg.seed;
    report = measure_error_sweep(model.spec, o);
  } else {
    throw ConfigError("unknown sweep kind '" + kind + "' (strong, particles, gram)");
  }
  const bool ok = window.contains(report.fit.slope);
  ensure_dir(cfg.output);
  io::write_text(fs::path(cfg.output) / "sweep.csv", report.to_csv());
  json j = report.to_json();
  j["window"] = {{"min", window.min ? json(*window.min) : json(nullptr)}, {"max", window.max ? json(*window.max) : json(nullptr)}};
  j["in_window"] = ok;
  write_json(fs::path(cfg.output) / "sweep.json", j);
  write_config_echo(cfg.output, cfg);
  std::cout << kind << " sweep: slope " << report.fit.slope << " +- " << report.fit.half_width << " ("
            << (ok ? "inside" : "outside") << " window)\n";
  report_time("sweep runtime", w);
  return ok ? 0 : 1;
}

int cmd_bench(RunConfig cfg, bool progress) {
  Stopwatch w;
  const PipelineResult r = run_pipeline(cfg, progress);
  const fs::path dir = cfg.output;
  write_ips_outputs(dir, cfg, r.path);
  io::write_pairs_csv(dir / "pairs.csv", r.pairs);
  write_edmd_outputs(dir, cfg, r.edmd);
  const json summary = bench_summary(cfg, r);
  write_json(dir / "bench.json", summary);
  write_config_echo(dir, cfg);
  std::cout << summary.dump(2) << '\n';
  report_time("bench runtime", w);
  return 0;
}

}  // namespace mvk
