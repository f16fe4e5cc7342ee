// mvk: simulate McKean-Vlasov systems and estimate their transfer operators.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mvk/config.hpp"
#include "mvk/error.hpp"
#include "mvk/parallel.hpp"
#include "mvk/pipeline.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::string model;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::size_t particles = 0;
  std::optional<double> ips_step;
  std::optional<double> horizon;
  std::size_t trajectories = 0;
  std::optional<double> step;
  std::optional<double> lag;
  std::size_t n_eig = 0;
  std::optional<double> reg;
  bool augment = false;
  bool no_augment = false;
  bool write_matrices = false;
  bool ips_data = false;
  std::size_t seeds = 0;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", o.output, "Output directory");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--model", o.model, "Model name (cormier, kuramoto-circle, kuramoto-sphere, ou, static)");
}

void add_ips(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--particles", o.particles, "IPS particle count")->check(CLI::PositiveNumber);
  cmd->add_option("--ips-step", o.ips_step, "IPS time step")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", o.horizon, "IPS horizon")->check(CLI::PositiveNumber);
}

void add_decoupled(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--trajectories", o.trajectories, "Decoupled trajectory count")->check(CLI::PositiveNumber);
  cmd->add_option("--step", o.step, "Decoupled time step")->check(CLI::PositiveNumber);
  cmd->add_option("--lag", o.lag, "Lag time T")->check(CLI::PositiveNumber);
}

void add_edmd(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--n-eig", o.n_eig, "Number of eigenpairs")->check(CLI::PositiveNumber);
  cmd->add_option("--reg", o.reg, "Ridge regularization")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--symmetry-augment", o.augment, "Append pi-shifted copies of the data");
  cmd->add_flag("--no-symmetry-augment", o.no_augment, "Disable pi-shift augmentation");
  cmd->add_flag("--write-matrices", o.write_matrices, "Also write matrices.json");
}

mvk::RunConfig build_config(const Overrides& o, const std::string& forced_model = {}) {
  mvk::RunConfig cfg;
  const std::string model = !forced_model.empty() ? forced_model : o.model;
  if (!o.config_file.empty()) {
    cfg = mvk::load_config(o.config_file);
    if (!model.empty() && model != cfg.model) {
      throw mvk::ConfigError("--model/bench name '" + model + "' conflicts with model '" + cfg.model + "' in " +
                             o.config_file);
    }
  } else if (!model.empty()) {
    cfg = mvk::base_config_for(model);
  }
  if (!o.output.empty()) cfg.output = o.output;
  if (o.seed) cfg.seed = *o.seed;
  if (o.particles) cfg.ips.particles = o.particles;
  if (o.ips_step) cfg.ips.step = *o.ips_step;
  if (o.horizon) cfg.ips.horizon = *o.horizon;
  if (o.trajectories) cfg.decoupled.trajectories = o.trajectories;
  if (o.step) cfg.decoupled.step = *o.step;
  if (o.lag) cfg.decoupled.lag = *o.lag;
  if (o.n_eig) cfg.edmd.n_eig = o.n_eig;
  if (o.reg) cfg.edmd.reg = *o.reg;
  if (o.augment && o.no_augment) throw mvk::ConfigError("--symmetry-augment and --no-symmetry-augment conflict");
  if (o.augment) cfg.edmd.symmetry_augment = true;
  if (o.no_augment) cfg.edmd.symmetry_augment = false;
  if (o.write_matrices) cfg.edmd.write_matrices = true;
  if (o.ips_data) cfg.edmd.ips_data = true;
  if (o.seeds) cfg.sweep.seeds = o.seeds;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mvk: McKean-Vlasov particle simulation and EDMD transfer-operator estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::size_t> threads;
  bool quiet = false;
  app.add_option("-j,--threads", threads, "Worker threads (default: MVK_THREADS or hardware)")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "No progress output");

  Overrides o;
  std::string path_file, pairs_file, sweep_kind, bench_name;

  auto* ips = app.add_subcommand("ips", "Simulate the interacting particle system; writes measure_path.mvmp");
  add_common(ips, o);
  add_ips(ips, o);

  auto* dec = app.add_subcommand("decoupled", "Generate (xi, X_T) pairs against a stored measure path; writes pairs.csv");
  add_common(dec, o);
  add_decoupled(dec, o);
  dec->add_option("--path", path_file, "Measure path file (default: <output>/measure_path.mvmp)");

  auto* edmd = app.add_subcommand("edmd", "Estimate Koopman/Perron-Frobenius matrices and spectra from pairs");
  add_common(edmd, o);
  add_edmd(edmd, o);
  edmd->add_option("--lag", o.lag, "Lag time of the pairs")->check(CLI::PositiveNumber);
  edmd->add_option("--pairs", pairs_file, "Pair CSV (default: <output>/pairs.csv)");
  edmd->add_option("--path", path_file, "Measure path for --ips-data (default: <output>/measure_path.mvmp)");
  edmd->add_flag("--ips-data", o.ips_data, "Experimental: use IPS snapshot pairs instead of decoupled data");

  auto* sweep = app.add_subcommand("sweep", "Convergence-rate sweep; exit 0 iff the slope is inside the window");
  add_common(sweep, o);
  sweep->add_option("kind", sweep_kind, "strong | particles | gram")
      ->required()
      ->check(CLI::IsMember({"strong", "particles", "gram"}));
  sweep->add_option("--seeds", o.seeds, "Seeds per parameter value")->check(CLI::PositiveNumber);

  auto* bench = app.add_subcommand("bench", "Run a published experiment end to end");
  bench->add_option("name", bench_name, "cormier | kuramoto-circle | kuramoto-sphere | ou")
      ->required()
      ->check(CLI::IsMember(mvk::recipe_names()));
  bench->add_option("-c,--config", o.config_file, "JSON config file overriding the recipe")->check(CLI::ExistingFile);
  bench->add_option("-o,--output", o.output, "Output directory");
  bench->add_option("--seed", o.seed, "Master seed");
  add_ips(bench, o);
  add_decoupled(bench, o);
  add_edmd(bench, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (threads) {
      mvk::set_thread_count(*threads);
    } else {
      mvk::init_threads_from_env();
    }
    const bool progress = !quiet;
    if (ips->parsed()) return mvk::cmd_ips(build_config(o), progress);
    if (dec->parsed()) {
      const auto cfg = build_config(o);
      return mvk::cmd_decoupled(cfg, path_file.empty() ? cfg.output + "/measure_path.mvmp" : path_file, progress);
    }
    if (edmd->parsed()) {
      const auto cfg = build_config(o);
      return mvk::cmd_edmd(cfg, pairs_file.empty() ? cfg.output + "/pairs.csv" : pairs_file,
                           path_file.empty() ? cfg.output + "/measure_path.mvmp" : path_file);
    }
    if (sweep->parsed()) return mvk::cmd_sweep(build_config(o), sweep_kind);
    if (bench->parsed()) return mvk::cmd_bench(build_config(o, bench_name), progress);
  } catch (const mvk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
