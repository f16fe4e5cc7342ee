#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mvk/benchmarks.hpp"
#include "mvk/config.hpp"
#include "mvk/core.hpp"
#include "mvk/edmd.hpp"
#include "mvk/metrics.hpp"

namespace mvk {

/// Model named in cfg, with model-level constants drawn from the seed.
/// Writes the resolved parameters back into cfg.model_params.
RegisteredModel resolve_model(RunConfig& cfg);

MeasurePath run_ips_stage(const RunConfig& cfg, const ModelSpec& model, bool progress);

/// Initial points for the decoupled scheme, per cfg.decoupled.initial.
ParticleEnsemble decoupled_initial_points(const RunConfig& cfg, const ModelSpec& model);

PairDataSet run_decoupled_stage(const RunConfig& cfg, const ModelSpec& model, const MeasurePath& path, bool progress);

struct EdmdStage {
  /// Data the matrices were assembled from (after optional augmentation).
  PairDataSet data;
  EdmdResult result;
  /// Points the eigenfunction table is evaluated on.
  ParticleEnsemble grid;
};

EdmdStage run_edmd_stage(const RunConfig& cfg, PairDataSet pairs);

struct PipelineResult {
  RegisteredModel model;
  MeasurePath path;
  PairDataSet pairs;
  EdmdStage edmd;
};

/// IPS, decoupled data and EDMD in one go.
PipelineResult run_pipeline(RunConfig& cfg, bool progress);

/// Summary statistics of the final snapshot: per-coordinate mean, sample
/// variance, min and max.
nlohmann::json ensemble_summary(const ParticleEnsemble& e);

/// Benchmark-specific diagnostics for a finished pipeline run.
nlohmann::json bench_summary(const RunConfig& cfg, const PipelineResult& r);

/// Real part of Koopman eigenfunction l (0-based) on the stage grid.
std::vector<double> koopman_eigenfunction_on_grid(const RunConfig& cfg, const EdmdStage& stage, std::size_t l);

/// Output writers. Each creates the directory if needed.
void write_config_echo(const std::filesystem::path& dir, const RunConfig& cfg);
void write_ips_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const MeasurePath& path);
void write_edmd_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const EdmdStage& stage);
std::string eigenfunctions_csv(const RunConfig& cfg, const EdmdStage& stage);
nlohmann::json matrices_to_json(const EdmdResult& r);

/// CLI commands; return the process exit code or throw mvk::Error.
int cmd_ips(RunConfig cfg, bool progress);
int cmd_decoupled(RunConfig cfg, const std::string& path_file, bool progress);
int cmd_edmd(RunConfig cfg, const std::string& pairs_file, const std::string& path_file);
int cmd_sweep(RunConfig cfg, const std::string& kind);
int cmd_bench(RunConfig cfg, bool progress);

}  // namespace mvk
