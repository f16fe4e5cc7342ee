#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace mvk {

struct IpsConfig {
  std::size_t particles = 50000;
  double step = 0.1;
  double horizon = 5.0;
};

struct InitialConfig {
  /// "model" (the model's own initial sampler) or "uniform" (box [lo, hi]^d).
  std::string kind = "model";
  double lo = 0.0;
  double hi = 1.0;
};

struct DecoupledConfig {
  std::size_t trajectories = 50000;
  double step = 0.1;
  double lag = 0.5;
  InitialConfig initial;
};

struct EdmdConfig {
  std::size_t n_eig = 5;
  double reg = 0.0;
  bool symmetry_augment = false;
  double symmetry_shift = 3.141592653589793;
  /// Wrap period for shifted coordinates; 0 disables wrapping.
  double symmetry_period = 6.283185307179586;
  /// Eigenfunction table: points per axis (1-D) or Fibonacci points (3-D).
  std::size_t grid_points = 400;
  /// 1-D grid interval; defaults to the data range.
  std::optional<double> grid_lo, grid_hi;
  /// Open interval end (circle data): the grid excludes grid_hi.
  bool grid_periodic = false;
  /// Indicator dictionaries: tabulate interpolated bin values.
  bool interpolate = false;
  bool write_matrices = false;
  /// Experimental: EDMD on (X_0, X_lag) pairs taken from the IPS itself.
  bool ips_data = false;
};

struct SlopeWindow {
  std::optional<double> min, max;
  bool contains(double slope) const;
};

struct SweepConfig {
  std::vector<double> steps{0.1, 0.05, 0.025, 0.0125};
  double reference_step = 0.0;
  std::size_t paths = 2000;
  std::size_t frozen_particles = 2000;
  std::vector<std::size_t> particles{100, 200, 400, 800, 1600};
  double step = 0.1;
  std::size_t reference_multiplier = 16;
  std::vector<std::size_t> samples{100, 1000, 10000, 100000};
  double horizon = 1.0;
  std::size_t seeds = 0;  // 0: per-kind default
  std::optional<SlopeWindow> window;
};

/// Fully resolved run settings. Serializes losslessly to JSON.
struct RunConfig {
  std::string model = "cormier";
  nlohmann::json model_params = nlohmann::json::object();
  IpsConfig ips;
  DecoupledConfig decoupled;
  nlohmann::json dictionary = {{"kind", "indicator1d"}, {"n", 100}};
  EdmdConfig edmd;
  SweepConfig sweep;
  std::uint64_t seed = 1;
  std::string output = "mvk-out";

  /// Checks counts and the lag/horizon relation. Throws ConfigError.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys are rejected; missing keys keep the values in `base`.
RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base = RunConfig{});

/// Settings reproducing the published experiment for a benchmark name
/// ("cormier", "kuramoto-circle", "kuramoto-sphere", "ou").
RunConfig recipe(const std::string& name);
/// recipe(name) when a recipe exists, else the default config with `name`.
RunConfig base_config_for(const std::string& model);

/// Reads a JSON config file, starting from the recipe of its model.
RunConfig load_config(const std::string& file);

std::vector<std::string> recipe_names();

/// Default window per sweep kind: strong slope >= 0.85, particle slope in
/// [-0.75, -0.3], gram slope in [-0.65, -0.35].
SlopeWindow default_window(const std::string& kind);
/// Default seed count per sweep kind.
std::size_t default_seeds(const std::string& kind);

}  // namespace mvk
