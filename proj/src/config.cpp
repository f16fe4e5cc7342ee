#include "mvk/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "mvk/error.hpp"

namespace mvk {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "' in '" + where + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_opt(const json& obj, const char* key, std::optional<double>& out) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    out.reset();
  } else {
    out = obj.at(key).get<double>();
  }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

bool SlopeWindow::contains(double slope) const {
  if (std::isnan(slope)) return false;
  if (min && slope < *min) return false;
  if (max && slope > *max) return false;
  return true;
}

void RunConfig::validate() const {
  if (model.empty()) throw ConfigError("config: model name is empty");
  if (ips.particles < 2) throw ConfigError("config: ips.particles must be at least 2");
  if (!(ips.step > 0.0) || !(ips.horizon > 0.0)) throw ConfigError("config: ips.step and ips.horizon must be positive");
  if (decoupled.trajectories < 1) throw ConfigError("config: decoupled.trajectories must be positive");
  if (!(decoupled.step > 0.0) || !(decoupled.lag > 0.0)) throw ConfigError("config: decoupled.step and decoupled.lag must be positive");
  if (decoupled.lag > ips.horizon * (1.0 + 1e-12))
    throw ConfigError("config: decoupled.lag exceeds the ips horizon (measure path too short)");
  if (decoupled.initial.kind != "model" && decoupled.initial.kind != "uniform")
    throw ConfigError("config: decoupled.initial.kind must be \"model\" or \"uniform\"");
  if (decoupled.initial.kind == "uniform" && !(decoupled.initial.lo < decoupled.initial.hi))
    throw ConfigError("config: decoupled.initial needs lo < hi");
  if (!dictionary.is_object() || !dictionary.contains("kind")) throw ConfigError("config: dictionary needs a \"kind\"");
  if (edmd.n_eig < 1) throw ConfigError("config: edmd.n_eig must be positive");
  if (!(edmd.reg >= 0.0)) throw ConfigError("config: edmd.reg must be nonnegative");
  if (edmd.grid_points < 2) throw ConfigError("config: edmd.grid_points must be at least 2");
  if (!(edmd.symmetry_period >= 0.0)) throw ConfigError("config: edmd.symmetry_period must be nonnegative");
  if (sweep.paths < 1 || sweep.frozen_particles < 1) throw ConfigError("config: sweep.paths and sweep.frozen_particles must be positive");
  if (!(sweep.horizon > 0.0) || !(sweep.step > 0.0)) throw ConfigError("config: sweep.horizon and sweep.step must be positive");
  if (output.empty()) throw ConfigError("config: output directory is empty");
}

json to_json(const RunConfig& c) {
  json window = nullptr;
  if (c.sweep.window) window = {{"min", opt(c.sweep.window->min)}, {"max", opt(c.sweep.window->max)}};
  return {
      {"model", {{"name", c.model}, {"params", c.model_params}}},
      {"ips", {{"particles", c.ips.particles}, {"step", c.ips.step}, {"horizon", c.ips.horizon}}},
      {"decoupled",
       {{"trajectories", c.decoupled.trajectories},
        {"step", c.decoupled.step},
        {"lag", c.decoupled.lag},
        {"initial", {{"kind", c.decoupled.initial.kind}, {"lo", c.decoupled.initial.lo}, {"hi", c.decoupled.initial.hi}}}}},
      {"dictionary", c.dictionary},
      {"edmd",
       {{"n_eig", c.edmd.n_eig},
        {"reg", c.edmd.reg},
        {"symmetry_augment", c.edmd.symmetry_augment},
        {"symmetry_shift", c.edmd.symmetry_shift},
        {"symmetry_period", c.edmd.symmetry_period},
        {"grid_points", c.edmd.grid_points},
        {"grid_lo", opt(c.edmd.grid_lo)},
        {"grid_hi", opt(c.edmd.grid_hi)},
        {"grid_periodic", c.edmd.grid_periodic},
        {"interpolate", c.edmd.interpolate},
        {"write_matrices", c.edmd.write_matrices},
        {"ips_data", c.edmd.ips_data}}},
      {"sweep",
       {{"steps", c.sweep.steps},
        {"reference_step", c.sweep.reference_step},
        {"paths", c.sweep.paths},
        {"frozen_particles", c.sweep.frozen_particles},
        {"particles", c.sweep.particles},
        {"step", c.sweep.step},
        {"reference_multiplier", c.sweep.reference_multiplier},
        {"samples", c.sweep.samples},
        {"horizon", c.sweep.horizon},
        {"seeds", c.sweep.seeds},
        {"window", window}}},
      {"seed", c.seed},
      {"output", c.output},
  };
}

RunConfig config_from_json(const json& j, const RunConfig& base) {
  RunConfig c = base;
  try {
    only_keys(j, {"model", "ips", "decoupled", "dictionary", "edmd", "sweep", "seed", "output"}, "config");
    if (j.contains("model")) {
      const auto& m = j.at("model");
      only_keys(m, {"name", "params"}, "model");
      read(m, "name", c.model);
      if (m.contains("params")) c.model_params = m.at("params").is_null() ? json::object() : m.at("params");
    }
    if (j.contains("ips")) {
      const auto& s = j.at("ips");
      only_keys(s, {"particles", "step", "horizon"}, "ips");
      read(s, "particles", c.ips.particles);
      read(s, "step", c.ips.step);
      read(s, "horizon", c.ips.horizon);
    }
    if (j.contains("decoupled")) {
      const auto& s = j.at("decoupled");
      only_keys(s, {"trajectories", "step", "lag", "initial"}, "decoupled");
      read(s, "trajectories", c.decoupled.trajectories);
      read(s, "step", c.decoupled.step);
      read(s, "lag", c.decoupled.lag);
      if (s.contains("initial")) {
        const auto& i = s.at("initial");
        only_keys(i, {"kind", "lo", "hi"}, "decoupled.initial");
        read(i, "kind", c.decoupled.initial.kind);
        read(i, "lo", c.decoupled.initial.lo);
        read(i, "hi", c.decoupled.initial.hi);
      }
    }
    if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
    if (j.contains("edmd")) {
      const auto& s = j.at("edmd");
      only_keys(s,
                {"n_eig", "reg", "symmetry_augment", "symmetry_shift", "symmetry_period", "grid_points", "grid_lo",
                 "grid_hi", "grid_periodic", "interpolate", "write_matrices", "ips_data"},
                "edmd");
      read(s, "n_eig", c.edmd.n_eig);
      read(s, "reg", c.edmd.reg);
      read(s, "symmetry_augment", c.edmd.symmetry_augment);
      read(s, "symmetry_shift", c.edmd.symmetry_shift);
      read(s, "symmetry_period", c.edmd.symmetry_period);
      read(s, "grid_points", c.edmd.grid_points);
      read_opt(s, "grid_lo", c.edmd.grid_lo);
      read_opt(s, "grid_hi", c.edmd.grid_hi);
      read(s, "grid_periodic", c.edmd.grid_periodic);
      read(s, "interpolate", c.edmd.interpolate);
      read(s, "write_matrices", c.edmd.write_matrices);
      read(s, "ips_data", c.edmd.ips_data);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      only_keys(s,
                {"steps", "reference_step", "paths", "frozen_particles", "particles", "step", "reference_multiplier",
                 "samples", "horizon", "seeds", "window"},
                "sweep");
      read(s, "steps", c.sweep.steps);
      read(s, "reference_step", c.sweep.reference_step);
      read(s, "paths", c.sweep.paths);
      read(s, "frozen_particles", c.sweep.frozen_particles);
      read(s, "particles", c.sweep.particles);
      read(s, "step", c.sweep.step);
      read(s, "reference_multiplier", c.sweep.reference_multiplier);
      read(s, "samples", c.sweep.samples);
      read(s, "horizon", c.sweep.horizon);
      read(s, "seeds", c.sweep.seeds);
      if (s.contains("window")) {
        const auto& w = s.at("window");
        if (w.is_null()) {
          c.sweep.window.reset();
        } else {
          only_keys(w, {"min", "max"}, "sweep.window");
          SlopeWindow win;
          read_opt(w, "min", win.min);
          read_opt(w, "max", win.max);
          c.sweep.window = win;
        }
      }
    }
    read(j, "seed", c.seed);
    read(j, "output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig recipe(const std::string& name) {
  RunConfig c;
  c.model = name;
  if (name == "cormier") {
    c.model_params = {{"J", 14.0}, {"init", {-7.5, 10.0}}};
    c.ips = {50000, 0.1, 5.0};
    c.decoupled.trajectories = 50000;
    c.decoupled.step = 0.1;
    c.decoupled.lag = 0.5;
    c.dictionary = {{"kind", "indicator1d"}, {"n", 100}};
    c.edmd.n_eig = 5;
    c.sweep.horizon = 5.0;
    return c;
  }
  if (name == "kuramoto-circle") {
    c.model_params = {{"sigma", 1.0}};
    c.ips = {5000, 0.01, 1.0};
    c.decoupled.trajectories = 5000;
    c.decoupled.step = 0.01;
    c.decoupled.lag = 1.0;
    c.dictionary = {{"kind", "monomial"}, {"max_order", 7}};
    c.edmd.n_eig = 5;
    c.edmd.symmetry_augment = true;
    c.edmd.grid_lo = 0.0;
    c.edmd.grid_hi = 2.0 * std::numbers::pi;
    c.edmd.grid_periodic = true;
    return c;
  }
  if (name == "kuramoto-sphere") {
    c.model_params = {{"alpha", 0.5}, {"gamma", 0.5}, {"beta", 20.0}, {"beta_mode", "per_step"}};
    c.ips = {5000, 0.01, 3.0};
    c.decoupled.trajectories = 5000;
    c.decoupled.step = 0.01;
    c.decoupled.lag = 0.5;
    c.dictionary = {{"kind", "voronoi_sphere"}, {"n", 200}};
    c.edmd.n_eig = 5;
    c.edmd.grid_points = 400;
    return c;
  }
  if (name == "ou") {
    c.model_params = {{"rate", 1.0}, {"sigma", 1.0}, {"init_mean", 0.0}, {"init_std", 1.0}};
    c.ips = {5000, 0.01, 2.0};
    c.decoupled.trajectories = 5000;
    c.decoupled.step = 0.01;
    c.decoupled.lag = 0.5;
    c.dictionary = {{"kind", "monomial"}, {"max_order", 4}};
    c.edmd.n_eig = 5;
    return c;
  }
  throw ConfigError("no recipe named '" + name + "'");
}

std::vector<std::string> recipe_names() { return {"cormier", "kuramoto-circle", "kuramoto-sphere", "ou"}; }

RunConfig base_config_for(const std::string& model) {
  for (const auto& n : recipe_names()) {
    if (n == model) return recipe(model);
  }
  RunConfig c;
  c.model = model;
  return c;
}

RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file: " + file);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + file + ": " + e.what());
  }
  std::string model = "cormier";
  if (j.is_object() && j.contains("model") && j.at("model").is_object() && j.at("model").contains("name"))
    model = j.at("model").at("name").is_string() ? j.at("model").at("name").get<std::string>() : model;
  return config_from_json(j, base_config_for(model));
}

SlopeWindow default_window(const std::string& kind) {
  if (kind == "strong") return {0.85, std::nullopt};
  if (kind == "particles") return {-0.75, -0.3};
  if (kind == "gram") return {-0.65, -0.35};
  throw ConfigError("unknown sweep kind '" + kind + "'");
}

std::size_t default_seeds(const std::string& kind) {
  if (kind == "strong") return 5;
  if (kind == "particles") return 10;
  if (kind == "gram") return 20;
  throw ConfigError("unknown sweep kind '" + kind + "'");
}

}  // namespace mvk
