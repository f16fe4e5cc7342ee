#include "mvk/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mvk/error.hpp"
#include "mvk/io.hpp"

namespace mvk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

template <class F>
std::vector<double> expectations(const EmpiricalMeasure& mu, std::size_t count, F&& features) {
  const auto& p = mu.particles();
  std::vector<std::vector<double>> columns(count, std::vector<double>(p.count()));
  std::vector<double> f(count);
  for (std::size_t m = 0; m < p.count(); ++m) {
    features(p.row(m), f);
    for (std::size_t c = 0; c < count; ++c) columns[c][m] = f[c];
  }
  std::vector<double> out(count);
  for (std::size_t c = 0; c < count; ++c) out[c] = pairwise_sum(columns[c]) / static_cast<double>(p.count());
  return out;
}

double get_number(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_number()) throw ConfigError(std::string("model parameter '") + key + "' must be a number");
  return params.at(key).get<double>();
}

void reject_unknown(const nlohmann::json& params, std::initializer_list<const char*> known, const std::string& model) {
  for (const auto& [key, value] : params.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown parameter '" + key + "' for model '" + model + "'");
  }
}

}  // namespace

ModelSpec cormier_model(double J, double init_lo, double init_hi) {
  if (!std::isfinite(J)) throw ConfigError("cormier: J must be finite");
  if (!(init_lo < init_hi)) throw ConfigError("cormier: initial interval must have lo < hi");
  ModelSpec m;
  m.name = "cormier";
  m.dim = 1;
  m.summarize = [](double, const EmpiricalMeasure& mu) {
    return expectations(mu, 1, [](std::span<const double> x, std::vector<double>& f) { f[0] = std::cos(x[0]); });
  };
  m.drift = [J](const StepContext& ctx, std::span<const double> x, std::span<double> out) {
    out[0] = -x[0] + J * ctx.summary[0];
  };
  m.diffusion = [](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = std::numbers::sqrt2; };
  m.initial_sampler = [init_lo, init_hi](RngStream& s, std::span<double> out) {
    out[0] = init_lo + (init_hi - init_lo) * s.uniform();
  };
  return m;
}

std::vector<FixedPoint> cormier_fixed_points(double J) {
  if (J == 0.0 || !std::isfinite(J)) throw ConfigError("cormier_fixed_points: J must be finite and nonzero");
  const double c = std::sqrt(std::numbers::e) / J;
  auto g = [c](double a) { return c * a - std::cos(a); };
  std::vector<FixedPoint> roots;
  auto add = [&](double alpha) { roots.push_back({alpha, alpha * std::tan(alpha) > -1.0}); };
  constexpr int kSteps = 2000;
  for (int k = 0; k < kSteps; ++k) {
    double lo = -10.0 + 0.01 * k;
    double hi = -10.0 + 0.01 * (k + 1);
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) {
      add(lo);
      continue;
    }
    if (k + 1 == kSteps && ghi == 0.0) {
      add(hi);
      continue;
    }
    if (glo * ghi >= 0.0) continue;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      const double gm = g(mid);
      if (std::abs(gm) < 1e-12) break;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    add(mid);
  }
  return roots;
}

ModelSpec ou_model(double rate, double sigma, double init_mean, double init_std) {
  if (!(rate >= 0.0) || !(sigma >= 0.0) || !(init_std >= 0.0)) throw ConfigError("ou: rate, sigma and init_std must be >= 0");
  ModelSpec m;
  m.name = "ou";
  m.dim = 1;
  m.summarize = [](double, const EmpiricalMeasure& mu) {
    return expectations(mu, 1, [](std::span<const double> x, std::vector<double>& f) { f[0] = x[0]; });
  };
  m.drift = [rate](const StepContext& ctx, std::span<const double> x, std::span<double> out) {
    out[0] = rate * (ctx.summary[0] - x[0]);
  };
  m.diffusion = [sigma](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = sigma; };
  m.initial_sampler = [init_mean, init_std](RngStream& s, std::span<double> out) { out[0] = init_mean + init_std * s.normal(); };
  return m;
}

std::vector<double> ou_koopman_eigenvalues(double rate, double lag, std::size_t n) {
  if (!(lag > 0.0) || n == 0) throw ConfigError("ou_koopman_eigenvalues: need lag > 0 and n >= 1");
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = std::exp(-static_cast<double>(j) * rate * lag);
  return out;
}

ModelSpec kuramoto_circle_model(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kuramoto-circle: sigma must be positive");
  ModelSpec m;
  m.name = "kuramoto-circle";
  m.dim = 1;
  m.summarize = [](double, const EmpiricalMeasure& mu) {
    return expectations(mu, 2, [](std::span<const double> x, std::vector<double>& f) {
      f[0] = std::cos(x[0]);
      f[1] = std::sin(x[0]);
    });
  };
  // E sin(x - Y) = sin x E cos Y - cos x E sin Y.
  m.drift = [](const StepContext& ctx, std::span<const double> x, std::span<double> out) {
    out[0] = 2.0 * std::sin(2.0 * x[0]) - (std::sin(x[0]) * ctx.summary[0] - std::cos(x[0]) * ctx.summary[1]);
  };
  const double diff = std::sqrt(2.0 * sigma);
  m.diffusion = [diff](const StepContext&, std::span<const double>, std::span<double> out) { out[0] = diff; };
  m.initial_sampler = [](RngStream& s, std::span<double> out) { out[0] = wrap_angle(kTwoPi * s.uniform()); };
  m.post_step = [](std::span<double> x) { x[0] = wrap_angle(x[0]); };
  return m;
}

double CircleDensity::operator()(double x) const { return std::exp(-std::cos(2.0 * x) / sigma) / Z; }

CircleDensity kuramoto_invariant_density(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kuramoto density: sigma must be positive");
  CircleDensity rho{sigma, 1.0, sigma > kKuramotoCriticalSigma};
  if (!rho.unique) {
    log_warning("kuramoto density: sigma = " + io::format_double(sigma) + " is at or below " +
                io::format_double(kKuramotoCriticalSigma) + "; the invariant law need not be unique");
  }
  auto f = [sigma](double x) { return std::exp(-std::cos(2.0 * x) / sigma); };
  auto simpson = [&](std::size_t n) {
    const double h = kTwoPi / static_cast<double>(n);
    double s = f(0.0) + f(kTwoPi);
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(h * static_cast<double>(i));
    return s * h / 3.0;
  };
  std::size_t n = 64;
  double prev = simpson(n);
  for (;;) {
    n *= 2;
    const double next = simpson(n);
    if (std::abs(next - prev) <= 1e-10 * std::abs(next) || n > (std::size_t{1} << 24)) {
      rho.Z = next;
      break;
    }
    prev = next;
  }
  return rho;
}

std::string to_string(BetaMode mode) { return mode == BetaMode::per_step ? "per_step" : "per_model"; }

BetaMode beta_mode_from_string(const std::string& s) {
  if (s == "per_step") return BetaMode::per_step;
  if (s == "per_model") return BetaMode::per_model;
  throw ConfigError("beta_mode must be \"per_step\" or \"per_model\"");
}

Eigen::Matrix3d random_antisymmetric(RngStream& stream) {
  Eigen::Matrix3d u = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) u(i, j) = 2.0 * stream.uniform() - 1.0;
  }
  return u - u.transpose();
}

ModelSpec kuramoto_sphere_model(const SphereParams& params, RngStream& model_stream) {
  if (!((params.A + params.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12))
    throw ConfigError("kuramoto-sphere: A must be antisymmetric");
  if (!(params.alpha > 0.0) || !(params.gamma > 0.0)) throw ConfigError("kuramoto-sphere: alpha and gamma must be positive");
  if (!(params.beta >= 0.0)) throw ConfigError("kuramoto-sphere: beta magnitude must be nonnegative");
  ModelSpec m;
  m.name = "kuramoto-sphere";
  m.dim = 3;
  m.summarize = [](double, const EmpiricalMeasure& mu) {
    return expectations(mu, 3, [](std::span<const double> x, std::vector<double>& f) {
      f[0] = x[0];
      f[1] = x[1];
      f[2] = x[2];
    });
  };
  const double beta = params.beta;
  double model_beta = 0.0;
  if (params.beta_mode == BetaMode::per_model) {
    model_beta = model_stream.uniform() < 0.5 ? -beta : beta;
  } else {
    m.step_params = 1;
    m.sample_step_params = [beta](RngStream& s, std::span<double> out) { out[0] = s.uniform() < 0.5 ? -beta : beta; };
  }
  const Eigen::Matrix3d a_shift = params.A - params.gamma * params.gamma * Eigen::Matrix3d::Identity();
  const double alpha = params.alpha;
  const bool per_step = params.beta_mode == BetaMode::per_step;
  m.drift = [a_shift, alpha, per_step, model_beta](const StepContext& ctx, std::span<const double> x, std::span<double> out) {
    const Eigen::Map<const Eigen::Vector3d> xv(x.data());
    const double b = per_step ? (ctx.random.empty() ? 0.0 : ctx.random[0]) : model_beta;
    const Eigen::Vector3d v(alpha * ctx.summary[0] + b, alpha * ctx.summary[1] + b, alpha * ctx.summary[2] + b);
    const Eigen::Vector3d r = a_shift * xv + (v - xv * xv.dot(v));
    out[0] = r(0);
    out[1] = r(1);
    out[2] = r(2);
  };
  const double gamma = params.gamma;
  m.diffusion = [gamma](const StepContext&, std::span<const double> x, std::span<double> out) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out[3 * i + j] = gamma * ((i == j ? 1.0 : 0.0) - x[i] * x[j]);
    }
  };
  m.initial_sampler = [](RngStream& s, std::span<double> out) {
    double n2 = 0.0;
    while (n2 == 0.0) {
      for (int j = 0; j < 3; ++j) out[j] = s.normal();
      n2 = out[0] * out[0] + out[1] * out[1] + out[2] * out[2];
    }
    const double n = std::sqrt(n2);
    for (int j = 0; j < 3; ++j) out[j] /= n;
  };
  m.post_step = [](std::span<double> x) {
    const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    for (int j = 0; j < 3; ++j) x[j] /= n;
  };
  return m;
}

std::vector<std::string> model_names() { return {"cormier", "kuramoto-circle", "kuramoto-sphere", "ou", "static"}; }

RegisteredModel make_model(const std::string& name, const nlohmann::json& params_in, const RngPlan& model_plan) {
  const nlohmann::json params = params_in.is_null() ? nlohmann::json::object() : params_in;
  if (!params.is_object()) throw ConfigError("model parameters must be a JSON object");
  try {
    if (name == "cormier") {
      reject_unknown(params, {"J", "init"}, name);
      const double J = get_number(params, "J", 14.0);
      std::vector<double> init{-7.5, 10.0};
      if (params.contains("init")) init = params.at("init").get<std::vector<double>>();
      if (init.size() != 2) throw ConfigError("cormier: init must be [lo, hi]");
      return {cormier_model(J, init[0], init[1]), {{"J", J}, {"init", init}}};
    }
    if (name == "ou") {
      reject_unknown(params, {"rate", "sigma", "init_mean", "init_std"}, name);
      const double rate = get_number(params, "rate", 1.0);
      const double sigma = get_number(params, "sigma", 1.0);
      const double mean = get_number(params, "init_mean", 0.0);
      const double sd = get_number(params, "init_std", 1.0);
      return {ou_model(rate, sigma, mean, sd), {{"rate", rate}, {"sigma", sigma}, {"init_mean", mean}, {"init_std", sd}}};
    }
    if (name == "kuramoto-circle") {
      reject_unknown(params, {"sigma"}, name);
      const double sigma = get_number(params, "sigma", 1.0);
      return {kuramoto_circle_model(sigma), {{"sigma", sigma}}};
    }
    if (name == "kuramoto-sphere") {
      reject_unknown(params, {"alpha", "gamma", "beta", "beta_mode", "A"}, name);
      SphereParams p;
      p.alpha = get_number(params, "alpha", 0.5);
      p.gamma = get_number(params, "gamma", 0.5);
      p.beta = get_number(params, "beta", 20.0);
      p.beta_mode = beta_mode_from_string(params.value("beta_mode", std::string("per_step")));
      auto stream = model_plan.stream(0, RngPlan::kModelStep);
      if (params.contains("A")) {
        const auto rows = params.at("A").get<std::vector<std::vector<double>>>();
        if (rows.size() != 3) throw ConfigError("kuramoto-sphere: A must be 3x3");
        for (int i = 0; i < 3; ++i) {
          if (rows[i].size() != 3) throw ConfigError("kuramoto-sphere: A must be 3x3");
          for (int j = 0; j < 3; ++j) p.A(i, j) = rows[i][j];
        }
      } else {
        p.A = random_antisymmetric(stream);
      }
      std::vector<std::vector<double>> a_rows(3, std::vector<double>(3));
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a_rows[i][j] = p.A(i, j);
      }
      auto beta_stream = model_plan.stream(1, RngPlan::kModelStep);
      ModelSpec spec = kuramoto_sphere_model(p, beta_stream);
      return {std::move(spec),
              {{"alpha", p.alpha}, {"gamma", p.gamma}, {"beta", p.beta}, {"beta_mode", to_string(p.beta_mode)}, {"A", a_rows}}};
    }
    if (name == "static") {
      reject_unknown(params, {"dim", "init"}, name);
      const auto dim = params.value("dim", std::size_t{1});
      if (dim == 0) throw ConfigError("static: dim must be positive");
      std::vector<double> init{0.0, 1.0};
      if (params.contains("init")) init = params.at("init").get<std::vector<double>>();
      if (init.size() != 2 || !(init[0] < init[1])) throw ConfigError("static: init must be [lo, hi] with lo < hi");
      ModelSpec m;
      m.name = "static";
      m.dim = dim;
      m.drift = [](const StepContext&, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
      };
      m.diffusion = [](const StepContext&, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
      };
      const double lo = init[0], hi = init[1];
      m.initial_sampler = [lo, hi](RngStream& s, std::span<double> out) {
        for (auto& v : out) v = lo + (hi - lo) * s.uniform();
      };
      return {std::move(m), {{"dim", dim}, {"init", init}}};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("model '" + name + "' parameters: " + e.what());
  }
  std::ostringstream msg;
  msg << "unknown model '" << name << "' (known:";
  for (const auto& n : model_names()) msg << ' ' << n;
  msg << ")";
  throw ConfigError(msg.str());
}

std::vector<std::size_t> circular_sign_changes(std::span<const double> f, double band) {
  const std::size_t n = f.size();
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(f[i]) >= band) {
      start = i;
      break;
    }
  }
  std::vector<std::size_t> changes;
  if (start == n) return changes;
  bool positive = f[start] > 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = (start + k) % n;
    if (positive && f[i] <= -band) {
      positive = false;
      changes.push_back(i);
    } else if (!positive && f[i] >= band) {
      positive = true;
      changes.push_back(i);
    }
  }
  return changes;
}

SphereSplit sphere_split(const Dictionary& dict, std::span<const double> v, const ParticleEnsemble& mass) {
  const auto& centers = dict.centers();
  if (v.size() != centers.size()) throw ConfigError("eigenvector length does not match the Voronoi dictionary");
  if (mass.dim() != 3 || mass.count() == 0) throw ConfigError("sphere split needs a nonempty 3-D ensemble");
  Eigen::Vector3d pos = Eigen::Vector3d::Zero(), neg = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (std::size_t m = 0; m < mass.count(); ++m) {
    const auto row = mass.row(m);
    const Eigen::Vector3d x = Eigen::Vector3d(row[0], row[1], row[2]).normalized();
    second += x * x.transpose();
    const double s = v[nearest_center(centers, row)];
    if (s > 0.0) pos += x;
    if (s < 0.0) neg += x;
  }
  SphereSplit out;
  if (pos.norm() == 0.0 || neg.norm() == 0.0) return out;
  Eigen::Vector3d pole = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(second).eigenvectors().col(2);
  if (pole.dot(pos) < 0.0) pole = -pole;
  auto angle = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
  };
  out.antipodal_angle_deg = angle(pos, -neg);
  out.pole_angle_deg = std::max(angle(pos, pole), angle(neg, -pole));
  out.pole = {pole(0), pole(1), pole(2)};
  return out;
}

}  // namespace mvk
