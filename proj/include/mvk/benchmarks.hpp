#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvk/core.hpp"
#include "mvk/dictionary.hpp"
#include "mvk/rng.hpp"

namespace mvk {

/// dX = (-X + J E[cos X]) dt + sqrt(2) dW, X_0 ~ Unif[init_lo, init_hi].
ModelSpec cormier_model(double J, double init_lo = -7.5, double init_hi = 10.0);

struct FixedPoint {
  double alpha = 0.0;
  bool stable = false;
};

/// Roots of (sqrt(e) / J) alpha = cos(alpha) in [-10, 10], ascending.
/// Stable iff alpha tan(alpha) > -1.
std::vector<FixedPoint> cormier_fixed_points(double J);

/// dX = a (E[X] - X) dt + sigma dW, X_0 ~ N(init_mean, init_std^2).
ModelSpec ou_model(double rate = 1.0, double sigma = 1.0, double init_mean = 0.0, double init_std = 1.0);

/// exp(-(j-1) a T), j = 1..n.
std::vector<double> ou_koopman_eigenvalues(double rate, double lag, std::size_t n);

/// dX = (2 sin 2X - E[sin(X - Y)]) dt + sqrt(2 sigma) dW on [0, 2pi), wrapped.
ModelSpec kuramoto_circle_model(double sigma);

/// Uniqueness threshold for the circle model's invariant law.
inline constexpr double kKuramotoCriticalSigma = 0.7709;

struct CircleDensity {
  double sigma = 1.0;
  double Z = 1.0;
  /// False at or below the uniqueness threshold.
  bool unique = true;
  double operator()(double x) const;
};

/// rho(x) = exp(-cos(2x) / sigma) / Z on [0, 2pi].
CircleDensity kuramoto_invariant_density(double sigma);

enum class BetaMode {
  /// Fresh +-beta for every particle and step.
  per_step,
  /// One +-beta for the whole model instance.
  per_model,
};

std::string to_string(BetaMode mode);
BetaMode beta_mode_from_string(const std::string& s);

/// Antisymmetric U - U^T, U upper triangular with entries Unif(-1, 1) drawn
/// from `stream`.
Eigen::Matrix3d random_antisymmetric(RngStream& stream);

struct SphereParams {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  double alpha = 0.5;
  double gamma = 0.5;
  double beta = 20.0;
  BetaMode beta_mode = BetaMode::per_step;
};

/// dX = ((A - g^2 I) X + (I - X X^T)(alpha E[X] + b 1)) dt + g (I - X X^T) dW,
/// renormalized onto S^2 after every step. b = +-beta with probability 1/2
/// each, redrawn per the beta mode; per-model draws come from `model_stream`.
ModelSpec kuramoto_sphere_model(const SphereParams& params, RngStream& model_stream);

/// A model built from a registry entry together with the fully resolved
/// parameters (defaults filled in, random constants made explicit).
struct RegisteredModel {
  ModelSpec spec;
  nlohmann::json params;
};

/// Registry: "cormier", "kuramoto-circle", "kuramoto-sphere", "ou", "static".
/// `model_plan` supplies model-level random constants.
RegisteredModel make_model(const std::string& name, const nlohmann::json& params, const RngPlan& model_plan);
std::vector<std::string> model_names();

/// Circular sign changes of samples f on a closed loop, counting a change
/// only when f crosses from <= -band to >= band or back.
/// Returns the loop positions (indices) at which each change completes.
std::vector<std::size_t> circular_sign_changes(std::span<const double> f, double band);

struct SphereSplit {
  /// Angle between the centroid of the positive group and the negated
  /// centroid of the negative group.
  double antipodal_angle_deg = 180.0;
  /// Larger of the angles between each group centroid and its pole of the
  /// ensemble (principal axis of the second moment, oriented toward the
  /// positive group).
  double pole_angle_deg = 180.0;
  std::array<double, 3> pole{0.0, 0.0, 0.0};
};
/// Splits the Voronoi cells of `dict` by the sign of v and forms each group's
/// centroid from the points of `mass` lying in its cells. Cells with v = 0
/// belong to neither group.
SphereSplit sphere_split(const Dictionary& dict, std::span<const double> v, const ParticleEnsemble& mass);

}  // namespace mvk
