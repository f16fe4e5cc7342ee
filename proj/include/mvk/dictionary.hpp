#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvk/core.hpp"

namespace mvk {

enum class DictionaryKind { indicator1d, monomial, voronoi_sphere };

std::string to_string(DictionaryKind kind);

/// Ordered basis psi_1..psi_N with pointwise and batch evaluation.
///
/// Immutable after construction. Batch evaluation calls the pointwise path
/// row by row, so the two agree bit for bit.
class Dictionary {
 public:
  /// Indicators of [a + i w, a + (i+1) w), w = (b - a) / n, last bin closed.
  /// Points outside [a, b] evaluate to all zeros.
  static Dictionary indicator_1d(double a, double b, std::size_t n);
  /// All monomials of total degree <= max_order in `dim` variables, ordered
  /// by degree, then lexicographically by exponent (x1 before x2).
  static Dictionary monomial(std::size_t dim, std::size_t max_order);
  /// Nearest-center indicators for n Fibonacci-spiral centers on S^2.
  static Dictionary voronoi_sphere(std::size_t n);

  DictionaryKind kind() const noexcept;
  std::size_t size() const noexcept;
  std::size_t dim() const noexcept;

  /// Uniform bound gamma on |psi_i|, if one exists.
  std::optional<double> bound() const noexcept;
  /// Uniform Lipschitz constant theta, if one exists (indicators have none).
  std::optional<double> lipschitz() const noexcept;
  /// Indicator kinds: the basis partitions its covered region.
  bool is_partition() const noexcept;

  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;
  /// Rows [begin, end) of `points` evaluated into a (end - begin) x N matrix.
  Eigen::MatrixXd eval_batch(const ParticleEnsemble& points, std::size_t begin, std::size_t end) const;
  Eigen::MatrixXd eval_batch(const ParticleEnsemble& points) const;

  /// Kind-specific metadata.
  std::pair<double, double> interval() const;                  // indicator1d
  const std::vector<std::vector<unsigned>>& exponents() const;  // monomial
  std::size_t max_order() const;                                // monomial
  const std::vector<std::array<double, 3>>& centers() const;    // voronoi_sphere
  /// Bin centers for indicator1d, in basis order.
  std::vector<double> bin_centers() const;

  nlohmann::json to_json() const;
  std::string describe() const;

 private:
  struct Indicator1d {
    double a, b, width;
    std::size_t n;
  };
  struct Monomial {
    std::size_t dim, max_order;
    std::vector<std::vector<unsigned>> exponents;
  };
  struct VoronoiSphere {
    std::vector<std::array<double, 3>> centers;
  };

  explicit Dictionary(std::variant<Indicator1d, Monomial, VoronoiSphere> impl) : impl_(std::move(impl)) {}

  std::variant<Indicator1d, Monomial, VoronoiSphere> impl_;
};

/// Fibonacci-spiral points on the unit sphere.
std::vector<std::array<double, 3>> fibonacci_sphere(std::size_t n);

/// Index of the nearest center to x/|x| (ties: lowest index).
/// Throws NumericalError for x = 0.
std::size_t nearest_center(std::span<const std::array<double, 3>> centers, std::span<const double> x);

/// Builds a dictionary from its JSON description:
///   {"kind":"indicator1d","a":..,"b":..,"n":..}
///   {"kind":"monomial","max_order":..}
///   {"kind":"voronoi_sphere","n":..}
/// For indicator1d, a missing "a"/"b" is taken from `data_range`.
/// Monomial dimension comes from `dim`.
Dictionary dictionary_from_json(const nlohmann::json& spec, std::size_t dim,
                                std::optional<std::pair<double, double>> data_range = std::nullopt);

}  // namespace mvk
