#include "mvk/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mvk/error.hpp"

namespace mvk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

/// Exponent vectors of total degree `degree`, lexicographically descending.
void exponents_of_degree(std::size_t dim, unsigned degree, std::vector<unsigned>& prefix,
                         std::vector<std::vector<unsigned>>& out) {
  if (prefix.size() + 1 == dim) {
    prefix.push_back(degree);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = static_cast<int>(degree); k >= 0; --k) {
    prefix.push_back(static_cast<unsigned>(k));
    exponents_of_degree(dim, degree - static_cast<unsigned>(k), prefix, out);
    prefix.pop_back();
  }
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::string to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::indicator1d:
      return "indicator1d";
    case DictionaryKind::monomial:
      return "monomial";
    case DictionaryKind::voronoi_sphere:
      return "voronoi_sphere";
  }
  return "unknown";
}

std::vector<std::array<double, 3>> fibonacci_sphere(std::size_t n) {
  std::vector<std::array<double, 3>> pts(n);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    pts[i] = {r * std::cos(phi), r * std::sin(phi), z};
  }
  return pts;
}

std::size_t nearest_center(std::span<const std::array<double, 3>> centers, std::span<const double> x) {
  const double norm = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  if (norm == 0.0) throw NumericalError("zero vector has no spherical projection");
  const double u[3] = {x[0] / norm, x[1] / norm, x[2] / norm};
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double dx = u[0] - centers[i][0];
    const double dy = u[1] - centers[i][1];
    const double dz = u[2] - centers[i][2];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Dictionary Dictionary::indicator_1d(double a, double b, std::size_t n) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw ConfigError("indicator1d: need finite a < b");
  if (n < 2) throw ConfigError("indicator1d: need at least 2 bins");
  return Dictionary(Indicator1d{a, b, (b - a) / static_cast<double>(n), n});
}

Dictionary Dictionary::monomial(std::size_t dim, std::size_t max_order) {
  if (dim == 0) throw ConfigError("monomial: dimension must be positive");
  if (max_order < 1) throw ConfigError("monomial: max_order must be at least 1");
  Monomial m{dim, max_order, {}};
  std::vector<unsigned> prefix;
  for (unsigned deg = 0; deg <= max_order; ++deg) exponents_of_degree(dim, deg, prefix, m.exponents);
  if (m.exponents.size() != binomial(dim + max_order, dim)) throw std::logic_error("monomial enumeration miscounted");
  return Dictionary(std::move(m));
}

Dictionary Dictionary::voronoi_sphere(std::size_t n) {
  if (n < 4) throw ConfigError("voronoi_sphere: need at least 4 cells");
  return Dictionary(VoronoiSphere{fibonacci_sphere(n)});
}

DictionaryKind Dictionary::kind() const noexcept {
  return std::visit(Overloaded{[](const Indicator1d&) { return DictionaryKind::indicator1d; },
                               [](const Monomial&) { return DictionaryKind::monomial; },
                               [](const VoronoiSphere&) { return DictionaryKind::voronoi_sphere; }},
                    impl_);
}

std::size_t Dictionary::size() const noexcept {
  return std::visit(Overloaded{[](const Indicator1d& d) { return d.n; },
                               [](const Monomial& d) { return d.exponents.size(); },
                               [](const VoronoiSphere& d) { return d.centers.size(); }},
                    impl_);
}

std::size_t Dictionary::dim() const noexcept {
  return std::visit(Overloaded{[](const Indicator1d&) -> std::size_t { return 1; },
                               [](const Monomial& d) { return d.dim; },
                               [](const VoronoiSphere&) -> std::size_t { return 3; }},
                    impl_);
}

std::optional<double> Dictionary::bound() const noexcept {
  if (kind() == DictionaryKind::monomial) return std::nullopt;
  return 1.0;
}

std::optional<double> Dictionary::lipschitz() const noexcept { return std::nullopt; }

bool Dictionary::is_partition() const noexcept { return kind() != DictionaryKind::monomial; }

void Dictionary::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim()) throw ConfigError("dictionary evaluated at a point of the wrong dimension");
  std::visit(Overloaded{
                 [&](const Indicator1d& d) {
                   std::fill(out.begin(), out.end(), 0.0);
                   const double v = x[0];
                   if (!(v >= d.a && v <= d.b)) return;
                   auto bin = static_cast<std::size_t>(std::floor((v - d.a) / d.width));
                   out[std::min(bin, d.n - 1)] = 1.0;
                 },
                 [&](const Monomial& d) {
                   thread_local std::vector<double> powers;
                   const std::size_t stride = d.max_order + 1;
                   powers.resize(d.dim * stride);
                   for (std::size_t j = 0; j < d.dim; ++j) {
                     powers[j * stride] = 1.0;
                     for (std::size_t p = 1; p <= d.max_order; ++p)
                       powers[j * stride + p] = powers[j * stride + p - 1] * x[j];
                   }
                   for (std::size_t i = 0; i < d.exponents.size(); ++i) {
                     double v = 1.0;
                     for (std::size_t j = 0; j < d.dim; ++j) v *= powers[j * stride + d.exponents[i][j]];
                     out[i] = v;
                   }
                 },
                 [&](const VoronoiSphere& d) {
                   std::fill(out.begin(), out.end(), 0.0);
                   out[nearest_center(d.centers, x)] = 1.0;
                 }},
             impl_);
}

std::vector<double> Dictionary::eval(std::span<const double> x) const {
  std::vector<double> out(size());
  eval(x, out);
  return out;
}

Eigen::MatrixXd Dictionary::eval_batch(const ParticleEnsemble& points, std::size_t begin, std::size_t end) const {
  if (points.dim() != dim()) throw ConfigError("dictionary dimension does not match the data");
  const std::size_t n = size();
  Eigen::MatrixXd out(end - begin, n);
  std::vector<double> row(n);
  for (std::size_t m = begin; m < end; ++m) {
    eval(points.row(m), row);
    for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(m - begin), static_cast<Eigen::Index>(i)) = row[i];
  }
  return out;
}

Eigen::MatrixXd Dictionary::eval_batch(const ParticleEnsemble& points) const {
  return eval_batch(points, 0, points.count());
}

std::pair<double, double> Dictionary::interval() const {
  const auto* d = std::get_if<Indicator1d>(&impl_);
  if (!d) throw ConfigError("interval() is only defined for indicator1d dictionaries");
  return {d->a, d->b};
}

const std::vector<std::vector<unsigned>>& Dictionary::exponents() const {
  const auto* d = std::get_if<Monomial>(&impl_);
  if (!d) throw ConfigError("exponents() is only defined for monomial dictionaries");
  return d->exponents;
}

std::size_t Dictionary::max_order() const {
  const auto* d = std::get_if<Monomial>(&impl_);
  if (!d) throw ConfigError("max_order() is only defined for monomial dictionaries");
  return d->max_order;
}

const std::vector<std::array<double, 3>>& Dictionary::centers() const {
  const auto* d = std::get_if<VoronoiSphere>(&impl_);
  if (!d) throw ConfigError("centers() is only defined for voronoi_sphere dictionaries");
  return d->centers;
}

std::vector<double> Dictionary::bin_centers() const {
  const auto* d = std::get_if<Indicator1d>(&impl_);
  if (!d) throw ConfigError("bin_centers() is only defined for indicator1d dictionaries");
  std::vector<double> c(d->n);
  for (std::size_t i = 0; i < d->n; ++i) c[i] = d->a + (static_cast<double>(i) + 0.5) * d->width;
  return c;
}

nlohmann::json Dictionary::to_json() const {
  return std::visit(
      Overloaded{[](const Indicator1d& d) { return nlohmann::json{{"kind", "indicator1d"}, {"a", d.a}, {"b", d.b}, {"n", d.n}}; },
                 [](const Monomial& d) { return nlohmann::json{{"kind", "monomial"}, {"max_order", d.max_order}}; },
                 [](const VoronoiSphere& d) { return nlohmann::json{{"kind", "voronoi_sphere"}, {"n", d.centers.size()}}; }},
      impl_);
}

std::string Dictionary::describe() const {
  std::ostringstream s;
  s.precision(17);
  std::visit(Overloaded{[&](const Indicator1d& d) { s << "indicator1d(n=" << d.n << ", [" << d.a << ", " << d.b << "])"; },
                        [&](const Monomial& d) { s << "monomial(d=" << d.dim << ", order=" << d.max_order << ")"; },
                        [&](const VoronoiSphere& d) { s << "voronoi_sphere(n=" << d.centers.size() << ")"; }},
             impl_);
  return s.str();
}

Dictionary dictionary_from_json(const nlohmann::json& spec, std::size_t dim,
                                std::optional<std::pair<double, double>> data_range) {
  try {
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "indicator1d") {
      if (dim != 1) throw ConfigError("indicator1d dictionary requires 1-D data");
      const std::size_t n = spec.value("n", std::size_t{100});
      double a, b;
      if (spec.contains("a") && spec.contains("b")) {
        a = spec.at("a").get<double>();
        b = spec.at("b").get<double>();
      } else if (data_range) {
        a = spec.contains("a") ? spec.at("a").get<double>() : data_range->first;
        b = spec.contains("b") ? spec.at("b").get<double>() : data_range->second;
      } else {
        throw ConfigError("indicator1d dictionary needs \"a\" and \"b\" or a data range");
      }
      return Dictionary::indicator_1d(a, b, n);
    }
    if (kind == "monomial") return Dictionary::monomial(dim, spec.at("max_order").get<std::size_t>());
    if (kind == "voronoi_sphere") {
      if (dim != 3) throw ConfigError("voronoi_sphere dictionary requires 3-D data");
      return Dictionary::voronoi_sphere(spec.at("n").get<std::size_t>());
    }
    throw ConfigError("unknown dictionary kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("dictionary config: ") + e.what());
  }
}

}  // namespace mvk
