#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "mvk/core.hpp"

namespace mvk::test {

// splitmix64: small independent generator for property-test inputs.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t s_;
};

inline ParticleEnsemble ensemble1d(std::initializer_list<double> v) {
  return ParticleEnsemble(v.size(), 1, std::vector<double>(v));
}

inline ParticleEnsemble ensemble1d(const std::vector<double>& v) { return ParticleEnsemble(v.size(), 1, v); }

inline EmpiricalMeasure measure1d(std::initializer_list<double> v) { return EmpiricalMeasure(ensemble1d(v)); }

// b = 0, sigma = 0 in dimension d; initial law Unif[0, 1]^d.
inline ModelSpec frozen_model(std::size_t d) {
  ModelSpec m;
  m.name = "frozen";
  m.dim = d;
  m.drift = [](const StepContext&, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.diffusion = [](const StepContext&, std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.initial_sampler = [](RngStream& s, std::span<double> out) {
    for (auto& v : out) v = s.uniform();
  };
  return m;
}

}  // namespace mvk::test
