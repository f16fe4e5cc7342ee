#pragma once

#include <array>
#include <cstdint>

namespace mvk {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output depends only on (key, counter), so any draw can be reproduced
/// without replaying a sequence.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// A stream of uniforms/normals addressed by (master key, particle, step).
/// Draws are produced in blocks of four 32-bit words; each block yields
/// two 53-bit uniforms.
class RngStream {
 public:
  RngStream(Philox4x32::Key key, std::uint64_t particle, std::uint32_t step) noexcept;

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic per-particle stream factory.
///
/// stream(m, k) is a pure function of (master seed, m, k), so particle loops
/// can run in any order or thread layout and still consume identical draws.
class RngPlan {
 public:
  /// Step tag reserved for initial-condition sampling.
  static constexpr std::uint32_t kInitialStep = 0xFFFFFFFFu;
  /// Step tag reserved for model-level constants (random matrices etc.).
  static constexpr std::uint32_t kModelStep = 0xFFFFFFFEu;

  explicit RngPlan(std::uint64_t master_seed) noexcept;

  std::uint64_t master_seed() const noexcept { return seed_; }

  RngStream stream(std::uint64_t particle, std::uint32_t step) const noexcept;
  RngStream initial_stream(std::uint64_t particle) const noexcept {
    return stream(particle, kInitialStep);
  }

  /// Independent plan for another purpose (decoupled data, model constants, ...).
  RngPlan derive(std::uint64_t tag) const noexcept;

 private:
  std::uint64_t seed_;
  Philox4x32::Key key_;
};

/// Purpose tags for RngPlan::derive.
namespace rng_purpose {
inline constexpr std::uint64_t ips = 0x1;
inline constexpr std::uint64_t decoupled = 0x2;
inline constexpr std::uint64_t model = 0x3;
inline constexpr std::uint64_t sweep = 0x4;
inline constexpr std::uint64_t subsample = 0x5;
}  // namespace rng_purpose

}  // namespace mvk
