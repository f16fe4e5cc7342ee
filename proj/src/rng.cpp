#include "mvk/rng.hpp"

#include <cmath>
#include <numbers>

namespace mvk {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

RngStream::RngStream(Philox4x32::Key key, std::uint64_t particle, std::uint32_t step) noexcept
    : key_(key),
      counter_{static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32), step, 0u} {}

void RngStream::refill() noexcept {
  const auto out = Philox4x32::generate(counter_, key_);
  ++counter_[3];
  buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  buffered_ = 2;
}

double RngStream::uniform() noexcept {
  if (buffered_ == 0) refill();
  const std::uint64_t bits = buffer_[2 - buffered_];
  --buffered_;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

RngPlan::RngPlan(std::uint64_t master_seed) noexcept
    : seed_(master_seed),
      key_{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32)} {}

RngStream RngPlan::stream(std::uint64_t particle, std::uint32_t step) const noexcept {
  return RngStream(key_, particle, step);
}

RngPlan RngPlan::derive(std::uint64_t tag) const noexcept {
  return RngPlan(splitmix64(seed_ ^ splitmix64(tag)));
}

}  // namespace mvk
