#include "osync/rng.hpp"

#include <cmath>

namespace osync {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(
    const std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
  const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
  return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1),
          std::uint32_t(p0 >> 32) ^ c[3] ^ k[1], std::uint32_t(p0)};
}

// Counter word 3 carries the domain tag in the low bits and an address-mode
// tag in the high byte, so entry-addressed draws and stream draws can never
// collide under the same seed.
constexpr std::uint32_t kModeEntry = 0x01u << 24;
constexpr std::uint32_t kModeStream = 0x02u << 24;
constexpr std::uint32_t kModeDerive = 0x03u << 24;

inline std::array<std::uint32_t, 2> key_of(std::uint64_t seed) {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
}

// Maps four generator words to a Box-Muller pair. The +1 keeps u1 in (0, 1]
// so the logarithm stays finite.
inline void box_muller(const std::array<std::uint32_t, 4>& w, double* z0,
                       double* z1) {
  constexpr double kTwoPow64 = 18446744073709551616.0;
  const double u1 =
      (double(std::uint64_t(w[0]) << 32 | w[1]) + 1.0) / kTwoPow64;
  const double u2 = double(std::uint64_t(w[2]) << 32 | w[3]) / kTwoPow64;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  *z0 = r * std::cos(t);
  if (z1) *z1 = r * std::sin(t);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0;;) {
    counter = round_once(counter, key);
    if (++r == 10) break;
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

double normal_at(std::uint64_t seed, RngDomain domain, std::uint64_t a,
                 std::uint64_t b) {
  const std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(a), std::uint32_t(b),
      std::uint32_t(a >> 32) ^ (std::uint32_t(b >> 32) << 16),
      std::uint32_t(domain) | kModeEntry};
  double z0;
  box_muller(philox4x32(ctr, key_of(seed)), &z0, nullptr);
  return z0;
}

std::uint64_t derive_seed(std::uint64_t seed, RngDomain domain,
                          std::uint64_t a, std::uint64_t b) {
  const std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(a), std::uint32_t(b),
      std::uint32_t(a >> 32) ^ (std::uint32_t(b >> 32) << 16),
      std::uint32_t(domain) | kModeDerive};
  const auto w = philox4x32(ctr, key_of(seed));
  return std::uint64_t(w[0]) << 32 | w[1];
}

NormalStream::NormalStream(std::uint64_t seed, RngDomain domain,
                           std::uint32_t stream)
    : key_(key_of(seed)),
      stream_(stream),
      domain_(std::uint32_t(domain) | kModeStream) {}

double NormalStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const std::array<std::uint32_t, 4> ctr = {std::uint32_t(counter_),
                                            std::uint32_t(counter_ >> 32),
                                            stream_, domain_};
  ++counter_;
  double z0;
  box_muller(philox4x32(ctr, key_), &z0, &cached_);
  has_cached_ = true;
  return z0;
}

}  // namespace osync
