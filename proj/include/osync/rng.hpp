#pragma once

#include <array>
#include <cstdint>

namespace osync {

/// Identifies the generator scheme recorded in file headers and reports.
/// Bit-exact reproducibility is promised within this implementation only.
inline constexpr char kPrngId[] = "philox4x32-10/box-muller";

/// Philox 4x32 block function, 10 rounds (Salmon et al., SC'11).
/// Pure: the same counter and key always give the same four words.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Domain tags keep distinct uses of one user seed statistically independent.
enum class RngDomain : std::uint32_t {
  wigner = 1,      // entry-addressed symmetric noise
  truth = 2,       // ground-truth block sampling
  eigs = 3,        // eigensolver start blocks
  norm = 4,        // operator-norm probe vectors
  derive = 5,      // per-trial seed derivation in experiment drivers
};

/// One standard normal addressed by (seed, domain, a, b). Evaluation order
/// never matters: the value is a pure function of the address.
double normal_at(std::uint64_t seed, RngDomain domain, std::uint64_t a,
                 std::uint64_t b);

/// Collapses (seed, domain, a, b) to a 64-bit sub-seed; used to hand every
/// experiment trial its own independent stream.
std::uint64_t derive_seed(std::uint64_t seed, RngDomain domain,
                          std::uint64_t a, std::uint64_t b);

/// Sequential normal stream on top of the same block function. Streams with
/// distinct (seed, domain, stream) triples never share counter blocks.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, RngDomain domain, std::uint32_t stream = 0);

  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
  std::uint32_t domain_;
  std::uint64_t counter_ = 0;
  double cached_ = 0;
  bool has_cached_ = false;
};

}  // namespace osync
