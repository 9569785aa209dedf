#pragma once

#include <cstdint>

#include "osync/rng.hpp"
#include "osync/types.hpp"

namespace osync {

/// Problem instance description. `diagonal_noise` controls whether the
/// diagonal blocks of the observation keep their noise or are pinned to the
/// identity; the off-diagonal model is unaffected.
struct SynthSpec {
  Index n = 0;
  Index d = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool diagonal_noise = true;

  void validate() const;  // throws InvalidInput
};

/// One Haar-distributed d x d orthogonal matrix: QR of a Gaussian matrix
/// with the sign of diag(R) folded into the columns of Q.
Mat sample_orthogonal(Index d, NormalStream& rng);

/// Haar ground truth, one independent stream per block.
OrthoStack sample_truth(const SynthSpec& spec);
OrthoStack sample_truth(Index n, Index d, std::uint64_t seed);

/// Symmetric noise with i.i.d. N(0,1) entries on and above the diagonal,
/// each entry a pure function of (seed, i, j). Bit-for-bit symmetric and
/// independent of evaluation order.
BlockSym sample_wigner(Index n, Index d, std::uint64_t seed);

/// Observation G G^T + sigma W, exactly symmetric. With diagonal_noise off
/// every diagonal block is set to the identity.
BlockSym assemble_observation(const OrthoStack& G, double sigma,
                              const BlockSym& W, bool diagonal_noise = true);

/// Same observation with block row and column m of the noise zeroed
/// (0 <= m < n). Differs from assemble_observation only in that row/column.
BlockSym leave_one_out(const OrthoStack& G, double sigma, const BlockSym& W,
                       Index m, bool diagonal_noise = true);

}  // namespace osync
