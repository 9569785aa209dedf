#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "osync/types.hpp"

namespace osync {

struct GpmConfig {
  double tol = 1e-10;        // stop when the step is <= tol * sqrt(n d)
  long max_iter = 200;
  double eig_tol = 1e-10;    // spectral initialization residual target
  std::uint64_t seed = 0;    // eigensolver start; the iteration itself is
                             // deterministic in the input
  bool scale_by_n = true;    // iterate on A S / n; the polar projection makes
                             // this a no-op for the iterates themselves
  double min_block_sv = 1e-12;  // degeneracy floor for sigma_min([A S]_i / n)
};

struct ConvergenceTrace {
  std::vector<double> steps;   // d(S^{t+1}, S^t) per iteration
  std::vector<double> ratios;  // steps[t] / steps[t-1]; NaN where the
                               // denominator vanishes
  double init_distance = std::numeric_limits<double>::quiet_NaN();
  long iterations = 0;
  bool converged = false;
};

/// Initial iterate: top-d eigenvector stack of A scaled to phi^T phi = n I_d,
/// then projected block-wise onto the orthogonal group. Throws
/// DegenerateBlock if some block of phi is numerically singular.
std::pair<OrthoStack, SpectralPair> spectral_init(const BlockSym& A,
                                                  const GpmConfig& cfg);

/// One power step: block-wise polar projection of A S (scaled by 1/n).
/// Throws DegenerateBlock when sigma_min([A S]_i / n) < cfg.min_block_sv.
OrthoStack gpm_step(const BlockSym& A, const OrthoStack& S,
                    const GpmConfig& cfg);

struct GpmResult {
  OrthoStack solution;
  ConvergenceTrace trace;
};

/// Full solve from the spectral initialization. `truth`, when given, only
/// fills ConvergenceTrace::init_distance. Deterministic given cfg.seed.
GpmResult run_gpm(const BlockSym& A, const GpmConfig& cfg,
                  const OrthoStack* truth = nullptr);

/// Same iteration from a caller-supplied start (its blocks must clear the
/// degeneracy floor but need not be orthogonal).
GpmResult run_gpm_from(const BlockSym& A, const OrthoStack& S0,
                       const GpmConfig& cfg,
                       const OrthoStack* truth = nullptr);

}  // namespace osync
