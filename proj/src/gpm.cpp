#include "osync/gpm.hpp"

#include "osync/align.hpp"
#include "osync/blockmat.hpp"

namespace osync {
namespace {

// Projects the stack X onto orthogonal blocks, enforcing the degeneracy
// floor on the singular values of X_i / n.
OrthoStack project_blocks(const Mat& X, Index n, Index d, double min_block_sv,
                          const char* who) {
  OrthoStack out(n, d);
  const double inv_n = 1.0 / double(n);
  for (Index i = 0; i < n; ++i) {
    const auto svd = svd_small(X.middleRows(i * d, d) * inv_n);
    if (svd.S.minCoeff() < min_block_sv)
      throw DegenerateBlock(std::string(who) + ": numerically singular block",
                            i);
    out.block(i) = svd.U * svd.V.transpose();
  }
  return out;
}

void check_config(const GpmConfig& cfg) {
  if (!(cfg.tol > 0)) throw InvalidInput("GpmConfig: tol must be positive");
  if (cfg.max_iter < 1) throw InvalidInput("GpmConfig: max_iter must be positive");
  if (!(cfg.eig_tol > 0)) throw InvalidInput("GpmConfig: eig_tol must be positive");
  if (!(cfg.min_block_sv > 0))
    throw InvalidInput("GpmConfig: min_block_sv must be positive");
}

GpmResult iterate(const BlockSym& A, OrthoStack S, const GpmConfig& cfg,
                  const OrthoStack* truth) {
  ConvergenceTrace trace;
  if (truth) trace.init_distance = distance_f(*truth, S).dF;
  const double stop = cfg.tol * std::sqrt(double(A.n * A.d));

  for (long t = 0; t < cfg.max_iter; ++t) {
    OrthoStack next;
    try {
      next = gpm_step(A, S, cfg);
    } catch (const DegenerateBlock& e) {
      throw DegenerateBlock("gpm_step: numerically singular block", e.block(),
                            t);
    }
    const double step = distance_f(S, next).dF;
    trace.steps.push_back(step);
    // ratios[t] parallels steps[t]; the first entry has no predecessor
    if (trace.steps.size() == 1) {
      trace.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      const double prev = trace.steps[trace.steps.size() - 2];
      trace.ratios.push_back(prev > 0
                                 ? step / prev
                                 : std::numeric_limits<double>::quiet_NaN());
    }
    S = std::move(next);
    if (step <= stop) {
      trace.converged = true;
      break;
    }
  }
  trace.iterations = long(trace.steps.size());
  return {std::move(S), std::move(trace)};
}

}  // namespace

std::pair<OrthoStack, SpectralPair> spectral_init(const BlockSym& A,
                                                  const GpmConfig& cfg) {
  check_config(cfg);
  SpectralPair pair = top_eigs(A, A.d, cfg.eig_tol, cfg.seed);
  // The blocks of phi hover around orthogonality already; the floor only
  // trips when the noise has destroyed the signal.
  OrthoStack S0(A.n, A.d);
  for (Index i = 0; i < A.n; ++i) {
    const auto svd = svd_small(pair.phi.middleRows(i * A.d, A.d));
    if (svd.S.minCoeff() < cfg.min_block_sv)
      throw DegenerateBlock("spectral_init: numerically singular block", i);
    S0.block(i) = svd.U * svd.V.transpose();
  }
  return {std::move(S0), std::move(pair)};
}

OrthoStack gpm_step(const BlockSym& A, const OrthoStack& S,
                    const GpmConfig& cfg) {
  if (A.n != S.n || A.d != S.d)
    throw ShapeMismatch("gpm_step: matrix and stack shapes disagree");
  // The polar factor is invariant under positive scaling, so the 1/n of the
  // scaled iteration is applied unconditionally; cfg.scale_by_n documents
  // intent without changing the iterates.
  (void)cfg.scale_by_n;
  const Mat T = A.data * S.data;
  return project_blocks(T, A.n, A.d, cfg.min_block_sv, "gpm_step");
}

GpmResult run_gpm(const BlockSym& A, const GpmConfig& cfg,
                  const OrthoStack* truth) {
  auto [S0, pair] = spectral_init(A, cfg);
  (void)pair;
  return iterate(A, std::move(S0), cfg, truth);
}

GpmResult run_gpm_from(const BlockSym& A, const OrthoStack& S0,
                       const GpmConfig& cfg, const OrthoStack* truth) {
  check_config(cfg);
  if (A.n != S0.n || A.d != S0.d)
    throw ShapeMismatch("run_gpm_from: matrix and start shapes disagree");
  for (Index i = 0; i < S0.n; ++i) {
    const auto svd = svd_small(S0.block(i));
    if (svd.S.minCoeff() < cfg.min_block_sv)
      throw DegenerateBlock("run_gpm_from: numerically singular start block",
                            i, 0);
  }
  return iterate(A, S0, cfg, truth);
}

}  // namespace osync
