#include "osync/certify.hpp"

#include <cmath>

#include "osync/blockmat.hpp"

namespace osync {

const char* to_string(Verdict v) {
  return v == Verdict::certified_unique ? "CERTIFIED_UNIQUE" : "NOT_CERTIFIED";
}

BlockDiag build_multiplier(const BlockSym& A, const OrthoStack& S) {
  if (A.n != S.n || A.d != S.d)
    throw ShapeMismatch("build_multiplier: matrix and stack shapes disagree");
  const Mat T = A.data * S.data;
  BlockDiag lambda(A.n, A.d);
  for (Index i = 0; i < A.n; ++i) {
    const auto svd = svd_small(T.middleRows(i * A.d, A.d));
    Mat block = svd.U * svd.S.asDiagonal() * svd.U.transpose();
    lambda.blocks[size_t(i)] = 0.5 * (block + block.transpose());
  }
  return lambda;
}

CertificateReport verify_certificate(const BlockSym& A, const OrthoStack& S,
                                     const CertifyTols& tols) {
  const Index n = A.n, d = A.d;
  CertificateReport rep;
  rep.residual_tol_used =
      tols.residual_tol >= 0 ? tols.residual_tol
                             : 1e-8 * double(n) * std::sqrt(double(d));
  rep.psd_tol_used = tols.psd_tol >= 0 ? tols.psd_tol : 1e-8 * double(n);

  const BlockDiag lambda = build_multiplier(A, S);
  rep.fixed_point_residual =
      (A.data * S.data - lambda.apply(S.data)).norm();

  rep.lambda_min_blocks = std::numeric_limits<double>::infinity();
  for (const Mat& block : lambda.blocks) {
    // signed smallest eigenvalue; the blocks are symmetric by construction
    Eigen::SelfAdjointEigenSolver<Mat> es(block, Eigen::EigenvaluesOnly);
    rep.lambda_min_blocks =
        std::min(rep.lambda_min_blocks, es.eigenvalues().minCoeff());
  }

  BlockSym gap(n, d);
  gap.data = lambda.dense() - A.data;
  gap.mirror_upper();
  try {
    // Either decision exit is final, so the eigensolve can stop as soon as
    // the verdict is known instead of resolving the full accuracy target.
    DeflationExit exit;
    exit.decide_below = rep.psd_tol_used;
    exit.decide_above = rep.psd_tol_used;
    rep.lambda_d_plus_1 =
        lambda_after_deflation(gap, S.data, tols.eig_tol, tols.seed, exit);
  } catch (const std::runtime_error&) {
    rep.details.numerical_failure = true;
    rep.lambda_d_plus_1 = std::numeric_limits<double>::quiet_NaN();
  }

  rep.details.fixed_point_ok =
      rep.fixed_point_residual <= rep.residual_tol_used;
  rep.details.blocks_psd_ok = rep.lambda_min_blocks > 0;
  rep.details.complement_psd_ok =
      !rep.details.numerical_failure && rep.lambda_d_plus_1 > rep.psd_tol_used;
  rep.verdict = rep.details.fixed_point_ok && rep.details.blocks_psd_ok &&
                        rep.details.complement_psd_ok
                    ? Verdict::certified_unique
                    : Verdict::not_certified;
  return rep;
}

double objective_value(const BlockSym& A, const OrthoStack& S) {
  if (A.n != S.n || A.d != S.d)
    throw ShapeMismatch("objective_value: matrix and stack shapes disagree");
  return (S.data.transpose() * (A.data * S.data)).trace();
}

}  // namespace osync
