#pragma once

#include <cstdint>

#include "osync/types.hpp"

namespace osync {

/// Block-diagonal multiplier of a candidate solution: for each block of
/// T = A S with SVD U Sigma V^T, the i-th multiplier block is
/// U_i Sigma_i U_i^T, i.e. the symmetric PSD factor (T_i T_i^T)^(1/2).
/// At a fixed point of the power iteration, A S = Lambda S holds.
BlockDiag build_multiplier(const BlockSym& A, const OrthoStack& S);

enum class Verdict { certified_unique, not_certified };

const char* to_string(Verdict v);

struct CertifyTols {
  // Negative values select the size-aware defaults 1e-8 * n * sqrt(d) and
  // 1e-8 * n at verification time.
  double residual_tol = -1;
  double psd_tol = -1;
  double eig_tol = 1e-6;     // deflated eigensolve residual target
  std::uint64_t seed = 0;
};

struct CertificateReport {
  double fixed_point_residual = 0;  // ||A S - Lambda S||_F
  double lambda_min_blocks = 0;     // min_i lambda_min(Lambda_ii)
  double lambda_d_plus_1 = 0;       // smallest eigenvalue of Lambda - A off col(S)
  double residual_tol_used = 0;
  double psd_tol_used = 0;
  Verdict verdict = Verdict::not_certified;
  struct {
    bool fixed_point_ok = false;
    bool blocks_psd_ok = false;
    bool complement_psd_ok = false;
    bool numerical_failure = false;  // eigensolve threw; verdict forced negative
  } details;
};

/// Optimality certificate: S S^T is the unique maximizer of <A, X> over the
/// feasible spectrahedron exactly when A S = Lambda S, Lambda - A is PSD,
/// and its rank is (n-1) d. Numerically that reads: fixed-point residual
/// within residual_tol, every multiplier block PD, and the smallest
/// eigenvalue of Lambda - A orthogonal to col(S) above psd_tol.
CertificateReport verify_certificate(const BlockSym& A, const OrthoStack& S,
                                     const CertifyTols& tols = {});

/// Objective <A, S S^T> = trace(S^T A S).
double objective_value(const BlockSym& A, const OrthoStack& S);

}  // namespace osync
