#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include "osync/types.hpp"

namespace osync {

template <typename Scalar>
struct SmallSvdT {
  MatX<Scalar> U;
  VecX<Scalar> S;  // descending, non-negative
  MatX<Scalar> V;
};
using SmallSvd = SmallSvdT<double>;

/// SVD of a square d x d matrix (d <= 16) by one-sided Jacobi rotations.
/// Deterministic: fixed cyclic sweep order, singular values sorted
/// descending, and every left singular vector is flipped so that its
/// largest-magnitude entry is positive (ties broken by lowest row index).
/// Columns whose singular value vanishes get a deterministic orthonormal
/// completion, so U and V are always fully orthogonal.
template <typename Derived>
SmallSvdT<typename Derived::Scalar> svd_small(
    const Eigen::MatrixBase<Derived>& M_in) {
  using Scalar = typename Derived::Scalar;
  using MatS = MatX<Scalar>;
  using VecS = VecX<Scalar>;

  const Index d = M_in.rows();
  if (M_in.cols() != d) throw ShapeMismatch("svd_small: matrix must be square");
  if (d < 1 || d > 16)
    throw InvalidInput("svd_small: block side must be in [1, 16]");
  if (!M_in.allFinite()) throw InvalidInput("svd_small: non-finite entries");

  // B accumulates M * V; its columns converge to U * diag(S).
  MatS B = M_in;
  MatS V = MatS::Identity(d, d);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < d; ++p) {
      for (Index q = p + 1; q < d; ++q) {
        const Scalar app = B.col(p).squaredNorm();
        const Scalar aqq = B.col(q).squaredNorm();
        const Scalar apq = B.col(p).dot(B.col(q));
        if (std::abs(apq) <= Scalar(16) * eps * std::sqrt(app * aqq)) continue;
        rotated = true;
        const Scalar zeta = (aqq - app) / (2 * apq);
        const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(zeta) + std::hypot(Scalar(1), zeta));
        const Scalar c = 1 / std::hypot(Scalar(1), t);
        const Scalar s = c * t;
        for (Index r = 0; r < d; ++r) {
          const Scalar bp = B(r, p), bq = B(r, q);
          B(r, p) = c * bp - s * bq;
          B(r, q) = s * bp + c * bq;
          const Scalar vp = V(r, p), vq = V(r, q);
          V(r, p) = c * vp - s * vq;
          V(r, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  VecS sv(d);
  for (Index k = 0; k < d; ++k) sv(k) = B.col(k).norm();

  // Stable descending order keeps ties deterministic.
  std::array<Index, 16> order;
  for (Index k = 0; k < d; ++k) order[size_t(k)] = k;
  std::stable_sort(order.begin(), order.begin() + d,
                   [&sv](Index a, Index b) { return sv(a) > sv(b); });

  SmallSvdT<Scalar> out;
  out.U.resize(d, d);
  out.V.resize(d, d);
  out.S.resize(d);
  Index rank = d;
  for (Index k = 0; k < d; ++k) {
    const Index src = order[size_t(k)];
    out.S(k) = sv(src);
    out.V.col(k) = V.col(src);
    if (sv(src) > Scalar(0)) {
      out.U.col(k) = B.col(src) / sv(src);
    } else {
      if (rank == d) rank = k;
      out.U.col(k).setZero();
    }
  }

  // Orthonormal completion for exactly-zero singular values: sweep the
  // canonical basis and keep the first residuals with enough mass.
  for (Index k = rank; k < d; ++k) {
    for (Index r = 0; r < d; ++r) {
      VecS cand = VecS::Zero(d);
      cand(r) = 1;
      cand -= out.U.leftCols(k) * (out.U.leftCols(k).transpose() * cand);
      const Scalar nrm = cand.norm();
      if (nrm > Scalar(0.5)) {
        out.U.col(k) = cand / nrm;
        break;
      }
    }
  }

  for (Index k = 0; k < d; ++k) {
    Index arg = 0;
    Scalar best = std::abs(out.U(0, k));
    for (Index r = 1; r < d; ++r) {
      const Scalar a = std::abs(out.U(r, k));
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (out.U(arg, k) < Scalar(0)) {
      out.U.col(k) = -out.U.col(k);
      out.V.col(k) = -out.V.col(k);
    }
  }
  return out;
}

/// Orthogonal polar factor U V^T, the orthogonal matrix nearest M in
/// Frobenius norm. Well defined for singular M too via the deterministic
/// SVD completion (polar of the zero matrix is the identity).
template <typename Derived>
MatX<typename Derived::Scalar> polar(const Eigen::MatrixBase<Derived>& M) {
  const auto svd = svd_small(M);
  return svd.U * svd.V.transpose();
}

/// Block-wise polar projection of an (n*d) x d stack.
OrthoStack polar_stack(const Mat& X, Index d);

/// Top-d eigenpairs of a symmetric matrix by blocked subspace iteration with
/// Rayleigh-Ritz extraction (block size d+2; the guard pairs are dropped).
/// The iteration runs on A + mu I with mu slightly above an operator-norm
/// estimate, so the algebraically largest eigenvalues dominate regardless of
/// the sign of the spectrum. Deterministic given the seed. Stops when
/// ||A phi - phi diag(lambda)||_F <= tol * ||A|| at the returned scaling
/// phi^T phi = n I_d; throws NoConvergence after 10000 sweeps.
SpectralPair top_eigs(const BlockSym& A, Index d, double tol,
                      std::uint64_t seed);

/// Early-exit thresholds for the deflated eigensolve. Crossing `decide_below`
/// is rigorous: the running value is an upper bound on the answer, so once it
/// drops to the threshold the "not above" outcome cannot be revised.
/// `decide_above` trips once the answer exceeds the threshold by more than
/// the current Ritz residual; after either trip the value is polished until
/// it plateaus. Defaults disable both exits.
struct DeflationExit {
  double decide_below = -std::numeric_limits<double>::infinity();
  double decide_above = std::numeric_limits<double>::infinity();
};

/// Smallest eigenvalue of symmetric M restricted to the orthogonal
/// complement of col(S): orthonormalize S, bound mu >= ||M|| by power
/// iteration (30 steps, 1.05 safety factor), run subspace iteration on
/// mu I - M with the S directions projected out, and return mu minus the
/// largest Ritz value. Absolute accuracy tol * ||M|| at the full-tolerance
/// exit; throws RankDeficient when S lacks full column rank and
/// NoConvergence past 10000 sweeps.
double lambda_after_deflation(const BlockSym& M, const Mat& S, double tol,
                              std::uint64_t seed,
                              const DeflationExit& exit = {});

/// Cheap operator-norm estimate by blocked power iteration with a fixed
/// internal start seed; returns 1.05x the best Rayleigh estimate, which in
/// practice brackets ||M|| <= estimate <= 1.1 ||M||.
double op_norm_estimate(const BlockSym& M);

}  // namespace osync
