#pragma once

#include <cmath>

#include "osync/blockmat.hpp"
#include "osync/types.hpp"

namespace osync {

/// Best single orthogonal alignment of two stacks and the distances it
/// achieves. `Q` minimizes ||Y - X Q||_F over orthogonal Q.
struct AlignmentResult {
  Mat Q;
  double dF = 0;             // ||Y - X Q||_F at the optimum
  double blockwise_max = 0;  // max_i ||Y_i - X_i Q||_F at the same Q
};

/// Orthogonal Q minimizing ||Y - X Q||_F, i.e. the polar factor of X^T Y.
template <typename DX, typename DY>
MatX<typename DX::Scalar> optimal_rotation(const Eigen::MatrixBase<DX>& X,
                                           const Eigen::MatrixBase<DY>& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw ShapeMismatch("optimal_rotation: stacks must have equal shape");
  return polar(X.transpose() * Y);
}

/// Frobenius distance between stacks modulo one global right rotation,
/// d(X, Y) = min_Q ||Y - X Q||_F, with the minimizer and the worst
/// aligned block. Symmetric in its arguments.
AlignmentResult distance_f(const OrthoStack& X, const OrthoStack& Y);

/// Worst-block recovery error max_i ||S_i - G_i Q||_F at the global
/// alignment Q of G onto S.
double blockwise_error(const OrthoStack& S, const OrthoStack& G);

/// Scale sigma_star(n, d) = sqrt(n) / (sqrt(d) (sqrt(d) + sqrt(log n)))
/// that normalizes noise levels across problem sizes. Natural logarithm.
double sigma_star(Index n, Index d);

/// Default diagnostic radii. Only diagnostics depend on these; the solver
/// and the certificate never read them.
double default_epsilon(Index d);                   // 1 / (32 sqrt(d))
double default_kappa(Index d);                     // 3 x epsilon
double default_xi(Index d);                        // 3 x kappa + 1

struct BasinReport {
  double epsilon_hat = 0;    // d(S, Z) / sqrt(n d)
  double xi_hat = 0;         // max_m ||W_m^T S||_F / (sqrt(n d)(sqrt(d) + 4 sqrt(log n)))
  double eta = 0;            // sigma (sqrt(d) + sqrt(log n)) / sqrt(n)
  double sigma_min_gram = 0; // sigma_min(Z^T S) / n
  bool in_n_eps = false;
  bool in_n_xi = false;
};

/// Measures where an iterate sits relative to the reference stack Z and the
/// noise W: distance radius, worst noise column action, and the smallest
/// singular value of the alignment Gram matrix. Negative radii select the
/// defaults above.
BasinReport basin_check(const OrthoStack& S, const OrthoStack& Z,
                        const BlockSym& W, double sigma, double eps = -1,
                        double xi = -1);

}  // namespace osync
