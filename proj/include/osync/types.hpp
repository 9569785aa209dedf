#pragma once

#include <Eigen/Dense>
#include <vector>

#include "osync/errors.hpp"

namespace osync {

using Index = Eigen::Index;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = MatX<double>;
using Vec = VecX<double>;

/// n stacked d x d blocks, stored as one (n*d) x d matrix. The name is a
/// promise kept by the producers: every block is orthogonal (up to roundoff)
/// whenever the stack comes out of a polar projection or a sampler.
struct OrthoStack {
  Index n = 0;
  Index d = 0;
  Mat data;  // (n*d) x d

  OrthoStack() = default;
  OrthoStack(Index n_, Index d_) : n(n_), d(d_), data(Mat::Zero(n_ * d_, d_)) {}

  Index rows() const { return n * d; }

  auto block(Index i) { return data.middleRows(i * d, d); }
  auto block(Index i) const { return data.middleRows(i * d, d); }
};

/// Stack of n identity blocks.
OrthoStack identity_stack(Index n, Index d);

/// Largest deviation of any block from orthogonality, max_i ||B_i^T B_i - I||_F.
double max_block_orthogonality_error(const OrthoStack& S);

enum class MatrixKind { observation, noise, leave_one_out, generic };

/// Dense symmetric (n*d) x (n*d) matrix with d x d block structure.
/// Constructors and samplers enforce bit-for-bit symmetry.
struct BlockSym {
  Index n = 0;
  Index d = 0;
  MatrixKind kind = MatrixKind::generic;
  int loo_block = -1;  // zeroed block row/column when kind == leave_one_out
  Mat data;

  BlockSym() = default;
  BlockSym(Index n_, Index d_, MatrixKind kind_ = MatrixKind::generic)
      : n(n_), d(d_), kind(kind_), data(Mat::Zero(n_ * d_, n_ * d_)) {}

  Index size() const { return n * d; }

  auto block(Index i, Index j) { return data.block(i * d, j * d, d, d); }
  auto block(Index i, Index j) const { return data.block(i * d, j * d, d, d); }

  /// Copies the upper triangle onto the lower one, entry for entry.
  void mirror_upper();
};

/// Block-diagonal matrix with symmetric d x d blocks.
struct BlockDiag {
  Index n = 0;
  Index d = 0;
  std::vector<Mat> blocks;

  BlockDiag() = default;
  BlockDiag(Index n_, Index d_)
      : n(n_), d(d_), blocks(static_cast<size_t>(n_), Mat::Zero(d_, d_)) {}

  /// Block-wise product with an (n*d) x d stack.
  Mat apply(const Mat& stack) const;

  /// Dense (n*d) x (n*d) form.
  Mat dense() const;
};

/// Top eigenpairs of a symmetric matrix. `phi` carries the scaling
/// phi^T phi = n I_d used by the solver downstream.
struct SpectralPair {
  Mat phi;          // (n*d) x d
  Vec eigenvalues;  // d entries, descending
  double gap = 0;   // lambda_d - lambda_{d+1} estimate; +inf when there is
                    // no (d+1)-th eigenvalue
  long iterations = 0;
};

}  // namespace osync
