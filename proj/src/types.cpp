#include "osync/types.hpp"

namespace osync {

OrthoStack identity_stack(Index n, Index d) {
  if (n < 1 || d < 1) throw InvalidInput("identity_stack: n and d must be positive");
  OrthoStack Z(n, d);
  for (Index i = 0; i < n; ++i) Z.block(i) = Mat::Identity(d, d);
  return Z;
}

double max_block_orthogonality_error(const OrthoStack& S) {
  double worst = 0;
  const Mat id = Mat::Identity(S.d, S.d);
  for (Index i = 0; i < S.n; ++i) {
    const Mat g = S.block(i).transpose() * S.block(i);
    worst = std::max(worst, (g - id).norm());
  }
  return worst;
}

void BlockSym::mirror_upper() {
  const Index m = size();
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) data(j, i) = data(i, j);
}

Mat BlockDiag::apply(const Mat& stack) const {
  if (stack.rows() != n * d)
    throw ShapeMismatch("BlockDiag::apply: stack has wrong row count");
  Mat out(stack.rows(), stack.cols());
  for (Index i = 0; i < n; ++i)
    out.middleRows(i * d, d).noalias() =
        blocks[static_cast<size_t>(i)] * stack.middleRows(i * d, d);
  return out;
}

Mat BlockDiag::dense() const {
  Mat out = Mat::Zero(n * d, n * d);
  for (Index i = 0; i < n; ++i)
    out.block(i * d, i * d, d, d) = blocks[static_cast<size_t>(i)];
  return out;
}

}  // namespace osync
