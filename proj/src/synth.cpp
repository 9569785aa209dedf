#include "osync/synth.hpp"

#include <Eigen/QR>
#include <cmath>

namespace osync {

void SynthSpec::validate() const {
  if (n < 1) throw InvalidInput("SynthSpec: n must be positive");
  if (d < 1 || d > 16) throw InvalidInput("SynthSpec: d must be in [1, 16]");
  if (!(sigma >= 0) || !std::isfinite(sigma))
    throw InvalidInput("SynthSpec: sigma must be finite and non-negative");
}

Mat sample_orthogonal(Index d, NormalStream& rng) {
  if (d < 1) throw InvalidInput("sample_orthogonal: d must be positive");
  Mat G(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(d, d);
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fixing diag(R) >= 0 makes the factorization unique, which is what turns
  // "QR of a Gaussian" into Haar measure.
  for (Index k = 0; k < d; ++k)
    if (R(k, k) < 0) Q.col(k) = -Q.col(k);
  return Q;
}

OrthoStack sample_truth(const SynthSpec& spec) {
  spec.validate();
  OrthoStack G(spec.n, spec.d);
  for (Index i = 0; i < spec.n; ++i) {
    NormalStream rng(spec.seed, RngDomain::truth, std::uint32_t(i));
    G.block(i) = sample_orthogonal(spec.d, rng);
  }
  return G;
}

OrthoStack sample_truth(Index n, Index d, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.d = d;
  spec.seed = seed;
  return sample_truth(spec);
}

BlockSym sample_wigner(Index n, Index d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidInput("sample_wigner: n and d must be positive");
  BlockSym W(n, d, MatrixKind::noise);
  const Index m = W.size();
  for (Index i = 0; i < m; ++i)
    for (Index j = i; j < m; ++j) {
      const double z =
          normal_at(seed, RngDomain::wigner, std::uint64_t(i), std::uint64_t(j));
      W.data(i, j) = z;
      W.data(j, i) = z;
    }
  return W;
}

BlockSym assemble_observation(const OrthoStack& G, double sigma,
                              const BlockSym& W, bool diagonal_noise) {
  if (G.n != W.n || G.d != W.d)
    throw ShapeMismatch("assemble_observation: truth and noise disagree");
  if (!(sigma >= 0) || !std::isfinite(sigma))
    throw InvalidInput("assemble_observation: sigma must be finite and non-negative");

  BlockSym A(G.n, G.d, MatrixKind::observation);
  A.data.noalias() = G.data * G.data.transpose();
  A.data += sigma * W.data;
  if (!diagonal_noise) {
    const Mat id = Mat::Identity(G.d, G.d);
    for (Index i = 0; i < G.n; ++i) A.block(i, i) = id;
  }
  A.mirror_upper();
  return A;
}

BlockSym leave_one_out(const OrthoStack& G, double sigma, const BlockSym& W,
                       Index m, bool diagonal_noise) {
  if (m < 0 || m >= G.n)
    throw IndexOutOfRange("leave_one_out: block index out of range");
  BlockSym Wm = W;
  Wm.data.middleRows(m * W.d, W.d).setZero();
  Wm.data.middleCols(m * W.d, W.d).setZero();
  BlockSym A = assemble_observation(G, sigma, Wm, diagonal_noise);
  A.kind = MatrixKind::leave_one_out;
  A.loo_block = int(m);
  return A;
}

}  // namespace osync
