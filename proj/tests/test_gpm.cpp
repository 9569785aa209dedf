#include <doctest.h>

#include <cmath>

#include "osync/align.hpp"
#include "osync/certify.hpp"
#include "osync/gpm.hpp"
#include "osync/synth.hpp"

using namespace osync;

TEST_CASE("spectral_init produces a feasible blockwise-orthogonal start") {
  const Index n = 30, d = 3;
  const OrthoStack G = sample_truth(n, d, 11);
  const BlockSym W = sample_wigner(n, d, 11);
  const BlockSym A = assemble_observation(G, 0.3 * sigma_star(n, d), W);
  GpmConfig cfg;
  const auto [S0, spectral] = spectral_init(A, cfg);
  CHECK(S0.n == n);
  CHECK(max_block_orthogonality_error(S0) <= 1e-10);
  CHECK(spectral.eigenvalues.size() == d);
  CHECK(spectral.eigenvalues(0) >= spectral.eigenvalues(d - 1));
  // close to the truth already at mild noise
  CHECK(distance_f(S0, G).dF <= 0.5 * std::sqrt(double(n * d)));
}

TEST_CASE("spectral blocks are near-orthogonal at moderate noise") {
  // with phi^T phi = n I_d the blocks of phi have singular values close to 1
  const Index n = 100, d = 3;
  const double sigma = 0.2 * sigma_star(n, d);
  const double eta = sigma *
                     (std::sqrt(double(d)) + std::sqrt(std::log(double(n)))) /
                     std::sqrt(double(n));
  GpmConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const OrthoStack G = sample_truth(n, d, 500 + seed);
    const BlockSym W = sample_wigner(n, d, 500 + seed);
    const BlockSym A = assemble_observation(G, sigma, W);
    const auto [S0, spectral] = spectral_init(A, cfg);
    for (Index i = 0; i < n; ++i) {
      const auto svd = svd_small(Mat(spectral.phi.middleRows(i * d, d)));
      REQUIRE(svd.S(0) <= 1.0 + 20.0 * eta);
      REQUIRE(svd.S(d - 1) >= 1.0 - 20.0 * eta);
    }
  }
}

TEST_CASE("gpm_step commutes with a global right rotation") {
  const Index n = 15, d = 3;
  const OrthoStack G = sample_truth(n, d, 23);
  const BlockSym W = sample_wigner(n, d, 23);
  const BlockSym A = assemble_observation(G, 0.4, W);
  GpmConfig cfg;
  NormalStream haar(24, RngDomain::truth, 3);
  const Mat Q = sample_orthogonal(d, haar);
  const OrthoStack S = sample_truth(n, d, 25);
  OrthoStack SQ = S;
  SQ.data = S.data * Q;
  const OrthoStack left = gpm_step(A, SQ, cfg);
  const OrthoStack right = gpm_step(A, S, cfg);
  CHECK((left.data - right.data * Q).norm() <= 1e-10);
}

TEST_CASE("one noiseless step recovers the truth from a generic start") {
  // [A S]_i = Z_i (Z^T S), so the blockwise polar equals Z_i polar(Z^T S)
  // and a single step lands on the gauge orbit of the truth
  const Index n = 25, d = 2;
  const OrthoStack Z = sample_truth(n, d, 29);
  const BlockSym W = sample_wigner(n, d, 29);
  const BlockSym A = assemble_observation(Z, 0.0, W);
  GpmConfig cfg;
  const OrthoStack S = sample_truth(n, d, 30);  // independent of Z
  const OrthoStack stepped = gpm_step(A, S, cfg);
  CHECK(distance_f(stepped, Z).dF <= 1e-10);
}

TEST_CASE("gpm_step is invariant to positive scaling of the observation") {
  const Index n = 12, d = 2;
  const OrthoStack G = sample_truth(n, d, 21);
  const BlockSym W = sample_wigner(n, d, 21);
  const BlockSym A = assemble_observation(G, 0.4, W);
  BlockSym A2 = A;
  A2.data *= 2.0;
  GpmConfig cfg;
  const OrthoStack S = sample_truth(n, d, 22);
  const OrthoStack stepped = gpm_step(A, S, cfg);
  const OrthoStack stepped2 = gpm_step(A2, S, cfg);
  CHECK(max_block_orthogonality_error(stepped) <= 1e-12);
  CHECK((stepped.data - stepped2.data).norm() <= 1e-12);
}

TEST_CASE("noiseless recovery is exact after one projection") {
  const Index n = 50, d = 3;
  const OrthoStack G = sample_truth(n, d, 7);
  const BlockSym W = sample_wigner(n, d, 7);
  const BlockSym A = assemble_observation(G, 0.0, W);
  GpmConfig cfg;
  const GpmResult res = run_gpm(A, cfg, &G);

  CHECK(res.trace.converged);
  CHECK(res.trace.iterations <= 5);
  CHECK(distance_f(res.solution, G).dF <= 1e-8);
  CHECK(res.trace.init_distance == res.trace.init_distance);  // not NaN
}

TEST_CASE("iterates contract toward the fixed point at moderate noise") {
  const Index n = 80, d = 3;
  const double sigma = 0.1 * sigma_star(n, d);
  const OrthoStack G = sample_truth(n, d, 31);
  const BlockSym W = sample_wigner(n, d, 31);
  const BlockSym A = assemble_observation(G, sigma, W);
  GpmConfig cfg;
  const GpmResult res = run_gpm(A, cfg, &G);

  REQUIRE(res.trace.converged);
  CHECK(res.trace.iterations <= cfg.max_iter);
  // error bound eta sqrt(d) with eta = sigma (sqrt(d)+sqrt(log n))/sqrt(n),
  // times slack for the unspecified constant
  const double eta = sigma * (std::sqrt(double(d)) + std::sqrt(std::log(double(n)))) /
                     std::sqrt(double(n));
  CHECK(blockwise_error(res.solution, G) <= 3.0 * eta * std::sqrt(double(d)));
  CHECK(blockwise_error(res.solution, G) > 0.0);

  // step sizes decay geometrically once the iteration settles
  const auto& r = res.trace.ratios;
  REQUIRE(r.size() == res.trace.steps.size());
  for (std::size_t t = 1; t < r.size(); ++t) {
    if (std::isnan(r[t])) continue;
    CHECK(r[t] <= 0.95);
  }
  // trace bookkeeping: steps[t] = d_F(S^{t+1}, S^t), ratios[0] is undefined
  CHECK(std::isnan(r[0]));
  CHECK(res.trace.steps.back() <= cfg.tol * std::sqrt(double(n * d)));
}

TEST_CASE("run_gpm_from accepts a custom start and validates it") {
  const Index n = 20, d = 2;
  const OrthoStack G = sample_truth(n, d, 41);
  const BlockSym W = sample_wigner(n, d, 41);
  const BlockSym A = assemble_observation(G, 0.2 * sigma_star(n, d), W);
  GpmConfig cfg;

  const GpmResult from_truth = run_gpm_from(A, G, cfg, &G);
  CHECK(from_truth.trace.converged);
  CHECK(distance_f(from_truth.solution, G).dF <=
        0.5 * std::sqrt(double(n * d)));

  OrthoStack bad = G;
  bad.data.middleRows(0, d).setZero();
  CHECK_THROWS_AS(run_gpm_from(A, bad, cfg, nullptr), DegenerateBlock);
}

TEST_CASE("the whole run commutes with a global right rotation") {
  const Index n = 40, d = 2;
  const OrthoStack G = sample_truth(n, d, 43);
  const BlockSym W = sample_wigner(n, d, 43);
  const BlockSym A = assemble_observation(G, 0.1 * sigma_star(n, d), W);
  GpmConfig cfg;
  NormalStream haar(44, RngDomain::truth, 4);
  const Mat Q = sample_orthogonal(d, haar);

  const GpmResult base = run_gpm_from(A, G, cfg);
  OrthoStack GQ = G;
  GQ.data = G.data * Q;
  const GpmResult rotated = run_gpm_from(A, GQ, cfg);

  REQUIRE(base.trace.converged);
  REQUIRE(rotated.trace.converged);
  CHECK(rotated.trace.iterations == base.trace.iterations);
  CHECK((rotated.solution.data - base.solution.data * Q).norm() <= 1e-8);
}

TEST_CASE("spectral start and truth start reach the same fixed point") {
  const Index n = 50, d = 3;
  const OrthoStack G = sample_truth(n, d, 47);
  const BlockSym W = sample_wigner(n, d, 47);
  const BlockSym A = assemble_observation(G, 0.15 * sigma_star(n, d), W);
  GpmConfig cfg;

  const GpmResult spectral = run_gpm(A, cfg);
  const GpmResult from_truth = run_gpm_from(A, G, cfg);
  REQUIRE(spectral.trace.converged);
  REQUIRE(from_truth.trace.converged);
  CHECK(distance_f(spectral.solution, from_truth.solution).dF <= 1e-6);
}

TEST_CASE("max_iter exhaustion reports non-convergence instead of throwing") {
  const Index n = 60, d = 3;
  const OrthoStack G = sample_truth(n, d, 51);
  const BlockSym W = sample_wigner(n, d, 51);
  const BlockSym A = assemble_observation(G, 0.3 * sigma_star(n, d), W);
  GpmConfig cfg;
  cfg.max_iter = 2;
  const GpmResult res = run_gpm(A, cfg);
  CHECK_FALSE(res.trace.converged);
  CHECK(res.trace.iterations == 2);
}

TEST_CASE("fixed point matches the multiplier equation") {
  const Index n = 40, d = 2;
  const OrthoStack G = sample_truth(n, d, 61);
  const BlockSym W = sample_wigner(n, d, 61);
  const BlockSym A = assemble_observation(G, 0.2 * sigma_star(n, d), W);
  GpmConfig cfg;
  const GpmResult res = run_gpm(A, cfg);
  REQUIRE(res.trace.converged);

  const BlockDiag lambda = build_multiplier(A, res.solution);
  const Mat resid = A.data * res.solution.data - lambda.apply(res.solution.data);
  CHECK(resid.norm() <= 1e-7 * double(n) * std::sqrt(double(d)));
}

TEST_CASE("config validation") {
  const OrthoStack G = sample_truth(6, 2, 71);
  const BlockSym W = sample_wigner(6, 2, 71);
  const BlockSym A = assemble_observation(G, 0.1, W);
  GpmConfig cfg;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(run_gpm(A, cfg), InvalidInput);
  cfg.tol = 1e-10;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(run_gpm(A, cfg), InvalidInput);
}
