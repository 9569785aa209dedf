#include "osync/align.hpp"

namespace osync {

AlignmentResult distance_f(const OrthoStack& X, const OrthoStack& Y) {
  if (X.n != Y.n || X.d != Y.d)
    throw ShapeMismatch("distance_f: stacks must have equal shape");
  AlignmentResult out;
  out.Q = optimal_rotation(X.data, Y.data);
  const Mat diff = Y.data - X.data * out.Q;
  out.dF = diff.norm();
  for (Index i = 0; i < X.n; ++i)
    out.blockwise_max =
        std::max(out.blockwise_max, diff.middleRows(i * X.d, X.d).norm());
  return out;
}

double blockwise_error(const OrthoStack& S, const OrthoStack& G) {
  return distance_f(G, S).blockwise_max;
}

double sigma_star(Index n, Index d) {
  if (n < 1 || d < 1) throw InvalidInput("sigma_star: n and d must be positive");
  const double sd = std::sqrt(double(d));
  return std::sqrt(double(n)) / (sd * (sd + std::sqrt(std::log(double(n)))));
}

double default_epsilon(Index d) { return 1.0 / (32.0 * std::sqrt(double(d))); }
double default_kappa(Index d) { return 3.0 * default_epsilon(d); }
double default_xi(Index d) { return 3.0 * default_kappa(d) + 1.0; }

BasinReport basin_check(const OrthoStack& S, const OrthoStack& Z,
                        const BlockSym& W, double sigma, double eps,
                        double xi) {
  if (S.n != Z.n || S.d != Z.d || S.n != W.n || S.d != W.d)
    throw ShapeMismatch("basin_check: stack and noise shapes disagree");
  const Index n = S.n, d = S.d;
  if (eps < 0) eps = default_epsilon(d);
  if (xi < 0) xi = default_xi(d);
  const double snd = std::sqrt(double(n * d));
  const double slog = std::sqrt(std::log(double(n)));

  BasinReport rep;
  rep.epsilon_hat = distance_f(Z, S).dF / snd;
  // W is symmetric, so the m-th block row of W S equals W_m^T S.
  const Mat WS = W.data * S.data;
  double worst = 0;
  for (Index m = 0; m < n; ++m)
    worst = std::max(worst, WS.middleRows(m * d, d).norm());
  rep.xi_hat = worst / (snd * (std::sqrt(double(d)) + 4.0 * slog));
  rep.eta = sigma * (std::sqrt(double(d)) + slog) / std::sqrt(double(n));
  rep.sigma_min_gram =
      svd_small(Z.data.transpose() * S.data).S.minCoeff() / double(n);
  rep.in_n_eps = rep.epsilon_hat <= eps;
  rep.in_n_xi = rep.xi_hat <= xi;
  return rep;
}

}  // namespace osync
