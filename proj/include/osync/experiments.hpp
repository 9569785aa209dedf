#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "osync/certify.hpp"
#include "osync/gpm.hpp"
#include "osync/synth.hpp"

namespace osync {

/// Grid experiment: for every (n, d) and every noise level, solve and
/// certify `trials` independent instances. One instance (truth and noise) is
/// drawn per (n, d, trial) and swept across the whole sigma grid, which
/// couples the rows of a trial and tightens the threshold estimate.
struct SweepSpec {
  std::vector<Index> n_list;
  std::vector<Index> d_list;
  std::vector<double> sigma_grid;  // ascending
  bool star_units = true;          // grid values are multiples of sigma_star(n, d)
  int trials = 1;
  std::uint64_t seed = 0;
  bool diagonal_noise = true;
  int threads = 1;
  GpmConfig gpm;
  CertifyTols certify;

  void validate() const;  // throws InvalidInput
};

struct SweepRow {
  Index n = 0, d = 0;
  double sigma = 0, sigma_over_star = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  long iterations = 0;
  double dF_to_truth = 0, blockwise_error = 0;
  bool certified = false;
  double lambda_d_plus_1 = 0, residual = 0;
  double wall_ms = 0;
};

struct CellSummary {
  Index n = 0, d = 0;
  double sigma = 0, sigma_over_star = 0;
  int trials = 0;
  double certified_rate = 0, converged_rate = 0;
};

/// Noise level at which the certification rate crosses one half, linearly
/// interpolated between neighbouring grid points. Clamped to the grid edge
/// (with `interpolated` false) when the curve never crosses.
struct ThresholdEstimate {
  Index n = 0, d = 0;
  double sigma_hat_50 = 0;
  double sigma_hat_50_over_star = 0;
  bool interpolated = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CellSummary> cells;
  std::vector<ThresholdEstimate> thresholds;
};

SweepResult run_sweep(const SweepSpec& spec);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

nlohmann::json sweep_summary(const SweepSpec& spec, const SweepResult& result);

/// Leave-one-out experiment: solve the full observation and, for each block
/// m in m_list (all blocks when empty), the observation with noise row and
/// column m removed; report how far the two solutions sit apart and how hard
/// the dropped noise column acts on the full solution.
struct LooSpec {
  SynthSpec base;
  std::vector<Index> m_list;
  int trials = 1;
  double kappa = -1;  // negative -> default_kappa(d)
  double xi = -1;     // negative -> default_xi(d)
  GpmConfig gpm;

  void validate() const;
};

struct LooRow {
  Index n = 0, d = 0;
  double sigma = 0;
  std::uint64_t seed = 0;
  Index m = 0;
  double dF_loo = 0;        // d(S, S_m)
  double w_col_norm = 0;    // ||W_m^T S||_F
  double kappa_bound = 0;   // kappa sqrt(d) / 2
  double xi_bound = 0;      // xi sqrt(n d)(sqrt(d) + 4 sqrt(log n))
  bool converged = false, converged_loo = false;
};

std::vector<LooRow> run_loo(const LooSpec& spec);

void write_loo_csv(const std::string& path, const std::vector<LooRow>& rows);

}  // namespace osync
