#include "osync/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "osync/align.hpp"
#include "osync/container_io.hpp"

namespace osync {
namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void SweepSpec::validate() const {
  if (n_list.empty() || d_list.empty() || sigma_grid.empty())
    throw InvalidInput("SweepSpec: empty grid");
  for (Index n : n_list)
    if (n < 1) throw InvalidInput("SweepSpec: n must be positive");
  for (Index d : d_list)
    if (d < 1 || d > 16) throw InvalidInput("SweepSpec: d must be in [1, 16]");
  for (size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] >= 0) || !std::isfinite(sigma_grid[i]))
      throw InvalidInput("SweepSpec: sigma grid must be finite and non-negative");
    if (i > 0 && sigma_grid[i] <= sigma_grid[i - 1])
      throw InvalidInput("SweepSpec: sigma grid must be strictly ascending");
  }
  if (trials < 1) throw InvalidInput("SweepSpec: trials must be positive");
  if (threads < 1) throw InvalidInput("SweepSpec: threads must be positive");
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  const size_t n_sigmas = spec.sigma_grid.size();
  const size_t tasks_per_cell = size_t(spec.trials);
  const size_t n_cells = spec.n_list.size() * spec.d_list.size();
  const size_t n_tasks = n_cells * tasks_per_cell;

  SweepResult result;
  result.rows.assign(n_tasks * n_sigmas, SweepRow{});

  // One task = one (n, d, trial) instance swept over the sigma grid; tasks
  // write disjoint row ranges, so the output is identical for any thread
  // count or schedule.
  auto run_task = [&](size_t task) {
    const size_t cell = task / tasks_per_cell;
    const int trial = int(task % tasks_per_cell);
    const Index n = spec.n_list[cell / spec.d_list.size()];
    const Index d = spec.d_list[cell % spec.d_list.size()];
    const std::uint64_t trial_seed =
        derive_seed(spec.seed, RngDomain::derive,
                    (std::uint64_t(n) << 16) | std::uint64_t(d),
                    std::uint64_t(trial));
    const double star = sigma_star(n, d);

    SynthSpec synth{n, d, 0.0, trial_seed, spec.diagonal_noise};
    const OrthoStack G = sample_truth(synth);
    const BlockSym W = sample_wigner(n, d, trial_seed);

    for (size_t s = 0; s < n_sigmas; ++s) {
      const auto t0 = std::chrono::steady_clock::now();
      SweepRow row;
      row.n = n;
      row.d = d;
      row.sigma = spec.star_units ? spec.sigma_grid[s] * star : spec.sigma_grid[s];
      row.sigma_over_star = row.sigma / star;
      row.seed = trial_seed;
      row.dF_to_truth = std::numeric_limits<double>::quiet_NaN();
      row.blockwise_error = std::numeric_limits<double>::quiet_NaN();
      row.lambda_d_plus_1 = std::numeric_limits<double>::quiet_NaN();
      row.residual = std::numeric_limits<double>::quiet_NaN();

      const BlockSym A = assemble_observation(G, row.sigma, W, spec.diagonal_noise);
      GpmConfig gpm = spec.gpm;
      gpm.seed = trial_seed;
      CertifyTols certify = spec.certify;
      certify.seed = trial_seed;
      try {
        auto [S, trace] = run_gpm(A, gpm, &G);
        row.converged = trace.converged;
        row.iterations = trace.iterations;
        row.dF_to_truth = distance_f(G, S).dF;
        row.blockwise_error = blockwise_error(S, G);
        // only fixed points can certify; skip the eigensolve otherwise
        if (trace.converged) {
          const CertificateReport rep = verify_certificate(A, S, certify);
          row.certified = rep.verdict == Verdict::certified_unique;
          row.lambda_d_plus_1 = rep.lambda_d_plus_1;
          row.residual = rep.fixed_point_residual;
        }
      } catch (const std::runtime_error&) {
        // solver failure: the row stays unconverged and uncertified
      }
      row.wall_ms = ms_since(t0);
      result.rows[task * n_sigmas + s] = row;
    }
  };

  if (spec.threads == 1) {
    for (size_t task = 0; task < n_tasks; ++task) run_task(task);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t task = next.fetch_add(1); task < n_tasks;
           task = next.fetch_add(1))
        run_task(task);
    };
    std::vector<std::thread> pool;
    const int k = std::min<int>(spec.threads, int(n_tasks));
    pool.reserve(size_t(k));
    for (int i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Cell summaries and threshold estimates.
  for (size_t cell = 0; cell < n_cells; ++cell) {
    const Index n = spec.n_list[cell / spec.d_list.size()];
    const Index d = spec.d_list[cell % spec.d_list.size()];
    const double star = sigma_star(n, d);
    std::vector<double> rate(n_sigmas, 0);
    for (size_t s = 0; s < n_sigmas; ++s) {
      CellSummary cs;
      cs.n = n;
      cs.d = d;
      cs.sigma = spec.star_units ? spec.sigma_grid[s] * star : spec.sigma_grid[s];
      cs.sigma_over_star = cs.sigma / star;
      cs.trials = spec.trials;
      for (int t = 0; t < spec.trials; ++t) {
        const SweepRow& row =
            result.rows[(cell * tasks_per_cell + size_t(t)) * n_sigmas + s];
        cs.certified_rate += row.certified ? 1 : 0;
        cs.converged_rate += row.converged ? 1 : 0;
      }
      cs.certified_rate /= spec.trials;
      cs.converged_rate /= spec.trials;
      rate[s] = cs.certified_rate;
      result.cells.push_back(cs);
    }

    ThresholdEstimate th;
    th.n = n;
    th.d = d;
    const auto sigma_at = [&](size_t s) {
      return spec.star_units ? spec.sigma_grid[s] * star : spec.sigma_grid[s];
    };
    if (rate[0] < 0.5) {
      th.sigma_hat_50 = sigma_at(0);
    } else {
      th.sigma_hat_50 = sigma_at(n_sigmas - 1);
      for (size_t s = 0; s + 1 < n_sigmas; ++s) {
        if (rate[s] >= 0.5 && rate[s + 1] < 0.5) {
          const double f = (rate[s] - 0.5) / (rate[s] - rate[s + 1]);
          th.sigma_hat_50 = sigma_at(s) + f * (sigma_at(s + 1) - sigma_at(s));
          th.interpolated = true;
          break;
        }
      }
    }
    th.sigma_hat_50_over_star = th.sigma_hat_50 / star;
    result.thresholds.push_back(th);
  }
  return result;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_sweep_csv: cannot open '" + path + "'");
  out << "n,d,sigma,sigma_over_star,seed,converged,iterations,dF_to_truth,"
         "blockwise_error,certified,lambda_d_plus_1,residual,wall_ms\n";
  for (const SweepRow& r : rows) {
    out << r.n << ',' << r.d << ',' << fmt_double(r.sigma) << ','
        << fmt_double(r.sigma_over_star) << ',' << r.seed << ','
        << (r.converged ? 1 : 0) << ',' << r.iterations << ','
        << fmt_double(r.dF_to_truth) << ',' << fmt_double(r.blockwise_error)
        << ',' << (r.certified ? 1 : 0) << ','
        << fmt_double(r.lambda_d_plus_1) << ',' << fmt_double(r.residual)
        << ',' << fmt_double(r.wall_ms) << '\n';
  }
  if (!out) throw IoError("write_sweep_csv: short write to '" + path + "'");
}

nlohmann::json sweep_summary(const SweepSpec& spec, const SweepResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellSummary& c : result.cells)
    cells.push_back({{"n", c.n},
                     {"d", c.d},
                     {"sigma", c.sigma},
                     {"sigma_over_star", c.sigma_over_star},
                     {"trials", c.trials},
                     {"certified_rate", c.certified_rate},
                     {"converged_rate", c.converged_rate}});
  nlohmann::json thresholds = nlohmann::json::array();
  for (const ThresholdEstimate& t : result.thresholds)
    thresholds.push_back({{"n", t.n},
                          {"d", t.d},
                          {"sigma_hat_50", t.sigma_hat_50},
                          {"sigma_hat_50_over_star", t.sigma_hat_50_over_star},
                          {"interpolated", t.interpolated}});
  return {{"seed", spec.seed},
          {"prng_id", kPrngId},
          {"config",
           {{"n", spec.n_list},
            {"d", spec.d_list},
            {"sigma_grid", spec.sigma_grid},
            {"star_units", spec.star_units},
            {"trials", spec.trials},
            {"diagonal_noise", spec.diagonal_noise},
            {"threads", spec.threads},
            {"gpm_tol", spec.gpm.tol},
            {"gpm_max_iter", spec.gpm.max_iter},
            {"gpm_eig_tol", spec.gpm.eig_tol}}},
          {"cells", cells},
          {"thresholds", thresholds}};
}

void LooSpec::validate() const {
  base.validate();
  for (Index m : m_list)
    if (m < 0 || m >= base.n)
      throw InvalidInput("LooSpec: block index out of range");
  if (trials < 1) throw InvalidInput("LooSpec: trials must be positive");
}

std::vector<LooRow> run_loo(const LooSpec& spec) {
  spec.validate();
  const Index n = spec.base.n, d = spec.base.d;
  std::vector<Index> ms = spec.m_list;
  if (ms.empty()) {
    ms.resize(size_t(n));
    for (Index m = 0; m < n; ++m) ms[size_t(m)] = m;
  }
  const double kappa = spec.kappa >= 0 ? spec.kappa : default_kappa(d);
  const double xi = spec.xi >= 0 ? spec.xi : default_xi(d);
  const double snd = std::sqrt(double(n * d));
  const double kappa_bound = kappa * std::sqrt(double(d)) / 2.0;
  const double xi_bound =
      xi * snd * (std::sqrt(double(d)) + 4.0 * std::sqrt(std::log(double(n))));

  std::vector<LooRow> rows;
  rows.reserve(size_t(spec.trials) * ms.size());
  for (int trial = 0; trial < spec.trials; ++trial) {
    SynthSpec synth = spec.base;
    synth.seed = derive_seed(spec.base.seed, RngDomain::derive,
                             (std::uint64_t(n) << 16) | std::uint64_t(d),
                             0x100000000ull | std::uint64_t(trial));
    const OrthoStack G = sample_truth(synth);
    const BlockSym W = sample_wigner(n, d, synth.seed);
    const BlockSym A =
        assemble_observation(G, synth.sigma, W, synth.diagonal_noise);
    GpmConfig gpm = spec.gpm;
    gpm.seed = synth.seed;

    bool base_ok = false;
    OrthoStack S;
    Mat WS;
    try {
      auto [sol, trace] = run_gpm(A, gpm);
      S = std::move(sol);
      base_ok = trace.converged;
      WS = W.data * S.data;
    } catch (const std::runtime_error&) {
      base_ok = false;
    }

    for (Index m : ms) {
      LooRow row;
      row.n = n;
      row.d = d;
      row.sigma = synth.sigma;
      row.seed = synth.seed;
      row.m = m;
      row.kappa_bound = kappa_bound;
      row.xi_bound = xi_bound;
      row.converged = base_ok;
      row.dF_loo = std::numeric_limits<double>::quiet_NaN();
      row.w_col_norm = std::numeric_limits<double>::quiet_NaN();
      if (base_ok) {
        row.w_col_norm = WS.middleRows(m * d, d).norm();
        try {
          const BlockSym Am =
              leave_one_out(G, synth.sigma, W, m, synth.diagonal_noise);
          auto [Sm, trace_m] = run_gpm(Am, gpm);
          row.converged_loo = trace_m.converged;
          row.dF_loo = distance_f(S, Sm).dF;
        } catch (const std::runtime_error&) {
          row.converged_loo = false;
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_loo_csv(const std::string& path, const std::vector<LooRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("write_loo_csv: cannot open '" + path + "'");
  out << "n,d,sigma,seed,m,dF_loo,w_col_norm,kappa_bound,xi_bound,converged,"
         "converged_loo\n";
  for (const LooRow& r : rows) {
    out << r.n << ',' << r.d << ',' << fmt_double(r.sigma) << ',' << r.seed
        << ',' << r.m << ',' << fmt_double(r.dF_loo) << ','
        << fmt_double(r.w_col_norm) << ',' << fmt_double(r.kappa_bound) << ','
        << fmt_double(r.xi_bound) << ',' << (r.converged ? 1 : 0) << ','
        << (r.converged_loo ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write_loo_csv: short write to '" + path + "'");
}

}  // namespace osync
