// Command-line front end: generate synthetic observations, solve them,
// certify solutions, and drive the sweep / leave-one-out experiments.
// Exit codes: 0 success (solve: converged; certify: certified), 2 I/O
// failure, 3 invalid specification or shape, 4 not converged, 5 degenerate
// block, 6 not certified.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "osync/align.hpp"
#include "osync/certify.hpp"
#include "osync/container_io.hpp"
#include "osync/experiments.hpp"
#include "osync/gpm.hpp"
#include "osync/synth.hpp"
#include "selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitNotConverged = 4;
constexpr int kExitDegenerate = 5;
constexpr int kExitNotCertified = 6;

using osync::Index;

int fail(int code, const std::string& msg) {
  std::cerr << "osync: " << msg << "\n";
  return code;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw osync::IoError("cannot open '" + path + "'");
  out << j.dump(2) << "\n";
  if (!out) throw osync::IoError("short write to '" + path + "'");
}

nlohmann::json gpm_config_json(const osync::GpmConfig& cfg) {
  return {{"tol", cfg.tol},
          {"max_iter", cfg.max_iter},
          {"eig_tol", cfg.eig_tol},
          {"seed", cfg.seed},
          {"scale_by_n", cfg.scale_by_n},
          {"min_block_sv", cfg.min_block_sv}};
}

// "a:b:step" (inclusive within half a step) or a comma list.
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  const auto parse_num = [](const std::string& s) {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw osync::InvalidInput("bad number '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    const auto c1 = text.find(':');
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw osync::InvalidInput("grid range must be first:last:step");
    const double first = parse_num(text.substr(0, c1));
    const double last = parse_num(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = parse_num(text.substr(c2 + 1));
    if (!(step > 0)) throw osync::InvalidInput("grid step must be positive");
    for (double v = first; v <= last + 0.5 * step; v += step)
      grid.push_back(v);
    return grid;
  }
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto end = comma == std::string::npos ? text.size() : comma;
    grid.push_back(parse_num(text.substr(pos, end - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return grid;
}

struct GenArgs {
  osync::SynthSpec spec;
  bool star_units = false;
  bool identity_truth = false;
  std::string out, truth_out, noise_out;
};

int do_gen(GenArgs& a) {
  try {
    a.spec.validate();
    if (a.star_units) a.spec.sigma *= osync::sigma_star(a.spec.n, a.spec.d);
    const osync::OrthoStack G = a.identity_truth
                                    ? osync::identity_stack(a.spec.n, a.spec.d)
                                    : osync::sample_truth(a.spec);
    const osync::BlockSym W =
        osync::sample_wigner(a.spec.n, a.spec.d, a.spec.seed);
    const osync::BlockSym A =
        osync::assemble_observation(G, a.spec.sigma, W, a.spec.diagonal_noise);
    osync::write_container(a.out, osync::header_for(a.spec, "observation"),
                           A.data);
    if (!a.truth_out.empty())
      osync::write_container(a.truth_out, osync::header_for(a.spec, "truth"),
                             G.data);
    if (!a.noise_out.empty())
      osync::write_container(a.noise_out, osync::header_for(a.spec, "noise"),
                             W.data);
    return kExitOk;
  } catch (const osync::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInvalid, e.what());
  } catch (const std::out_of_range& e) {
    return fail(kExitInvalid, e.what());
  }
}

struct SolveArgs {
  std::string in, out, report, truth, noise;
  osync::GpmConfig cfg;
};

int do_solve(SolveArgs& a) {
  try {
    const osync::Container cin = osync::read_container(a.in);
    if (!cin.header.is_square())
      return fail(kExitInvalid, "solve: input is not a square observation");
    const osync::BlockSym A = osync::to_block_sym(cin);

    std::optional<osync::OrthoStack> truth;
    if (!a.truth.empty()) {
      const osync::Container ct = osync::read_container(a.truth);
      if (ct.header.is_square() || ct.header.n != A.n || ct.header.d != A.d)
        return fail(kExitInvalid, "solve: truth container does not match");
      truth = osync::to_stack(ct);
    }

    auto [S, trace] = osync::run_gpm(A, a.cfg, truth ? &*truth : nullptr);

    if (!a.out.empty()) {
      osync::ContainerHeader h = cin.header;
      h.kind = "solution";
      h.created = osync::created_stamp();
      osync::write_container(a.out, h, S.data);
    }

    if (!a.report.empty()) {
      nlohmann::json j{{"command", "solve"},
                       {"input", a.in},
                       {"n", A.n},
                       {"d", A.d},
                       {"seed", a.cfg.seed},
                       {"prng_id", osync::kPrngId},
                       {"config", gpm_config_json(a.cfg)},
                       {"iterations", trace.iterations},
                       {"converged", trace.converged},
                       {"steps", trace.steps},
                       {"ratios", trace.ratios}};
      if (truth) {
        j["init_distance"] = trace.init_distance;
        j["dF_to_truth"] = osync::distance_f(*truth, S).dF;
        j["blockwise_error"] = osync::blockwise_error(S, *truth);
        if (!a.noise.empty()) {
          const osync::Container cw = osync::read_container(a.noise);
          if (cw.header.kind != "noise" || cw.header.n != A.n ||
              cw.header.d != A.d)
            return fail(kExitInvalid, "solve: noise container does not match");
          const osync::BlockSym W = osync::to_block_sym(cw);
          const osync::BasinReport basin = osync::basin_check(
              S, *truth, W, cin.header.sigma, osync::default_epsilon(A.d),
              osync::default_xi(A.d));
          j["basin"] = {{"epsilon_hat", basin.epsilon_hat},
                        {"xi_hat", basin.xi_hat},
                        {"eta", basin.eta},
                        {"sigma_min_gram", basin.sigma_min_gram},
                        {"in_n_eps", basin.in_n_eps},
                        {"in_n_xi", basin.in_n_xi}};
        }
      }
      write_json(a.report, j);
    }

    std::cout << (trace.converged ? "converged" : "not converged") << " in "
              << trace.iterations << " iterations\n";
    return trace.converged ? kExitOk : kExitNotConverged;
  } catch (const osync::DegenerateBlock& e) {
    return fail(kExitDegenerate, e.what());
  } catch (const osync::NoConvergence& e) {
    return fail(kExitNotConverged, e.what());
  } catch (const osync::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInvalid, e.what());
  }
}

struct CertifyArgs {
  std::string in, solution, report;
  osync::CertifyTols tols;
};

int do_certify(CertifyArgs& a) {
  try {
    const osync::Container ca = osync::read_container(a.in);
    const osync::Container cs = osync::read_container(a.solution);
    if (!ca.header.is_square() || cs.header.is_square())
      return fail(kExitInvalid, "certify: need a matrix and a solution stack");
    if (ca.header.n != cs.header.n || ca.header.d != cs.header.d)
      return fail(kExitInvalid, "certify: containers disagree on (n, d)");
    const osync::BlockSym A = osync::to_block_sym(ca);
    const osync::OrthoStack S = osync::to_stack(cs);

    const osync::CertificateReport rep = osync::verify_certificate(A, S, a.tols);

    if (!a.report.empty()) {
      write_json(
          a.report,
          {{"command", "certify"},
           {"input", a.in},
           {"solution", a.solution},
           {"n", A.n},
           {"d", A.d},
           {"seed", a.tols.seed},
           {"prng_id", osync::kPrngId},
           {"config",
            {{"residual_tol", rep.residual_tol_used},
             {"psd_tol", rep.psd_tol_used},
             {"eig_tol", a.tols.eig_tol}}},
           {"fixed_point_residual", rep.fixed_point_residual},
           {"lambda_min_blocks", rep.lambda_min_blocks},
           {"lambda_d_plus_1", rep.lambda_d_plus_1},
           {"verdict", osync::to_string(rep.verdict)},
           {"details",
            {{"fixed_point_ok", rep.details.fixed_point_ok},
             {"blocks_psd_ok", rep.details.blocks_psd_ok},
             {"complement_psd_ok", rep.details.complement_psd_ok},
             {"numerical_failure", rep.details.numerical_failure}}}});
    }

    std::cout << osync::to_string(rep.verdict)
              << " residual=" << rep.fixed_point_residual
              << " lambda_d_plus_1=" << rep.lambda_d_plus_1 << "\n";
    return rep.verdict == osync::Verdict::certified_unique ? kExitOk
                                                           : kExitNotCertified;
  } catch (const osync::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInvalid, e.what());
  }
}

struct SweepArgs {
  osync::SweepSpec spec;
  std::string grid_text;
  bool absolute = false;
  std::string out, summary;
};

int do_sweep(SweepArgs& a) {
  try {
    a.spec.sigma_grid = parse_grid(a.grid_text);
    a.spec.star_units = !a.absolute;
    const osync::SweepResult result = osync::run_sweep(a.spec);
    if (!a.out.empty()) osync::write_sweep_csv(a.out, result.rows);
    if (!a.summary.empty())
      write_json(a.summary, osync::sweep_summary(a.spec, result));
    for (const osync::ThresholdEstimate& t : result.thresholds)
      std::cout << "n=" << t.n << " d=" << t.d
                << " sigma_hat_50=" << t.sigma_hat_50 << " ("
                << t.sigma_hat_50_over_star << " sigma_star"
                << (t.interpolated ? "" : ", clamped to grid edge") << ")\n";
    return kExitOk;
  } catch (const osync::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInvalid, e.what());
  } catch (const std::out_of_range& e) {
    return fail(kExitInvalid, e.what());
  }
}

struct LooArgs {
  osync::LooSpec spec;
  bool star_units = false;
  std::string out;
};

int do_loo(LooArgs& a) {
  try {
    if (a.star_units)
      a.spec.base.sigma *= osync::sigma_star(a.spec.base.n, a.spec.base.d);
    const std::vector<osync::LooRow> rows = osync::run_loo(a.spec);
    if (!a.out.empty()) osync::write_loo_csv(a.out, rows);
    double worst_d = 0, worst_w = 0;
    for (const osync::LooRow& r : rows) {
      if (r.converged && r.converged_loo) worst_d = std::max(worst_d, r.dF_loo);
      if (r.converged) worst_w = std::max(worst_w, r.w_col_norm);
    }
    std::cout << "rows=" << rows.size() << " max_dF_loo=" << worst_d
              << " max_w_col_norm=" << worst_w << "\n";
    return kExitOk;
  } catch (const osync::IoError& e) {
    return fail(kExitIo, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kExitInvalid, e.what());
  } catch (const std::out_of_range& e) {
    return fail(kExitInvalid, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal group synchronization: generate, solve, certify"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "generate an observation");
  cmd_gen->add_option("--n", gen.spec.n, "number of blocks")->required();
  cmd_gen->add_option("--d", gen.spec.d, "block size")->required();
  cmd_gen->add_option("--sigma", gen.spec.sigma, "noise level")->required();
  cmd_gen->add_flag("--star-units", gen.star_units,
                    "sigma is a multiple of sigma_star(n, d)");
  cmd_gen->add_option("--seed", gen.spec.seed, "generator seed");
  cmd_gen->add_flag("--identity-truth", gen.identity_truth,
                    "use the identity stack instead of Haar blocks");
  cmd_gen->add_flag("!--no-diagonal-noise", gen.spec.diagonal_noise,
                    "pin diagonal blocks to the identity");
  cmd_gen->add_option("--out", gen.out, "observation file")->required();
  cmd_gen->add_option("--truth-out", gen.truth_out, "ground-truth stack file");
  cmd_gen->add_option("--noise-out", gen.noise_out, "noise matrix file");

  SolveArgs solve;
  CLI::App* cmd_solve = app.add_subcommand("solve", "run the power method");
  cmd_solve->add_option("--in", solve.in, "observation file")->required();
  cmd_solve->add_option("--out", solve.out, "solution stack file");
  cmd_solve->add_option("--report", solve.report, "JSON run report");
  cmd_solve->add_option("--truth", solve.truth, "ground-truth stack file");
  cmd_solve->add_option("--noise", solve.noise,
                        "noise matrix file (enables basin diagnostics)");
  cmd_solve->add_option("--seed", solve.cfg.seed, "eigensolver start seed");
  cmd_solve->add_option("--tol", solve.cfg.tol, "step tolerance");
  cmd_solve->add_option("--max-iter", solve.cfg.max_iter, "iteration budget");
  cmd_solve->add_option("--eig-tol", solve.cfg.eig_tol,
                        "spectral initialization tolerance");

  CertifyArgs certify;
  CLI::App* cmd_certify =
      app.add_subcommand("certify", "check global optimality of a solution");
  cmd_certify->add_option("--in", certify.in, "observation file")->required();
  cmd_certify->add_option("--solution", certify.solution, "solution stack file")
      ->required();
  cmd_certify->add_option("--report", certify.report, "JSON report");
  cmd_certify->add_option("--residual-tol", certify.tols.residual_tol,
                          "fixed-point residual tolerance");
  cmd_certify->add_option("--psd-tol", certify.tols.psd_tol,
                          "complement eigenvalue margin");
  cmd_certify->add_option("--eig-tol", certify.tols.eig_tol,
                          "deflated eigensolve tolerance");
  cmd_certify->add_option("--seed", certify.tols.seed, "eigensolver start seed");

  SweepArgs sweep;
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "success-rate grid over (n, d, sigma)");
  cmd_sweep->add_option("--n", sweep.spec.n_list, "block counts")
      ->required()
      ->delimiter(',');
  cmd_sweep->add_option("--d", sweep.spec.d_list, "block sizes")
      ->required()
      ->delimiter(',');
  cmd_sweep
      ->add_option("--sigma-grid", sweep.grid_text,
                   "first:last:step range or comma list")
      ->required();
  cmd_sweep->add_flag("--absolute", sweep.absolute,
                      "grid is absolute, not multiples of sigma_star");
  cmd_sweep->add_option("--trials", sweep.spec.trials, "trials per cell");
  cmd_sweep->add_option("--seed", sweep.spec.seed, "base seed");
  cmd_sweep->add_option("--threads", sweep.spec.threads, "worker threads");
  cmd_sweep->add_flag("!--no-diagonal-noise", sweep.spec.diagonal_noise,
                      "pin diagonal blocks to the identity");
  cmd_sweep->add_option("--tol", sweep.spec.gpm.tol, "step tolerance");
  cmd_sweep->add_option("--max-iter", sweep.spec.gpm.max_iter,
                        "iteration budget");
  cmd_sweep->add_option("--eig-tol", sweep.spec.gpm.eig_tol,
                        "spectral initialization tolerance");
  cmd_sweep->add_option("--out", sweep.out, "per-trial CSV");
  cmd_sweep->add_option("--summary", sweep.summary, "summary JSON");

  LooArgs loo;
  CLI::App* cmd_loo =
      app.add_subcommand("loo", "leave-one-out proximity experiment");
  cmd_loo->add_option("--n", loo.spec.base.n, "number of blocks")->required();
  cmd_loo->add_option("--d", loo.spec.base.d, "block size")->required();
  cmd_loo->add_option("--sigma", loo.spec.base.sigma, "noise level")->required();
  cmd_loo->add_flag("--star-units", loo.star_units,
                    "sigma is a multiple of sigma_star(n, d)");
  cmd_loo->add_option("--seed", loo.spec.base.seed, "base seed");
  cmd_loo->add_option("--m", loo.spec.m_list, "blocks to drop (default: all)")
      ->delimiter(',');
  cmd_loo->add_option("--trials", loo.spec.trials, "independent instances");
  cmd_loo->add_option("--kappa", loo.spec.kappa, "proximity radius");
  cmd_loo->add_option("--xi", loo.spec.xi, "noise-action radius");
  cmd_loo->add_flag("!--no-diagonal-noise", loo.spec.base.diagonal_noise,
                    "pin diagonal blocks to the identity");
  cmd_loo->add_option("--tol", loo.spec.gpm.tol, "step tolerance");
  cmd_loo->add_option("--max-iter", loo.spec.gpm.max_iter, "iteration budget");
  cmd_loo->add_option("--eig-tol", loo.spec.gpm.eig_tol,
                      "spectral initialization tolerance");
  cmd_loo->add_option("--out", loo.out, "per-m CSV");

  osync::SelftestOptions selftest;
  CLI::App* cmd_selftest =
      app.add_subcommand("selftest", "run the built-in oracle suites");
  cmd_selftest
      ->add_flag("--inject-sign-flip", selftest.inject_sign_flip,
                 "deliberately corrupt one computation; the suites must "
                 "catch it and fail")
      ->group("");  // hidden: exists for testing the selftest itself

  CLI11_PARSE(app, argc, argv);

  if (cmd_gen->parsed()) return do_gen(gen);
  if (cmd_solve->parsed()) return do_solve(solve);
  if (cmd_certify->parsed()) return do_certify(certify);
  if (cmd_sweep->parsed()) return do_sweep(sweep);
  if (cmd_loo->parsed()) return do_loo(loo);
  if (cmd_selftest->parsed()) return osync::run_selftest(selftest, std::cout);
  return kExitInvalid;
}
