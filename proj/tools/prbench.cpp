// Benchmark and reconstruction driver. Subcommands:
//   gen              synthesize a planted ensemble and write it as PRMAT
//   solve            solve one instance, write a result JSON
//   phase-transition Monte-Carlo recovery sweep over an m/n grid (CSV)
//   noise-sweep      recovery error across SNR levels (CSV)
//   fourier          image reconstruction from oversampled DFT moduli
//   cert-audit       re-check a saved result: gradient, certificate, oracle
//
// Every flag can also be given in a key=value config file via --config;
// command-line flags override config values.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "increpr/bench.hpp"

namespace {

using increpr::Fidelity;
using increpr::Field;
using increpr::Method;
using increpr::RankOne;
using increpr::bench::ExperimentConfig;

void add_common(CLI::App* cmd, ExperimentConfig& cfg, std::string& field,
                std::string& fidelity, std::string& rank1,
                std::string& method, std::vector<double>& eps_stage) {
  cmd->set_config("--config", "", "key=value config file; flags override");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--out", cfg.out_path, "output path (csv/json)");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  cmd->add_option("--n", cfg.n, "signal dimension");
  cmd->add_option("--m", cfg.m, "measurement count (overrides --m-grid)");
  cmd->add_option("--m-grid", cfg.m_over_n, "m/n ratios")->delimiter(',');
  cmd->add_option("--trials", cfg.trials, "trials per grid point");
  cmd->add_option("--field", field, "real|complex");
  cmd->add_option("--fidelity", fidelity, "ls|poisson");
  cmd->add_option("--lambda0", cfg.solver.lambda0, "stage-II trace weight");
  cmd->add_option("--eps-stage", eps_stage, "stage certificate tolerances a,b,c")
      ->delimiter(',');
  cmd->add_option("--repeats", cfg.solver.repeats, "Fourier repeat count K");
  cmd->add_option("--repeat-eps", cfg.solver.repeat_epsilon,
                  "certificate tolerance per Fourier repeat");
  cmd->add_option("--rank1", rank1, "rank-one extraction: svd|maxcol");
  cmd->add_option("--p-max", cfg.solver.p_max, "column cap");
  cmd->add_option("--max-iters", cfg.solver.inner.max_iters,
                  "inner iteration cap");
  cmd->add_option("--grad-tol", cfg.solver.inner.grad_tol,
                  "relative gradient tolerance");
  cmd->add_option("--method", method, "inner solver: cg|gd");
  cmd->add_option("--success-threshold", cfg.success_threshold,
                  "relerr threshold counted as recovery");
  cmd->add_flag("--stage1-only", cfg.stage1_only,
                "stop after the pure data-fit stage");
}

void finish_config(ExperimentConfig& cfg, const std::string& field,
                   const std::string& fidelity, const std::string& rank1,
                   const std::string& method,
                   const std::vector<double>& eps_stage) {
  if (field == "real")
    cfg.field = Field::Real;
  else if (field == "complex")
    cfg.field = Field::Complex;
  else
    throw CLI::ValidationError("--field", "expected real|complex");

  if (fidelity == "ls")
    cfg.solver.fidelity = Fidelity::LeastSquares;
  else if (fidelity == "poisson")
    cfg.solver.fidelity = Fidelity::Poisson;
  else
    throw CLI::ValidationError("--fidelity", "expected ls|poisson");

  if (rank1 == "svd")
    cfg.solver.rank1 = RankOne::Svd;
  else if (rank1 == "maxcol")
    cfg.solver.rank1 = RankOne::MaxNormColumn;
  else
    throw CLI::ValidationError("--rank1", "expected svd|maxcol");

  if (method == "cg")
    cfg.solver.inner.method = Method::ConjugateGradient;
  else if (method == "gd")
    cfg.solver.inner.method = Method::GradientDescent;
  else
    throw CLI::ValidationError("--method", "expected cg|gd");

  if (!eps_stage.empty()) {
    if (eps_stage.size() != 3)
      throw CLI::ValidationError("--eps-stage", "expected three values");
    for (int i = 0; i < 3; ++i) cfg.solver.eps_stage[i] = eps_stage[i];
  } else if (cfg.field == Field::Complex) {
    cfg.solver.eps_stage = {800.0, 1000.0, 1.0};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factorized semidefinite phase retrieval benchmark"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string field = "real", fidelity = "ls", rank1 = "svd", method = "cg";
  std::vector<double> eps_stage;

  auto* gen = app.add_subcommand("gen", "write a planted PRMAT ensemble");
  auto* solve = app.add_subcommand("solve", "solve one instance");
  auto* phase =
      app.add_subcommand("phase-transition", "recovery sweep over m/n");
  auto* noise = app.add_subcommand("noise-sweep", "recovery error vs SNR");
  auto* fourier =
      app.add_subcommand("fourier", "image reconstruction from DFT moduli");
  auto* audit = app.add_subcommand("cert-audit", "re-check a saved result");

  for (CLI::App* cmd : {gen, solve, phase, noise, fourier, audit})
    add_common(cmd, cfg, field, fidelity, rank1, method, eps_stage);

  gen->add_option("--ensemble-out", cfg.ensemble_path, "PRMAT output path")
      ->required();
  solve->add_option("--ensemble", cfg.ensemble_path,
                    "PRMAT input (synthesizes an instance when absent)");
  noise->add_option("--snr-grid", cfg.snr_db, "SNR grid in dB")
      ->delimiter(',');
  fourier->add_option("--image", cfg.image_path, "input P2 PGM")->required();
  fourier->add_option("--image-out", cfg.image_out, "reconstruction PGM");
  fourier->add_option("--starts", cfg.trials, "independent random starts");
  audit->add_option("--ensemble", cfg.ensemble_path, "PRMAT input")
      ->required();
  audit->add_option("--result", cfg.result_path, "solve-result JSON")
      ->required();
  audit->add_option("--epsilon", cfg.audit_epsilon,
                    "certificate tolerance (0 = 1e-8*m)");

  CLI11_PARSE(app, argc, argv);

  try {
    finish_config(cfg, field, fidelity, rank1, method, eps_stage);
    if (gen->parsed()) {
      increpr::bench::write_ensemble_file(cfg);
      std::printf("wrote %s\n", cfg.ensemble_path.c_str());
    } else if (solve->parsed()) {
      auto doc = increpr::bench::run_single_solve(cfg);
      std::printf("objective %.6e  grad %.3e  stages %zu\n",
                  doc["objective"].get<double>(),
                  doc["grad_norm"].get<double>(),
                  doc["stage_termination_p"].size());
      if (doc.contains("relerr"))
        std::printf("relerr %.6e\n", doc["relerr"].get<double>());
    } else if (phase->parsed()) {
      auto rows = increpr::bench::run_phase_transition(cfg);
      for (const auto& r : rows)
        std::printf("m/n %.3g  rate %.3f  relerr %.3e  p %.2f\n", r.m_over_n,
                    r.recovery_rate, r.mean_relerr, r.mean_termination_p);
    } else if (noise->parsed()) {
      auto rows = increpr::bench::run_noise_sweep(cfg);
      for (const auto& r : rows)
        std::printf("snr %g dB  relerr %.3e\n", r.snr_db, r.mean_relerr);
    } else if (fourier->parsed()) {
      auto run = increpr::bench::run_fourier(cfg);
      for (size_t k = 0; k < run.mean_per_repeat.size(); ++k)
        std::printf("repeat %zu  mean relerr %.4f\n", k + 1,
                    run.mean_per_repeat[k]);
    } else if (audit->parsed()) {
      auto doc = increpr::bench::run_cert_audit(cfg);
      std::printf("objective %.6e  grad %.3e  nu_min %.3e  certified %s\n",
                  doc["objective"].get<double>(),
                  doc["grad_norm"].get<double>(), doc["nu_min"].get<double>(),
                  doc["certified"].get<bool>() ? "yes" : "no");
      if (doc.contains("oracle_gap"))
        std::printf("oracle gap %.3e\n", doc["oracle_gap"].get<double>());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
