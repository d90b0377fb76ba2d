#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "increpr/increpr.hpp"
#include "increpr/metrics.hpp"

namespace increpr::bench {

// One configuration drives every experiment kind; unused fields are
// ignored. Reproducibility contract: identical config and seed produce
// byte-identical CSV/JSON, except for wall-clock fields (the JSON
// "timestamp" and the CSV mean_runtime_ms column).
struct ExperimentConfig {
  int n = 64;
  int m = 0;  // explicit measurement count; 0 derives from m_over_n
  Field field = Field::Real;
  std::vector<double> m_over_n{3.0};
  int trials = 20;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  double success_threshold = 1e-5;
  bool stage1_only = false;  // stop after the pure data-fit stage
  std::vector<double> snr_db{10, 15, 20, 25, 30, 35, 40, 45, 50};
  RestartConfig solver;
  double audit_epsilon = 0.0;  // 0 selects 1e-8 * m

  std::string out_path;       // csv or json destination
  std::string image_path;     // fourier input (P2 PGM)
  std::string image_out;      // fourier reconstruction (P2 PGM)
  std::string ensemble_path;  // PRMAT input (gen output / audit input)
  std::string result_path;    // solve-result JSON for cert-audit
};

CVec planted_signal(int n, Field field, std::uint64_t seed);
CMat random_factor(int n, int p, Field field, std::uint64_t seed);

// Runs fn(0..count-1) on a worker pool; results must be written to
// per-index slots. The first exception, if any, is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

struct TrialResult {
  metrics::TrialOutcome outcome;
  RunRecord record;
  double runtime_ms = 0.0;
  bool failed = false;  // solver raised; counted as unsuccessful
};

struct TransitionRow {
  double m_over_n = 0.0;
  double recovery_rate = 0.0;
  double mean_relerr = 0.0;
  double mean_termination_p = 0.0;  // stage-I mean over trials
  double mean_runtime_ms = 0.0;
  std::vector<TrialResult> trials;
};

// Monte-Carlo recovery sweep over the m/n grid: fresh planted signal and
// ensemble per trial, solved by the three-stage restart (or stage I only
// when stage1_only is set). Writes CSV to out_path when set:
//   m_over_n,recovery_rate,mean_relerr,mean_termination_p,mean_runtime_ms
std::vector<TransitionRow> run_phase_transition(const ExperimentConfig& cfg);

struct NoiseRow {
  double snr_db = 0.0;
  double m_over_n = 0.0;
  double mean_relerr = 0.0;
  std::vector<TrialResult> trials;
};

// Noisy recovery sweep at fixed m/n (the grid's first entry) over the
// snr_db grid. CSV columns: snr_db,m_over_n,mean_relerr
std::vector<NoiseRow> run_noise_sweep(const ExperimentConfig& cfg);

struct FourierRun {
  std::vector<std::vector<double>> start_errors;  // [start][repeat]
  std::vector<double> mean_per_repeat;
  Mat reconstruction;  // aligned real image from the best start
};

// Repeated-restart reconstruction of an image from its oversampled
// Fourier intensities; cfg.trials independent random starts. Writes a
// JSON error trace to out_path and the reconstruction to image_out.
FourierRun run_fourier(const ExperimentConfig& cfg);
FourierRun run_fourier_image(const ExperimentConfig& cfg, const Mat& image);

// Synthesizes an ensemble with planted intensities and writes it as a
// PRMAT file to ensemble_path.
void write_ensemble_file(const ExperimentConfig& cfg);

// Solves one instance (loaded from ensemble_path, or synthesized when it
// is empty) and returns the result document: final factor, objective,
// gradient norm, run record. Written to out_path when set.
nlohmann::json run_single_solve(const ExperimentConfig& cfg);

// Re-checks a saved solve result: objective, gradient norm, certificate
// eigenvalue, and (n <= 16) the gap against the dense lifted reference.
nlohmann::json run_cert_audit(const ExperimentConfig& cfg);

}  // namespace increpr::bench
