#include "increpr/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "increpr/dense_oracle.hpp"
#include "increpr/pgm.hpp"
#include "increpr/rng.hpp"

namespace increpr::bench {

using nlohmann::json;

CVec planted_signal(int n, Field field, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  CVec x(n);
  for (int i = 0; i < n; ++i)
    x(i) = field == Field::Real ? cxd(gen.normal(), 0.0) : gen.cnormal();
  return x;
}

CMat random_factor(int n, int p, Field field, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  CMat Y(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i)
      Y(i, j) = field == Field::Real ? cxd(gen.normal(), 0.0) : gen.cnormal();
  return Y;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int k = threads > 0 ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  k = std::clamp(k, 1, count);
  if (k == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::string fmt(double v, const char* f = "%.10g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

int measurements_for(const ExperimentConfig& cfg, double ratio) {
  if (cfg.m > 0) return cfg.m;
  return static_cast<int>(std::lround(ratio * cfg.n));
}

// One planted-instance solve. Sub-seeds are derived from the trial seed
// so grids and trials are independently reproducible.
TrialResult run_trial(const ExperimentConfig& cfg, int m,
                      std::uint64_t trial_seed, double snr_db) {
  TrialResult tr;
  tr.outcome.seed = trial_seed;
  tr.outcome.m_over_n = static_cast<double>(m) / cfg.n;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const CVec x = planted_signal(cfg.n, cfg.field, rng::derive_seed(trial_seed, 1));
    auto ens0 = MeasurementEnsemble::gaussian(cfg.n, m, cfg.field,
                                              rng::derive_seed(trial_seed, 2));
    Vec b = ens0.forward_intensity(x);
    if (std::isfinite(snr_db)) {
      const bool clamp = cfg.solver.fidelity == Fidelity::Poisson;
      b = metrics::add_gaussian_noise(b, snr_db, rng::derive_seed(trial_seed, 3),
                                      clamp)
              .b;
    }
    const auto ens = ens0.with_intensities(std::move(b));

    RestartConfig rc = cfg.solver;
    rc.eig.seed = rng::derive_seed(trial_seed, 4);
    const CMat Y0 =
        random_factor(cfg.n, 1, cfg.field, rng::derive_seed(trial_seed, 5));

    CVec xhat;
    if (cfg.stage1_only) {
      ObjectiveSpec spec;
      spec.fidelity = rc.fidelity;
      spec.lambda = 0.0;
      spec.poisson_floor =
          ObjectiveSpec::recommended_floor(ens.intensities());
      IncreConfig ic;
      ic.p_max = rc.p_max;
      ic.epsilon = rc.eps_stage[0];
      ic.inner = rc.inner;
      ic.eig = rc.eig;
      auto [Y1, cert, rep] = increpr_solve(spec, ens, Y0, ic);
      xhat = rank_one_extract(Y1, rc.rank1).vec;
      tr.record.stage_termination_p.push_back(rep.termination_p);
      tr.record.stage_values.push_back(rep.final_value);
      tr.record.stage_certified.push_back(rep.certified ? 1 : 0);
      tr.record.total_inner_iterations = rep.inner_iterations;
    } else {
      RestartResult rr = restart_solve(ens, rc, Y0);
      xhat = std::move(rr.signal);
      tr.record = std::move(rr.record);
    }
    tr.record.seed = trial_seed;
    tr.outcome.relerr = metrics::relerr_phase(xhat, x);
    tr.outcome.success = tr.outcome.relerr < cfg.success_threshold;
  } catch (const std::exception&) {
    tr.failed = true;
    tr.outcome.relerr = std::numeric_limits<double>::infinity();
    tr.outcome.success = false;
  }
  tr.runtime_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return tr;
}

double mean_of(const std::vector<TrialResult>& trials,
               const std::function<double(const TrialResult&)>& get) {
  double acc = 0.0;
  for (const auto& t : trials) acc += get(t);
  return trials.empty() ? 0.0 : acc / static_cast<double>(trials.size());
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output " + path);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace

std::vector<TransitionRow> run_phase_transition(const ExperimentConfig& cfg) {
  if (cfg.trials < 1 || cfg.m_over_n.empty())
    throw std::invalid_argument("phase transition: need trials and a grid");
  const int points = static_cast<int>(cfg.m_over_n.size());
  std::vector<TransitionRow> rows(points);
  std::vector<TrialResult> flat(
      static_cast<size_t>(points) * cfg.trials);

  parallel_for(points * cfg.trials, cfg.threads, [&](int idx) {
    const int mi = idx / cfg.trials;
    const int ti = idx % cfg.trials;
    const int m = measurements_for(cfg, cfg.m_over_n[mi]);
    flat[idx] = run_trial(cfg, m, rng::derive_seed(cfg.seed, mi, ti),
                          std::numeric_limits<double>::quiet_NaN());
  });

  bool partial = false;
  for (int mi = 0; mi < points; ++mi) {
    TransitionRow& row = rows[mi];
    row.m_over_n = static_cast<double>(measurements_for(cfg, cfg.m_over_n[mi])) /
                   cfg.n;
    row.trials.assign(flat.begin() + static_cast<size_t>(mi) * cfg.trials,
                      flat.begin() + static_cast<size_t>(mi + 1) * cfg.trials);
    std::vector<metrics::TrialOutcome> outcomes;
    for (const auto& t : row.trials) {
      outcomes.push_back(t.outcome);
      partial |= t.failed;
    }
    row.recovery_rate = metrics::recovery_rate(outcomes);
    row.mean_relerr =
        mean_of(row.trials, [](const TrialResult& t) {
          return std::isfinite(t.outcome.relerr) ? t.outcome.relerr : 1.0;
        });
    row.mean_termination_p = mean_of(row.trials, [](const TrialResult& t) {
      return t.record.stage_termination_p.empty()
                 ? 0.0
                 : t.record.stage_termination_p.front();
    });
    row.mean_runtime_ms =
        mean_of(row.trials, [](const TrialResult& t) { return t.runtime_ms; });
  }

  if (!cfg.out_path.empty()) {
    std::vector<std::string> lines;
    lines.push_back(
        "m_over_n,recovery_rate,mean_relerr,mean_termination_p,"
        "mean_runtime_ms");
    for (const auto& r : rows)
      lines.push_back(fmt(r.m_over_n, "%.6g") + "," +
                      fmt(r.recovery_rate, "%.6g") + "," +
                      fmt(r.mean_relerr, "%.10e") + "," +
                      fmt(r.mean_termination_p, "%.6g") + "," +
                      fmt(r.mean_runtime_ms, "%.3f"));
    if (partial) lines.push_back("# partial=true");
    write_lines(cfg.out_path, lines);
  }
  return rows;
}

std::vector<NoiseRow> run_noise_sweep(const ExperimentConfig& cfg) {
  if (cfg.trials < 1 || cfg.snr_db.empty() || cfg.m_over_n.empty())
    throw std::invalid_argument("noise sweep: need trials and grids");
  const int m = measurements_for(cfg, cfg.m_over_n.front());
  const int points = static_cast<int>(cfg.snr_db.size());
  std::vector<NoiseRow> rows(points);
  std::vector<TrialResult> flat(static_cast<size_t>(points) * cfg.trials);

  parallel_for(points * cfg.trials, cfg.threads, [&](int idx) {
    const int si = idx / cfg.trials;
    const int ti = idx % cfg.trials;
    flat[idx] =
        run_trial(cfg, m, rng::derive_seed(cfg.seed, si, ti), cfg.snr_db[si]);
  });

  bool partial = false;
  for (int si = 0; si < points; ++si) {
    NoiseRow& row = rows[si];
    row.snr_db = cfg.snr_db[si];
    row.m_over_n = static_cast<double>(m) / cfg.n;
    row.trials.assign(flat.begin() + static_cast<size_t>(si) * cfg.trials,
                      flat.begin() + static_cast<size_t>(si + 1) * cfg.trials);
    for (const auto& t : row.trials) partial |= t.failed;
    row.mean_relerr = mean_of(row.trials, [](const TrialResult& t) {
      return std::isfinite(t.outcome.relerr) ? t.outcome.relerr : 1.0;
    });
  }

  if (!cfg.out_path.empty()) {
    std::vector<std::string> lines;
    lines.push_back("snr_db,m_over_n,mean_relerr");
    for (const auto& r : rows)
      lines.push_back(fmt(r.snr_db, "%.6g") + "," + fmt(r.m_over_n, "%.6g") +
                      "," + fmt(r.mean_relerr, "%.10e"));
    if (partial) lines.push_back("# partial=true");
    write_lines(cfg.out_path, lines);
  }
  return rows;
}

FourierRun run_fourier_image(const ExperimentConfig& cfg, const Mat& image) {
  if (cfg.trials < 1)
    throw std::invalid_argument("fourier: need at least one start");
  const auto ens = MeasurementEnsemble::fourier(image);

  RestartConfig rc = cfg.solver;
  rc.fidelity = Fidelity::Poisson;

  FourierRun run;
  run.start_errors.resize(cfg.trials);
  std::vector<CVec> finals(cfg.trials);

  parallel_for(cfg.trials, cfg.threads, [&](int s) {
    RestartConfig local = rc;
    local.eig.seed = rng::derive_seed(cfg.seed, s, 7);
    RepeatResult rep =
        repeated_restart(ens, local, image, rng::derive_seed(cfg.seed, s));
    run.start_errors[s] = std::move(rep.repeat_errors);
    finals[s] = std::move(rep.signal);
  });

  const int K = rc.repeats;
  run.mean_per_repeat.assign(K, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int s = 0; s < cfg.trials; ++s)
      run.mean_per_repeat[k] += run.start_errors[s][k];
    run.mean_per_repeat[k] /= cfg.trials;
  }

  int best = 0;
  for (int s = 1; s < cfg.trials; ++s)
    if (run.start_errors[s].back() < run.start_errors[best].back()) best = s;
  const int n1 = static_cast<int>(image.rows());
  const int n2 = static_cast<int>(image.cols());
  CMat rec_img(n1, n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) rec_img(i, j) = finals[best](i * n2 + j);
  run.reconstruction = metrics::align_fourier(rec_img, image);

  if (!cfg.image_out.empty()) pgm::write(cfg.image_out, run.reconstruction);
  if (!cfg.out_path.empty()) {
    json doc;
    doc["experiment"] = "fourier";
    doc["image_rows"] = n1;
    doc["image_cols"] = n2;
    doc["repeats"] = K;
    doc["starts"] = cfg.trials;
    doc["seed"] = cfg.seed;
    doc["errors"] = run.start_errors;
    doc["mean_per_repeat"] = run.mean_per_repeat;
    doc["timestamp"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    std::ofstream out(cfg.out_path);
    if (!out) throw std::runtime_error("cannot open " + cfg.out_path);
    out << doc.dump(2) << '\n';
  }
  return run;
}

FourierRun run_fourier(const ExperimentConfig& cfg) {
  if (cfg.image_path.empty())
    throw std::invalid_argument("fourier: no input image");
  return run_fourier_image(cfg, pgm::read(cfg.image_path));
}

void write_ensemble_file(const ExperimentConfig& cfg) {
  if (cfg.ensemble_path.empty())
    throw std::invalid_argument("gen: no ensemble output path");
  const int m = measurements_for(cfg, cfg.m_over_n.front());
  const CVec x = planted_signal(cfg.n, cfg.field, rng::derive_seed(cfg.seed, 1));
  auto ens = MeasurementEnsemble::gaussian(cfg.n, m, cfg.field,
                                           rng::derive_seed(cfg.seed, 2));
  Vec b = ens.forward_intensity(x);
  ens.with_intensities(std::move(b)).save(cfg.ensemble_path);
}

namespace {

json factor_to_json(const CMat& Y) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    json row_re = json::array(), row_im = json::array();
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      row_re.push_back(Y(i, j).real());
      row_im.push_back(Y(i, j).imag());
    }
    re.push_back(std::move(row_re));
    im.push_back(std::move(row_im));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CMat factor_from_json(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const int n = static_cast<int>(re.size());
  if (n == 0) throw std::runtime_error("result: empty factor");
  const int p = static_cast<int>(re.at(0).size());
  CMat Y(n, p);
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < p; ++jj)
      Y(i, jj) = cxd(re.at(i).at(jj).get<double>(),
                     im.at(i).at(jj).get<double>());
  return Y;
}

}  // namespace

nlohmann::json run_single_solve(const ExperimentConfig& cfg) {
  MeasurementEnsemble ens = [&] {
    if (!cfg.ensemble_path.empty())
      return MeasurementEnsemble::load(cfg.ensemble_path);
    const int m = measurements_for(cfg, cfg.m_over_n.front());
    const CVec x =
        planted_signal(cfg.n, cfg.field, rng::derive_seed(cfg.seed, 1));
    auto e = MeasurementEnsemble::gaussian(cfg.n, m, cfg.field,
                                           rng::derive_seed(cfg.seed, 2));
    Vec b = e.forward_intensity(x);
    return e.with_intensities(std::move(b));
  }();

  RestartConfig rc = cfg.solver;
  rc.eig.seed = rng::derive_seed(cfg.seed, 4);
  const CMat Y0 =
      random_factor(ens.n(), 1, ens.field(), rng::derive_seed(cfg.seed, 5));
  RestartResult rr = restart_solve(ens, rc, Y0);

  // the final factor is a stationary point of the lambda = 0 problem
  ObjectiveSpec spec;
  spec.fidelity = rc.fidelity;
  spec.lambda = 0.0;
  spec.poisson_floor = ObjectiveSpec::recommended_floor(ens.intensities());
  const Evaluation ev = evaluate(spec, ens, rr.final_factor);

  json doc;
  doc["experiment"] = "solve";
  doc["n"] = ens.n();
  doc["m"] = ens.m();
  doc["field"] = ens.field() == Field::Real ? "real" : "complex";
  doc["fidelity"] =
      rc.fidelity == Fidelity::LeastSquares ? "least_squares" : "poisson";
  doc["lambda"] = 0.0;
  doc["seed"] = cfg.seed;
  doc["objective"] = ev.value;
  doc["grad_norm"] = ev.gradient.norm();
  doc["stage_termination_p"] = rr.record.stage_termination_p;
  doc["stage_values"] = rr.record.stage_values;
  json certified = json::array();
  for (char c : rr.record.stage_certified) certified.push_back(c != 0);
  doc["stage_certified"] = certified;
  doc["total_inner_iterations"] = rr.record.total_inner_iterations;
  doc["factor"] = factor_to_json(rr.final_factor);
  if (cfg.ensemble_path.empty()) {
    const CVec x =
        planted_signal(cfg.n, cfg.field, rng::derive_seed(cfg.seed, 1));
    doc["relerr"] = metrics::relerr_phase(rr.signal, x);
  }
  doc["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) throw std::runtime_error("cannot open " + cfg.out_path);
    out << doc.dump(2) << '\n';
  }
  return doc;
}

nlohmann::json run_cert_audit(const ExperimentConfig& cfg) {
  if (cfg.ensemble_path.empty() || cfg.result_path.empty())
    throw std::invalid_argument("cert-audit: need ensemble and result paths");
  const auto ens = MeasurementEnsemble::load(cfg.ensemble_path);
  std::ifstream in(cfg.result_path);
  if (!in) throw std::runtime_error("cannot open " + cfg.result_path);
  json result = json::parse(in);

  const CMat Y = factor_from_json(result.at("factor"));
  if (Y.rows() != ens.n())
    throw std::runtime_error("cert-audit: factor/ensemble mismatch");

  ObjectiveSpec spec;
  spec.fidelity = result.value("fidelity", "least_squares") == "poisson"
                      ? Fidelity::Poisson
                      : Fidelity::LeastSquares;
  spec.lambda = result.value("lambda", 0.0);
  spec.poisson_floor = ObjectiveSpec::recommended_floor(ens.intensities());

  const Evaluation ev = evaluate(spec, ens, Y);
  const double eps =
      cfg.audit_epsilon > 0.0 ? cfg.audit_epsilon : 1e-8 * ens.m();
  EigOptions eig;
  eig.seed = rng::derive_seed(cfg.seed, 9);
  const CertificateResult cert = check_certificate(spec, ens, Y, eps, eig);

  json doc;
  doc["experiment"] = "cert_audit";
  doc["n"] = ens.n();
  doc["m"] = ens.m();
  doc["objective"] = ev.value;
  doc["grad_norm"] = ev.gradient.norm();
  doc["nu_min"] = cert.nu_min;
  doc["psd_within"] = eps;
  doc["certified"] = cert.is_certified;
  doc["eig_converged"] = cert.eig_converged;
  if (ens.n() <= 16) {
    const DenseSolveResult oracle = dense_lifted_solve(spec, ens);
    doc["oracle_value"] = oracle.value;
    doc["oracle_converged"] = oracle.converged;
    doc["oracle_gap"] = std::abs(ev.value - oracle.value) /
                        std::max(1.0, std::abs(oracle.value));
  }
  doc["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  if (!cfg.out_path.empty()) {
    std::ofstream out(cfg.out_path);
    if (!out) throw std::runtime_error("cannot open " + cfg.out_path);
    out << doc.dump(2) << '\n';
  }
  return doc;
}

}  // namespace increpr::bench
