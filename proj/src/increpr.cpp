#include "increpr/increpr.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>
#include <string>

#include "increpr/metrics.hpp"
#include "increpr/rng.hpp"

namespace increpr {

std::tuple<CMat, CertificateResult, IncreReport> increpr_solve(
    const ObjectiveSpec& spec, const MeasurementEnsemble& ens, const CMat& Y0,
    const IncreConfig& cfg) {
  if (Y0.rows() != ens.n())
    throw std::invalid_argument("increpr_solve: factor/ensemble mismatch");
  const int p_max = std::min(cfg.p_max, ens.n());
  if (Y0.cols() < 1 || Y0.cols() > p_max)
    throw std::invalid_argument("increpr_solve: need 1 <= p0 <= p_max");

  CMat Y = Y0;
  IncreReport report;
  CertificateResult cert;

  for (;;) {
    auto [Ys, trace] = minimize_stationary(spec, ens, Y, cfg.inner);
    Y = std::move(Ys);
    report.inner_iterations += trace.iterations;
    if (cfg.inner.record_values)
      report.trace.insert(report.trace.end(), trace.values.begin(),
                          trace.values.end());
    report.final_value = trace.final_value;
    report.final_grad_norm = trace.final_grad_norm;

    EigOptions eig = cfg.eig;
    eig.seed = rng::derive_seed(cfg.eig.seed, 0xce, report.increments);
    cert = check_certificate(spec, ens, Y, cfg.epsilon, eig);
    report.termination_p = static_cast<int>(Y.cols());
    if (cert.is_certified) {
      report.certified = true;
      break;
    }
    if (Y.cols() >= p_max) break;

    // pad a zero column (stationarity is preserved exactly) and take one
    // strictly decreasing step along the negative-curvature direction
    const int n = ens.n();
    CMat padded(n, Y.cols() + 1);
    padded.leftCols(Y.cols()) = Y;
    padded.col(Y.cols()).setZero();

    const double f_pad = report.final_value;
    const double curv = std::max(std::abs(cert.nu_min), 1e-8);
    double alpha = cfg.escape_alpha0 > 0.0 ? cfg.escape_alpha0 : 1.0 / curv;
    bool escaped = false;
    for (int shrink = 0; shrink < cfg.escape_max_shrinks; ++shrink) {
      CMat trial = padded;
      trial.col(Y.cols()) = alpha * cert.v;
      double f_try;
      try {
        f_try = value(spec, ens, trial);
      } catch (const std::runtime_error&) {
        alpha *= 0.5;  // overflowed trial, shrink
        continue;
      }
      if (f_try <= f_pad - cfg.escape_c1 * alpha * alpha * curv) {
        Y = std::move(trial);
        report.final_value = f_try;
        if (cfg.inner.record_values) report.trace.push_back(f_try);
        escaped = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!escaped)
      throw std::runtime_error(
          "increpr_solve: escape step found no decrease after " +
          std::to_string(cfg.escape_max_shrinks) +
          " shrinks at p = " + std::to_string(Y.cols()) +
          " (nu_min = " + std::to_string(cert.nu_min) +
          " is numerically ~0; enlarge epsilon)");
    ++report.increments;
  }
  return {std::move(Y), std::move(cert), std::move(report)};
}

RankOneResult rank_one_extract(const CMat& Y, RankOne method) {
  if (Y.cols() < 1) throw std::invalid_argument("rank_one_extract: empty");
  const int n = static_cast<int>(Y.rows());

  Eigen::Index max_col = 0;
  const double max_norm = Y.colwise().norm().maxCoeff(&max_col);
  if (max_norm == 0.0) return {CVec::Zero(n), true};
  if (Y.cols() == 1 || method == RankOne::MaxNormColumn)
    return {Y.col(max_col), false};

  Eigen::JacobiSVD<CMat> svd(Y, Eigen::ComputeThinU);
  CVec y = svd.singularValues()(0) * svd.matrixU().col(0);
  // align the arbitrary SVD phase with the dominant column
  const cxd corr = y.dot(Y.col(max_col));
  if (std::abs(corr) > 0.0) y *= corr / std::abs(corr);
  return {std::move(y), false};
}

namespace {

bool numerically_rank_one(const CMat& Y, double ratio) {
  if (Y.cols() == 1) return true;
  Eigen::JacobiSVD<CMat> svd(Y);
  const Vec s = svd.singularValues();
  return s(0) == 0.0 || s(1) <= ratio * s(0);
}

IncreConfig stage_config(const RestartConfig& cfg, double epsilon,
                         int stage_index) {
  IncreConfig ic;
  ic.p_max = cfg.p_max;
  ic.epsilon = epsilon;
  ic.inner = cfg.inner;
  ic.eig = cfg.eig;
  ic.eig.seed = rng::derive_seed(cfg.eig.seed, 0x57a6e, stage_index);
  return ic;
}

void push_stage(RunRecord& rec, const IncreReport& rep) {
  rec.stage_termination_p.push_back(rep.termination_p);
  rec.stage_values.push_back(rep.final_value);
  rec.stage_certified.push_back(rep.certified ? 1 : 0);
  rec.total_inner_iterations += rep.inner_iterations;
}

}  // namespace

namespace {

// one pass of the three-stage scheme
RestartResult restart_pass(const MeasurementEnsemble& ens,
                           const RestartConfig& cfg, const CMat& Y0,
                           int round) {
  RestartResult out;
  const double mean_b = ens.intensities().mean();

  ObjectiveSpec spec;
  spec.fidelity = cfg.fidelity;
  spec.poisson_floor = ObjectiveSpec::recommended_floor(ens.intensities());

  // stage I: pure data fit
  spec.lambda = 0.0;
  auto [Y1, cert1, rep1] = increpr_solve(
      spec, ens, Y0,
      stage_config(cfg, cfg.stage_epsilon(0, mean_b), 3 * round + 0));
  push_stage(out.record, rep1);
  if (numerically_rank_one(Y1, cfg.rank_one_ratio)) {
    out.signal = rank_one_extract(Y1, cfg.rank1).vec;
    out.final_factor = std::move(Y1);
    return out;
  }

  // stage II: trace penalty biases the factor low-rank, warm-started
  // from the full stage-I factor
  spec.lambda = cfg.trace_weight(mean_b);
  auto [Y2, cert2, rep2] = increpr_solve(
      spec, ens, Y1,
      stage_config(cfg, cfg.stage_epsilon(1, mean_b), 3 * round + 1));
  push_stage(out.record, rep2);

  // stage III: refinement from the rank-one collapse of stage II
  spec.lambda = 0.0;
  CVec y2 = rank_one_extract(Y2, cfg.rank1).vec;
  auto [Y3, cert3, rep3] = increpr_solve(
      spec, ens, y2,
      stage_config(cfg, cfg.stage_epsilon(2, mean_b), 3 * round + 2));
  push_stage(out.record, rep3);
  out.signal = rank_one_extract(Y3, cfg.rank1).vec;
  out.final_factor = std::move(Y3);
  return out;
}

}  // namespace

RestartResult restart_solve(const MeasurementEnsemble& ens,
                            const RestartConfig& cfg, const CMat& Y0) {
  if (Y0.cols() != 1)
    throw std::invalid_argument("restart_solve: stage I starts at p0 = 1");
  if (cfg.rounds < 1)
    throw std::invalid_argument("restart_solve: need at least one round");

  RestartResult out = restart_pass(ens, cfg, Y0, 0);
  for (int r = 1; r < cfg.rounds; ++r) {
    const CVec prev = out.signal;
    RestartResult next = restart_pass(ens, cfg, prev, r);
    // merge stage records across rounds
    auto& rec = out.record;
    rec.stage_termination_p.insert(rec.stage_termination_p.end(),
                                   next.record.stage_termination_p.begin(),
                                   next.record.stage_termination_p.end());
    rec.stage_values.insert(rec.stage_values.end(),
                            next.record.stage_values.begin(),
                            next.record.stage_values.end());
    rec.stage_certified.insert(rec.stage_certified.end(),
                               next.record.stage_certified.begin(),
                               next.record.stage_certified.end());
    rec.total_inner_iterations += next.record.total_inner_iterations;
    out.signal = std::move(next.signal);
    out.final_factor = std::move(next.final_factor);
    if (prev.norm() > 0.0 &&
        metrics::relerr_phase(out.signal, prev) <= 1e-10)
      break;
  }
  return out;
}

RepeatResult repeated_restart(const MeasurementEnsemble& ens,
                              const RestartConfig& cfg, const Mat& truth,
                              std::uint64_t seed) {
  if (ens.backend() != MeasurementEnsemble::Backend::FourierOversampled)
    throw std::invalid_argument("repeated_restart: needs a Fourier ensemble");
  if (cfg.repeats < 1)
    throw std::invalid_argument("repeated_restart: need K >= 1");

  ObjectiveSpec spec;
  spec.fidelity = Fidelity::Poisson;
  spec.lambda = 0.0;
  spec.poisson_floor = ObjectiveSpec::recommended_floor(ens.intensities());

  const int n = ens.n();
  const int n1 = ens.fourier_rows(), n2 = ens.fourier_cols();

  rng::SplitMix64 gen(rng::derive_seed(seed, 0xf0a));
  CMat x(n, 1);
  for (int i = 0; i < n; ++i)
    x(i, 0) = cxd(static_cast<double>(gen.uniform_int(0, 100)), 0.0);

  RepeatResult out;
  out.record.seed = seed;
  for (int k = 0; k < cfg.repeats; ++k) {
    IncreConfig ic = stage_config(cfg, cfg.repeat_epsilon, k);
    auto [Yk, cert, rep] = increpr_solve(spec, ens, x, ic);
    push_stage(out.record, rep);
    CVec xk = rank_one_extract(Yk, cfg.rank1).vec;
    // reshape row-major into the image plane for alignment
    CMat img(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) img(i, j) = xk(i * n2 + j);
    out.repeat_errors.push_back(metrics::relerr_fourier(img, truth));
    x = xk;
  }
  out.signal = x.col(0);
  return out;
}

}  // namespace increpr
