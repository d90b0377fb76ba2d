#include "doctest.h"

#include "increpr/bench.hpp"
#include "increpr/dense_oracle.hpp"
#include "increpr/increpr.hpp"
#include "increpr/rng.hpp"
#include "oracles.hpp"

using namespace increpr;

namespace {

MeasurementEnsemble planted_instance(int n, int m, Field field,
                                     std::uint64_t seed, CVec* truth = nullptr) {
  const CVec x = bench::planted_signal(n, field, rng::derive_seed(seed, 1));
  auto e = MeasurementEnsemble::gaussian(n, m, field, rng::derive_seed(seed, 2));
  if (truth) *truth = x;
  return e.with_intensities(e.forward_intensity(x));
}

IncreConfig tight_incre(double eps) {
  IncreConfig ic;
  ic.epsilon = eps;
  ic.inner.max_iters = 3000;
  ic.inner.grad_tol = 1e-11;
  ic.inner.record_values = true;
  return ic;
}

}  // namespace

TEST_CASE("an already certified start returns immediately") {
  CVec x;
  const auto e = planted_instance(8, 40, Field::Real, 90, &x);
  ObjectiveSpec spec;
  auto [Y, cert, rep] = increpr_solve(spec, e, x, tight_incre(1e-6));
  CHECK(rep.certified);
  CHECK(rep.termination_p == 1);
  CHECK(rep.increments == 0);
  CHECK((Y - x).norm() <= 1e-8);
}

TEST_CASE("increpr run is monotone, escapes strictly, and pads cleanly") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    CVec x;
    const auto e = planted_instance(10, 25, Field::Real, 400 + s, &x);
    ObjectiveSpec spec;
    IncreConfig ic = tight_incre(1e-7);
    const CMat Y0 = bench::random_factor(10, 1, Field::Real, 31 + s);
    auto [Y, cert, rep] = increpr_solve(spec, e, Y0, ic);
    for (size_t k = 1; k < rep.trace.size(); ++k)
      CHECK(rep.trace[k] <= rep.trace[k - 1] + 1e-12);
    CHECK(rep.termination_p >= 1);
    CHECK(rep.termination_p <= ic.p_max);
  }
}

TEST_CASE("padding a zero column preserves the gradient exactly") {
  const auto e = planted_instance(7, 21, Field::Complex, 92);
  const CMat Y = bench::random_factor(7, 2, Field::Complex, 33);
  ObjectiveSpec spec;
  spec.lambda = 0.3;
  CMat padded(7, 3);
  padded.leftCols(2) = Y;
  padded.col(2).setZero();
  const double g0 = gradient(spec, e, Y).norm();
  const double g1 = gradient(spec, e, padded).norm();
  CHECK(g0 == g1);
  CHECK(value(spec, e, Y) == value(spec, e, padded));
}

TEST_CASE("certified small instances match the dense lifted reference") {
  int compared = 0;
  for (std::uint64_t s = 0; s < 6; ++s) {
    const auto e = planted_instance(8, 40, Field::Real, 500 + s);
    for (const double lambda : {0.0, 10.0}) {
      ObjectiveSpec spec;
      spec.lambda = lambda;
      IncreConfig ic = tight_incre(1e-8 * e.m());
      ic.eig.tol = 1e-9;
      const CMat Y0 = bench::random_factor(8, 1, Field::Real, 41 + s);
      auto [Y, cert, rep] = increpr_solve(spec, e, Y0, ic);
      if (!rep.certified) continue;
      const DenseSolveResult oracle = dense_lifted_solve(spec, e);
      CHECK(std::abs(rep.final_value - oracle.value) <=
            1e-4 * std::max(1.0, std::abs(oracle.value)));
      ++compared;
    }
  }
  CHECK(compared >= 4);
}

TEST_CASE("rank-one extraction") {
  rng::SplitMix64 gen(1);
  CVec x(8);
  for (int i = 0; i < 8; ++i) x(i) = gen.cnormal();

  SUBCASE("p = 1 returns the column unchanged") {
    const CMat Y = x;
    CHECK((rank_one_extract(Y, RankOne::Svd).vec - x).norm() == 0.0);
    CHECK((rank_one_extract(Y, RankOne::MaxNormColumn).vec - x).norm() == 0.0);
  }
  SUBCASE("[x | 0] returns x") {
    CMat Y = CMat::Zero(8, 2);
    Y.col(0) = x;
    CHECK((rank_one_extract(Y, RankOne::Svd).vec - x).norm() <= 1e-12);
    CHECK((rank_one_extract(Y, RankOne::MaxNormColumn).vec - x).norm() == 0.0);
  }
  SUBCASE("zero factor flags") {
    const auto r = rank_one_extract(CMat::Zero(8, 2), RankOne::Svd);
    CHECK(r.zero_factor);
    CHECK(r.vec.norm() == 0.0);
  }
  SUBCASE("svd result is the optimal rank-one factor") {
    const CMat Y = bench::random_factor(8, 3, Field::Complex, 51);
    const CVec y = rank_one_extract(Y, RankOne::Svd).vec;
    Eigen::JacobiSVD<CMat> svd(Y, Eigen::ComputeThinU);
    CHECK(y.norm() == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
    // with the optimal companion w, the residual ||Y - y w*||_F equals
    // the tail singular energy
    const double tail = std::sqrt(std::max(
        0.0, Y.squaredNorm() - svd.singularValues()(0) * svd.singularValues()(0)));
    const CVec w = Y.adjoint() * y / y.squaredNorm();
    CHECK((Y - y * w.adjoint()).norm() <= tail + 1e-9);
  }
}

TEST_CASE("restart recovers real gaussian instances at moderate m/n") {
  int hits = 0;
  const int trials = 8;
  for (std::uint64_t s = 0; s < trials; ++s) {
    CVec x;
    const auto e = planted_instance(32, 96, Field::Real, 600 + s, &x);
    RestartConfig rc;
    rc.inner.max_iters = 1000;
    rc.eig.seed = s;
    const CMat Y0 = bench::random_factor(32, 1, Field::Real, 61 + s);
    const RestartResult rr = restart_solve(e, rc, Y0);
    if (metrics::relerr_phase(rr.signal, x) < 1e-5) ++hits;
  }
  CHECK(hits >= trials - 1);
}

TEST_CASE("oversampled regime short-circuits after stage I") {
  int skipped = 0;
  const int trials = 5;
  for (std::uint64_t s = 0; s < trials; ++s) {
    CVec x;
    const auto e = planted_instance(32, 8 * 32, Field::Real, 700 + s, &x);
    RestartConfig rc;
    rc.inner.max_iters = 1000;
    const CMat Y0 = bench::random_factor(32, 1, Field::Real, 71 + s);
    const RestartResult rr = restart_solve(e, rc, Y0);
    if (rr.record.stage_termination_p.size() == 1) ++skipped;
    CHECK(metrics::relerr_phase(rr.signal, x) < 1e-5);
  }
  CHECK(skipped >= trials - 1);
}

TEST_CASE("repeated_restart on a small fourier instance") {
  const Mat img = oracles::synthetic_image(8, 8, 13);
  const auto e = MeasurementEnsemble::fourier(img);
  RestartConfig rc;
  rc.fidelity = Fidelity::Poisson;
  rc.repeats = 3;
  rc.rank1 = RankOne::MaxNormColumn;
  rc.inner.max_iters = 400;
  rc.inner.grad_tol = 1e-8;
  const RepeatResult rep = repeated_restart(e, rc, img, 5);
  CHECK(rep.repeat_errors.size() == 3);
  for (double err : rep.repeat_errors) CHECK(std::isfinite(err));
  CHECK(rep.signal.size() == 64);

  // K = 1 runs a single solve
  rc.repeats = 1;
  const RepeatResult one = repeated_restart(e, rc, img, 5);
  CHECK(one.repeat_errors.size() == 1);
  CHECK(one.repeat_errors[0] == doctest::Approx(rep.repeat_errors[0]));
}
