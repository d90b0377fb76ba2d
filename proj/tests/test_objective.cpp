#include "doctest.h"

#include "increpr/bench.hpp"
#include "increpr/objective.hpp"
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

}  // namespace

TEST_CASE("value vanishes at a zero-residual factor with lambda = 0") {
  CVec x;
  const auto e = planted_instance(6, 18, Field::Complex, 4, &x);
  ObjectiveSpec spec;  // least squares, lambda 0
  CHECK(value(spec, e, x) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gradient(spec, e, x).norm() <= 1e-10);

  spec.fidelity = Fidelity::Poisson;
  spec.poisson_floor = ObjectiveSpec::recommended_floor(e.intensities());
  CHECK(gradient(spec, e, x).norm() <= 1e-8 * e.m());
}

TEST_CASE("poisson value with zero intensities reduces to sum of t") {
  auto e0 = MeasurementEnsemble::gaussian(5, 11, Field::Real, 3);
  const auto e = e0.with_intensities(Vec::Zero(11));
  ObjectiveSpec spec;
  spec.fidelity = Fidelity::Poisson;
  const CMat Y = bench::random_factor(5, 2, Field::Real, 8);
  const Vec t = e.forward_intensity(Y);
  CHECK(value(spec, e, Y) == doctest::Approx(t.sum()).epsilon(1e-13));
}

TEST_CASE("value matches the dense-lift oracle") {
  const auto e = planted_instance(4, 10, Field::Complex, 12);
  const CMat Y = bench::random_factor(4, 2, Field::Complex, 5);
  for (const auto fid : {Fidelity::LeastSquares, Fidelity::Poisson}) {
    ObjectiveSpec spec;
    spec.fidelity = fid;
    spec.lambda = 0.7;
    spec.poisson_floor = ObjectiveSpec::recommended_floor(e.intensities());
    const double ref =
        oracles::value_dense_lift(spec, e.rows(), e.intensities(), Y);
    CHECK(value(spec, e, Y) == doctest::Approx(ref).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central finite differences") {
  const auto e = planted_instance(5, 15, Field::Complex, 21);
  const CMat Y = bench::random_factor(5, 2, Field::Complex, 6);
  for (const auto fid : {Fidelity::LeastSquares, Fidelity::Poisson}) {
    ObjectiveSpec spec;
    spec.fidelity = fid;
    spec.lambda = 0.3;
    spec.poisson_floor = ObjectiveSpec::recommended_floor(e.intensities());
    const CMat g = gradient(spec, e, Y);
    const CMat g_fd = oracles::fd_gradient(spec, e, Y);
    CHECK((g - g_fd).norm() <= 1e-5 * std::max(1.0, g_fd.norm()));
  }
}

TEST_CASE("real field keeps gradients real") {
  const auto e = planted_instance(5, 14, Field::Real, 33);
  const CMat Y = bench::random_factor(5, 2, Field::Real, 7);
  ObjectiveSpec spec;
  spec.lambda = 0.1;
  CHECK((gradient(spec, e, Y).imag().array() == 0.0).all());
}

TEST_CASE("hessian action: zero direction, finite differences, linearity") {
  const auto e = planted_instance(5, 12, Field::Complex, 40);
  const CMat Y = bench::random_factor(5, 2, Field::Complex, 9);
  const CMat xi = bench::random_factor(5, 2, Field::Complex, 10);
  for (const auto fid : {Fidelity::LeastSquares, Fidelity::Poisson}) {
    ObjectiveSpec spec;
    spec.fidelity = fid;
    spec.lambda = 0.2;
    spec.poisson_floor = ObjectiveSpec::recommended_floor(e.intensities());
    CHECK(hessian_vec(spec, e, Y, CMat::Zero(5, 2)).norm() == 0.0);
    const CMat H = hessian_vec(spec, e, Y, xi);
    const CMat H_fd = oracles::fd_hessian_vec(spec, e, Y, xi);
    CHECK((H - H_fd).norm() <= 1e-4 * std::max(1.0, H_fd.norm()));
    const CMat H3 = hessian_vec(spec, e, Y, 3.0 * xi);
    CHECK((H3 - 3.0 * H).norm() <= 1e-12 * std::max(1.0, H.norm()));
  }
}

TEST_CASE("objective is invariant under unitary column mixing") {
  const auto e = planted_instance(6, 20, Field::Complex, 50);
  const CMat Y = bench::random_factor(6, 2, Field::Complex, 11);
  ObjectiveSpec spec;
  spec.lambda = 2.0;
  // a unitary 2x2 rotation with a phase
  CMat Q(2, 2);
  const double c = std::cos(0.7), s = std::sin(0.7);
  Q << cxd(c, 0), cxd(-s, 0.3), cxd(s, 0.3), cxd(c, 0);
  Eigen::JacobiSVD<CMat> svd(Q, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Q = svd.matrixU() * svd.matrixV().adjoint();  // exact unitary
  const double f0 = value(spec, e, Y);
  const double f1 = value(spec, e, Y * Q);
  CHECK(f1 == doctest::Approx(f0).epsilon(1e-12));
}

TEST_CASE("negative gradient is a strict descent direction") {
  const auto e = planted_instance(5, 16, Field::Real, 61);
  const CMat Y = bench::random_factor(5, 2, Field::Real, 13);
  for (const auto fid : {Fidelity::LeastSquares, Fidelity::Poisson}) {
    ObjectiveSpec spec;
    spec.fidelity = fid;
    spec.lambda = 0.5;
    spec.poisson_floor = ObjectiveSpec::recommended_floor(e.intensities());
    const double f0 = value(spec, e, Y);
    const CMat g = gradient(spec, e, Y);
    REQUIRE(g.norm() > 0.0);
    const double h = 1e-6 / std::max(1.0, g.norm());
    CHECK(value(spec, e, Y - h * g) < f0);
  }
}
