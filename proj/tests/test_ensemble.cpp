#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "increpr/ensemble.hpp"
#include "increpr/rng.hpp"
#include "oracles.hpp"

using namespace increpr;

namespace {
std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("gaussian ensemble is deterministic per seed") {
  const auto a = MeasurementEnsemble::gaussian(4, 8, Field::Real, 7);
  const auto b = MeasurementEnsemble::gaussian(4, 8, Field::Real, 7);
  CHECK(a.rows() == b.rows());
  CHECK((a.rows().imag().array() == 0.0).all());
  const auto c = MeasurementEnsemble::gaussian(4, 8, Field::Real, 8);
  CHECK(a.rows() != c.rows());
}

TEST_CASE("complex gaussian entries have unit mean square") {
  const auto e = MeasurementEnsemble::gaussian(1000, 2000, Field::Complex, 1);
  const double mean = e.rows().cwiseAbs2().mean();
  CHECK(std::abs(mean - 1.0) < 0.05);
}

TEST_CASE("empty ensembles are rejected") {
  CHECK_THROWS_AS(MeasurementEnsemble::gaussian(4, 0, Field::Real, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(MeasurementEnsemble::gaussian(0, 4, Field::Real, 0),
                  std::invalid_argument);
}

TEST_CASE("fourier ensemble of the zero image") {
  const auto e = MeasurementEnsemble::fourier(Mat::Zero(4, 4));
  CHECK(e.m() == 64);
  CHECK(e.n() == 16);
  CHECK(e.intensities().norm() == 0.0);
}

TEST_CASE("fourier delta image has a flat spectrum") {
  Mat img = Mat::Zero(4, 4);
  img(1, 2) = 3.0;
  const auto e = MeasurementEnsemble::fourier(img);
  const Vec& b = e.intensities();
  for (int i = 0; i < b.size(); ++i)
    CHECK(b(i) == doctest::Approx(9.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("fourier intensities satisfy the Parseval identity") {
  const Mat img = oracles::synthetic_image(4, 4, 99);
  const auto e = MeasurementEnsemble::fourier(img);
  CHECK(e.intensities().sum() ==
        doctest::Approx(img.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("fourier ensemble rejects bad images") {
  Mat img = Mat::Zero(4, 4);
  img(0, 0) = -1.0;
  CHECK_THROWS_AS(MeasurementEnsemble::fourier(img), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementEnsemble::fourier(Mat::Zero(1, 4)),
                  std::invalid_argument);
}

TEST_CASE("forward intensity: zero factor and identity rows") {
  const auto e = MeasurementEnsemble::gaussian(5, 10, Field::Complex, 3);
  CHECK(e.forward_intensity(CMat::Zero(5, 2)).norm() == 0.0);

  const auto id = MeasurementEnsemble::from_rows(CMat::Identity(4, 4),
                                                 Field::Complex);
  CMat x(4, 1);
  x << cxd(1, 2), cxd(0, -1), cxd(3, 0), cxd(-2, 2);
  const Vec t = id.forward_intensity(x);
  for (int i = 0; i < 4; ++i)
    CHECK(t(i) == doctest::Approx(std::norm(x(i, 0))));
}

TEST_CASE("dense forward/adjoint match explicit loops") {
  rng::SplitMix64 gen(5);
  const auto e = MeasurementEnsemble::gaussian(5, 12, Field::Complex, 17);
  CMat Y(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) Y(i, j) = gen.cnormal();
  const Vec t = e.forward_intensity(Y);
  const Vec t_ref = oracles::forward_brute(e.rows(), Y);
  CHECK((t - t_ref).norm() <= 1e-12 * std::max(1.0, t_ref.norm()));
  CHECK((t.array() >= 0.0).all());

  const auto e4 = MeasurementEnsemble::gaussian(4, 10, Field::Complex, 21);
  Vec w(10);
  CMat V(4, 1);
  for (int i = 0; i < 10; ++i) w(i) = gen.normal();
  for (int i = 0; i < 4; ++i) V(i, 0) = gen.cnormal();
  const CMat A = e4.adjoint_weighted_apply(w, V);
  const CMat A_ref = oracles::adjoint_brute(e4.rows(), w, V);
  CHECK((A - A_ref).norm() <= 1e-12 * std::max(1.0, A_ref.norm()));

  CHECK(e4.adjoint_weighted_apply(Vec::Zero(10), V).norm() == 0.0);
  Vec bad = w;
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(e4.adjoint_weighted_apply(bad, V));
}

TEST_CASE("adjoint identity holds for every backend") {
  rng::SplitMix64 gen(31);
  auto check_adjoint = [&](const MeasurementEnsemble& e) {
    CMat V(e.n(), 1);
    Vec w(e.m());
    for (int i = 0; i < e.n(); ++i) V(i, 0) = gen.cnormal();
    for (int i = 0; i < e.m(); ++i) w(i) = gen.normal();
    const double lhs = rdot(e.adjoint_weighted_apply(w, V), V);
    const double rhs = w.dot(e.forward_intensity(V));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  };
  check_adjoint(MeasurementEnsemble::gaussian(6, 14, Field::Complex, 2));
  check_adjoint(MeasurementEnsemble::gaussian(6, 14, Field::Real, 2));
  check_adjoint(
      MeasurementEnsemble::fourier(oracles::synthetic_image(3, 5, 8)));
}

TEST_CASE("fourier forward matches per-column energy (unitary Parseval)") {
  rng::SplitMix64 gen(12);
  const auto e = MeasurementEnsemble::fourier(oracles::synthetic_image(4, 6, 1));
  CMat Y(e.n(), 3);
  for (int i = 0; i < e.n(); ++i)
    for (int j = 0; j < 3; ++j) Y(i, j) = gen.cnormal();
  const Vec t = e.forward_intensity(Y);
  CHECK(t.sum() == doctest::Approx(Y.squaredNorm()).epsilon(1e-12));
  CHECK((t.array() >= 0.0).all());
}

TEST_CASE("real-field adjoint outputs stay real on real inputs") {
  rng::SplitMix64 gen(9);
  const auto e = MeasurementEnsemble::gaussian(6, 15, Field::Real, 44);
  CMat V(6, 2);
  Vec w(15);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 2; ++j) V(i, j) = cxd(gen.normal(), 0.0);
  for (int i = 0; i < 15; ++i) w(i) = gen.normal();
  const CMat A = e.adjoint_weighted_apply(w, V);
  CHECK((A.imag().array() == 0.0).all());
}

TEST_CASE("PRMAT: hand-written file round-trips") {
  const std::string path = temp_path("prmat_hand.txt");
  {
    std::ofstream out(path);
    out << "PRMAT v1 real 2 2\n1 0\n0 1\nB\n1\n4\n";
  }
  const auto e = MeasurementEnsemble::load(path);
  CHECK(e.m() == 2);
  CHECK(e.n() == 2);
  CHECK(e.field() == Field::Real);
  CHECK(e.rows() == CMat::Identity(2, 2));
  CHECK(e.intensities()(0) == 1.0);
  CHECK(e.intensities()(1) == 4.0);
  std::remove(path.c_str());
}

TEST_CASE("PRMAT: save/load round-trip is bit-identical") {
  const std::string path = temp_path("prmat_rt.txt");
  auto e = MeasurementEnsemble::gaussian(3, 7, Field::Complex, 123);
  Vec b(7);
  rng::SplitMix64 gen(5);
  for (int i = 0; i < 7; ++i) b(i) = gen.uniform01();
  const auto saved = e.with_intensities(b);
  saved.save(path);
  const auto loaded = MeasurementEnsemble::load(path);
  CHECK(loaded.field() == Field::Complex);
  CHECK(loaded.rows() == saved.rows());
  CHECK(loaded.intensities() == saved.intensities());
  std::remove(path.c_str());
}

TEST_CASE("PRMAT: truncation and malformed rows are reported by row") {
  const std::string path = temp_path("prmat_bad.txt");
  {
    std::ofstream out(path);
    out << "PRMAT v1 real 3 2\n1 0\n0 1\n";  // row 3 missing
  }
  CHECK_THROWS_WITH_AS(MeasurementEnsemble::load(path),
                       doctest::Contains("row 3"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "PRMAT v1 real 2 2\n1 0\n0 1 5\nB\n1\n1\n";  // row 2 too long
  }
  CHECK_THROWS_WITH_AS(MeasurementEnsemble::load(path),
                       doctest::Contains("row 2"), std::runtime_error);
  {
    std::ofstream out(path);
    out << "PRMAT v2 real 2 2\n";
  }
  CHECK_THROWS_AS(MeasurementEnsemble::load(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "PRMAT v1 real 2 2\n1 0\n0 1\nB\n1\n-2\n";
  }
  CHECK_THROWS_WITH_AS(MeasurementEnsemble::load(path),
                       doctest::Contains("negative"), std::runtime_error);
  std::remove(path.c_str());
}
