#include "doctest.h"
#include "support.hpp"

#include "rop/measure.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rop;

namespace {

const EnsembleKind kKinds[] = {EnsembleKind::Rop, EnsembleKind::Srop, EnsembleKind::GaussianEnsemble};
const Distribution kDists[] = {Distribution::Gaussian, Distribution::Rademacher, Distribution::UniformSym};

Ensemble draw(EnsembleKind kind, Index p1, Index p2, Index n, Rng& rng,
              Distribution dist = Distribution::Gaussian) {
  if (kind == EnsembleKind::Srop) p2 = p1;
  return Ensemble::sample(kind, p1, p2, n, dist, rng);
}

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("shapes and errors") {
  Rng rng(1);
  const Ensemble e = Ensemble::sample(EnsembleKind::Rop, 4, 4, 10, Distribution::Gaussian, rng);
  CHECK(e.size() == 10);
  CHECK(e.betas().rows() == 10);
  CHECK(e.betas().cols() == 4);
  CHECK(e.gammas().rows() == 10);
  CHECK(e.gammas().cols() == 4);

  CHECK_THROWS_AS(Ensemble::sample(EnsembleKind::Srop, 4, 5, 10, Distribution::Gaussian, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(Ensemble::sample(EnsembleKind::Rop, 4, 4, 0, Distribution::Gaussian, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(e.forward(Matrix::Zero(3, 4)), std::invalid_argument);
  CHECK_THROWS_AS(e.adjoint(Vector::Zero(9)), std::invalid_argument);
}

TEST_CASE("rademacher entries are exactly +-1") {
  Rng rng(2);
  const Ensemble e = Ensemble::sample(EnsembleKind::Rop, 6, 5, 50, Distribution::Rademacher, rng);
  CHECK((e.betas().array().abs() == 1.0).all());
  CHECK((e.gammas().array().abs() == 1.0).all());
}

TEST_CASE("entry moments match mean 0 and variance 1") {
  for (Distribution dist : kDists) {
    Rng rng(3);
    const Ensemble e = Ensemble::sample(EnsembleKind::Srop, 100, 100, 1000, dist, rng);
    const auto& b = e.betas().array();
    const double mean = b.mean();
    const double var = (b - mean).square().mean();
    CAPTURE(to_string(dist));
    CHECK(std::abs(var - 1.0) < 0.03);
    CHECK(std::abs(mean) < 0.02);
    if (dist == Distribution::UniformSym) CHECK(b.abs().maxCoeff() <= std::sqrt(3.0));
  }
}

TEST_CASE("forward by hand") {
  Matrix betas(1, 2), gammas(1, 2);
  betas << 1, 1;
  gammas << 1, -1;
  const Ensemble e = Ensemble::rop(betas, gammas);
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  CHECK(e.forward(a)(0) == doctest::Approx(-2.0));
  CHECK(e.forward(Matrix::Zero(2, 2)).norm() == 0.0);

  Rng rng(4);
  const Ensemble s = draw(EnsembleKind::Srop, 5, 5, 30, rng);
  const Matrix m = rng.normal_matrix(5, 5);
  CHECK((s.forward(m) - s.forward(0.5 * (m + m.transpose()))).norm() < 1e-12 * s.forward(m).norm());
}

TEST_CASE("adjoint of basis vectors and zero") {
  Rng rng(5);
  const Ensemble e = draw(EnsembleKind::Rop, 3, 4, 6, rng);
  Vector e1 = Vector::Zero(6);
  e1(0) = 1.0;
  const Matrix expect = e.betas().row(0).transpose() * e.gammas().row(0);
  CHECK((e.adjoint(e1) - expect).norm() < 1e-15);
  CHECK(e.adjoint(Vector::Zero(6)).norm() == 0.0);
  for (EnsembleKind kind : kKinds) {
    const Ensemble k = draw(kind, 3, 4, 6, rng);
    CHECK((k.adjoint(e1) - k.measurement(0)).norm() < 1e-15);
  }
}

TEST_CASE("adjoint identity over random cases for every kind") {
  Rng rng(6);
  for (EnsembleKind kind : kKinds) {
    for (int c = 0; c < 100; ++c) {
      const Index p1 = 1 + static_cast<Index>(rng.below(8));
      const Index p2 = kind == EnsembleKind::Srop ? p1 : 1 + static_cast<Index>(rng.below(8));
      const Index n = 1 + static_cast<Index>(rng.below(40));
      const Ensemble e = Ensemble::sample(kind, p1, p2, n, kDists[c % 3], rng);
      const Matrix a = rng.normal_matrix(p1, p2);
      const Vector z = rng.normal_vector(n);
      const double lhs = e.forward(a).dot(z);
      const double rhs = (a.array() * e.adjoint(z).array()).sum();
      const double scale = e.forward(a).norm() * z.norm();
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(scale, 1e-300));
    }
  }
}

TEST_CASE("forward agrees with materialized map and gram") {
  Rng rng(7);
  for (EnsembleKind kind : kKinds) {
    const Ensemble e = draw(kind, 4, 3, 12, rng);
    const Matrix a = rng.normal_matrix(e.rows(), e.cols());
    const Matrix x = e.materialize();
    CHECK((x * vec(a) - e.forward(a)).norm() < 1e-12 * (1.0 + e.forward(a).norm()));
    CHECK((x * x.transpose() - e.gram()).norm() < 1e-10 * (1.0 + e.gram().norm()));
  }
}

TEST_CASE("linearity") {
  Rng rng(8);
  for (EnsembleKind kind : kKinds) {
    const Ensemble e = draw(kind, 5, 6, 20, rng);
    const Matrix a = rng.normal_matrix(e.rows(), e.cols());
    const Matrix b = rng.normal_matrix(e.rows(), e.cols());
    const double s = rng.normal(), t = rng.normal();
    const Vector lhs = e.forward(s * a + t * b);
    const Vector rhs = s * e.forward(a) + t * e.forward(b);
    CHECK((lhs - rhs).norm() <= 1e-10 * rhs.norm());
  }
}

TEST_CASE("pairwise differencing") {
  Rng rng(9);
  const Ensemble e = draw(EnsembleKind::Srop, 4, 4, 5, rng);
  const Vector y = Vector::Constant(5, 2.5);
  const Differenced d = pairwise_difference(e, y);
  CHECK(d.y.size() == 2);
  CHECK(d.map.size() == 2);
  CHECK(d.y.norm() == 0.0);

  const Vector v = rng.normal_vector(5);
  const Differenced dv = pairwise_difference(e, v);
  CHECK(dv.y(0) == v(0) - v(1));
  CHECK(dv.y(1) == v(2) - v(3));

  const Matrix a = rng.normal_matrix(4, 4);
  const Vector fa = e.forward(a);
  CHECK(std::abs(d.map.forward(a)(1) - (fa(2) - fa(3))) < 1e-12);

  Vector z(2);
  z << 0.7, -1.3;
  Matrix expect = Matrix::Zero(4, 4);
  for (Index i = 0; i < 2; ++i) {
    const Vector b1 = e.betas().row(2 * i).transpose(), b2 = e.betas().row(2 * i + 1).transpose();
    expect += z(i) * (b1 * b1.transpose() - b2 * b2.transpose());
  }
  CHECK((d.map.adjoint(z) - expect).norm() < 1e-12);
  const double lhs = d.map.forward(a).dot(z);
  const double rhs = (a.array() * d.map.adjoint(z).array()).sum();
  CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs)));

  CHECK_THROWS_AS(pairwise_difference(e, Vector::Zero(4)), std::invalid_argument);
  const Ensemble r = draw(EnsembleKind::Rop, 3, 3, 4, rng);
  CHECK_THROWS_AS(pairwise_difference(r, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("differenced measurement matrices average to zero") {
  Rng rng(10);
  const Ensemble e = draw(EnsembleKind::Srop, 10, 10, 20000, rng);
  const DifferencedEnsemble d(e);
  const Matrix mean = d.adjoint(Vector::Ones(d.size())) / static_cast<double>(d.size());
  CHECK(spectral_norm(mean) <= 0.2);
}

TEST_CASE("storage accounting") {
  Rng rng(11);
  const Ensemble rop = Ensemble::rop(Matrix::Zero(1000, 100), Matrix::Zero(1000, 100));
  CHECK(rop.storage_bytes() == 1600000u);
  const Ensemble srop = Ensemble::srop(Matrix::Zero(1000, 100));
  CHECK(srop.storage_bytes() == 800000u);
  const Ensemble ge = Ensemble::gaussian(Matrix::Zero(10, 100 * 100), 100, 100);
  CHECK(ge.storage_bytes() == 8u * 10u * 100u * 100u);
  const Ensemble ge_full = Ensemble::sample(EnsembleKind::GaussianEnsemble, 10, 12, 7,
                                            Distribution::Gaussian, rng);
  const Ensemble rop_small = Ensemble::sample(EnsembleKind::Rop, 10, 12, 7, Distribution::Gaussian, rng);
  CHECK(static_cast<double>(ge_full.storage_bytes()) / static_cast<double>(rop_small.storage_bytes()) ==
        doctest::Approx(120.0 / 22.0));
}

TEST_CASE("rademacher SROP only sees trace and off-diagonals") {
  Rng rng(12);
  const Ensemble e = Ensemble::sample(EnsembleKind::Srop, 6, 6, 40, Distribution::Rademacher, rng);
  for (int k = 0; k < 20; ++k) {
    Matrix a = rng.normal_matrix(6, 6);
    a = 0.5 * (a + a.transpose());
    Matrix b = a;
    const Vector shift = rng.normal_vector(6);
    b.diagonal().array() += shift.array() - shift.mean();
    CHECK(std::abs(a.trace() - b.trace()) < 1e-12);
    CHECK((e.forward(a) - e.forward(b)).norm() < 1e-10 * e.forward(a).norm());
  }
}

TEST_CASE("sampling is deterministic") {
  for (EnsembleKind kind : kKinds) {
    Rng a(77), b(77);
    CHECK(draw(kind, 5, 4, 9, a) == draw(kind, 5, 4, 9, b));
  }
}

TEST_CASE("binary sidecar round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "rop_measure_io";
  std::filesystem::create_directories(dir);
  Rng rng(13);
  for (EnsembleKind kind : kKinds) {
    const Ensemble e = draw(kind, 4, 3, 8, rng, Distribution::UniformSym);
    const auto path = dir / ("ens_" + to_string(kind) + ".bin");
    e.save(path);
    const Ensemble back = Ensemble::load(path);
    CHECK(back == e);
    CHECK(back.distribution() == Distribution::UniformSym);
  }
  {
    std::ofstream bad(dir / "bad.bin", std::ios::binary);
    bad << "not an ensemble";
  }
  CHECK_THROWS(Ensemble::load(dir / "bad.bin"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("subset keeps the listed measurements") {
  Rng rng(14);
  const Ensemble e = draw(EnsembleKind::Rop, 3, 3, 6, rng);
  const std::vector<Index> idx{4, 1};
  const Ensemble s = e.subset(idx);
  const Matrix a = rng.normal_matrix(3, 3);
  CHECK(s.forward(a)(0) == doctest::Approx(e.forward(a)(4)));
  CHECK(s.forward(a)(1) == doctest::Approx(e.forward(a)(1)));
}

}
