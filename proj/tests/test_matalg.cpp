#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfield/matalg.hpp"
#include "rfield/rng.hpp"

using namespace rfield;
using mat::MatrixXd;
using mat::SPDMatrix;
using mat::SymMatrix;
using mat::VectorXd;

namespace {

// Independent oracle for the matrix exponential: scaling and squaring with a
// plain Taylor series, no spectral decomposition involved.
MatrixXd exp_scaling_squaring(const MatrixXd& a) {
  const double nrm = a.norm();
  int s = 0;
  double scale = 1.0;
  while (nrm * scale > 0.25) {
    scale *= 0.5;
    ++s;
  }
  const MatrixXd b = a * scale;
  const int n = static_cast<int>(a.rows());
  MatrixXd result = MatrixXd::Identity(n, n);
  MatrixXd term = MatrixXd::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-18 * result.norm()) break;
  }
  for (int k = 0; k < s; ++k) result = result * result;
  return result;
}

SymMatrix random_sym(int n, Rng& rng, double scale = 1.0) {
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * rng.normal();
  return SymMatrix(a);
}

SPDMatrix random_spd(int n, Rng& rng) {
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return SPDMatrix(SymMatrix(a.transpose() * a + MatrixXd::Identity(n, n)));
}

} // namespace

TEST_CASE("jacobi eigendecomposition reconstructs and stays orthogonal") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const SymMatrix a = random_sym(n, rng, 2.0);
    const auto d = mat::sym_eigen(a);

    const MatrixXd qtq = d.eigvecs.transpose() * d.eigvecs;
    CHECK((qtq - MatrixXd::Identity(n, n)).norm() <= 1e-12 * n);

    const MatrixXd rec = d.eigvecs * d.eigvals.asDiagonal() * d.eigvecs.transpose();
    CHECK((rec - a.matrix()).norm() <= 1e-10 * std::max(1.0, a.matrix().norm()));

    for (int i = 0; i + 1 < n; ++i) CHECK(d.eigvals[i] <= d.eigvals[i + 1]);
  }
}

TEST_CASE("sym_exp identity and diagonal cases") {
  SymMatrix zero(2);
  CHECK((mat::sym_exp(zero).matrix() - MatrixXd::Identity(2, 2)).norm() == 0.0);

  SymMatrix d(2);
  d.set(0, 0, std::log(2.0));
  d.set(1, 1, std::log(3.0));
  const SPDMatrix e = mat::sym_exp(d);
  CHECK(e(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("sym_exp matches the scaling-and-squaring oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const SymMatrix g = random_sym(3, rng);
    const MatrixXd expected = exp_scaling_squaring(g.matrix());
    const MatrixXd got = mat::sym_exp(g).matrix();
    CHECK((got - expected).norm() <= 1e-10 * expected.norm());
  }
}

TEST_CASE("sym_log inverts sym_exp") {
  CHECK(mat::sym_log(SPDMatrix(MatrixXd::Identity(3, 3))).frobenius_norm() <= 1e-14);

  MatrixXd d2 = MatrixXd::Zero(2, 2);
  d2(0, 0) = 2.0;
  d2(1, 1) = 3.0;
  const SymMatrix l = mat::sym_log(SPDMatrix(d2));
  CHECK(l(0, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(std::log(3.0)).epsilon(1e-14));

  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    SymMatrix g = random_sym(4, rng);
    if (g.operator_norm() > 5.0) continue;
    const SymMatrix back = mat::sym_log(mat::sym_exp(g));
    CHECK((back.matrix() - g.matrix()).norm() <=
          1e-9 * std::max(1.0, g.matrix().norm()));
  }
}

TEST_CASE("eigenvalues commute with exp and log") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const SymMatrix g = random_sym(3, rng);
    const auto dg = mat::sym_eigen(g);
    const SPDMatrix k = mat::sym_exp(g);
    const auto dk = mat::sym_eigen(k.sym());
    for (int i = 0; i < 3; ++i)
      CHECK(dk.eigvals[i] == doctest::Approx(std::exp(dg.eigvals[i])).epsilon(1e-10));

    // operator-norm bound |exp(G)|_2 <= e^{|G|_2}
    CHECK(dk.eigvals.maxCoeff() <=
          std::exp(dg.eigvals.cwiseAbs().maxCoeff()) + 1e-12);
  }
}

TEST_CASE("chol_upper hand-checkable and reconstructive") {
  CHECK((mat::chol_upper(MatrixXd::Identity(4, 4)) - MatrixXd::Identity(4, 4)).norm() ==
        0.0);

  MatrixXd k(2, 2);
  k << 4.0, 2.0, 2.0, 5.0;
  MatrixXd u = mat::chol_upper(k);
  CHECK(u(0, 0) == doctest::Approx(2.0));
  CHECK(u(0, 1) == doctest::Approx(1.0));
  CHECK(u(1, 0) == 0.0);
  CHECK(u(1, 1) == doctest::Approx(2.0));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const SPDMatrix s = random_spd(5, rng);
    const MatrixXd f = mat::chol_upper(s);
    CHECK((f.transpose() * f - s.matrix()).norm() <= 1e-12 * s.matrix().norm());
    for (int i = 0; i < 5; ++i) CHECK(f(i, i) > 0.0);
  }
}

TEST_CASE("chol_upper rejects indefinite input with the failing pivot") {
  MatrixXd k(2, 2);
  k << 1.0, 2.0, 2.0, 1.0; // eigenvalues 3, -1
  CHECK_THROWS_AS(mat::chol_upper(k), NotPositiveDefiniteError);
  try {
    mat::chol_upper(k);
  } catch (const NotPositiveDefiniteError& e) {
    CHECK(e.pivot_index == 1);
  }
}

TEST_CASE("sym_exp produces Cholesky-factorable output") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const SymMatrix g = random_sym(3, rng, 1.5);
    CHECK_NOTHROW(mat::chol_upper(mat::sym_exp(g)));
  }
}

TEST_CASE("packing index law and round trip") {
  // n=2: w = (w1,w2,w3) maps to [[w1,w2],[w2,w3]]
  VectorXd w(3);
  w << 1.0, 2.0, 3.0;
  const SymMatrix g = mat::vec_sym(w);
  CHECK(g(0, 0) == 1.0);
  CHECK(g(0, 1) == 2.0);
  CHECK(g(1, 0) == 2.0);
  CHECK(g(1, 1) == 3.0);

  // one-based (i,j) = (2,3) lands at k = 2 + 3 = 5
  CHECK(mat::sym_vec_index(1, 2) + 1 == 5);

  Rng rng(41);
  for (int n : {1, 2, 3, 5}) {
    SymMatrix a = random_sym(n, rng);
    const SymMatrix b = mat::vec_sym(mat::sym_vec(a));
    CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  }
  VectorXd bad(4);
  bad.setZero();
  CHECK_THROWS_AS(mat::vec_sym(bad), DimensionError);
}

TEST_CASE("non-finite input is rejected") {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(SymMatrix{a}, InvalidInputError);
}
