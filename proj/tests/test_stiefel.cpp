#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "rfield/stiefel.hpp"
#include "test_support.hpp"

using namespace rfield;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using st::StiefelPoint;

namespace {

StiefelPoint random_point(int N, int m, Rng& rng) {
  return StiefelPoint::project(testsup::random_matrix(N, m, rng));
}

} // namespace

TEST_CASE("orthogonal complement identities") {
  // coordinate block
  MatrixXd e = MatrixXd::Identity(5, 2);
  const MatrixXd q0 = st::orth_complement(StiefelPoint(e));
  CHECK((q0.transpose() * q0 - MatrixXd::Identity(3, 3)).norm() <= 1e-12);
  CHECK((q0.transpose() * e).norm() <= 1e-12);

  Rng rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    const int N = 4 + static_cast<int>(rng.below(20));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(N - 1)));
    const StiefelPoint a = random_point(N, m, rng);
    const MatrixXd q = st::orth_complement(a);
    CHECK(q.cols() == N - m);
    CHECK((a.matrix().transpose() * a.matrix() - MatrixXd::Identity(m, m)).norm() <=
          1e-10);
    CHECK((q.transpose() * q - MatrixXd::Identity(N - m, N - m)).norm() <= 1e-10);
    CHECK((q.transpose() * a.matrix()).norm() <= 1e-10);
  }
}

TEST_CASE("tangent packing index laws and bijection") {
  const int N = 6, m = 2;
  CHECK(st::tangent_dim(N, m) == 2 * 6 - 3);

  MatrixXd ab, bb;
  st::pack_tangent(VectorXd::Zero(st::tangent_dim(N, m)), N, m, ab, bb);
  CHECK(ab.norm() == 0.0);
  CHECK(bb.norm() == 0.0);

  VectorXd z = VectorXd::Zero(st::tangent_dim(N, m));
  z[0] = 0.7; // the single skew parameter when m = 2
  st::pack_tangent(z, N, m, ab, bb);
  CHECK(ab(0, 1) == 0.7);
  CHECK(ab(1, 0) == -0.7);

  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd zr = testsup::random_vector(st::tangent_dim(N, m), rng);
    st::pack_tangent(zr, N, m, ab, bb);
    CHECK((st::unpack_tangent(ab, bb) - zr).norm() == 0.0);
    CHECK((ab + ab.transpose()).norm() == 0.0);
  }

  CHECK_THROWS_AS(st::pack_tangent(VectorXd::Zero(3), N, m, ab, bb),
                  DimensionError);
}

TEST_CASE("skew exponential is orthogonal and matches the series oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    MatrixXd s = testsup::random_matrix(n, n, rng);
    s = (s - s.transpose()).eval();
    const double t = 0.3 + rng.uniform();

    const MatrixXd e = st::skew_exp(s, t);
    CHECK((e.transpose() * e - MatrixXd::Identity(n, n)).norm() <= 1e-12 * n);
    CHECK((e - testsup::exp_series(t * s)).norm() <= 1e-10 * e.norm());
  }
  // repeated rotation angles exercise the degenerate pairing
  MatrixXd s4 = MatrixXd::Zero(4, 4);
  s4(0, 1) = 1.0;
  s4(1, 0) = -1.0;
  s4(2, 3) = 1.0;
  s4(3, 2) = -1.0;
  const MatrixXd e4 = st::skew_exp(s4, 1.0);
  CHECK((e4 - testsup::exp_series(s4)).norm() <= 1e-11);
}

TEST_CASE("full map fixes the anchor at z = 0 and lands on the manifold") {
  Rng rng(17);
  const int N = 12, m = 3;
  const StiefelPoint a = random_point(N, m, rng);
  const StiefelPoint y0 = st::map_full(a, VectorXd::Zero(st::tangent_dim(N, m)));
  CHECK((y0.matrix() - a.matrix()).norm() <= 1e-12);

  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd z = testsup::random_vector(st::tangent_dim(N, m), rng);
    CHECK(st::map_full(a, z).manifold_residual() <= 1e-10);
  }
}

TEST_CASE("planar rotation closed form at N=2, m=1") {
  StiefelPoint a(MatrixXd::Identity(2, 1));
  const double theta = 0.83;
  VectorXd z(1);
  z[0] = theta; // with t = 1 the single complement parameter is the angle
  const StiefelPoint y = st::map_full(a, z, 1.0);
  CHECK(y.matrix()(0, 0) == doctest::Approx(std::cos(theta)).epsilon(1e-12));
  CHECK(y.matrix()(1, 0) == doctest::Approx(std::sin(theta)).epsilon(1e-12));
}

TEST_CASE("reduced map equals the full map") {
  Rng rng(23);
  const int N = 40, m = 3;
  const StiefelPoint a = random_point(N, m, rng);
  const int nu = st::tangent_dim(N, m);

  CHECK((st::map_reduced(a, VectorXd::Zero(nu)).matrix() - a.matrix()).norm() <=
        1e-12);

  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd z = testsup::random_vector(nu, rng);
    const StiefelPoint yf = st::map_full(a, z);
    const StiefelPoint yr = st::map_reduced(a, z);
    CHECK(yr.manifold_residual() <= 1e-10);
    CHECK((yf.matrix() - yr.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("reduced map handles rank-deficient complement blocks") {
  Rng rng(29);
  const int N = 10, m = 3;
  const StiefelPoint a = random_point(N, m, rng);

  // B with identical columns has rank one
  MatrixXd ab = MatrixXd::Zero(m, m);
  MatrixXd bb(N - m, m);
  const VectorXd col = testsup::random_vector(N - m, rng);
  for (int j = 0; j < m; ++j) bb.col(j) = col;
  const VectorXd z = st::unpack_tangent(ab, bb);

  const StiefelPoint yf = st::map_full(a, z);
  const StiefelPoint yr = st::map_reduced(a, z);
  CHECK((yf.matrix() - yr.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("square anchor degenerates to the skew rotation alone") {
  Rng rng(31);
  const int N = 4, m = 4; // empty complement
  const StiefelPoint a = random_point(N, m, rng);
  const int nu = st::tangent_dim(N, m);
  const VectorXd z = testsup::random_vector(nu, rng);

  MatrixXd ab, bb;
  st::pack_tangent(z, N, m, ab, bb);
  CHECK(bb.rows() == 0);

  const MatrixXd expected = a.matrix() * testsup::exp_series(ab);
  CHECK((st::map_full(a, z).matrix() - expected).norm() <= 1e-10);
  CHECK((st::map_reduced(a, z).matrix() - expected).norm() <= 1e-10);
}

TEST_CASE("serialization round trip and checksum guard") {
  Rng rng(37);
  const StiefelPoint y = random_point(9, 2, rng);
  const std::string path = "stiefel_test.bin";
  st::save_stiefel(path, y);
  const StiefelPoint back = st::load_stiefel(path);
  CHECK((back.matrix() - y.matrix()).norm() == 0.0);

  // corrupt one payload byte
  {
    std::FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 20, SEEK_SET);
    const char junk = 0x5a;
    std::fwrite(&junk, 1, 1, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(st::load_stiefel(path), InvalidInputError);
  std::remove(path.c_str());
}
