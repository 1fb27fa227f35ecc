#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "rfield/klpce.hpp"
#include "test_support.hpp"

using namespace rfield;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Scalar Gaussian field on the mesh with exponential covariance, sampled by
// a dense Cholesky factor.
MatrixXd exp_cov_matrix(const Mesh& mesh, double corr_len, double variance) {
  const int n = mesh.n_nodes();
  MatrixXd c(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      c(a, b) = variance *
                std::exp(-(mesh.node(a) - mesh.node(b)).norm() / corr_len);
  return c;
}

RealizationSet gaussian_batch(const Mesh& mesh, const MatrixXd& cov, int nu,
                              Rng& rng) {
  const MatrixXd u = mat::chol_upper(cov + 1e-12 * MatrixXd::Identity(cov.rows(), cov.cols()));
  RealizationSet r = RealizationSet::empty(1, mesh.n_nodes(), nu);
  for (int l = 0; l < nu; ++l)
    r.data.row(l) = (u.transpose() * testsup::random_vector(mesh.n_nodes(), rng))
                        .transpose();
  return r;
}

} // namespace

TEST_CASE("moment estimator on constructed batches") {
  const Mesh mesh = Mesh::interval(4);
  const int nn = mesh.n_nodes();

  // identical realizations: zero covariance, mean equals the realization
  RealizationSet r = RealizationSet::empty(2, nn, 3);
  Rng rng(1);
  const Eigen::RowVectorXd proto = testsup::random_vector(r.flat_size(), rng).transpose();
  for (int l = 0; l < 3; ++l) r.data.row(l) = proto;
  const auto mom = kl::estimate_moments(mesh, r);
  CHECK(mom.cov.norm() <= 1e-30);
  for (int a = 0; a < nn; ++a)
    CHECK((mom.mean.data.row(a) - proto.segment(a * 3, 3)).norm() <= 1e-15);

  // +/- v around zero: unbiased estimator gives 2 v v^T
  RealizationSet r2 = RealizationSet::empty(2, nn, 2);
  const VectorXd v = testsup::random_vector(r2.flat_size(), rng);
  r2.data.row(0) = v.transpose();
  r2.data.row(1) = -v.transpose();
  const auto mom2 = kl::estimate_moments(mesh, r2);
  CHECK(mom2.mean.data.norm() == 0.0);
  CHECK((mom2.cov - 2.0 * v * v.transpose()).norm() <= 1e-14 * v.squaredNorm());

  // block symmetry holds exactly
  const int ch = r2.n_channels();
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < nn; ++b)
      CHECK((mom2.cov.block(a * ch, b * ch, ch, ch) -
             mom2.cov.block(b * ch, a * ch, ch, ch).transpose())
                .norm() == 0.0);

  RealizationSet single = RealizationSet::empty(2, nn, 1);
  CHECK_THROWS_AS(kl::estimate_moments(mesh, single), InsufficientDataError);
}

TEST_CASE("rank-one covariance reproduces its generating pair") {
  const Mesh mesh = Mesh::interval(20);
  Rng rng(7);
  SymField v(1, mesh.n_nodes());
  v.data = testsup::random_matrix(mesh.n_nodes(), 1, rng);
  const double nrm = std::sqrt(kl::field_inner(mesh, v, v));
  v.data /= nrm;

  const double sigma = 1.7;
  kl::Moments mom;
  mom.mean = SymField(1, mesh.n_nodes());
  mom.cov = sigma * v.data * v.data.transpose();

  const auto basis = kl::solve_kl(mesh, mom, 1);
  CHECK(basis.sigma[0] == doctest::Approx(sigma).epsilon(1e-10));
  // eigenfield defined up to sign
  const double align = kl::field_inner(mesh, basis.modes[0], v);
  CHECK(std::abs(align) == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(kl::solve_kl(mesh, mom, 2), TruncationError);
}

TEST_CASE("exponential-kernel spectrum matches an independent eigensolver") {
  const Mesh mesh = Mesh::interval(199); // 200 nodes
  kl::Moments mom;
  mom.mean = SymField(1, mesh.n_nodes());
  mom.cov = exp_cov_matrix(mesh, 0.3, 1.0);

  const int m = 8;
  const auto basis = kl::solve_kl(mesh, mom, m);

  // oracle: same weighted discretization, but the in-house Jacobi solver
  const VectorXd w = mesh.node_weight;
  const VectorXd ws = w.cwiseSqrt();
  mat::SymMatrix b(MatrixXd(ws.asDiagonal() * mom.cov * ws.asDiagonal()));
  const auto d = mat::sym_eigen(b);
  for (int i = 0; i < m; ++i) {
    const double oracle = d.eigvals[mesh.n_nodes() - 1 - i];
    CHECK(basis.sigma[i] == doctest::Approx(oracle).epsilon(1e-9));
  }

  // eigen-residuals within the advertised tolerance
  const VectorXd res = kl::kl_residuals(mesh, mom, basis);
  CHECK(res.maxCoeff() <= 1e-8 * basis.sigma[0]);

  // partial sums are monotone and bounded by the total weighted variance
  double total = 0.0;
  for (int k = 0; k < mesh.n_nodes(); ++k)
    total += mesh.node_weight[k] * mom.cov(k, k);
  double part = 0.0;
  for (int i = 0; i < m; ++i) {
    part += basis.sigma[i];
    CHECK(part <= total * (1.0 + 1e-12));
  }

  // orthonormal eigenfields under the discrete inner product
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      const double ip = kl::field_inner(mesh, basis.modes[i], basis.modes[j]);
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8));
    }
}

TEST_CASE("normalized Hermite basis values and quadrature Gram matrix") {
  const pc::ChaosBasis basis(2, 3);
  CHECK(basis.size() == 9); // degrees 1..3 over two variables

  // degree-one block aligned with coordinates
  VectorXd xi(2);
  xi << 0.3, -1.2;
  const VectorXd psi = basis.eval(xi);
  CHECK(psi[0] == doctest::Approx(0.3));
  CHECK(psi[1] == doctest::Approx(-1.2));

  // normalized He_2 at zero is -1/sqrt(2)
  CHECK(pc::hermite_norm(2, 0.0) == doctest::Approx(-1.0 / std::sqrt(2.0)));

  const auto rule = pc::tensor_rule(2, 4, pc::PolyFamily::HermiteProb);
  MatrixXd gram = MatrixXd::Zero(basis.size(), basis.size());
  VectorXd mean = VectorXd::Zero(basis.size());
  for (int qp = 0; qp < rule.weights.size(); ++qp) {
    const VectorXd p = basis.eval(rule.points.row(qp).transpose());
    gram += rule.weights[qp] * p * p.transpose();
    mean += rule.weights[qp] * p;
  }
  CHECK((gram - MatrixXd::Identity(basis.size(), basis.size())).norm() <= 1e-10);
  CHECK(mean.norm() <= 1e-12); // constants are excluded
}

TEST_CASE("legendre family is orthonormal under the uniform measure") {
  const pc::ChaosBasis basis(2, 2, pc::PolyFamily::LegendreUniform, 1.5);
  const auto rule = pc::tensor_rule(2, 4, pc::PolyFamily::LegendreUniform, 1.5);
  MatrixXd gram = MatrixXd::Zero(basis.size(), basis.size());
  for (int qp = 0; qp < rule.weights.size(); ++qp) {
    const VectorXd p = basis.eval(rule.points.row(qp).transpose());
    gram += rule.weights[qp] * p * p.transpose();
  }
  CHECK((gram - MatrixXd::Identity(basis.size(), basis.size())).norm() <= 1e-10);
}

TEST_CASE("chaos recombination: coordinate pattern and unit covariance") {
  const int n_g = 3, m = 2;
  const pc::ChaosBasis basis(n_g, 2);
  const int N = basis.size();

  // delta-pattern coefficients pick out the germ coordinates
  MatrixXd y0 = MatrixXd::Zero(N, m);
  for (int i = 0; i < m; ++i) y0(i, i) = 1.0;
  const st::StiefelPoint y(y0);

  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd xi = testsup::random_vector(n_g, rng);
    const VectorXd eta = kl::eta_from_xi(y, basis, xi);
    CHECK(eta[0] == doctest::Approx(xi[0]).epsilon(1e-14));
    CHECK(eta[1] == doctest::Approx(xi[1]).epsilon(1e-14));
  }

  // E{eta eta^T} = I by Gauss-Hermite quadrature for a random Stiefel point
  const st::StiefelPoint yr = st::StiefelPoint::project(testsup::random_matrix(N, m, rng));
  const auto rule = pc::tensor_rule(n_g, 3, pc::PolyFamily::HermiteProb);
  MatrixXd second = MatrixXd::Zero(m, m);
  for (int qp = 0; qp < rule.weights.size(); ++qp) {
    const VectorXd eta =
        kl::eta_from_xi(yr, basis, rule.points.row(qp).transpose());
    second += rule.weights[qp] * eta * eta.transpose();
  }
  CHECK((second - MatrixXd::Identity(m, m)).norm() <= 1e-10);
}

TEST_CASE("projection recovers reduced coordinates") {
  const Mesh mesh = Mesh::interval(30);
  Rng rng(13);

  // synthetic basis from a Gaussian batch
  const MatrixXd cov = exp_cov_matrix(mesh, 0.4, 1.0);
  const RealizationSet batch = gaussian_batch(mesh, cov, 400, rng);
  const auto mom = kl::estimate_moments(mesh, batch);
  const auto basis = kl::solve_kl(mesh, mom, 3);

  // exact single-mode realizations: eta_1 comes back exactly
  const double c = 0.37;
  RealizationSet probe = RealizationSet::empty(1, mesh.n_nodes(), 2);
  {
    SymField g = basis.mean;
    g.data += std::sqrt(basis.sigma[0]) * c * basis.modes[0].data;
    probe.set_realization(0, g);
    probe.set_realization(1, basis.mean);
  }
  const MatrixXd eta = kl::project_eta(mesh, probe, basis);
  CHECK(eta(0, 0) == doctest::Approx(c).epsilon(1e-10));
  CHECK(std::abs(eta(1, 0)) <= 1e-12);

  // round trip sample_G -> project_eta
  for (int trial = 0; trial < 5; ++trial) {
    const VectorXd eta_in = testsup::random_vector(basis.m(), rng);
    RealizationSet one = RealizationSet::empty(1, mesh.n_nodes(), 2);
    one.set_realization(0, kl::sample_G(basis, eta_in));
    one.set_realization(1, kl::sample_G(basis, VectorXd::Zero(basis.m())));
    const MatrixXd eta_out = kl::project_eta(mesh, one, basis);
    CHECK((eta_out.row(0).transpose() - eta_in).norm() <= 1e-8);
  }
}

TEST_CASE("projected coordinates of a large batch are white") {
  const Mesh mesh = Mesh::interval(24);
  Rng rng(17);
  const int nu = 10000;
  const MatrixXd cov = exp_cov_matrix(mesh, 0.5, 1.0);
  const RealizationSet batch = gaussian_batch(mesh, cov, nu, rng);
  const auto mom = kl::estimate_moments(mesh, batch);
  const auto basis = kl::solve_kl(mesh, mom, 3);

  const MatrixXd eta = kl::project_eta(mesh, batch, basis);
  const Eigen::RowVectorXd mean = eta.colwise().mean();
  const MatrixXd centered = eta.rowwise() - mean;
  const MatrixXd sample_cov = centered.transpose() * centered / (nu - 1.0);

  const double tol = 5.0 / std::sqrt(static_cast<double>(nu));
  CHECK(mean.norm() <= tol);
  CHECK((sample_cov - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= tol);
}

TEST_CASE("second-moment identity of the truncated expansion") {
  const Mesh mesh = Mesh::interval(16);
  Rng rng(19);
  const MatrixXd cov = exp_cov_matrix(mesh, 0.5, 0.8);
  const RealizationSet batch = gaussian_batch(mesh, cov, 300, rng);
  const auto mom = kl::estimate_moments(mesh, batch);
  const auto basis = kl::solve_kl(mesh, mom, 2);

  const int n_g = 2;
  const pc::ChaosBasis chaos(n_g, 1);
  MatrixXd y0 = MatrixXd::Zero(chaos.size(), basis.m());
  for (int i = 0; i < basis.m(); ++i) y0(i, i) = 1.0;
  const st::StiefelPoint y(y0);

  // germ at zero with a degree-one basis: the expansion collapses to the mean
  CHECK((kl::sample_G(basis, kl::eta_from_xi(y, chaos, VectorXd::Zero(n_g))).data -
         basis.mean.data)
            .norm() <= 1e-14);

  const auto rule = pc::tensor_rule(n_g, 3, pc::PolyFamily::HermiteProb);
  for (int node : {0, 5, 11}) {
    double quad = 0.0;
    for (int qp = 0; qp < rule.weights.size(); ++qp) {
      const VectorXd eta =
          kl::eta_from_xi(y, chaos, rule.points.row(qp).transpose());
      const SymField g = kl::sample_G(basis, eta);
      quad += rule.weights[qp] * std::pow(g.at(node).frobenius_norm(), 2);
    }
    double expected = std::pow(basis.mean.at(node).frobenius_norm(), 2);
    for (int i = 0; i < basis.m(); ++i)
      expected +=
          basis.sigma[i] * std::pow(basis.modes[i].at(node).frobenius_norm(), 2);
    CHECK(quad == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("kl basis serialization round trip") {
  const Mesh mesh = Mesh::interval(12);
  Rng rng(23);
  const MatrixXd cov = exp_cov_matrix(mesh, 0.5, 1.0);
  const RealizationSet batch = gaussian_batch(mesh, cov, 100, rng);
  const auto basis = kl::solve_kl(mesh, kl::estimate_moments(mesh, batch), 2);

  const std::string path = "kl_test.bin";
  kl::save_kl(path, basis);
  const auto back = kl::load_kl(path, mesh);
  CHECK((back.sigma - basis.sigma).norm() == 0.0);
  CHECK((back.mean.data - basis.mean.data).norm() == 0.0);
  for (int i = 0; i < basis.m(); ++i)
    CHECK((back.modes[i].data - basis.modes[i].data).norm() == 0.0);

  const Mesh other = Mesh::interval(13);
  CHECK_THROWS_AS(kl::load_kl(path, other), InvalidInputError);
  std::remove(path.c_str());
}
