#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfield/repclass.hpp"
#include "rfield/rng.hpp"
#include "rfield/specfun.hpp"

using namespace rfield;
using mat::MatrixXd;
using mat::SPDMatrix;
using mat::SymMatrix;
using mat::VectorXd;
using rep::Representation;
using rep::SquashFunction;

namespace {

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
  return SPDMatrix(SymMatrix(0.25 * a.transpose() * a + MatrixXd::Identity(n, n)));
}

// Oracle for the Gamma quantile: evaluate the regularized incomplete gamma
// integral by composite Simpson quadrature and invert it by pure bisection.
double gamma_cdf_quadrature(double a, double x) {
  if (x <= 0.0) return 0.0;
  const int panels = 4000;
  const double h = x / panels;
  auto f = [a](double t) {
    return (t <= 0.0) ? 0.0 : std::exp((a - 1.0) * std::log(t) - t - std::lgamma(a));
  };
  double s = f(0.0) + f(x);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

double gamma_quantile_bisect(double a, double u) {
  double lo = 0.0, hi = 1.0;
  while (gamma_cdf_quadrature(a, hi) < u) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gamma_cdf_quadrature(a, mid) < u)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("gamma quantile squash matches the quadrature-bisection oracle") {
  const int n = 3;
  const SquashFunction h = SquashFunction::gamma_quantile(n, 0.8);
  const double s = h.scale();

  // median checkpoint: F_W(g/s) = 1/2 forces h = 2 s^2 * (Gamma median)
  const double median = gamma_quantile_bisect(h.shape(0), 0.5);
  CHECK(h.eval(0.0, 0) == doctest::Approx(2.0 * s * s * median).epsilon(1e-8));

  for (double g : {-1.5 * s, -0.3 * s, 0.7 * s, 2.0 * s}) {
    for (int j = 0; j < n; ++j) {
      const double u = sf::norm_cdf(g / s);
      const double expected = 2.0 * s * s * gamma_quantile_bisect(h.shape(j), u);
      CHECK(h.eval(g, j) == doctest::Approx(expected).epsilon(1e-7));
    }
  }
}

TEST_CASE("squash monotone and invertible on the certified grid") {
  for (const SquashFunction& h :
       {SquashFunction::gamma_quantile(2, 0.9), SquashFunction::softabs({1.0, 0.5})}) {
    const double half = std::min(h.grid_halfwidth(), 6.0 * h.scale());
    double prev = -1.0;
    for (int k = 0; k <= 60; ++k) {
      const double g = -half + 2.0 * half * k / 60.0;
      const double v = h.eval(g, 0);
      CHECK(v > prev); // strictly increasing
      prev = v;
      CHECK(h.inverse(v, 0) == doctest::Approx(g).epsilon(1e-8));
      // growth certificate
      CHECK(v <= h.growth_c_a(0) + h.growth_c_h() * g * g + 1e-12);
    }
  }
}

TEST_CASE("squash saturates loudly far in the tail") {
  const SquashFunction h = SquashFunction::gamma_quantile(2, 0.5);
  CHECK_THROWS_AS(h.eval(100.0 * h.scale(), 0), SaturationError);
}

TEST_CASE("forward representation special values") {
  // exponential at G = 0
  const Representation expo = Representation::exponential();
  CHECK((expo.forward(SymMatrix(2)).matrix() - MatrixXd::Identity(2, 2)).norm() ==
        0.0);

  // softabs square type at G = 0 with unit scales gives the identity
  const Representation sq = Representation::square(SquashFunction::softabs({1.0, 1.0}));
  CHECK((sq.forward(SymMatrix(2)).matrix() - MatrixXd::Identity(2, 2)).norm() <=
        1e-15);

  // hand expansion of L^T L for G = [[0,c],[c,0]]
  const double c = 0.3;
  SymMatrix g(2);
  g.set(0, 1, c);
  const auto& h = sq.squash();
  const double h0 = h.eval(0.0, 0);
  const double h1 = h.eval(0.0, 1);
  const SPDMatrix k0 = sq.forward(g);
  CHECK(k0(0, 0) == doctest::Approx(h0).epsilon(1e-14));
  CHECK(k0(0, 1) == doctest::Approx(c * std::sqrt(h0)).epsilon(1e-14));
  CHECK(k0(1, 1) == doctest::Approx(h1 + c * c).epsilon(1e-14));
}

TEST_CASE("representation round trips on random input") {
  Rng rng(53);
  const Representation expo = Representation::exponential();
  const Representation sq_soft =
      Representation::square(SquashFunction::softabs({1.0, 0.7, 1.3}));
  const Representation sq_gq =
      Representation::square(SquashFunction::gamma_quantile(3, 0.7));

  for (int trial = 0; trial < 20; ++trial) {
    const SymMatrix g = random_sym(3, rng, 0.4);

    for (const Representation* rep : {&expo, &sq_soft, &sq_gq}) {
      const SPDMatrix k0 = rep->forward(g);
      const SymMatrix back = rep->inverse(k0);
      CHECK((back.matrix() - g.matrix()).norm() <=
            1e-8 * std::max(1.0, g.matrix().norm()));
    }
    // inverse at the identity
    CHECK(expo.inverse(SPDMatrix(MatrixXd::Identity(3, 3))).frobenius_norm() <=
          1e-12);
  }

  const Representation sq2 = Representation::square(SquashFunction::softabs({1.0, 1.0}));
  CHECK(sq2.inverse(SPDMatrix(MatrixXd::Identity(2, 2))).frobenius_norm() <= 1e-12);

  // SPD -> G -> SPD direction
  Rng rng2(57);
  for (int trial = 0; trial < 10; ++trial) {
    const SPDMatrix k0 = random_spd(3, rng2);
    for (const Representation* rep : {&expo, &sq_soft}) {
      const SPDMatrix again = rep->forward(rep->inverse(k0));
      CHECK((again.matrix() - k0.matrix()).norm() <= 1e-8 * k0.matrix().norm());
    }
  }
}

TEST_CASE("normalization maps the unit factor onto Kbar and floors eigenvalues") {
  Rng rng(61);
  MatrixXd kb(2, 2);
  kb << 2.0, 0.4, 0.4, 1.5;
  const rep::NormalizationField norm(SPDMatrix(kb), 0.1);

  const SPDMatrix identity_factor(MatrixXd::Identity(2, 2));
  CHECK((norm.normalize(identity_factor, 0).matrix() - kb).norm() <= 1e-13);

  // Kbar = I, eps = 0.1: K0 = c*I with c -> 0 pushes the smallest eigenvalue
  // to exactly eps/(1+eps) = 1/11
  const rep::NormalizationField unit(SPDMatrix(MatrixXd::Identity(2, 2)), 0.1);
  const SPDMatrix tiny(MatrixXd::Identity(2, 2) * 1e-13);
  const auto d = mat::sym_eigen(unit.normalize(tiny, 0).sym());
  CHECK(d.eigvals.minCoeff() == doctest::Approx(1.0 / 11.0).epsilon(1e-10));
  CHECK(unit.k_eps() == doctest::Approx(1.0 / 11.0));

  // eigenvalue floor over a sweep of random factors
  for (int trial = 0; trial < 1000; ++trial) {
    const SPDMatrix k0 = random_spd(2, rng);
    const auto dk = mat::sym_eigen(norm.normalize(k0, 0).sym());
    CHECK(dk.eigvals.minCoeff() >= norm.k_eps() - 1e-12);
  }
}

TEST_CASE("denormalization inverts normalization and flags incompatible input") {
  Rng rng(67);
  MatrixXd kb(3, 3);
  kb << 1.5, 0.2, 0.0, 0.2, 2.0, 0.1, 0.0, 0.1, 1.0;
  const rep::NormalizationField norm(SPDMatrix(kb), 0.05);

  CHECK((norm.denormalize(norm.kbar(0), 0).matrix() - MatrixXd::Identity(3, 3))
            .norm() <= 1e-12);

  for (int trial = 0; trial < 50; ++trial) {
    const SPDMatrix k0 = random_spd(3, rng);
    const SPDMatrix k = norm.normalize(k0, 0);
    const SPDMatrix back = norm.denormalize(k, 0);
    CHECK((back.matrix() - k0.matrix()).norm() <= 1e-10 * k0.matrix().norm());
  }

  // a K below the guaranteed floor cannot come from the class
  const rep::NormalizationField unit(SPDMatrix(MatrixXd::Identity(2, 2)), 0.5);
  MatrixXd low = MatrixXd::Identity(2, 2) * (0.5 * unit.k_eps());
  CHECK_THROWS_AS(unit.denormalize(SPDMatrix(low), 0), NotPositiveDefiniteError);
}

TEST_CASE("bound chain: empty expansion and per-realization inequalities") {
  const rep::NormalizationField norm(SPDMatrix(MatrixXd::Identity(2, 2)), 0.1);
  const Representation sq = Representation::square(SquashFunction::softabs({1.0, 1.0}));

  rep::GermSupData sup;
  sup.mean_sup = 0.0;
  sup.mode_sup_scaled = VectorXd::Zero(0);

  const auto r = rep::bounds(sq, norm, sup, VectorXd::Zero(0));
  CHECK(r.delta == 0.0);
  const double n = 2.0, eps = 0.1;
  const double expect =
      norm.k1() * (std::sqrt(n) * eps + sq.squash().gamma0()) / (1.0 + eps);
  CHECK(r.gamma == doctest::Approx(expect).epsilon(1e-14));
  CHECK(r.k_eps == doctest::Approx(norm.k_eps()));
}

TEST_CASE("per-realization Frobenius and inverse bounds hold on a sweep") {
  Rng rng(71);
  const int n = 2;
  MatrixXd kb(n, n);
  kb << 1.2, 0.3, 0.3, 0.9;
  const double eps = 0.1;
  const rep::NormalizationField norm(SPDMatrix(kb), eps);
  const Representation expo = Representation::exponential();
  const Representation sq =
      Representation::square(SquashFunction::gamma_quantile(n, 0.8));

  const double tr_kbar_inv = norm.kbar(0).matrix().inverse().trace();

  for (int trial = 0; trial < 500; ++trial) {
    const SymMatrix g = random_sym(n, rng, 0.5);
    for (const Representation* rep : {&expo, &sq}) {
      const SPDMatrix k0 = rep->forward(g);
      const SPDMatrix k = norm.normalize(k0, 0);

      // |K|_F <= k1 (sqrt(n) eps + |K0|_F) / (1+eps)
      CHECK(k.frobenius_norm() <=
            norm.k1() * (std::sqrt(2.0) * eps + k0.frobenius_norm()) / (1.0 + eps) +
                1e-12);

      // |K^-1|_F <= sqrt(n) (1+eps)/eps tr(Kbar^-1)
      const MatrixXd kinv = k.matrix().inverse();
      CHECK(kinv.norm() <=
            std::sqrt(2.0) * (1.0 + eps) / eps * tr_kbar_inv + 1e-12);

      // kind-specific factor bounds
      if (rep->is_square()) {
        CHECK(k0.frobenius_norm() <=
              rep->squash().gamma0() +
                  rep->squash().gamma1() * std::pow(g.frobenius_norm(), 2) + 1e-12);
      } else {
        CHECK(k0.frobenius_norm() <=
              std::sqrt(2.0) * std::exp(g.frobenius_norm()) + 1e-12);
      }
    }
  }
}
