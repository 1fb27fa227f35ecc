#include "rfield/matalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace rfield::mat {

SymMatrix::SymMatrix(const MatrixXd& a) {
  if (a.rows() != a.cols())
    throw DimensionError("SymMatrix: input is not square");
  if (!a.allFinite())
    throw InvalidInputError("SymMatrix: non-finite entries");
  m_ = 0.5 * (a + a.transpose());
}

double SymMatrix::operator_norm() const {
  const SpectralDecomp d = sym_eigen(*this);
  return d.eigvals.cwiseAbs().maxCoeff();
}

SPDMatrix::SPDMatrix(const SymMatrix& a) : sym_(a) {
  chol_upper(a.matrix()); // throws if not positive definite
}

SpectralDecomp sym_eigen(const SymMatrix& a) {
  const int n = a.dim();
  MatrixXd m = a.matrix();
  MatrixXd v = MatrixXd::Identity(n, n);

  auto off_norm = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += m(p, q) * m(p, q);
    return std::sqrt(2.0 * s);
  };

  const double scale = std::max(m.norm(), 1e-300);
  const double tol = 1e-13 * scale;
  const int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double tau = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return m(i, i) < m(j, j); });

  SpectralDecomp d;
  d.eigvals.resize(n);
  d.eigvecs.resize(n, n);
  for (int k = 0; k < n; ++k) {
    d.eigvals[k] = m(order[k], order[k]);
    d.eigvecs.col(k) = v.col(order[k]);
  }
  return d;
}

SPDMatrix sym_exp(const SymMatrix& g) {
  const SpectralDecomp d = sym_eigen(g);
  VectorXd e = d.eigvals.array().exp();
  if (!e.allFinite())
    throw InvalidInputError("sym_exp: exponential overflow");
  MatrixXd r = d.eigvecs * e.asDiagonal() * d.eigvecs.transpose();
  return SPDMatrix(SymMatrix(r));
}

SymMatrix sym_log(const SPDMatrix& k0) {
  const SpectralDecomp d = sym_eigen(k0.sym());
  VectorXd l(d.eigvals.size());
  for (int i = 0; i < d.eigvals.size(); ++i) {
    if (d.eigvals[i] <= 0.0)
      throw NotPositiveDefiniteError("sym_log: nonpositive eigenvalue", i);
    l[i] = std::log(d.eigvals[i]);
  }
  MatrixXd r = d.eigvecs * l.asDiagonal() * d.eigvecs.transpose();
  return SymMatrix(r);
}

MatrixXd chol_upper(const MatrixXd& k) {
  if (k.rows() != k.cols())
    throw DimensionError("chol_upper: input is not square");
  const int n = static_cast<int>(k.rows());
  const double pivot_tol = 1e-14 * std::max(k.trace(), 0.0);

  MatrixXd u = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = k(j, j);
    for (int i = 0; i < j; ++i) d -= u(i, j) * u(i, j);
    if (!(d > pivot_tol))
      throw NotPositiveDefiniteError("chol_upper: matrix not positive definite", j);
    u(j, j) = std::sqrt(d);
    for (int l = j + 1; l < n; ++l) {
      double s = k(j, l);
      for (int i = 0; i < j; ++i) s -= u(i, j) * u(i, l);
      u(j, l) = s / u(j, j);
    }
  }
  return u;
}

int sym_vec_dim(int packed_len) {
  const int n = static_cast<int>((std::sqrt(8.0 * packed_len + 1.0) - 1.0) / 2.0 + 0.5);
  if (sym_vec_size(n) != packed_len)
    throw DimensionError("packed length " + std::to_string(packed_len) +
                         " is not n(n+1)/2 for any n");
  return n;
}

VectorXd sym_vec(const SymMatrix& g) {
  const int n = g.dim();
  VectorXd w(sym_vec_size(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) w[sym_vec_index(i, j)] = g(i, j);
  return w;
}

SymMatrix vec_sym(const VectorXd& w) {
  const int n = sym_vec_dim(static_cast<int>(w.size()));
  SymMatrix g(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) g.set(i, j, w[sym_vec_index(i, j)]);
  return g;
}

VectorXd sym_vec_weights(int n) {
  VectorXd c(sym_vec_size(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) c[sym_vec_index(i, j)] = (i == j) ? 1.0 : 2.0;
  return c;
}

} // namespace rfield::mat
