#ifndef RFIELD_TEST_SUPPORT_HPP
#define RFIELD_TEST_SUPPORT_HPP

#include <Eigen/Dense>

#include "rfield/rng.hpp"

namespace testsup {

// Series-based matrix exponential (scaling and squaring); independent of the
// spectral routes used by the library.
inline Eigen::MatrixXd exp_series(const Eigen::MatrixXd& a) {
  const double nrm = a.norm();
  int s = 0;
  double scale = 1.0;
  while (nrm * scale > 0.25) {
    scale *= 0.5;
    ++s;
  }
  const Eigen::MatrixXd b = a * scale;
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-18 * result.norm()) break;
  }
  for (int k = 0; k < s; ++k) result = result * result;
  return result;
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, rfield::Rng& rng,
                                     double scale = 1.0) {
  Eigen::MatrixXd a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = scale * rng.normal();
  return a;
}

inline Eigen::VectorXd random_vector(int n, rfield::Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

} // namespace testsup

#endif
