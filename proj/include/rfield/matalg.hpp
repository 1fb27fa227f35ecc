#ifndef RFIELD_MATALG_HPP
#define RFIELD_MATALG_HPP

#include <Eigen/Dense>

#include "rfield/errors.hpp"

namespace rfield::mat {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense real symmetric matrix. Symmetrized on construction so that
/// entries(i,j) == entries(j,i) holds exactly afterwards.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : m_(MatrixXd::Zero(n, n)) {}
  explicit SymMatrix(const MatrixXd& a);

  int dim() const { return static_cast<int>(m_.rows()); }
  const MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Symmetric write: sets (i,j) and (j,i).
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  double frobenius_norm() const { return m_.norm(); }
  double operator_norm() const;

private:
  MatrixXd m_;
};

/// Symmetric positive-definite matrix; positivity is established by a
/// successful Cholesky factorization at construction time.
class SPDMatrix {
public:
  SPDMatrix() = default;
  explicit SPDMatrix(const SymMatrix& a);
  explicit SPDMatrix(const MatrixXd& a) : SPDMatrix(SymMatrix(a)) {}

  int dim() const { return sym_.dim(); }
  const MatrixXd& matrix() const { return sym_.matrix(); }
  const SymMatrix& sym() const { return sym_; }
  double operator()(int i, int j) const { return sym_(i, j); }
  double frobenius_norm() const { return sym_.frobenius_norm(); }

private:
  SymMatrix sym_;
};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending, eigenvectors as
/// the columns of an orthogonal matrix.
struct SpectralDecomp {
  VectorXd eigvals;
  MatrixXd eigvecs;
};

/// Cyclic Jacobi eigensolver. Converges when the off-diagonal Frobenius norm
/// drops below 1e-13 of the input norm; at most 100 sweeps. Rotations keep
/// the accumulated eigenvector matrix orthogonal to machine precision.
SpectralDecomp sym_eigen(const SymMatrix& a);

/// Matrix exponential of a symmetric matrix through its spectral
/// decomposition; the result is symmetric positive-definite.
SPDMatrix sym_exp(const SymMatrix& g);

/// Matrix logarithm on the SPD cone; inverse of sym_exp.
SymMatrix sym_log(const SPDMatrix& k0);

/// Upper-triangular Cholesky factor U with U^T U = k and U(i,i) > 0.
/// Throws NotPositiveDefiniteError (with the failing pivot) when k is not
/// positive definite; the pivot tolerance is 1e-14 * trace(k).
MatrixXd chol_upper(const MatrixXd& k);
inline MatrixXd chol_upper(const SPDMatrix& k) { return chol_upper(k.matrix()); }

/// Packed length n(n+1)/2 of a symmetric n x n matrix.
inline int sym_vec_size(int n) { return n * (n + 1) / 2; }

/// Matrix dimension recovered from a packed length; throws DimensionError if
/// the length is not triangular.
int sym_vec_dim(int packed_len);

/// Zero-based channel index of entry (i,j), i <= j, in the packed vector.
/// The one-based law is k = i + j(j-1)/2 for 1 <= i <= j <= n.
inline int sym_vec_index(int i, int j) { return i + j * (j + 1) / 2; }

/// Pack the upper triangle of a symmetric matrix column by column.
VectorXd sym_vec(const SymMatrix& g);

/// Unpack a vector of length n(n+1)/2 into a symmetric matrix. Exact inverse
/// of sym_vec.
SymMatrix vec_sym(const VectorXd& w);

/// Per-channel multiplicity weights (1 on diagonal channels, 2 off-diagonal)
/// so that tr(G^T H) = sum_k weight_k * g_k * h_k for packed g, h.
VectorXd sym_vec_weights(int n);

} // namespace rfield::mat

#endif
