#ifndef RFIELD_STIEFEL_HPP
#define RFIELD_STIEFEL_HPP

#include <string>

#include <Eigen/Dense>

#include "rfield/errors.hpp"

namespace rfield::st {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Point on the compact Stiefel manifold: an N x m matrix with orthonormal
/// columns. Construction validates the residual |y^T y - I|_F <= 1e-10
/// unless the caller passes trusted = true for results produced on-manifold
/// by construction.
class StiefelPoint {
public:
  StiefelPoint() = default;
  explicit StiefelPoint(const MatrixXd& y, bool trusted = false);

  int rows() const { return static_cast<int>(y_.rows()); }   // N
  int cols() const { return static_cast<int>(y_.cols()); }   // m
  const MatrixXd& matrix() const { return y_; }

  double manifold_residual() const;

  /// Nearest-point projection through the polar factor (used when assembling
  /// coefficients from statistical estimates).
  static StiefelPoint project(const MatrixXd& y);

private:
  MatrixXd y_;
};

/// Householder QR with the deterministic sign convention R(i,i) >= 0.
/// Factored form so products with Q and with the trailing complement block
/// of Q cost O(N m^2) instead of O(N^2 m).
class HouseholderQR {
public:
  explicit HouseholderQR(const MatrixXd& a);

  const MatrixXd& r() const { return r_; }

  /// Thin Q factor (first k columns), k <= min(rows, cols).
  MatrixXd thin_q(int k) const;

  /// Explicit trailing columns m+1..N of the full Q factor (the orthogonal
  /// complement basis when the input has orthonormal columns).
  MatrixXd complement() const;

  /// Q * [0; c] without forming Q: lifts complement coordinates
  /// (rows m+1..N) into the ambient space.
  MatrixXd apply_q_bottom(const MatrixXd& c) const;

private:
  void apply_reflectors(MatrixXd& x) const;

  int rows_ = 0;
  int cols_ = 0;
  MatrixXd vs_;    // reflector vectors, one column each
  VectorXd taus_;
  VectorXd signs_; // diagonal sign fixes for the R(i,i) >= 0 convention
  MatrixXd r_;
};

/// Dimension nu = m N - m(m+1)/2 of the tangent parameter vector.
int tangent_dim(int N, int m);

/// Unpacks z into the skew-symmetric block A (m x m) and the complement
/// block B ((N-m) x m). One-based index laws: A_ij = -A_ji = z_k with
/// k = i + (j-1)(j-2)/2 for i < j; B_ij = z_{m(m-1)/2 + k} with
/// k = i + (j-1)(N-m).
void pack_tangent(const VectorXd& z, int N, int m, MatrixXd& a_block,
                  MatrixXd& b_block);

/// Exact inverse of pack_tangent.
VectorXd unpack_tangent(const MatrixXd& a_block, const MatrixXd& b_block);

/// Orthogonal complement of a: an N x (N-m) matrix q with [a q] orthogonal,
/// taken from the trailing QR columns.
MatrixXd orth_complement(const StiefelPoint& a);

/// Exponential of t * s for skew-symmetric s, evaluated through the paired
/// 2 x 2 rotation structure of the skew spectrum; the result is orthogonal
/// to machine precision.
MatrixXd skew_exp(const MatrixXd& s, double t = 1.0);

/// Geodesic-style parametrization through the full N x N exponential,
/// O(N^3). Reference implementation.
StiefelPoint map_full(const StiefelPoint& a, const VectorXd& z, double t = 1.0);

/// Same map through the compressed (m+k) x (m+k) exponential,
/// k = min(N-m, m), with the complement kept in factored form; O(N m^2).
/// Agrees with map_full to 1e-9 elementwise.
StiefelPoint map_reduced(const StiefelPoint& a, const VectorXd& z, double t = 1.0);

/// Binary serialization: magic "RFSP", u32 N, u32 m, column-major f64
/// payload, trailing u64 FNV-1a checksum of the payload bytes.
void save_stiefel(const std::string& path, const StiefelPoint& y);
StiefelPoint load_stiefel(const std::string& path);

} // namespace rfield::st

#endif
