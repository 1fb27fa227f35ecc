#ifndef RFIELD_FIELD_HPP
#define RFIELD_FIELD_HPP

#include <string>
#include <vector>

#include "rfield/matalg.hpp"
#include "rfield/mesh.hpp"

namespace rfield {

/// Symmetric matrix field sampled at mesh nodes. Row a holds the packed
/// upper triangle of the n x n value at node a (see mat::sym_vec).
struct SymField {
  int n = 0;
  Eigen::MatrixXd data; // n_nodes x n(n+1)/2

  SymField() = default;
  SymField(int matrix_dim, int n_nodes)
      : n(matrix_dim), data(Eigen::MatrixXd::Zero(n_nodes, mat::sym_vec_size(matrix_dim))) {}

  int n_nodes() const { return static_cast<int>(data.rows()); }
  int n_channels() const { return static_cast<int>(data.cols()); }

  mat::SymMatrix at(int a) const { return mat::vec_sym(data.row(a).transpose()); }
  void set(int a, const mat::SymMatrix& g) {
    data.row(a) = mat::sym_vec(g).transpose();
  }

  /// Max over nodes of the Frobenius norm (the discrete stand-in for the
  /// essential sup).
  double sup_norm() const;
};

/// A batch of independent field realizations on a shared mesh; realization
/// l is the row-block data.row(l) viewed as one flattened node-major vector
/// of length n_nodes * n_channels.
struct RealizationSet {
  int n = 0;
  int n_nodes = 0;
  Eigen::MatrixXd data; // nu x (n_nodes * n_channels)

  int count() const { return static_cast<int>(data.rows()); }
  int n_channels() const { return mat::sym_vec_size(n); }
  int flat_size() const { return n_nodes * n_channels(); }

  SymField realization(int l) const;
  void set_realization(int l, const SymField& f);

  static RealizationSet empty(int matrix_dim, int n_nodes, int nu);
};

/// One field snapshot as CSV: header, then one row per node with node id,
/// coordinates, matrix dimension and the packed upper-triangle entries.
void save_field_csv(const std::string& path, const Mesh& mesh, const SymField& f);
SymField load_field_csv(const std::string& path, int expected_dim);

/// Bulk realization sets in a little-endian binary container:
/// magic "RFLB", u32 version, u32 matrix dim, u64 mesh hash, u64 node count,
/// u64 realization count, then realizations as contiguous f64 node-major
/// packed rows.
void save_realizations(const std::string& path, const Mesh& mesh,
                       const RealizationSet& r);
RealizationSet load_realizations(const std::string& path, const Mesh& mesh);

} // namespace rfield

#endif
