#ifndef RFIELD_MESH_HPP
#define RFIELD_MESH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfield/errors.hpp"

namespace rfield {

/// Conforming simplicial mesh of the computational domain: an interval
/// partition in 1D or a triangulation in 2D, with homogeneous Dirichlet
/// boundary flags and lumped node quadrature weights (trapezoidal in 1D,
/// vertex-lumped in 2D).
struct Mesh {
  int dim = 0;
  Eigen::MatrixXd nodes;          // n_nodes x dim
  Eigen::MatrixXi elems;          // n_elems x (dim+1)
  std::vector<std::uint8_t> boundary;
  Eigen::VectorXd node_weight;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_elems() const { return static_cast<int>(elems.rows()); }

  Eigen::VectorXd node(int a) const { return nodes.row(a).transpose(); }
  Eigen::VectorXd centroid(int e) const;
  double elem_measure(int e) const;

  /// Interior (non-Dirichlet) node indices in ascending order.
  std::vector<int> interior_nodes() const;

  /// FNV-1a hash over the geometry, used to tie serialized artifacts to the
  /// mesh they were built on.
  std::uint64_t content_hash() const;

  /// Uniform partition of [a, b] into n_cells elements.
  static Mesh interval(int n_cells, double a = 0.0, double b = 1.0);

  /// Structured triangulation of [ax,bx] x [ay,by] with nx x ny cells, each
  /// split into two triangles.
  static Mesh rectangle(int nx, int ny, double ax = 0.0, double bx = 1.0,
                        double ay = 0.0, double by = 1.0);

  /// Plain-text format: a header line "dim n_nodes n_elems", node lines
  /// (coords then boundary flag), then element lines (vertex ids).
  static Mesh load_text(const std::string& path);
  void save_text(const std::string& path) const;

private:
  void finalize(); // weights + sanity checks
};

} // namespace rfield

#endif
