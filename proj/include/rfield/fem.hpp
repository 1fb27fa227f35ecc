#ifndef RFIELD_FEM_HPP
#define RFIELD_FEM_HPP

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "rfield/mesh.hpp"

namespace rfield::fem {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// P1 space with homogeneous Dirichlet conditions eliminated: only interior
/// nodes carry degrees of freedom.
struct FemSpace {
  const Mesh* mesh = nullptr;
  std::vector<int> dof_of_node; // -1 on the boundary
  std::vector<int> node_of_dof;

  explicit FemSpace(const Mesh& m);
  int n_dofs() const { return static_cast<int>(node_of_dof.size()); }

  /// Expands a dof vector to all nodes (zeros on the boundary).
  VectorXd to_nodal(const VectorXd& u) const;
};

/// Coefficient sampled once per element (at the centroid), returned as a
/// dim x dim SPD matrix.
using ElemCoefficient = std::function<MatrixXd(int elem)>;

/// Stiffness matrix of -div(K grad u) with the coefficient frozen at element
/// centroids.
SpMat assemble_stiffness(const FemSpace& space, const ElemCoefficient& coeff);

/// Consistent load vector for f given as the P1 interpolant of nodal values.
VectorXd assemble_load_nodal(const FemSpace& space, const VectorXd& f_nodes);

/// Load vector for constant f.
VectorXd assemble_load_const(const FemSpace& space, double f);

/// Point loads sum_i c_i delta(x - p_i), rows = points, last column = weight.
VectorXd assemble_load_points(const FemSpace& space, const MatrixXd& points,
                              const VectorXd& weights);

/// Direct sparse SPD solve (Cholesky). Throws InvariantError on failure.
VectorXd solve_spd(const SpMat& a, const VectorXd& b);

/// Linear observation functional on nodal fields: a sparse weight row
/// produced by P1 point evaluation or by a quadrature-weighted local mean.
struct Observation {
  std::vector<int> nodes;
  std::vector<double> weights;

  double apply_nodal(const VectorXd& u_nodes) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      s += weights[i] * u_nodes[nodes[i]];
    return s;
  }

  /// Point value of the P1 interpolant at x.
  static Observation point_value(const Mesh& mesh, const VectorXd& x);

  /// Weighted average over nodes within the given radius of x.
  static Observation local_average(const Mesh& mesh, const VectorXd& x,
                                   double radius);
};

/// Number of sparse SPD solves performed so far by this module (deterministic
/// and Galerkin paths both count). Lets callers assert that surrogate-based
/// search loops trigger no hidden PDE solves.
long solve_count();

} // namespace rfield::fem

#endif
