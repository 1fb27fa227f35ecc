#include "rfield/fem.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

namespace rfield::fem {

namespace {
std::atomic<long> g_solve_count{0};
} // namespace

long solve_count() { return g_solve_count.load(); }

FemSpace::FemSpace(const Mesh& m) : mesh(&m) {
  dof_of_node.assign(m.n_nodes(), -1);
  for (int a = 0; a < m.n_nodes(); ++a) {
    if (!m.boundary[a]) {
      dof_of_node[a] = static_cast<int>(node_of_dof.size());
      node_of_dof.push_back(a);
    }
  }
  if (node_of_dof.empty()) throw InvalidInputError("fem: no interior nodes");
}

VectorXd FemSpace::to_nodal(const VectorXd& u) const {
  VectorXd full = VectorXd::Zero(mesh->n_nodes());
  for (int d = 0; d < n_dofs(); ++d) full[node_of_dof[d]] = u[d];
  return full;
}

namespace {

/// Gradients of the barycentric basis on one element; column i is grad
/// lambda_i (constant over the element for P1).
MatrixXd basis_gradients(const Mesh& mesh, int e) {
  if (mesh.dim == 1) {
    const double h = mesh.nodes(mesh.elems(e, 1), 0) - mesh.nodes(mesh.elems(e, 0), 0);
    MatrixXd g(1, 2);
    g << -1.0 / h, 1.0 / h;
    return g;
  }
  const auto p0 = mesh.nodes.row(mesh.elems(e, 0));
  const auto p1 = mesh.nodes.row(mesh.elems(e, 1));
  const auto p2 = mesh.nodes.row(mesh.elems(e, 2));
  Eigen::Matrix2d j;
  j << p1(0) - p0(0), p2(0) - p0(0), p1(1) - p0(1), p2(1) - p0(1);
  const Eigen::Matrix2d jit = j.inverse().transpose();
  MatrixXd g(2, 3);
  g.col(1) = jit * Eigen::Vector2d(1.0, 0.0);
  g.col(2) = jit * Eigen::Vector2d(0.0, 1.0);
  g.col(0) = -g.col(1) - g.col(2);
  return g;
}

} // namespace

SpMat assemble_stiffness(const FemSpace& space, const ElemCoefficient& coeff) {
  const Mesh& mesh = *space.mesh;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(mesh.n_elems() * (mesh.dim + 1) * (mesh.dim + 1));

  for (int e = 0; e < mesh.n_elems(); ++e) {
    const MatrixXd g = basis_gradients(mesh, e);
    const MatrixXd k = coeff(e);
    const double measure = mesh.elem_measure(e);
    const MatrixXd local = measure * g.transpose() * k * g;
    for (int i = 0; i <= mesh.dim; ++i) {
      const int di = space.dof_of_node[mesh.elems(e, i)];
      if (di < 0) continue;
      for (int j = 0; j <= mesh.dim; ++j) {
        const int dj = space.dof_of_node[mesh.elems(e, j)];
        if (dj < 0) continue;
        trips.emplace_back(di, dj, local(i, j));
      }
    }
  }
  SpMat a(space.n_dofs(), space.n_dofs());
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

VectorXd assemble_load_nodal(const FemSpace& space, const VectorXd& f_nodes) {
  const Mesh& mesh = *space.mesh;
  if (f_nodes.size() != mesh.n_nodes())
    throw DimensionError("fem load: nodal data size mismatch");
  VectorXd b = VectorXd::Zero(space.n_dofs());
  const int nv = mesh.dim + 1;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double measure = mesh.elem_measure(e);
    // P1 mass matrix: measure * (1 + delta_ij) / ((d+1)(d+2))
    for (int i = 0; i < nv; ++i) {
      const int di = space.dof_of_node[mesh.elems(e, i)];
      if (di < 0) continue;
      double s = 0.0;
      for (int j = 0; j < nv; ++j)
        s += (1.0 + (i == j ? 1.0 : 0.0)) * f_nodes[mesh.elems(e, j)];
      b[di] += measure * s / ((mesh.dim + 1.0) * (mesh.dim + 2.0));
    }
  }
  return b;
}

VectorXd assemble_load_const(const FemSpace& space, double f) {
  const Mesh& mesh = *space.mesh;
  VectorXd b = VectorXd::Zero(space.n_dofs());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double share = f * mesh.elem_measure(e) / (mesh.dim + 1.0);
    for (int i = 0; i <= mesh.dim; ++i) {
      const int di = space.dof_of_node[mesh.elems(e, i)];
      if (di >= 0) b[di] += share;
    }
  }
  return b;
}

namespace {

/// Barycentric coordinates of x in element e; negative entries mean outside.
VectorXd barycentric(const Mesh& mesh, int e, const VectorXd& x) {
  if (mesh.dim == 1) {
    const double x0 = mesh.nodes(mesh.elems(e, 0), 0);
    const double x1 = mesh.nodes(mesh.elems(e, 1), 0);
    VectorXd lam(2);
    lam[1] = (x[0] - x0) / (x1 - x0);
    lam[0] = 1.0 - lam[1];
    return lam;
  }
  const auto p0 = mesh.nodes.row(mesh.elems(e, 0));
  const auto p1 = mesh.nodes.row(mesh.elems(e, 1));
  const auto p2 = mesh.nodes.row(mesh.elems(e, 2));
  Eigen::Matrix2d j;
  j << p1(0) - p0(0), p2(0) - p0(0), p1(1) - p0(1), p2(1) - p0(1);
  const Eigen::Vector2d rhs(x[0] - p0(0), x[1] - p0(1));
  const Eigen::Vector2d uv = j.inverse() * rhs;
  VectorXd lam(3);
  lam[1] = uv[0];
  lam[2] = uv[1];
  lam[0] = 1.0 - uv[0] - uv[1];
  return lam;
}

int locate(const Mesh& mesh, const VectorXd& x, VectorXd& lam) {
  int best = -1;
  double best_violation = std::numeric_limits<double>::infinity();
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const VectorXd l = barycentric(mesh, e, x);
    const double violation = -l.minCoeff();
    if (violation < best_violation) {
      best_violation = violation;
      best = e;
      lam = l;
    }
    if (violation <= 1e-12) return e;
  }
  if (best_violation > 1e-8)
    throw InvalidInputError("fem: point outside the mesh");
  return best;
}

} // namespace

VectorXd assemble_load_points(const FemSpace& space, const MatrixXd& points,
                              const VectorXd& weights) {
  const Mesh& mesh = *space.mesh;
  VectorXd b = VectorXd::Zero(space.n_dofs());
  for (int p = 0; p < points.rows(); ++p) {
    VectorXd lam;
    const int e = locate(mesh, points.row(p).transpose(), lam);
    for (int i = 0; i <= mesh.dim; ++i) {
      const int di = space.dof_of_node[mesh.elems(e, i)];
      if (di >= 0) b[di] += weights[p] * lam[i];
    }
  }
  return b;
}

VectorXd solve_spd(const SpMat& a, const VectorXd& b) {
  Eigen::SimplicialLLT<SpMat> llt(a);
  if (llt.info() != Eigen::Success)
    throw InvariantError("fem: sparse Cholesky failed on an SPD system");
  ++g_solve_count;
  return llt.solve(b);
}

Observation Observation::point_value(const Mesh& mesh, const VectorXd& x) {
  VectorXd lam;
  const int e = locate(mesh, x, lam);
  Observation obs;
  for (int i = 0; i <= mesh.dim; ++i) {
    obs.nodes.push_back(mesh.elems(e, i));
    obs.weights.push_back(lam[i]);
  }
  return obs;
}

Observation Observation::local_average(const Mesh& mesh, const VectorXd& x,
                                       double radius) {
  Observation obs;
  double total = 0.0;
  for (int a = 0; a < mesh.n_nodes(); ++a) {
    if ((mesh.node(a) - x).norm() <= radius) {
      obs.nodes.push_back(a);
      obs.weights.push_back(mesh.node_weight[a]);
      total += mesh.node_weight[a];
    }
  }
  if (obs.nodes.empty())
    throw InvalidInputError("fem observation: no nodes within radius");
  for (auto& w : obs.weights) w /= total;
  return obs;
}

} // namespace rfield::fem
