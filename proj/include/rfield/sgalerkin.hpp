#ifndef RFIELD_SGALERKIN_HPP
#define RFIELD_SGALERKIN_HPP

#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "rfield/coeff.hpp"
#include "rfield/fem.hpp"
#include "rfield/rng.hpp"

namespace rfield::sg {

using fem::SpMat;

/// Discretization of the expectation over the (germ, parameter) product
/// measure: tensorized Gauss rules in moderate dimension, seeded Monte Carlo
/// beyond. Weights are probability weights.
struct ParamQuadrature {
  enum class Kind { Tensor, MonteCarlo };

  MatrixXd y_points; // n_q x N_g
  MatrixXd z_points; // n_q x nu
  VectorXd weights;

  Kind kind = Kind::Tensor;
  int points_per_dim = 0;
  int mc_count = 0;
  std::uint64_t seed = 0;
  pc::PolyFamily z_family = pc::PolyFamily::HermiteProb;
  double z_scale = 1.0;

  int size() const { return static_cast<int>(weights.size()); }
};

ParamQuadrature tensor_quadrature(int n_g, int nu, int points_per_dim,
                                  pc::PolyFamily z_family, double z_scale);
ParamQuadrature mc_quadrature(int n_g, int nu, int count,
                              pc::PolyFamily z_family, double z_scale,
                              std::uint64_t seed);

/// Dimension threshold for switching from tensor rules to Monte Carlo.
ParamQuadrature default_quadrature(int n_g, int nu, int points_per_dim,
                                   int mc_count, pc::PolyFamily z_family,
                                   double z_scale, std::uint64_t seed);

struct GalerkinOptions {
  int degree_y = 2;
  int degree_z = 2;
  pc::PolyFamily z_family = pc::PolyFamily::HermiteProb;
  double z_scale = 1.0;
  double tau = std::numeric_limits<double>::infinity();
  double cg_tol = 1e-10;
  int cg_max_iter = 5000;
};

/// Assembled coupled problem on V_q (x) W_p^y (x) W_p^z: per quadrature
/// point a frozen-coefficient stiffness matrix and the chaos basis values,
/// plus the unweighted Laplace matrix for the plain energy norm. When tau is
/// finite, quadrature nodes with gamma > tau get zero weight (the truncated
/// space in indicator form).
class GalerkinProblem {
public:
  GalerkinProblem(const Mesh& mesh,
                  std::shared_ptr<const ParametricCoefficient> coeff,
                  VectorXd load_dofs, ParamQuadrature quad,
                  GalerkinOptions opts);

  const Mesh& mesh() const { return *mesh_; }
  const fem::FemSpace& space() const { return space_; }
  const ParametricCoefficient& coeff() const { return *coeff_; }
  const pc::ChaosBasis& ybasis() const { return ybasis_; }
  const pc::ChaosBasis& zbasis() const { return zbasis_; }
  const ParamQuadrature& quadrature() const { return quad_; }
  const GalerkinOptions& options() const { return opts_; }

  int n_dofs() const { return space_.n_dofs(); }
  int n_y() const { return ybasis_.size(); }
  int n_z() const { return zbasis_.size(); }
  int n_terms() const { return n_y() * n_z(); }
  int n_quad() const { return quad_.size(); }

  const VectorXd& load() const { return load_; }
  const SpMat& stiffness_at(int q) const { return k_q_[q]; }
  const SpMat& laplace() const { return laplace_; }
  const SpMat& mean_stiffness() const { return k_mean_; }
  double weight(int q) const { return quad_.weights[q]; }
  double gamma_at(int q) const { return gamma_q_[q]; }
  double active_mass() const { return active_mass_; }

  /// Chaos vector c_q = psi_y(y_q) (x) psi_z(z_q), flattened with the z
  /// index fastest.
  VectorXd chaos_at(int q) const;
  const VectorXd& psi_y_at(int q) const { return psi_y_[q]; }
  const VectorXd& psi_z_at(int q) const { return psi_z_[q]; }

  /// Coupled operator applied to a coefficient matrix (n_dofs x n_terms).
  MatrixXd apply(const MatrixXd& u) const;

  /// Right-hand side F (x) E[psi].
  MatrixXd rhs() const;

  /// Quadratic energy functional J(v) = a(v,v)/2 - F(v).
  double j_value(const MatrixXd& u) const;

  /// Nodal solution at one quadrature sample: u(., y_q, z_q).
  VectorXd sample_solution(const MatrixXd& u, int q) const;

  /// Mean-coefficient block preconditioner (sparse Cholesky of the mean
  /// stiffness, dense Cholesky of the chaos Gram).
  MatrixXd precondition(const MatrixXd& r) const;

private:
  const Mesh* mesh_;
  fem::FemSpace space_;
  std::shared_ptr<const ParametricCoefficient> coeff_;
  pc::ChaosBasis ybasis_, zbasis_;
  ParamQuadrature quad_;
  GalerkinOptions opts_;
  VectorXd load_;

  std::vector<SpMat> k_q_;
  std::vector<VectorXd> psi_y_, psi_z_;
  VectorXd gamma_q_;
  double active_mass_ = 1.0;
  SpMat laplace_, k_mean_;
  Eigen::SimplicialLLT<SpMat> mean_llt_;
  Eigen::LLT<MatrixXd> gram_llt_;
};

struct EnergyNorms {
  double x = 0.0;      // plain H1(x)L2 norm
  double xc = 0.0;     // coefficient-weighted norm
  double xgamma = 0.0; // gamma-weighted norm
};
EnergyNorms energy_norms(const GalerkinProblem& problem, const MatrixXd& u);

/// Same three norms of the difference between two coefficient tensors on the
/// same problem.
EnergyNorms energy_norms_diff(const GalerkinProblem& problem, const MatrixXd& u,
                              const MatrixXd& v);

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate-gradient solve of the coupled system with the mean-based block
/// preconditioner. Throws InvariantError if the operator turns out
/// indefinite.
MatrixXd galerkin_solve(const GalerkinProblem& problem,
                        SolveReport* report = nullptr);

/// One deterministic FEM solve with the coefficient frozen at (y, z);
/// returns interior dof values.
VectorXd solve_deterministic(const Mesh& mesh, const fem::FemSpace& space,
                             const ParametricCoefficient& coeff,
                             const VectorXd& y, const VectorXd& z,
                             const VectorXd& load_dofs);

/// Canonical rank-one term of the solution tensor.
struct CpTerm {
  VectorXd wx, wy, wz;
};

/// Evaluable surrogate of the parameter-to-solution map, dense or canonical
/// low-rank, with the growth descriptor for truncated evaluation and an
/// audited error bound recorded at build time.
class SolutionMap {
public:
  SolutionMap() = default;

  static SolutionMap dense(const GalerkinProblem& problem, MatrixXd u);
  static SolutionMap canonical(const GalerkinProblem& problem,
                               std::vector<CpTerm> terms);

  bool is_canonical() const { return is_cp_; }
  int rank() const { return static_cast<int>(terms_.size()); }
  const MatrixXd& coefficients() const { return dense_; }
  const std::vector<CpTerm>& terms() const { return terms_; }
  double tau() const { return tau_; }
  bool truncated() const { return std::isfinite(tau_); }
  const GammaDescriptor& gamma_descriptor() const { return gd_; }
  std::uint64_t mesh_hash() const { return mesh_hash_; }
  int n_g() const { return ybasis_.dims(); }
  int nu() const { return zbasis_.dims(); }
  const pc::ChaosBasis& ybasis() const { return ybasis_; }
  const pc::ChaosBasis& zbasis() const { return zbasis_; }

  double error_bound() const { return error_bound_; }
  void set_error_bound(double e) { error_bound_ = e; }

  struct Value {
    double value = 0.0;
    bool truncated = false; // gamma exceeded tau, value forced to zero
  };

  /// Value at a mesh node (zero on the boundary).
  Value evaluate_node(int node, const VectorXd& y, const VectorXd& z) const;

  /// P1-interpolated value at a point of the mesh the map was built on.
  Value evaluate(const Mesh& mesh, const VectorXd& x, const VectorXd& y,
                 const VectorXd& z) const;

  /// Full nodal vector at a parameter sample (zeros where truncated).
  VectorXd nodal(const VectorXd& y, const VectorXd& z) const;

  /// Dense coefficients reconstructed from the stored format.
  MatrixXd to_dense() const;

  /// Binary container: magic "RFMP", format metadata, bases, gamma
  /// descriptor, payload (dense tensor or per-factor blocks).
  void save(const std::string& path) const;
  static SolutionMap load(const std::string& path, const Mesh& mesh);

private:
  void init_from_problem(const GalerkinProblem& problem);
  VectorXd pad_z(const VectorXd& z) const;
  VectorXd chaos_row(const VectorXd& y, const VectorXd& z, bool* cut) const;

  std::uint64_t mesh_hash_ = 0;
  int n_nodes_ = 0;
  std::vector<int> node_of_dof_;
  pc::ChaosBasis ybasis_, zbasis_;
  GammaDescriptor gd_;
  bool has_gamma_ = false;
  double tau_ = std::numeric_limits<double>::infinity();
  double error_bound_ = 0.0;
  bool is_cp_ = false;
  MatrixXd dense_;
  std::vector<CpTerm> terms_;
};

} // namespace rfield::sg

#endif
