#ifndef RFIELD_KLPCE_HPP
#define RFIELD_KLPCE_HPP

#include <string>
#include <vector>

#include "rfield/chaos.hpp"
#include "rfield/field.hpp"
#include "rfield/repclass.hpp"
#include "rfield/stiefel.hpp"

namespace rfield::kl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Discrete weighted inner product of two symmetric-matrix fields:
/// sum over nodes of w_a tr(A(x_a)^T B(x_a)), with the node weights coming
/// from the mesh and the channel multiplicities from the packing.
double field_inner(const Mesh& mesh, const SymField& a, const SymField& b);

/// Sample mean and covariance of a realization batch. The covariance is the
/// unbiased estimator over the flattened node-major packed vectors,
/// symmetrized exactly.
struct Moments {
  SymField mean;
  MatrixXd cov; // flat x flat
};
Moments estimate_moments(const Mesh& mesh, const RealizationSet& r);

/// Truncated spectral basis of the estimated covariance operator.
struct KLBasis {
  SymField mean;                // G0
  VectorXd sigma;               // eigenvalues, descending, positive
  std::vector<SymField> modes;  // eigenfields, orthonormal in field_inner
  VectorXd node_weight;         // discretization weights used by the solve
  std::uint64_t mesh_hash = 0;

  int m() const { return static_cast<int>(sigma.size()); }
  int n() const { return mean.n; }

  /// Sup-norm data consumed by the bound functionals.
  rep::GermSupData sup_data() const;
};

/// Galerkin/Nystrom discretization of the covariance eigenproblem with the
/// mesh weights, symmetrized as W^{1/2} C W^{1/2} before the eigensolve.
/// Throws TruncationError when m exceeds the usable spectral rank.
KLBasis solve_kl(const Mesh& mesh, const Moments& mom, int m);

/// Residuals |C W g_i - sigma_i g_i| / sigma_1 in the discrete norm, one per
/// retained mode (diagnostic used by the verification suites).
VectorXd kl_residuals(const Mesh& mesh, const Moments& mom, const KLBasis& kl);

/// Projects realizations onto the reduced coordinates:
/// eta_i(l) = <G_l - G0, G_i> / sqrt(sigma_i). Returns an nu x m matrix.
MatrixXd project_eta(const Mesh& mesh, const RealizationSet& r, const KLBasis& kl);

/// Chaos recombination eta = y^T Psi(xi).
VectorXd eta_from_xi(const st::StiefelPoint& y, const pc::ChaosBasis& basis,
                     const VectorXd& xi);

/// Field realization from reduced coordinates:
/// G(x) = G0(x) + sum_i sqrt(sigma_i) G_i(x) eta_i.
SymField sample_G(const KLBasis& kl, const VectorXd& eta);

/// Binary container: magic "RFKL", u32 version, u32 n, u32 m, u64 mesh
/// hash, u64 node count, then f64 payload (node weights, eigenvalues, mean
/// field, eigenfields).
void save_kl(const std::string& path, const KLBasis& kl);
KLBasis load_kl(const std::string& path, const Mesh& mesh);

} // namespace rfield::kl

#endif
