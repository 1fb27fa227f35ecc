#ifndef RFIELD_COEFF_HPP
#define RFIELD_COEFF_HPP

#include <memory>

#include "rfield/klpce.hpp"

namespace rfield::sg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Self-contained data for the coefficient growth functional gamma(y,z):
/// everything needed to bound |K(x)|_F for a parameter sample without the
/// full field machinery. Travels with serialized solution maps so truncated
/// surrogates can be evaluated after reload.
struct GammaDescriptor {
  bool square_kind = false;
  double eps = 0.0;
  double k1 = 0.0;       // trace bound of the normalization scaffold
  double k_eps = 0.0;    // spectral floor
  double n_dim = 0.0;    // coefficient matrix dimension
  double gamma0 = 0.0;   // square kind offset
  double gamma1 = 0.0;   // square kind quadratic coefficient
  double mean_sup = 0.0;
  VectorXd mode_sup_scaled;
  MatrixXd anchor;       // base point [a], rows = chaos size
  int germ_dims = 0;
  int germ_degree = 0;
  double stiefel_t = 1.0;

  /// eta = M_[anchor](z)^T Psi(y).
  VectorXd eta(const VectorXd& y, const VectorXd& z) const;
  double delta(const VectorXd& y, const VectorXd& z) const;
  double gamma(const VectorXd& y, const VectorXd& z) const;
  double gamma_bar() const; // square kind expectation bound
};

/// The parametric diffusion coefficient: composes the truncated germ
/// expansion, the chaos recombination anchored at a Stiefel point, the
/// nonlinear representation and the lower-bound normalization into a map
/// (element or node, y, z) -> SPD matrix.
class ParametricCoefficient {
public:
  ParametricCoefficient(rep::Representation representation,
                        rep::NormalizationField normalization,
                        kl::KLBasis basis, pc::ChaosBasis germ_chaos,
                        st::StiefelPoint anchor, const Mesh& mesh,
                        double stiefel_t = 1.0);

  int n() const { return norm_.dim(); }
  int germ_dims() const { return chaos_.dims(); }
  int z_dims() const { return st::tangent_dim(anchor_.rows(), anchor_.cols()); }
  const rep::Representation& representation() const { return rep_; }
  const rep::NormalizationField& normalization() const { return norm_; }
  const kl::KLBasis& basis() const { return kl_; }
  const pc::ChaosBasis& germ_chaos() const { return chaos_; }
  const st::StiefelPoint& anchor() const { return anchor_; }

  /// One parameter sample: the chaos coefficients at z and the reduced
  /// coordinates at (y, z). Bind once per quadrature point, then query
  /// elements and nodes cheaply.
  struct Sample {
    VectorXd eta;
  };
  Sample sample(const VectorXd& y, const VectorXd& z) const;

  /// Coefficient at an element centroid (the value the assembly freezes).
  MatrixXd k_elem(const Sample& s, int elem) const;

  /// Coefficient at a mesh node.
  mat::SPDMatrix k_node(const Sample& s, int node) const;

  /// Germ matrix at a node (diagnostics and bound sweeps).
  mat::SymMatrix g_node(const Sample& s, int node) const;

  double gamma(const VectorXd& y, const VectorXd& z) const {
    return gd_.gamma(y, z);
  }
  const GammaDescriptor& gamma_descriptor() const { return gd_; }

private:
  rep::Representation rep_;
  rep::NormalizationField norm_;
  kl::KLBasis kl_;
  pc::ChaosBasis chaos_;
  st::StiefelPoint anchor_;
  double t_ = 1.0;
  GammaDescriptor gd_;

  // per-element centroid data: packed mean and sqrt(sigma)-scaled modes
  MatrixXd elem_mean_;            // n_elems x n_w
  std::vector<MatrixXd> elem_modes_; // per element: n_w x m
  std::vector<MatrixXd> elem_lbar_;  // centroid Cholesky factors of Kbar
  std::vector<MatrixXd> node_kl_;    // per node: n_w x m (scaled modes)
};

} // namespace rfield::sg

#endif
