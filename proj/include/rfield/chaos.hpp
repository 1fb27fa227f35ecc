#ifndef RFIELD_CHAOS_HPP
#define RFIELD_CHAOS_HPP

#include <vector>

#include <Eigen/Dense>

#include "rfield/errors.hpp"

namespace rfield::pc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One-dimensional orthonormal polynomial families. HermiteProb is
/// orthonormal under the standard Gaussian measure, LegendreUniform under
/// the uniform probability measure on [-scale, scale].
enum class PolyFamily { HermiteProb, LegendreUniform };

/// Normalized probabilists' Hermite polynomial He_k(x)/sqrt(k!).
double hermite_norm(int k, double x);

/// Normalized Legendre polynomial sqrt(2k+1) P_k(t) on [-1,1].
double legendre_norm(int k, double t);

/// Gauss rule with probability-normalized weights (they sum to one).
struct GaussRule {
  VectorXd points;
  VectorXd weights;
};

/// Gauss-Hermite rule for the standard Gaussian weight (Golub-Welsch on the
/// symmetric Jacobi matrix).
GaussRule gauss_hermite(int q);

/// Gauss-Legendre rule on [-1,1] for the uniform probability weight.
GaussRule gauss_legendre(int q);

/// All multi-indices over `dims` variables with total degree 1..p (or 0..p
/// when include_constant), graded by degree; within a degree the ordering is
/// lexicographic descending so the degree-one block comes out aligned with
/// the coordinates: e_1, e_2, ..., e_dims.
std::vector<std::vector<int>> total_degree_indices(int dims, int p,
                                                   bool include_constant);

/// Finite orthonormal polynomial basis over `dims` variables. Components are
/// products of the 1-D family per multi-index. The constant function is
/// excluded by default (the mean is carried separately).
class ChaosBasis {
public:
  ChaosBasis() = default;
  ChaosBasis(int dims, int degree, PolyFamily family = PolyFamily::HermiteProb,
             double scale = 1.0, int n_terms = -1, bool include_constant = false);

  int dims() const { return dims_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int degree() const { return degree_; }
  PolyFamily family() const { return family_; }
  double scale() const { return scale_; }
  bool has_constant() const { return include_constant_; }
  const std::vector<int>& index(int j) const { return indices_[j]; }

  /// Evaluates all basis functions at one point.
  VectorXd eval(const VectorXd& x) const;

private:
  int dims_ = 0;
  int degree_ = 0;
  PolyFamily family_ = PolyFamily::HermiteProb;
  double scale_ = 1.0;
  bool include_constant_ = false;
  std::vector<std::vector<int>> indices_;
};

/// Tensorized Gauss rule over `dims` variables (row per point).
struct TensorRule {
  MatrixXd points;
  VectorXd weights;
};
TensorRule tensor_rule(int dims, int points_per_dim, PolyFamily family,
                       double scale = 1.0);

} // namespace rfield::pc

#endif
