#ifndef RFIELD_SQUASH_HPP
#define RFIELD_SQUASH_HPP

#include <vector>

#include "rfield/errors.hpp"

namespace rfield::rep {

enum class SquashKind { GammaQuantile, SoftAbs };

/// Strictly increasing map from the real line onto the positive half line,
/// applied to the diagonal of the triangular factor in the square-type
/// representation. One shape parameter a_j per diagonal index.
///
/// Two admissible families ship:
///  - GammaQuantile: h(g;a) = 2 s^2 Pinv_a(Phi(g/s)), the Gaussian-to-Gamma
///    quantile transport with scale s = dispersion/sqrt(n+1) and shapes
///    a_j = 1/(2 s^2) + (1-j)/2. Its quadratic-growth certificate is
///    established numerically on a grid at construction.
///  - SoftAbs: h(g;a) = a (g + sqrt(g^2+1)) with the closed-form certificate
///    h <= 2a + a g^2. Cheap, used as a test double.
class SquashFunction {
public:
  /// Gaussian-to-Gamma quantile squash for an n x n field.
  /// Requires 0 < dispersion < sqrt((n+1)/(n-1)) so all shapes stay positive.
  static SquashFunction gamma_quantile(int n, double dispersion);

  /// Soft-abs squash with one scale per diagonal index.
  static SquashFunction softabs(std::vector<double> a);

  SquashKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(a_.size()); }
  double shape(int j) const { return a_[j]; }
  double scale() const { return s_; }
  double dispersion() const { return dispersion_; }

  /// h(g; a_j). Throws SaturationError when the Gaussian stage is driven
  /// past what the Gamma quantile can resolve.
  double eval(double g, int j) const;

  /// Inverse map on the positive half line; inverse(eval(g,j),j) == g
  /// to 1e-8 over the certified grid.
  double inverse(double v, int j) const;

  /// Growth certificate h(g;a_j) <= growth_c_a(j) + growth_c_h() * g^2,
  /// valid on the certification grid.
  double growth_c_h() const { return c_h_; }
  double growth_c_a(int j) const { return c_a_[j]; }

  /// Sum of the per-index offsets (the constant in the square-type
  /// Frobenius bound).
  double gamma0() const;

  /// max(growth_c_h, 1/2), the quadratic coefficient in the same bound.
  double gamma1() const;

  /// Extent of the certification grid (|g| <= grid_halfwidth()).
  double grid_halfwidth() const { return grid_half_; }

private:
  SquashFunction() = default;

  SquashKind kind_ = SquashKind::SoftAbs;
  std::vector<double> a_;
  std::vector<double> c_a_;
  double c_h_ = 0.0;
  double s_ = 1.0;
  double dispersion_ = 0.0;
  double grid_half_ = 0.0;
};

} // namespace rfield::rep

#endif
