#include "rfield/squash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfield/specfun.hpp"

namespace rfield::rep {

SquashFunction SquashFunction::gamma_quantile(int n, double dispersion) {
  if (n < 1) throw InvalidInputError("gamma_quantile: dimension must be >= 1");
  const double dmax =
      (n > 1) ? std::sqrt((n + 1.0) / (n - 1.0)) : std::numeric_limits<double>::infinity();
  if (!(dispersion > 0.0) || !(dispersion < dmax))
    throw InvalidInputError("gamma_quantile: dispersion " + std::to_string(dispersion) +
                            " outside (0, sqrt((n+1)/(n-1)))");

  SquashFunction h;
  h.kind_ = SquashKind::GammaQuantile;
  h.dispersion_ = dispersion;
  h.s_ = dispersion / std::sqrt(n + 1.0);
  h.a_.resize(n);
  for (int j = 0; j < n; ++j)
    h.a_[j] = 1.0 / (2.0 * h.s_ * h.s_) + (1.0 - (j + 1)) / 2.0;

  // Certify the quadratic growth bound on a symmetric grid. Phi(g/s) stays
  // invertible through the Gamma quantile for |g/s| <= ~7.5.
  h.grid_half_ = 7.0 * h.s_;
  const int grid_pts = 281;
  h.c_a_.resize(n);
  h.c_h_ = 0.0;
  for (int j = 0; j < n; ++j) {
    h.c_a_[j] = h.eval(0.0, j);
    for (int k = 0; k < grid_pts; ++k) {
      const double g = -h.grid_half_ + 2.0 * h.grid_half_ * k / (grid_pts - 1);
      if (g == 0.0) continue;
      const double excess = (h.eval(g, j) - h.c_a_[j]) / (g * g);
      if (excess > h.c_h_) h.c_h_ = excess;
    }
  }
  return h;
}

SquashFunction SquashFunction::softabs(std::vector<double> a) {
  for (double aj : a)
    if (!(aj > 0.0)) throw InvalidInputError("softabs: scales must be positive");
  SquashFunction h;
  h.kind_ = SquashKind::SoftAbs;
  h.a_ = std::move(a);
  h.c_a_.resize(h.a_.size());
  h.c_h_ = 0.0;
  for (std::size_t j = 0; j < h.a_.size(); ++j) {
    h.c_a_[j] = 2.0 * h.a_[j];
    h.c_h_ = std::max(h.c_h_, h.a_[j]);
  }
  h.grid_half_ = 10.0;
  return h;
}

double SquashFunction::eval(double g, int j) const {
  if (!std::isfinite(g)) throw InvalidInputError("squash: non-finite argument");
  const double a = a_[j];
  if (kind_ == SquashKind::SoftAbs) return a * (g + std::sqrt(g * g + 1.0));

  const double u = sf::norm_cdf(g / s_);
  if (!(u > 0.0) || 1.0 - u < 1e-16)
    throw SaturationError("squash: Gaussian stage saturated at g/s = " +
                          std::to_string(g / s_));
  return 2.0 * s_ * s_ * sf::gamma_p_inv(a, u);
}

double SquashFunction::inverse(double v, int j) const {
  if (!(v > 0.0)) throw InvalidInputError("squash inverse: argument must be positive");
  const double a = a_[j];
  if (kind_ == SquashKind::SoftAbs) {
    const double w = v / a;
    return 0.5 * (w - 1.0 / w);
  }
  const double u = sf::gamma_p(a, v / (2.0 * s_ * s_));
  if (!(u > 0.0) || !(u < 1.0))
    throw SaturationError("squash inverse: Gamma stage saturated");
  return s_ * sf::norm_quantile(u);
}

double SquashFunction::gamma0() const {
  double g0 = 0.0;
  for (double c : c_a_) g0 += c;
  return g0;
}

double SquashFunction::gamma1() const { return std::max(c_h_, 0.5); }

} // namespace rfield::rep
