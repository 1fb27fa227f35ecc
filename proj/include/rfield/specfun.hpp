#ifndef RFIELD_SPECFUN_HPP
#define RFIELD_SPECFUN_HPP

namespace rfield::sf {

/// Standard normal distribution function.
double norm_cdf(double x);

/// Standard normal density.
double norm_pdf(double x);

/// Inverse of norm_cdf on (0,1). Throws SaturationError at 0 or 1.
double norm_quantile(double u);

/// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a), a > 0,
/// x >= 0. Series expansion for x < a+1, continued fraction otherwise.
double gamma_p(double a, double x);

/// Inverse of x -> gamma_p(a,x) on (0,1): Newton iterations with a bisection
/// fallback, tolerance 1e-12. Throws SaturationError when u is too close to
/// 0 or 1 to invert in double precision.
double gamma_p_inv(double a, double u);

} // namespace rfield::sf

#endif
