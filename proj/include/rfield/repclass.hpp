#ifndef RFIELD_REPCLASS_HPP
#define RFIELD_REPCLASS_HPP

#include <optional>
#include <vector>

#include "rfield/matalg.hpp"
#include "rfield/squash.hpp"

namespace rfield::rep {

using mat::MatrixXd;
using mat::SPDMatrix;
using mat::SymMatrix;
using mat::VectorXd;

/// Nonlinear map between the symmetric germ matrix G and the normalized SPD
/// factor K0. Exponential kind: K0 = exp(G). Square kind: K0 = L^T L with L
/// upper triangular, strict upper triangle copied from G and diagonal passed
/// through the squash.
class Representation {
public:
  enum class Kind { Exponential, Square };

  static Representation exponential() { return Representation(Kind::Exponential, {}); }
  static Representation square(SquashFunction h) {
    return Representation(Kind::Square, std::move(h));
  }

  Kind kind() const { return kind_; }
  bool is_square() const { return kind_ == Kind::Square; }
  const SquashFunction& squash() const {
    if (!squash_) throw InvalidInputError("representation has no squash function");
    return *squash_;
  }

  SPDMatrix forward(const SymMatrix& g) const;
  SymMatrix inverse(const SPDMatrix& k0) const;

private:
  Representation(Kind k, std::optional<SquashFunction> h)
      : kind_(k), squash_(std::move(h)) {}

  Kind kind_;
  std::optional<SquashFunction> squash_;
};

/// Deterministic lower-bound scaffold of the random field: a per-node SPD
/// matrix Kbar with cached upper Cholesky factors, the shift parameter
/// epsilon, and the derived spectral constants. The normalized factor K0 is
/// mapped to the physical coefficient K through
///   K = (Lbar^T (eps I + K0) Lbar) / (1 + eps),
/// which pins the smallest eigenvalue of K above k_eps = k0 eps/(1+eps).
class NormalizationField {
public:
  /// Same Kbar at every node.
  NormalizationField(const SPDMatrix& kbar, double epsilon);

  /// Node-varying Kbar.
  NormalizationField(std::vector<SPDMatrix> kbar, double epsilon);

  int dim() const { return n_; }
  int nodes() const { return constant_ ? 1 : static_cast<int>(kbar_.size()); }
  double epsilon() const { return eps_; }

  /// Smallest admissible eigenvalue over all nodes.
  double k0() const { return k0_; }
  /// Spectral scale with |Kbar(x)|_2 <= k1_tilde/sqrt(n).
  double k1_tilde() const { return k1t_; }
  /// Trace bound n * k1_tilde.
  double k1() const { return n_ * k1t_; }
  /// Guaranteed coefficient lower bound k0 * eps / (1 + eps).
  double k_eps() const { return k0_ * eps_ / (1.0 + eps_); }

  const SPDMatrix& kbar(int node) const { return kbar_[index(node)]; }
  const MatrixXd& lbar(int node) const { return lbar_[index(node)]; }

  /// K0 -> K at a node.
  SPDMatrix normalize(const SPDMatrix& k0, int node) const;

  /// K -> K0 at a node; throws NotPositiveDefiniteError when K is not
  /// compatible with the lower bound (the epsilon shift makes the result
  /// indefinite).
  SPDMatrix denormalize(const SPDMatrix& k, int node) const;

private:
  void finalize();
  int index(int node) const { return constant_ ? 0 : node; }

  int n_ = 0;
  bool constant_ = true;
  double eps_ = 0.0;
  double k0_ = 0.0;
  double k1t_ = 0.0;
  std::vector<SPDMatrix> kbar_;
  std::vector<MatrixXd> lbar_;
  std::vector<MatrixXd> lbar_inv_;
};

/// Spatial sup-norm data of a truncated expansion of G: |G0|_inf and, per
/// retained mode, sqrt(sigma_i) |G_i|_inf. Produced by the KL module;
/// consumed by the bound functionals below.
struct GermSupData {
  double mean_sup = 0.0;
  VectorXd mode_sup_scaled; // sqrt(sigma_i) * |G_i|_inf
};

/// Per-realization bound chain evaluated at a chaos realization eta.
struct BoundReport {
  double k_eps = 0.0;      // deterministic spectral floor
  double delta = 0.0;      // sup-norm bound of |G(x)|_F for this eta
  double gamma = 0.0;      // Frobenius bound of |K(x)|_F for this eta
  double beta = 0.0;       // bound from the realized sup of |K0(x)|_F
  double zeta_bar_m = 0.0; // second-moment bound of delta^2 (square kind)
  double gamma_bar = 0.0;  // expectation bound of gamma (square kind only)
};

/// Evaluates the bound chain for one realization. realized_k0_sup, when
/// given, is the realized max over nodes of |K0(x)|_F and sharpens beta;
/// otherwise beta falls back to the eta-driven bound (= gamma).
BoundReport bounds(const Representation& rep, const NormalizationField& norm,
                   const GermSupData& sup, const VectorXd& eta,
                   std::optional<double> realized_k0_sup = std::nullopt);

} // namespace rfield::rep

#endif
