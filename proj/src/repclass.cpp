#include "rfield/repclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfield::rep {

SPDMatrix Representation::forward(const SymMatrix& g) const {
  if (kind_ == Kind::Exponential) return mat::sym_exp(g);

  const SquashFunction& h = *squash_;
  const int n = g.dim();
  if (h.dim() != n) throw DimensionError("squash dimension mismatch");
  MatrixXd l = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    l(j, j) = std::sqrt(h.eval(g(j, j), j));
    for (int jp = j + 1; jp < n; ++jp) l(j, jp) = g(j, jp);
  }
  return SPDMatrix(SymMatrix(l.transpose() * l));
}

SymMatrix Representation::inverse(const SPDMatrix& k0) const {
  if (kind_ == Kind::Exponential) return mat::sym_log(k0);

  const SquashFunction& h = *squash_;
  const int n = k0.dim();
  if (h.dim() != n) throw DimensionError("squash dimension mismatch");
  const MatrixXd l = mat::chol_upper(k0);
  SymMatrix g(n);
  for (int j = 0; j < n; ++j) {
    g.set(j, j, h.inverse(l(j, j) * l(j, j), j));
    for (int jp = j + 1; jp < n; ++jp) g.set(j, jp, l(j, jp));
  }
  return g;
}

NormalizationField::NormalizationField(const SPDMatrix& kbar, double epsilon)
    : n_(kbar.dim()), constant_(true), eps_(epsilon) {
  kbar_.push_back(kbar);
  finalize();
}

NormalizationField::NormalizationField(std::vector<SPDMatrix> kbar, double epsilon)
    : constant_(false), eps_(epsilon), kbar_(std::move(kbar)) {
  if (kbar_.empty()) throw InvalidInputError("normalization field: no nodes");
  n_ = kbar_.front().dim();
  for (const auto& k : kbar_)
    if (k.dim() != n_) throw DimensionError("normalization field: mixed dimensions");
  finalize();
}

void NormalizationField::finalize() {
  if (!(eps_ > 0.0)) throw InvalidInputError("normalization field: epsilon must be positive");
  double lmin = std::numeric_limits<double>::infinity();
  double lmax = 0.0;
  lbar_.reserve(kbar_.size());
  lbar_inv_.reserve(kbar_.size());
  for (const auto& k : kbar_) {
    const auto d = mat::sym_eigen(k.sym());
    lmin = std::min(lmin, d.eigvals.minCoeff());
    lmax = std::max(lmax, d.eigvals.maxCoeff());
    MatrixXd u = mat::chol_upper(k);
    lbar_.push_back(u);
    lbar_inv_.push_back(u.triangularView<Eigen::Upper>().solve(
        MatrixXd::Identity(n_, n_)));
  }
  if (!(lmin > 0.0)) throw InvalidInputError("normalization field: Kbar not positive");
  k0_ = lmin;
  k1t_ = std::sqrt(static_cast<double>(n_)) * lmax;
}

SPDMatrix NormalizationField::normalize(const SPDMatrix& k0, int node) const {
  if (k0.dim() != n_) throw DimensionError("normalize: dimension mismatch");
  const MatrixXd& l = lbar(node);
  MatrixXd shifted = k0.matrix();
  shifted.diagonal().array() += eps_;
  MatrixXd k = (l.transpose() * shifted * l) / (1.0 + eps_);
  return SPDMatrix(SymMatrix(k));
}

SPDMatrix NormalizationField::denormalize(const SPDMatrix& k, int node) const {
  if (k.dim() != n_) throw DimensionError("denormalize: dimension mismatch");
  const MatrixXd& li = lbar_inv_[index(node)];
  MatrixXd k0 = (1.0 + eps_) * li.transpose() * k.matrix() * li;
  k0.diagonal().array() -= eps_;
  return SPDMatrix(SymMatrix(k0)); // throws when the shift makes it indefinite
}

BoundReport bounds(const Representation& rep, const NormalizationField& norm,
                   const GermSupData& sup, const VectorXd& eta,
                   std::optional<double> realized_k0_sup) {
  if (eta.size() != sup.mode_sup_scaled.size())
    throw DimensionError("bounds: eta length does not match the mode count");

  const double n = norm.dim();
  const double sqn = std::sqrt(n);
  const double eps = norm.epsilon();
  const double k1 = norm.k1();

  BoundReport r;
  r.k_eps = norm.k_eps();
  r.delta = sup.mean_sup + sup.mode_sup_scaled.dot(eta.cwiseAbs());

  const double tail = sup.mode_sup_scaled.sum();
  r.zeta_bar_m = 2.0 * sup.mean_sup * sup.mean_sup + 2.0 * tail * tail;

  double beta0_from_delta;
  if (rep.is_square()) {
    const double g0 = rep.squash().gamma0();
    const double g1 = rep.squash().gamma1();
    beta0_from_delta = g0 + g1 * r.delta * r.delta;
    r.gamma = k1 * (sqn * eps + beta0_from_delta) / (1.0 + eps);
    r.gamma_bar = k1 * (sqn * eps + g0 + g1 * r.zeta_bar_m) / (1.0 + eps);
  } else {
    beta0_from_delta = sqn * std::exp(r.delta);
    r.gamma = k1 * sqn * (eps + std::exp(r.delta)) / (1.0 + eps);
    r.gamma_bar = 0.0;
  }

  const double beta0 = realized_k0_sup ? *realized_k0_sup : beta0_from_delta;
  r.beta = k1 * (sqn * eps + beta0) / (1.0 + eps);
  return r;
}

} // namespace rfield::rep
