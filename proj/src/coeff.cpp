#include "rfield/coeff.hpp"

#include <cmath>

namespace rfield::sg {

VectorXd GammaDescriptor::eta(const VectorXd& y, const VectorXd& z) const {
  const pc::ChaosBasis chaos(germ_dims, germ_degree, pc::PolyFamily::HermiteProb,
                             1.0, static_cast<int>(anchor.rows()));
  const st::StiefelPoint base(anchor, true);
  const st::StiefelPoint yz = st::map_reduced(base, z, stiefel_t);
  return yz.matrix().transpose() * chaos.eval(y);
}

double GammaDescriptor::delta(const VectorXd& y, const VectorXd& z) const {
  return mean_sup + mode_sup_scaled.dot(eta(y, z).cwiseAbs());
}

double GammaDescriptor::gamma(const VectorXd& y, const VectorXd& z) const {
  const double d = delta(y, z);
  const double sqn = std::sqrt(n_dim);
  if (square_kind)
    return k1 * (sqn * eps + gamma0 + gamma1 * d * d) / (1.0 + eps);
  return k1 * sqn * (eps + std::exp(d)) / (1.0 + eps);
}

double GammaDescriptor::gamma_bar() const {
  if (!square_kind) return 0.0;
  const double tail = mode_sup_scaled.sum();
  const double zeta = 2.0 * mean_sup * mean_sup + 2.0 * tail * tail;
  return k1 * (std::sqrt(n_dim) * eps + gamma0 + gamma1 * zeta) / (1.0 + eps);
}

ParametricCoefficient::ParametricCoefficient(rep::Representation representation,
                                             rep::NormalizationField normalization,
                                             kl::KLBasis basis,
                                             pc::ChaosBasis germ_chaos,
                                             st::StiefelPoint anchor,
                                             const Mesh& mesh, double stiefel_t)
    : rep_(std::move(representation)), norm_(std::move(normalization)),
      kl_(std::move(basis)), chaos_(std::move(germ_chaos)),
      anchor_(std::move(anchor)), t_(stiefel_t) {
  if (anchor_.rows() != chaos_.size())
    throw DimensionError("coefficient: anchor rows must match the germ chaos size");
  if (anchor_.cols() != kl_.m())
    throw DimensionError("coefficient: anchor columns must match the mode count");
  if (kl_.n() != norm_.dim())
    throw DimensionError("coefficient: field and normalization dimensions differ");
  if (mesh.n_nodes() != kl_.mean.n_nodes())
    throw DimensionError("coefficient: basis and mesh node counts differ");
  if (chaos_.has_constant())
    throw InvalidInputError("coefficient: germ chaos must exclude the constant");

  const int m = kl_.m();
  const int n_w = kl_.mean.n_channels();

  // centroid values of the expansion (P1 interpolation = vertex average)
  elem_mean_.resize(mesh.n_elems(), n_w);
  elem_modes_.reserve(mesh.n_elems());
  elem_lbar_.reserve(mesh.n_elems());
  const bool constant_kbar = norm_.nodes() == 1;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(n_w);
    MatrixXd modes = MatrixXd::Zero(n_w, m);
    MatrixXd kbar = MatrixXd::Zero(n(), n());
    for (int v = 0; v <= mesh.dim; ++v) {
      const int a = mesh.elems(e, v);
      mean += kl_.mean.data.row(a);
      for (int i = 0; i < m; ++i)
        modes.col(i) += std::sqrt(kl_.sigma[i]) * kl_.modes[i].data.row(a).transpose();
      kbar += norm_.kbar(constant_kbar ? 0 : a).matrix();
    }
    const double inv = 1.0 / (mesh.dim + 1.0);
    elem_mean_.row(e) = mean * inv;
    elem_modes_.push_back(modes * inv);
    elem_lbar_.push_back(constant_kbar ? norm_.lbar(0)
                                       : mat::chol_upper(MatrixXd(kbar * inv)));
  }

  node_kl_.reserve(mesh.n_nodes());
  for (int a = 0; a < mesh.n_nodes(); ++a) {
    MatrixXd modes(n_w, m);
    for (int i = 0; i < m; ++i)
      modes.col(i) = std::sqrt(kl_.sigma[i]) * kl_.modes[i].data.row(a).transpose();
    node_kl_.push_back(std::move(modes));
  }

  const auto sup = kl_.sup_data();
  gd_.square_kind = rep_.is_square();
  gd_.eps = norm_.epsilon();
  gd_.k1 = norm_.k1();
  gd_.k_eps = norm_.k_eps();
  gd_.n_dim = n();
  if (rep_.is_square()) {
    gd_.gamma0 = rep_.squash().gamma0();
    gd_.gamma1 = rep_.squash().gamma1();
  }
  gd_.mean_sup = sup.mean_sup;
  gd_.mode_sup_scaled = sup.mode_sup_scaled;
  gd_.anchor = anchor_.matrix();
  gd_.germ_dims = chaos_.dims();
  gd_.germ_degree = chaos_.degree();
  gd_.stiefel_t = t_;
}

ParametricCoefficient::Sample ParametricCoefficient::sample(const VectorXd& y,
                                                            const VectorXd& z) const {
  const st::StiefelPoint yz = st::map_reduced(anchor_, z, t_);
  return Sample{yz.matrix().transpose() * chaos_.eval(y)};
}

MatrixXd ParametricCoefficient::k_elem(const Sample& s, int elem) const {
  const VectorXd w = elem_mean_.row(elem).transpose() + elem_modes_[elem] * s.eta;
  const mat::SPDMatrix k0 = rep_.forward(mat::vec_sym(w));
  const MatrixXd& l = elem_lbar_[elem];
  MatrixXd shifted = k0.matrix();
  shifted.diagonal().array() += norm_.epsilon();
  return (l.transpose() * shifted * l) / (1.0 + norm_.epsilon());
}

mat::SPDMatrix ParametricCoefficient::k_node(const Sample& s, int node) const {
  const mat::SPDMatrix k0 = rep_.forward(g_node(s, node));
  return norm_.normalize(k0, norm_.nodes() == 1 ? 0 : node);
}

mat::SymMatrix ParametricCoefficient::g_node(const Sample& s, int node) const {
  const VectorXd w = kl_.mean.data.row(node).transpose() + node_kl_[node] * s.eta;
  return mat::vec_sym(w);
}

} // namespace rfield::sg
