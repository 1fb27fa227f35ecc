#include "rfield/klpce.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Eigenvalues>

namespace rfield::kl {

namespace {

/// Flattened weight vector over (node, channel) pairs.
VectorXd flat_weights(const Mesh& mesh, int n) {
  const VectorXd c = mat::sym_vec_weights(n);
  const int ch = static_cast<int>(c.size());
  VectorXd w(mesh.n_nodes() * ch);
  for (int a = 0; a < mesh.n_nodes(); ++a)
    for (int k = 0; k < ch; ++k) w[a * ch + k] = mesh.node_weight[a] * c[k];
  return w;
}

VectorXd flatten(const SymField& f) {
  VectorXd v(f.n_nodes() * f.n_channels());
  for (int a = 0; a < f.n_nodes(); ++a)
    v.segment(a * f.n_channels(), f.n_channels()) = f.data.row(a);
  return v;
}

SymField unflatten(const VectorXd& v, int n, int n_nodes) {
  SymField f(n, n_nodes);
  const int ch = f.n_channels();
  for (int a = 0; a < n_nodes; ++a) f.data.row(a) = v.segment(a * ch, ch);
  return f;
}

} // namespace

double field_inner(const Mesh& mesh, const SymField& a, const SymField& b) {
  if (a.n != b.n || a.n_nodes() != b.n_nodes() || a.n_nodes() != mesh.n_nodes())
    throw DimensionError("field_inner: shape mismatch");
  const VectorXd c = mat::sym_vec_weights(a.n);
  double s = 0.0;
  for (int node = 0; node < mesh.n_nodes(); ++node)
    s += mesh.node_weight[node] *
         (a.data.row(node).array() * b.data.row(node).array() *
          c.transpose().array())
             .sum();
  return s;
}

Moments estimate_moments(const Mesh& mesh, const RealizationSet& r) {
  if (r.n_nodes != mesh.n_nodes())
    throw DimensionError("estimate_moments: mesh/data node mismatch");
  const int nu = r.count();
  if (nu < 2)
    throw InsufficientDataError("estimate_moments: need at least two realizations");

  const Eigen::RowVectorXd mean_row = r.data.colwise().mean();
  const MatrixXd centered = r.data.rowwise() - mean_row;
  MatrixXd cov = centered.transpose() * centered / (nu - 1.0);
  cov = 0.5 * (cov + cov.transpose()).eval();

  Moments mom;
  mom.mean = unflatten(mean_row.transpose(), r.n, r.n_nodes);
  mom.cov = std::move(cov);
  return mom;
}

rep::GermSupData KLBasis::sup_data() const {
  rep::GermSupData sup;
  sup.mean_sup = mean.sup_norm();
  sup.mode_sup_scaled.resize(m());
  for (int i = 0; i < m(); ++i)
    sup.mode_sup_scaled[i] = std::sqrt(sigma[i]) * modes[i].sup_norm();
  return sup;
}

KLBasis solve_kl(const Mesh& mesh, const Moments& mom, int m) {
  const int n = mom.mean.n;
  const int flat = static_cast<int>(mom.cov.rows());
  if (flat != mesh.n_nodes() * mat::sym_vec_size(n))
    throw DimensionError("solve_kl: covariance size mismatch");

  const VectorXd w = flat_weights(mesh, n);
  const VectorXd ws = w.cwiseSqrt();
  MatrixXd b = ws.asDiagonal() * mom.cov * ws.asDiagonal();
  b = 0.5 * (b + b.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(b);
  if (es.info() != Eigen::Success)
    throw InvariantError("solve_kl: eigensolver failed");

  const VectorXd evals = es.eigenvalues(); // ascending
  const double top = std::max(evals[flat - 1], 0.0);
  int rank = 0;
  for (int i = 0; i < flat; ++i)
    if (evals[i] > std::max(1e-12 * top, 0.0)) ++rank;
  if (m > rank)
    throw TruncationError("solve_kl: requested " + std::to_string(m) +
                              " modes beyond the spectral rank",
                          rank);

  KLBasis kl;
  kl.mean = mom.mean;
  kl.node_weight = mesh.node_weight;
  kl.mesh_hash = mesh.content_hash();
  kl.sigma.resize(m);
  kl.modes.reserve(m);
  const VectorXd inv_ws = ws.cwiseInverse();
  for (int i = 0; i < m; ++i) {
    const int idx = flat - 1 - i;
    kl.sigma[i] = evals[idx];
    const VectorXd mode = inv_ws.asDiagonal() * es.eigenvectors().col(idx);
    kl.modes.push_back(unflatten(mode, n, mesh.n_nodes()));
  }
  return kl;
}

VectorXd kl_residuals(const Mesh& mesh, const Moments& mom, const KLBasis& kl) {
  const int n = kl.n();
  const VectorXd w = flat_weights(mesh, n);
  VectorXd out(kl.m());
  for (int i = 0; i < kl.m(); ++i) {
    const VectorXd g = flatten(kl.modes[i]);
    const VectorXd lhs = mom.cov * w.cwiseProduct(g);
    const VectorXd res = lhs - kl.sigma[i] * g;
    out[i] = std::sqrt(res.dot(w.cwiseProduct(res)));
  }
  return out;
}

MatrixXd project_eta(const Mesh& mesh, const RealizationSet& r, const KLBasis& kl) {
  if (r.n_nodes != mesh.n_nodes())
    throw DimensionError("project_eta: mesh/data node mismatch");
  const double top = kl.sigma.maxCoeff();
  for (int i = 0; i < kl.m(); ++i)
    if (!(kl.sigma[i] > 1e-12 * top))
      throw InvalidInputError("project_eta: eigenvalue " + std::to_string(i) +
                              " too small to divide by");

  const VectorXd w = flat_weights(mesh, kl.n());
  const VectorXd mean = flatten(kl.mean);
  MatrixXd eta(r.count(), kl.m());
  MatrixXd weighted_modes(static_cast<int>(w.size()), kl.m());
  for (int i = 0; i < kl.m(); ++i)
    weighted_modes.col(i) = w.cwiseProduct(flatten(kl.modes[i])) / std::sqrt(kl.sigma[i]);
  for (int l = 0; l < r.count(); ++l) {
    const VectorXd centered = r.data.row(l).transpose() - mean;
    eta.row(l) = (weighted_modes.transpose() * centered).transpose();
  }
  return eta;
}

VectorXd eta_from_xi(const st::StiefelPoint& y, const pc::ChaosBasis& basis,
                     const VectorXd& xi) {
  if (y.rows() != basis.size())
    throw DimensionError("eta_from_xi: coefficient rows must match basis size");
  return y.matrix().transpose() * basis.eval(xi);
}

SymField sample_G(const KLBasis& kl, const VectorXd& eta) {
  if (eta.size() != kl.m())
    throw DimensionError("sample_G: eta length mismatch");
  SymField g = kl.mean;
  for (int i = 0; i < kl.m(); ++i)
    g.data += std::sqrt(kl.sigma[i]) * eta[i] * kl.modes[i].data;
  return g;
}

namespace {
constexpr char kKlMagic[4] = {'R', 'F', 'K', 'L'};
constexpr std::uint32_t kKlVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_vec(std::ofstream& out, const VectorXd& v) {
  for (int i = 0; i < v.size(); ++i) put(out, v[i]);
}
VectorXd get_vec(std::ifstream& in, int len) {
  VectorXd v(len);
  for (int i = 0; i < len; ++i) v[i] = get<double>(in);
  return v;
}
} // namespace

void save_kl(const std::string& path, const KLBasis& kl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("kl: cannot write " + path);
  out.write(kKlMagic, 4);
  put(out, kKlVersion);
  put(out, static_cast<std::uint32_t>(kl.n()));
  put(out, static_cast<std::uint32_t>(kl.m()));
  put(out, kl.mesh_hash);
  put(out, static_cast<std::uint64_t>(kl.mean.n_nodes()));
  put_vec(out, kl.node_weight);
  put_vec(out, kl.sigma);
  put_vec(out, flatten(kl.mean));
  for (const auto& mode : kl.modes) put_vec(out, flatten(mode));
}

KLBasis load_kl(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("kl: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kKlMagic, 4) != 0)
    throw InvalidInputError("kl: bad magic in " + path);
  if (get<std::uint32_t>(in) != kKlVersion)
    throw InvalidInputError("kl: unsupported version in " + path);
  const int n = static_cast<int>(get<std::uint32_t>(in));
  const int m = static_cast<int>(get<std::uint32_t>(in));
  KLBasis kl;
  kl.mesh_hash = get<std::uint64_t>(in);
  if (kl.mesh_hash != mesh.content_hash())
    throw InvalidInputError("kl: mesh hash mismatch for " + path);
  const int n_nodes = static_cast<int>(get<std::uint64_t>(in));
  kl.node_weight = get_vec(in, n_nodes);
  kl.sigma = get_vec(in, m);
  const int flat = n_nodes * mat::sym_vec_size(n);
  kl.mean = unflatten(get_vec(in, flat), n, n_nodes);
  kl.modes.reserve(m);
  for (int i = 0; i < m; ++i)
    kl.modes.push_back(unflatten(get_vec(in, flat), n, n_nodes));
  if (!in) throw InvalidInputError("kl: truncated file " + path);
  return kl;
}

} // namespace rfield::kl
