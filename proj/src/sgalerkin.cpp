#include "rfield/sgalerkin.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace rfield::sg {

ParamQuadrature tensor_quadrature(int n_g, int nu, int points_per_dim,
                                  pc::PolyFamily z_family, double z_scale) {
  const auto germ = pc::tensor_rule(n_g, points_per_dim, pc::PolyFamily::HermiteProb);
  const auto zpart = (nu > 0)
                         ? pc::tensor_rule(nu, points_per_dim, z_family, z_scale)
                         : pc::TensorRule{MatrixXd::Zero(1, 0), VectorXd::Ones(1)};
  ParamQuadrature q;
  q.kind = ParamQuadrature::Kind::Tensor;
  q.points_per_dim = points_per_dim;
  q.z_family = z_family;
  q.z_scale = z_scale;
  const int ny = static_cast<int>(germ.weights.size());
  const int nz = static_cast<int>(zpart.weights.size());
  q.y_points.resize(ny * nz, n_g);
  q.z_points.resize(ny * nz, nu);
  q.weights.resize(ny * nz);
  for (int i = 0; i < ny; ++i)
    for (int j = 0; j < nz; ++j) {
      const int row = i * nz + j;
      q.y_points.row(row) = germ.points.row(i);
      if (nu > 0) q.z_points.row(row) = zpart.points.row(j);
      q.weights[row] = germ.weights[i] * zpart.weights[j];
    }
  return q;
}

ParamQuadrature mc_quadrature(int n_g, int nu, int count, pc::PolyFamily z_family,
                              double z_scale, std::uint64_t seed) {
  if (count < 1) throw InvalidInputError("quadrature: empty Monte Carlo rule");
  ParamQuadrature q;
  q.kind = ParamQuadrature::Kind::MonteCarlo;
  q.mc_count = count;
  q.seed = seed;
  q.z_family = z_family;
  q.z_scale = z_scale;
  q.y_points.resize(count, n_g);
  q.z_points.resize(count, nu);
  q.weights = VectorXd::Constant(count, 1.0 / count);
  Rng rng(seed, "param-quadrature");
  for (int i = 0; i < count; ++i) {
    for (int d = 0; d < n_g; ++d) q.y_points(i, d) = rng.normal();
    for (int d = 0; d < nu; ++d)
      q.z_points(i, d) = (z_family == pc::PolyFamily::HermiteProb)
                             ? z_scale * rng.normal()
                             : rng.uniform(-z_scale, z_scale);
  }
  return q;
}

ParamQuadrature default_quadrature(int n_g, int nu, int points_per_dim,
                                   int mc_count, pc::PolyFamily z_family,
                                   double z_scale, std::uint64_t seed) {
  if (n_g + nu <= 8)
    return tensor_quadrature(n_g, nu, points_per_dim, z_family, z_scale);
  return mc_quadrature(n_g, nu, mc_count, z_family, z_scale, seed);
}

GalerkinProblem::GalerkinProblem(const Mesh& mesh,
                                 std::shared_ptr<const ParametricCoefficient> coeff,
                                 VectorXd load_dofs, ParamQuadrature quad,
                                 GalerkinOptions opts)
    : mesh_(&mesh), space_(mesh), coeff_(std::move(coeff)),
      ybasis_(coeff_->germ_dims(), opts.degree_y, pc::PolyFamily::HermiteProb, 1.0,
              -1, true),
      zbasis_(std::max(coeff_->z_dims(), 1),
              coeff_->z_dims() > 0 ? opts.degree_z : 0, opts.z_family,
              opts.z_scale, -1, true),
      quad_(std::move(quad)), opts_(opts), load_(std::move(load_dofs)) {
  if (coeff_->n() != mesh.dim)
    throw DimensionError("galerkin: coefficient dimension must match the mesh");
  if (load_.size() != space_.n_dofs())
    throw DimensionError("galerkin: load vector size mismatch");
  if (quad_.y_points.cols() != coeff_->germ_dims() ||
      quad_.z_points.cols() != coeff_->z_dims())
    throw DimensionError("galerkin: quadrature dimensions mismatch");

  const int nq = quad_.size();
  k_q_.resize(nq);
  psi_y_.resize(nq);
  psi_z_.resize(nq);
  gamma_q_.resize(nq);

  laplace_ = fem::assemble_stiffness(space_, [&](int) {
    return MatrixXd::Identity(mesh.dim, mesh.dim);
  });

  active_mass_ = 0.0;
  for (int q = 0; q < nq; ++q) {
    const VectorXd y = quad_.y_points.row(q).transpose();
    const VectorXd z = quad_.z_points.row(q).transpose();
    psi_y_[q] = ybasis_.eval(y);
    psi_z_[q] = zbasis_.eval(z.size() > 0 ? z : VectorXd::Zero(zbasis_.dims()));
    gamma_q_[q] = coeff_->gamma(y, z);
    if (gamma_q_[q] > opts_.tau) {
      quad_.weights[q] = 0.0; // truncated space: indicator at quadrature nodes
      continue;
    }
    active_mass_ += quad_.weights[q];
    try {
      const auto s = coeff_->sample(y, z);
      k_q_[q] = fem::assemble_stiffness(
          space_, [&](int e) { return coeff_->k_elem(s, e); });
    } catch (const Error& err) {
      throw InvariantError("galerkin: coefficient evaluation failed at sample " +
                           std::to_string(q) + ": " + err.what());
    }
  }
  if (!(active_mass_ > 0.0))
    throw InvalidInputError("galerkin: truncation level removed every quadrature node");

  k_mean_.resize(space_.n_dofs(), space_.n_dofs());
  for (int q = 0; q < nq; ++q) {
    if (quad_.weights[q] == 0.0) continue;
    if (k_mean_.nonZeros() == 0)
      k_mean_ = quad_.weights[q] * k_q_[q];
    else
      k_mean_ += quad_.weights[q] * k_q_[q];
  }
  mean_llt_.compute(k_mean_);
  if (mean_llt_.info() != Eigen::Success)
    throw InvariantError("galerkin: mean stiffness is not positive definite");

  MatrixXd gram = MatrixXd::Zero(n_terms(), n_terms());
  for (int q = 0; q < nq; ++q) {
    if (quad_.weights[q] == 0.0) continue;
    const VectorXd c = chaos_at(q);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(c, quad_.weights[q]);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  gram_llt_.compute(gram);
  if (gram_llt_.info() != Eigen::Success)
    throw InvalidInputError(
        "galerkin: chaos Gram matrix is singular; the quadrature cannot "
        "resolve the basis degree (or tau removed its support)");
}

VectorXd GalerkinProblem::chaos_at(int q) const {
  VectorXd c(n_terms());
  for (int ky = 0; ky < n_y(); ++ky)
    c.segment(ky * n_z(), n_z()) = psi_y_[q][ky] * psi_z_[q];
  return c;
}

MatrixXd GalerkinProblem::apply(const MatrixXd& u) const {
  MatrixXd out = MatrixXd::Zero(u.rows(), u.cols());
  for (int q = 0; q < n_quad(); ++q) {
    const double w = quad_.weights[q];
    if (w == 0.0) continue;
    // v = u * (psi_y kron psi_z)
    VectorXd v = VectorXd::Zero(u.rows());
    for (int ky = 0; ky < n_y(); ++ky)
      v.noalias() += psi_y_[q][ky] * (u.middleCols(ky * n_z(), n_z()) * psi_z_[q]);
    const VectorXd kv = k_q_[q] * v;
    for (int ky = 0; ky < n_y(); ++ky)
      out.middleCols(ky * n_z(), n_z()).noalias() +=
          (w * psi_y_[q][ky]) * kv * psi_z_[q].transpose();
  }
  return out;
}

MatrixXd GalerkinProblem::rhs() const {
  VectorXd mean_chaos = VectorXd::Zero(n_terms());
  for (int q = 0; q < n_quad(); ++q)
    if (quad_.weights[q] != 0.0) mean_chaos += quad_.weights[q] * chaos_at(q);
  return load_ * mean_chaos.transpose();
}

double GalerkinProblem::j_value(const MatrixXd& u) const {
  const double quad_form = (u.cwiseProduct(apply(u))).sum();
  const double linear = (u.cwiseProduct(rhs())).sum();
  return 0.5 * quad_form - linear;
}

VectorXd GalerkinProblem::sample_solution(const MatrixXd& u, int q) const {
  VectorXd v = VectorXd::Zero(u.rows());
  for (int ky = 0; ky < n_y(); ++ky)
    v.noalias() += psi_y_[q][ky] * (u.middleCols(ky * n_z(), n_z()) * psi_z_[q]);
  return v;
}

MatrixXd GalerkinProblem::precondition(const MatrixXd& r) const {
  const MatrixXd x = mean_llt_.solve(r);
  return gram_llt_.solve(x.transpose()).transpose();
}

EnergyNorms energy_norms(const GalerkinProblem& problem, const MatrixXd& u) {
  EnergyNorms norms;
  for (int q = 0; q < problem.n_quad(); ++q) {
    const double w = problem.weight(q);
    if (w == 0.0) continue;
    const VectorXd v = problem.sample_solution(u, q);
    const double lap = v.dot(problem.laplace() * v);
    norms.x += w * lap;
    norms.xc += w * v.dot(problem.stiffness_at(q) * v);
    norms.xgamma += w * problem.gamma_at(q) * lap;
  }
  norms.x = std::sqrt(norms.x);
  norms.xc = std::sqrt(norms.xc);
  norms.xgamma = std::sqrt(norms.xgamma);
  return norms;
}

EnergyNorms energy_norms_diff(const GalerkinProblem& problem, const MatrixXd& u,
                              const MatrixXd& v) {
  return energy_norms(problem, u - v);
}

MatrixXd galerkin_solve(const GalerkinProblem& problem, SolveReport* report) {
  const MatrixXd b = problem.rhs();
  const double bnorm = b.norm();
  MatrixXd x = MatrixXd::Zero(problem.n_dofs(), problem.n_terms());
  if (bnorm == 0.0) return x;

  MatrixXd r = b;
  MatrixXd z = problem.precondition(r);
  MatrixXd p = z;
  double rz = (r.cwiseProduct(z)).sum();

  int it = 0;
  double rel = 1.0;
  for (; it < problem.options().cg_max_iter; ++it) {
    rel = r.norm() / bnorm;
    if (rel <= problem.options().cg_tol) break;
    const MatrixXd ap = problem.apply(p);
    const double pap = (p.cwiseProduct(ap)).sum();
    if (!(pap > 0.0))
      throw InvariantError("galerkin: operator not positive definite in CG");
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    z = problem.precondition(r);
    const double rz_new = (r.cwiseProduct(z)).sum();
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (report) {
    report->iterations = it;
    report->relative_residual = rel;
  }
  if (rel > problem.options().cg_tol)
    throw InvariantError("galerkin: CG stalled at relative residual " +
                         std::to_string(rel));
  return x;
}

VectorXd solve_deterministic(const Mesh& mesh, const fem::FemSpace& space,
                             const ParametricCoefficient& coeff,
                             const VectorXd& y, const VectorXd& z,
                             const VectorXd& load_dofs) {
  (void)mesh;
  const auto s = coeff.sample(y, z);
  const SpMat a =
      fem::assemble_stiffness(space, [&](int e) { return coeff.k_elem(s, e); });
  return fem::solve_spd(a, load_dofs);
}

void SolutionMap::init_from_problem(const GalerkinProblem& problem) {
  mesh_hash_ = problem.mesh().content_hash();
  n_nodes_ = problem.mesh().n_nodes();
  node_of_dof_ = problem.space().node_of_dof;
  ybasis_ = problem.ybasis();
  zbasis_ = problem.zbasis();
  gd_ = problem.coeff().gamma_descriptor();
  has_gamma_ = true;
  tau_ = problem.options().tau;
}

SolutionMap SolutionMap::dense(const GalerkinProblem& problem, MatrixXd u) {
  SolutionMap m;
  m.init_from_problem(problem);
  m.is_cp_ = false;
  m.dense_ = std::move(u);
  return m;
}

SolutionMap SolutionMap::canonical(const GalerkinProblem& problem,
                                   std::vector<CpTerm> terms) {
  SolutionMap m;
  m.init_from_problem(problem);
  m.is_cp_ = true;
  m.terms_ = std::move(terms);
  return m;
}

VectorXd SolutionMap::pad_z(const VectorXd& z) const {
  // A parameter-free map (nu = 0) still carries a one-variable constant
  // basis; route the empty z through a zero placeholder.
  if (z.size() == zbasis_.dims()) return z;
  VectorXd padded = VectorXd::Zero(zbasis_.dims());
  padded.head(z.size()) = z;
  return padded;
}

VectorXd SolutionMap::chaos_row(const VectorXd& y, const VectorXd& z,
                                bool* cut) const {
  *cut = false;
  if (has_gamma_ && std::isfinite(tau_) && gd_.gamma(y, z) > tau_) {
    *cut = true;
    return VectorXd();
  }
  const VectorXd py = ybasis_.eval(y);
  const VectorXd pz = zbasis_.eval(pad_z(z));
  VectorXd c(py.size() * pz.size());
  for (int ky = 0; ky < py.size(); ++ky)
    c.segment(ky * pz.size(), pz.size()) = py[ky] * pz;
  return c;
}

SolutionMap::Value SolutionMap::evaluate_node(int node, const VectorXd& y,
                                              const VectorXd& z) const {
  Value out;
  bool cut = false;
  if (is_cp_) {
    if (has_gamma_ && std::isfinite(tau_) && gd_.gamma(y, z) > tau_) {
      out.truncated = true;
      return out;
    }
    const VectorXd py = ybasis_.eval(y);
    const VectorXd pz = zbasis_.eval(pad_z(z));
    int dof = -1;
    for (std::size_t d = 0; d < node_of_dof_.size(); ++d)
      if (node_of_dof_[d] == node) {
        dof = static_cast<int>(d);
        break;
      }
    if (dof < 0) return out; // boundary node
    for (const auto& t : terms_)
      out.value += t.wx[dof] * t.wy.dot(py) * t.wz.dot(pz);
    return out;
  }
  const VectorXd c = chaos_row(y, z, &cut);
  if (cut) {
    out.truncated = true;
    return out;
  }
  for (std::size_t d = 0; d < node_of_dof_.size(); ++d)
    if (node_of_dof_[d] == node) {
      out.value = dense_.row(static_cast<int>(d)).dot(c);
      return out;
    }
  return out; // boundary node: zero
}

VectorXd SolutionMap::nodal(const VectorXd& y, const VectorXd& z) const {
  VectorXd full = VectorXd::Zero(n_nodes_);
  bool cut = false;
  if (is_cp_) {
    if (has_gamma_ && std::isfinite(tau_) && gd_.gamma(y, z) > tau_) return full;
    const VectorXd py = ybasis_.eval(y);
    const VectorXd pz = zbasis_.eval(pad_z(z));
    for (const auto& t : terms_) {
      const double s = t.wy.dot(py) * t.wz.dot(pz);
      for (std::size_t d = 0; d < node_of_dof_.size(); ++d)
        full[node_of_dof_[d]] += s * t.wx[static_cast<int>(d)];
    }
    return full;
  }
  const VectorXd c = chaos_row(y, z, &cut);
  if (cut) return full;
  const VectorXd u = dense_ * c;
  for (std::size_t d = 0; d < node_of_dof_.size(); ++d)
    full[node_of_dof_[d]] = u[static_cast<int>(d)];
  return full;
}

SolutionMap::Value SolutionMap::evaluate(const Mesh& mesh, const VectorXd& x,
                                         const VectorXd& y,
                                         const VectorXd& z) const {
  if (mesh.content_hash() != mesh_hash_)
    throw InvalidInputError("solution map: mesh mismatch");
  Value out;
  if (has_gamma_ && std::isfinite(tau_) && gd_.gamma(y, z) > tau_) {
    out.truncated = true;
    return out;
  }
  const auto obs = fem::Observation::point_value(mesh, x);
  out.value = obs.apply_nodal(nodal(y, z));
  return out;
}

MatrixXd SolutionMap::to_dense() const {
  if (!is_cp_) return dense_;
  const int n_dofs = static_cast<int>(node_of_dof_.size());
  const int ny = 0 < terms_.size() ? static_cast<int>(terms_[0].wy.size()) : 0;
  const int nz = 0 < terms_.size() ? static_cast<int>(terms_[0].wz.size()) : 0;
  MatrixXd u = MatrixXd::Zero(n_dofs, ny * nz);
  for (const auto& t : terms_) {
    VectorXd c(ny * nz);
    for (int ky = 0; ky < ny; ++ky)
      c.segment(ky * nz, nz) = t.wy[ky] * t.wz;
    u.noalias() += t.wx * c.transpose();
  }
  return u;
}

namespace {
constexpr char kMapMagic[4] = {'R', 'F', 'M', 'P'};
constexpr std::uint32_t kMapVersion = 1;

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
  put(out, static_cast<std::uint64_t>(v.size()));
  for (int i = 0; i < v.size(); ++i) put(out, v[i]);
}
VectorXd get_vec(std::ifstream& in) {
  const auto len = static_cast<int>(get<std::uint64_t>(in));
  VectorXd v(len);
  for (int i = 0; i < len; ++i) v[i] = get<double>(in);
  return v;
}
void put_mat(std::ofstream& out, const MatrixXd& m) {
  put(out, static_cast<std::uint64_t>(m.rows()));
  put(out, static_cast<std::uint64_t>(m.cols()));
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) put(out, m(i, j));
}
MatrixXd get_mat(std::ifstream& in) {
  const auto rows = static_cast<int>(get<std::uint64_t>(in));
  const auto cols = static_cast<int>(get<std::uint64_t>(in));
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = get<double>(in);
  return m;
}
void put_basis(std::ofstream& out, const pc::ChaosBasis& b) {
  put(out, static_cast<std::uint32_t>(b.dims()));
  put(out, static_cast<std::uint32_t>(b.degree()));
  put(out, static_cast<std::uint32_t>(b.family() == pc::PolyFamily::HermiteProb ? 0 : 1));
  put(out, b.scale());
  put(out, static_cast<std::uint32_t>(b.size()));
  put(out, static_cast<std::uint32_t>(b.has_constant() ? 1 : 0));
}
pc::ChaosBasis get_basis(std::ifstream& in) {
  const int dims = static_cast<int>(get<std::uint32_t>(in));
  const int degree = static_cast<int>(get<std::uint32_t>(in));
  const auto fam = get<std::uint32_t>(in) == 0 ? pc::PolyFamily::HermiteProb
                                               : pc::PolyFamily::LegendreUniform;
  const double scale = get<double>(in);
  const int n_terms = static_cast<int>(get<std::uint32_t>(in));
  const bool with_const = get<std::uint32_t>(in) != 0;
  return pc::ChaosBasis(dims, degree, fam, scale, n_terms, with_const);
}
} // namespace

void SolutionMap::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("solution map: cannot write " + path);
  out.write(kMapMagic, 4);
  put(out, kMapVersion);
  put(out, mesh_hash_);
  put(out, static_cast<std::uint32_t>(n_nodes_));
  put(out, static_cast<std::uint32_t>(node_of_dof_.size()));
  for (int node : node_of_dof_) put(out, static_cast<std::uint32_t>(node));
  put_basis(out, ybasis_);
  put_basis(out, zbasis_);
  put(out, static_cast<std::uint32_t>(has_gamma_ ? 1 : 0));
  if (has_gamma_) {
    put(out, static_cast<std::uint32_t>(gd_.square_kind ? 1 : 0));
    put(out, gd_.eps);
    put(out, gd_.k1);
    put(out, gd_.k_eps);
    put(out, gd_.n_dim);
    put(out, gd_.gamma0);
    put(out, gd_.gamma1);
    put(out, gd_.mean_sup);
    put_vec(out, gd_.mode_sup_scaled);
    put_mat(out, gd_.anchor);
    put(out, static_cast<std::uint32_t>(gd_.germ_dims));
    put(out, static_cast<std::uint32_t>(gd_.germ_degree));
    put(out, gd_.stiefel_t);
  }
  put(out, tau_);
  put(out, error_bound_);
  put(out, static_cast<std::uint32_t>(is_cp_ ? 1 : 0));
  if (is_cp_) {
    put(out, static_cast<std::uint32_t>(terms_.size()));
    for (const auto& t : terms_) {
      put_vec(out, t.wx);
      put_vec(out, t.wy);
      put_vec(out, t.wz);
    }
  } else {
    put_mat(out, dense_);
  }
}

SolutionMap SolutionMap::load(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("solution map: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMapMagic, 4) != 0)
    throw InvalidInputError("solution map: bad magic in " + path);
  if (get<std::uint32_t>(in) != kMapVersion)
    throw InvalidInputError("solution map: unsupported version");
  SolutionMap m;
  m.mesh_hash_ = get<std::uint64_t>(in);
  if (m.mesh_hash_ != mesh.content_hash())
    throw InvalidInputError("solution map: mesh hash mismatch for " + path);
  m.n_nodes_ = static_cast<int>(get<std::uint32_t>(in));
  const int nd = static_cast<int>(get<std::uint32_t>(in));
  m.node_of_dof_.resize(nd);
  for (int d = 0; d < nd; ++d)
    m.node_of_dof_[d] = static_cast<int>(get<std::uint32_t>(in));
  m.ybasis_ = get_basis(in);
  m.zbasis_ = get_basis(in);
  m.has_gamma_ = get<std::uint32_t>(in) != 0;
  if (m.has_gamma_) {
    m.gd_.square_kind = get<std::uint32_t>(in) != 0;
    m.gd_.eps = get<double>(in);
    m.gd_.k1 = get<double>(in);
    m.gd_.k_eps = get<double>(in);
    m.gd_.n_dim = get<double>(in);
    m.gd_.gamma0 = get<double>(in);
    m.gd_.gamma1 = get<double>(in);
    m.gd_.mean_sup = get<double>(in);
    m.gd_.mode_sup_scaled = get_vec(in);
    m.gd_.anchor = get_mat(in);
    m.gd_.germ_dims = static_cast<int>(get<std::uint32_t>(in));
    m.gd_.germ_degree = static_cast<int>(get<std::uint32_t>(in));
    m.gd_.stiefel_t = get<double>(in);
  }
  m.tau_ = get<double>(in);
  m.error_bound_ = get<double>(in);
  m.is_cp_ = get<std::uint32_t>(in) != 0;
  if (m.is_cp_) {
    const int rank = static_cast<int>(get<std::uint32_t>(in));
    m.terms_.resize(rank);
    for (auto& t : m.terms_) {
      t.wx = get_vec(in);
      t.wy = get_vec(in);
      t.wz = get_vec(in);
    }
  } else {
    m.dense_ = get_mat(in);
  }
  if (!in) throw InvalidInputError("solution map: truncated file " + path);
  return m;
}

} // namespace rfield::sg
