#include "rfield/lowrank.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "rfield/rng.hpp"

namespace rfield::lowrank {

namespace {

MatrixXd outer(const sg::CpTerm& t, int n_z) {
  MatrixXd u(t.wx.size(), t.wy.size() * n_z);
  for (int ky = 0; ky < t.wy.size(); ++ky)
    u.middleCols(ky * n_z, n_z) = t.wy[ky] * t.wx * t.wz.transpose();
  return u;
}

struct FactorWork {
  // frozen data of the current greedy iterate, one slot per quadrature node
  std::vector<VectorXd> k_uc;  // K_q (U c_q)
  VectorXd f_dot_uc_unused;
};

} // namespace

sg::CpTerm als_rank_one(const sg::GalerkinProblem& problem,
                        const MatrixXd& current, const AlsOptions& opts,
                        std::uint64_t seed) {
  const int nq = problem.n_quad();
  const int nx = problem.n_dofs();
  const int ny = problem.n_y();
  const int nz = problem.n_z();
  const VectorXd& f = problem.load();

  // residual data of the current iterate
  std::vector<VectorXd> k_uc(nq);
  for (int q = 0; q < nq; ++q) {
    if (problem.weight(q) == 0.0) continue;
    k_uc[q] = problem.stiffness_at(q) * problem.sample_solution(current, q);
  }

  sg::CpTerm best;
  double best_j = std::numeric_limits<double>::infinity();
  const double j_base = problem.j_value(current);

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    Rng rng(seed, "als-init", attempt);
    sg::CpTerm t;
    t.wx = VectorXd::Zero(nx);
    t.wy.resize(ny);
    t.wz.resize(nz);
    for (int i = 0; i < ny; ++i) t.wy[i] = rng.normal();
    for (int i = 0; i < nz; ++i) t.wz[i] = rng.normal();
    t.wy.normalize();
    t.wz.normalize();

    double j_prev = j_base;
    bool degenerate = false;

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
      // spatial factor: assemble the weighted stiffness sum and its load
      {
        fem::SpMat ax(nx, nx);
        VectorXd bx = VectorXd::Zero(nx);
        bool first = true;
        for (int q = 0; q < nq; ++q) {
          const double w = problem.weight(q);
          if (w == 0.0) continue;
          const double s =
              problem.psi_y_at(q).dot(t.wy) * problem.psi_z_at(q).dot(t.wz);
          if (s == 0.0) continue;
          if (first) {
            ax = (w * s * s) * problem.stiffness_at(q);
            first = false;
          } else {
            ax += (w * s * s) * problem.stiffness_at(q);
          }
          bx += (w * s) * (f - k_uc[q]);
        }
        if (first) {
          degenerate = true;
          break;
        }
        Eigen::SimplicialLLT<fem::SpMat> llt(ax);
        if (llt.info() != Eigen::Success) {
          degenerate = true;
          break;
        }
        t.wx = llt.solve(bx);
      }
      if (t.wx.norm() == 0.0) {
        degenerate = true;
        break;
      }

      // chaos factors: dense SPD solves in the germ and parameter blocks
      for (int which = 0; which < 2; ++which) {
        const bool germ = (which == 0);
        const int dim = germ ? ny : nz;
        MatrixXd a = MatrixXd::Zero(dim, dim);
        VectorXd b = VectorXd::Zero(dim);
        for (int q = 0; q < nq; ++q) {
          const double w = problem.weight(q);
          if (w == 0.0) continue;
          const double other = germ ? problem.psi_z_at(q).dot(t.wz)
                                    : problem.psi_y_at(q).dot(t.wy);
          if (other == 0.0) continue;
          const VectorXd& psi = germ ? problem.psi_y_at(q) : problem.psi_z_at(q);
          const double ex = t.wx.dot(problem.stiffness_at(q) * t.wx);
          const double fx = t.wx.dot(f) - t.wx.dot(k_uc[q]);
          a.selfadjointView<Eigen::Lower>().rankUpdate(psi, w * other * other * ex);
          b += (w * other * fx) * psi;
        }
        MatrixXd afull = a.selfadjointView<Eigen::Lower>();
        Eigen::LLT<MatrixXd> llt(afull);
        if (llt.info() != Eigen::Success) {
          degenerate = true;
          break;
        }
        VectorXd sol = llt.solve(b);
        const double nrm = sol.norm();
        if (nrm == 0.0) {
          degenerate = true;
          break;
        }
        // unit-norm chaos factors; the magnitude moves into wx
        if (germ) {
          t.wy = sol / nrm;
        } else {
          t.wz = sol / nrm;
        }
        t.wx *= nrm;
      }
      if (degenerate) break;

      const double j_now = problem.j_value(current + outer(t, nz));
      if (j_prev - j_now <= opts.tol * std::max(std::abs(j_now), 1e-300)) {
        j_prev = j_now;
        break;
      }
      j_prev = j_now;
    }

    if (!degenerate && j_prev < best_j) {
      best_j = j_prev;
      best = t;
    }
    if (!degenerate) break; // converged on this attempt, no restart needed
  }

  if (best.wx.size() == 0)
    throw InvariantError("als: every restart produced a degenerate factor");
  return best;
}

namespace {

/// Joint re-solve of one chaos factor family (germ or parameter) across all
/// terms, the other two families frozen. Exact restricted minimization, so J
/// cannot increase. Factors are renormalized with the magnitude pushed into
/// the spatial factors.
void update_chaos_factors(const sg::GalerkinProblem& problem,
                          std::vector<sg::CpTerm>& terms, bool germ) {
  const int k = static_cast<int>(terms.size());
  const int nq = problem.n_quad();
  const int dim = germ ? problem.n_y() : problem.n_z();
  if (k == 0) return;

  MatrixXd other(k, nq); // frozen family values per quadrature node
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < k; ++i)
      other(i, q) = germ ? problem.psi_z_at(q).dot(terms[i].wz)
                         : problem.psi_y_at(q).dot(terms[i].wy);

  MatrixXd big = MatrixXd::Zero(k * dim, k * dim);
  VectorXd rhs = VectorXd::Zero(k * dim);
  MatrixXd e(k, k);
  for (int q = 0; q < nq; ++q) {
    const double w = problem.weight(q);
    if (w == 0.0) continue;
    for (int i = 0; i < k; ++i) {
      const VectorXd kx = problem.stiffness_at(q) * terms[i].wx;
      for (int j = 0; j <= i; ++j) {
        e(i, j) = kx.dot(terms[j].wx);
        e(j, i) = e(i, j);
      }
    }
    const VectorXd& psi = germ ? problem.psi_y_at(q) : problem.psi_z_at(q);
    const MatrixXd pp = psi * psi.transpose();
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j)
        big.block(i * dim, j * dim, dim, dim) +=
            (w * other(i, q) * other(j, q) * e(i, j)) * pp;
      rhs.segment(i * dim, dim) +=
          (w * other(i, q) * terms[i].wx.dot(problem.load())) * psi;
    }
  }

  Eigen::LLT<MatrixXd> llt(big);
  if (llt.info() != Eigen::Success) return;
  const VectorXd sol = llt.solve(rhs);
  for (int i = 0; i < k; ++i) {
    VectorXd f = sol.segment(i * dim, dim);
    const double nrm = f.norm();
    if (nrm == 0.0) return; // degenerate; keep the previous factors
    f /= nrm;
    if (germ)
      terms[i].wy = f;
    else
      terms[i].wz = f;
    terms[i].wx *= nrm;
  }
}

/// Joint re-solve of all spatial factors with the chaos factors frozen: the
/// exact minimizer of J over span{ v_i (x) wy_i (x) wz_i }. Contains the
/// incoming iterate, so J cannot increase.
void update_spatial_factors(const sg::GalerkinProblem& problem,
                            std::vector<sg::CpTerm>& terms) {
  const int k = static_cast<int>(terms.size());
  const int nx = problem.n_dofs();
  const int nq = problem.n_quad();
  if (k == 0) return;

  MatrixXd s(k, nq);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < k; ++i)
      s(i, q) = problem.psi_y_at(q).dot(terms[i].wy) *
                problem.psi_z_at(q).dot(terms[i].wz);

  // all frozen-coefficient matrices share one sparsity pattern; combine their
  // value arrays blockwise
  int ref = -1;
  for (int q = 0; q < nq; ++q)
    if (problem.weight(q) != 0.0) {
      ref = q;
      break;
    }
  const fem::SpMat& pattern = problem.stiffness_at(ref);
  const int nnz = static_cast<int>(pattern.nonZeros());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(k) * k * nnz);
  std::vector<double> vals(nnz);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j <= i; ++j) {
      std::fill(vals.begin(), vals.end(), 0.0);
      for (int q = 0; q < nq; ++q) {
        const double c = problem.weight(q) * s(i, q) * s(j, q);
        if (c == 0.0) continue;
        const double* kv = problem.stiffness_at(q).valuePtr();
        for (int t = 0; t < nnz; ++t) vals[t] += c * kv[t];
      }
      int t = 0;
      for (int col = 0; col < pattern.outerSize(); ++col)
        for (fem::SpMat::InnerIterator it(pattern, col); it; ++it, ++t) {
          trips.emplace_back(i * nx + it.row(), j * nx + col, vals[t]);
          if (i != j) trips.emplace_back(j * nx + it.row(), i * nx + col, vals[t]);
        }
    }
  }
  fem::SpMat big(k * nx, k * nx);
  big.setFromTriplets(trips.begin(), trips.end());

  VectorXd rhs(k * nx);
  for (int i = 0; i < k; ++i) {
    double c = 0.0;
    for (int q = 0; q < nq; ++q) c += problem.weight(q) * s(i, q);
    rhs.segment(i * nx, nx) = c * problem.load();
  }

  Eigen::SimplicialLLT<fem::SpMat> llt(big);
  if (llt.info() != Eigen::Success) return; // keep the greedy iterate as is
  const VectorXd sol = llt.solve(rhs);
  for (int i = 0; i < k; ++i) terms[i].wx = sol.segment(i * nx, nx);
}

MatrixXd accumulate(const std::vector<sg::CpTerm>& terms, int nx, int ny, int nz) {
  MatrixXd u = MatrixXd::Zero(nx, ny * nz);
  for (const auto& t : terms) u += outer(t, nz);
  return u;
}

} // namespace

GreedyResult greedy_solve(const sg::GalerkinProblem& problem,
                          const GreedyOptions& opts) {
  GreedyResult result;
  result.dense = MatrixXd::Zero(problem.n_dofs(), problem.n_terms());
  const MatrixXd b = problem.rhs();
  const double bnorm = std::max(b.norm(), 1e-300);

  double j_prev = problem.j_value(result.dense); // zero
  result.j_history.push_back(j_prev);
  result.residual_history.push_back(1.0);

  for (int k = 0; k < opts.max_rank; ++k) {
    const sg::CpTerm term =
        als_rank_one(problem, result.dense, opts.als, opts.seed + k);

    std::vector<sg::CpTerm> candidate_terms = result.terms;
    candidate_terms.push_back(term);
    for (int cycle = 0; cycle < opts.update_cycles; ++cycle) {
      update_spatial_factors(problem, candidate_terms);
      update_chaos_factors(problem, candidate_terms, true);
      update_chaos_factors(problem, candidate_terms, false);
    }
    update_spatial_factors(problem, candidate_terms);
    const MatrixXd candidate = accumulate(candidate_terms, problem.n_dofs(),
                                          problem.n_y(), problem.n_z());
    const double j_now = problem.j_value(candidate);
    if (j_now > j_prev + 1e-12 * std::abs(j_prev)) break; // no exact descent
    result.terms = std::move(candidate_terms);
    result.dense = candidate;
    result.j_history.push_back(j_now);
    result.residual_history.push_back((problem.apply(result.dense) - b).norm() /
                                      bnorm);
    const bool stalled =
        (j_prev - j_now) <= opts.tol * std::max(std::abs(j_now), 1e-300);
    j_prev = j_now;
    if (stalled) break;
  }
  return result;
}

} // namespace rfield::lowrank
