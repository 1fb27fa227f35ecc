#include "rfield/stiefel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "rfield/matalg.hpp"

namespace rfield::st {

StiefelPoint::StiefelPoint(const MatrixXd& y, bool trusted) : y_(y) {
  if (y_.rows() < y_.cols())
    throw DimensionError("stiefel point: more columns than rows");
  if (!trusted) {
    const double res = manifold_residual();
    if (!(res <= 1e-10))
      throw InvalidInputError("stiefel point: off manifold, residual " +
                              std::to_string(res));
  }
}

double StiefelPoint::manifold_residual() const {
  const int m = cols();
  return (y_.transpose() * y_ - MatrixXd::Identity(m, m)).norm();
}

StiefelPoint StiefelPoint::project(const MatrixXd& y) {
  Eigen::JacobiSVD<MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return StiefelPoint(svd.matrixU() * svd.matrixV().transpose(), true);
}

HouseholderQR::HouseholderQR(const MatrixXd& a)
    : rows_(static_cast<int>(a.rows())), cols_(static_cast<int>(a.cols())) {
  MatrixXd work = a;
  vs_ = MatrixXd::Zero(rows_, cols_);
  taus_ = VectorXd::Zero(cols_);

  for (int j = 0; j < cols_ && j < rows_; ++j) {
    VectorXd x = work.col(j).segment(j, rows_ - j);
    const double xnorm = x.norm();
    double alpha = (x[0] >= 0.0) ? -xnorm : xnorm;
    VectorXd v = x;
    if (xnorm > 0.0) {
      v[0] -= alpha;
      const double vnorm2 = v.squaredNorm();
      if (vnorm2 > 0.0) {
        const double tau = 2.0 / vnorm2;
        vs_.col(j).segment(j, rows_ - j) = v;
        taus_[j] = tau;
        for (int c = j; c < cols_; ++c) {
          const double dot = v.dot(work.col(c).segment(j, rows_ - j));
          work.col(c).segment(j, rows_ - j) -= (tau * dot) * v;
        }
      }
    }
    work(j, j) = alpha == 0.0 ? 0.0 : alpha;
  }

  r_ = work.topRows(std::min(rows_, cols_)).triangularView<Eigen::Upper>();

  // Deterministic sign convention: flip rows of R (and remember the flips for
  // thin_q) so the diagonal is nonnegative.
  signs_ = VectorXd::Ones(r_.rows());
  for (int i = 0; i < r_.rows(); ++i) {
    if (r_(i, i) < 0.0) {
      signs_[i] = -1.0;
      r_.row(i) *= -1.0;
    }
  }
}

void HouseholderQR::apply_reflectors(MatrixXd& x) const {
  // x <- Q x with Q = H_0 H_1 ... H_{k-1}: apply in reverse order.
  for (int j = std::min(rows_, cols_) - 1; j >= 0; --j) {
    if (taus_[j] == 0.0) continue;
    const auto v = vs_.col(j).segment(j, rows_ - j);
    for (int c = 0; c < x.cols(); ++c) {
      const double dot = v.dot(x.col(c).segment(j, rows_ - j));
      x.col(c).segment(j, rows_ - j) -= (taus_[j] * dot) * v;
    }
  }
}

MatrixXd HouseholderQR::thin_q(int k) const {
  MatrixXd q = MatrixXd::Zero(rows_, k);
  for (int j = 0; j < k; ++j) q(j, j) = signs_[j];
  apply_reflectors(q);
  return q;
}

MatrixXd HouseholderQR::complement() const {
  const int k = rows_ - cols_;
  MatrixXd q = MatrixXd::Zero(rows_, k);
  for (int j = 0; j < k; ++j) q(cols_ + j, j) = 1.0;
  apply_reflectors(q);
  return q;
}

MatrixXd HouseholderQR::apply_q_bottom(const MatrixXd& c) const {
  MatrixXd x = MatrixXd::Zero(rows_, c.cols());
  x.bottomRows(rows_ - cols_) = c;
  apply_reflectors(x);
  return x;
}

int tangent_dim(int N, int m) {
  if (m < 1 || N < m) throw DimensionError("tangent_dim: need 1 <= m <= N");
  return m * N - m * (m + 1) / 2;
}

void pack_tangent(const VectorXd& z, int N, int m, MatrixXd& a_block,
                  MatrixXd& b_block) {
  const int nu = tangent_dim(N, m);
  if (z.size() != nu)
    throw DimensionError("pack_tangent: expected length " + std::to_string(nu) +
                         ", got " + std::to_string(z.size()));
  a_block = MatrixXd::Zero(m, m);
  for (int j = 2; j <= m; ++j)
    for (int i = 1; i < j; ++i) {
      const int k = i + (j - 1) * (j - 2) / 2; // one-based
      a_block(i - 1, j - 1) = z[k - 1];
      a_block(j - 1, i - 1) = -z[k - 1];
    }
  const int nm = N - m;
  const int off = m * (m - 1) / 2;
  b_block = MatrixXd::Zero(nm, m);
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= nm; ++i) {
      const int k = i + (j - 1) * nm; // one-based
      b_block(i - 1, j - 1) = z[off + k - 1];
    }
}

VectorXd unpack_tangent(const MatrixXd& a_block, const MatrixXd& b_block) {
  const int m = static_cast<int>(a_block.rows());
  const int nm = static_cast<int>(b_block.rows());
  const int N = m + nm;
  VectorXd z(tangent_dim(N, m));
  for (int j = 2; j <= m; ++j)
    for (int i = 1; i < j; ++i)
      z[i + (j - 1) * (j - 2) / 2 - 1] = a_block(i - 1, j - 1);
  const int off = m * (m - 1) / 2;
  for (int j = 1; j <= m; ++j)
    for (int i = 1; i <= nm; ++i)
      z[off + i + (j - 1) * nm - 1] = b_block(i - 1, j - 1);
  return z;
}

MatrixXd orth_complement(const StiefelPoint& a) {
  const HouseholderQR qr(a.matrix());
  for (int i = 0; i < a.cols(); ++i)
    if (!(std::abs(qr.r()(i, i)) > 1e-12))
      throw InvalidInputError("orth_complement: rank-deficient input");
  return qr.complement();
}

MatrixXd skew_exp(const MatrixXd& s, double t) {
  const int n = static_cast<int>(s.rows());
  if (s.cols() != n) throw DimensionError("skew_exp: matrix not square");
  if ((s + s.transpose()).norm() > 1e-10 * std::max(1.0, s.norm()))
    throw InvalidInputError("skew_exp: matrix not skew-symmetric");
  if (n == 0) return MatrixXd::Zero(0, 0);

  // Pair the spectrum of -S^2 (symmetric PSD): each positive eigenvalue
  // theta^2 spans a rotation plane {v, Sv/theta}; the kernel is fixed.
  mat::SymMatrix h(-(s * s));
  const auto d = mat::sym_eigen(h);
  const double theta_max = std::sqrt(std::max(d.eigvals.maxCoeff(), 0.0));
  const double theta_tol = 1e-12 * std::max(theta_max, 1e-300);

  MatrixXd basis(n, n);
  int n_basis = 0;
  MatrixXd result = MatrixXd::Zero(n, n);

  auto deflate = [&](VectorXd& v) {
    for (int b = 0; b < n_basis; ++b) v -= basis.col(b).dot(v) * basis.col(b);
    return v.norm();
  };

  for (int idx = n - 1; idx >= 0; --idx) {
    VectorXd v = d.eigvecs.col(idx);
    const double vn = deflate(v);
    if (vn < 0.5) continue; // direction already captured by an earlier pair
    v /= vn;
    // The rotation rate of v is measured directly as |S v|; the eigenvalue of
    // -S^2 loses half the significant digits near the kernel.
    VectorXd u = s * v;
    const double theta = u.norm();
    if (theta <= theta_tol) {
      result += v * v.transpose();
      basis.col(n_basis++) = v;
    } else {
      VectorXd w = u / theta;
      const double wn = deflate(w);
      if (wn < 0.5)
        throw InvariantError("skew_exp: rotation pairing failed");
      w /= wn;
      const double c = std::cos(t * theta);
      const double sn = std::sin(t * theta);
      result += c * (v * v.transpose() + w * w.transpose()) +
                sn * (w * v.transpose() - v * w.transpose());
      basis.col(n_basis++) = v;
      basis.col(n_basis++) = w;
    }
  }
  if (n_basis != n) throw InvariantError("skew_exp: incomplete basis");
  return result;
}

namespace {

MatrixXd assemble_generator(const MatrixXd& a_block, const MatrixXd& b_block) {
  const int m = static_cast<int>(a_block.rows());
  const int k = static_cast<int>(b_block.rows());
  MatrixXd g = MatrixXd::Zero(m + k, m + k);
  g.topLeftCorner(m, m) = a_block;
  if (k > 0) {
    g.bottomLeftCorner(k, m) = b_block;
    g.topRightCorner(m, k) = -b_block.transpose();
  }
  return g;
}

} // namespace

StiefelPoint map_full(const StiefelPoint& a, const VectorXd& z, double t) {
  const int N = a.rows(), m = a.cols();
  MatrixXd ab, bb;
  pack_tangent(z, N, m, ab, bb);

  MatrixXd frame(N, N);
  frame.leftCols(m) = a.matrix();
  if (N > m) frame.rightCols(N - m) = orth_complement(a);

  const MatrixXd e = skew_exp(assemble_generator(ab, bb), t);
  return StiefelPoint(frame * e.leftCols(m), true);
}

StiefelPoint map_reduced(const StiefelPoint& a, const VectorXd& z, double t) {
  const int N = a.rows(), m = a.cols();
  MatrixXd ab, bb;
  pack_tangent(z, N, m, ab, bb);

  const int k = std::min(N - m, m);
  MatrixXd r_block(0, m);
  MatrixXd qb(N - m, 0);
  if (k > 0) {
    const HouseholderQR qr_b(bb);
    r_block = qr_b.r().topRows(k);
    qb = qr_b.thin_q(k);
  }

  const MatrixXd e = skew_exp(assemble_generator(ab, r_block), t);

  // y = a * E_top + a_perp * (Qb * E_bottom); the complement factor stays in
  // Householder form so the lift costs O(N m^2).
  MatrixXd y = a.matrix() * e.topRows(m).leftCols(m);
  if (k > 0) {
    const HouseholderQR qr_a(a.matrix());
    y += qr_a.apply_q_bottom(qb * e.bottomRows(k).leftCols(m));
  }
  return StiefelPoint(y, true);
}

namespace {
constexpr char kStiefelMagic[4] = {'R', 'F', 'S', 'P'};

std::uint64_t fnv1a(const void* p, std::size_t len) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= b[i];
    h *= 0x100000001b3ull;
  }
  return h;
}
} // namespace

void save_stiefel(const std::string& path, const StiefelPoint& y) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("stiefel: cannot write " + path);
  out.write(kStiefelMagic, 4);
  const std::uint32_t n = y.rows(), m = y.cols();
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&m), 4);
  std::vector<double> payload(static_cast<std::size_t>(n) * m);
  Eigen::Map<MatrixXd>(payload.data(), n, m) = y.matrix();
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  const std::uint64_t sum = fnv1a(payload.data(), payload.size() * sizeof(double));
  out.write(reinterpret_cast<const char*>(&sum), 8);
}

StiefelPoint load_stiefel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("stiefel: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kStiefelMagic, 4) != 0)
    throw InvalidInputError("stiefel: bad magic in " + path);
  std::uint32_t n = 0, m = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&m), 4);
  std::vector<double> payload(static_cast<std::size_t>(n) * m);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(payload.size() * sizeof(double)));
  std::uint64_t sum = 0;
  in.read(reinterpret_cast<char*>(&sum), 8);
  if (!in || sum != fnv1a(payload.data(), payload.size() * sizeof(double)))
    throw InvalidInputError("stiefel: checksum mismatch in " + path);
  return StiefelPoint(Eigen::Map<MatrixXd>(payload.data(), n, m));
}

} // namespace rfield::st
