#include "rfield/chaos.hpp"

#include <cmath>

#include "rfield/matalg.hpp"

namespace rfield::pc {

double hermite_norm(int k, double x) {
  if (k == 0) return 1.0;
  double pm = 1.0;  // normalized He_0
  double p = x;     // normalized He_1
  for (int j = 1; j < k; ++j) {
    const double next = (x * p - std::sqrt(static_cast<double>(j)) * pm) /
                        std::sqrt(static_cast<double>(j + 1));
    pm = p;
    p = next;
  }
  return p;
}

double legendre_norm(int k, double t) {
  if (k == 0) return 1.0;
  double pm = 1.0;
  double p = t;
  for (int j = 1; j < k; ++j) {
    const double next = ((2.0 * j + 1.0) * t * p - j * pm) / (j + 1.0);
    pm = p;
    p = next;
  }
  return std::sqrt(2.0 * k + 1.0) * p;
}

namespace {

GaussRule golub_welsch(const VectorXd& offdiag) {
  const int q = static_cast<int>(offdiag.size()) + 1;
  mat::SymMatrix j(q);
  for (int i = 0; i + 1 < q; ++i) j.set(i, i + 1, offdiag[i]);
  const auto d = mat::sym_eigen(j);
  GaussRule rule;
  rule.points = d.eigvals;
  rule.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    const double v0 = d.eigvecs(0, i);
    rule.weights[i] = v0 * v0;
  }
  rule.weights /= rule.weights.sum();
  return rule;
}

} // namespace

GaussRule gauss_hermite(int q) {
  if (q < 1) throw InvalidInputError("gauss_hermite: need at least one point");
  if (q == 1) return {VectorXd::Zero(1), VectorXd::Ones(1)};
  VectorXd off(q - 1);
  for (int k = 1; k < q; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(off);
}

GaussRule gauss_legendre(int q) {
  if (q < 1) throw InvalidInputError("gauss_legendre: need at least one point");
  if (q == 1) return {VectorXd::Zero(1), VectorXd::Ones(1)};
  VectorXd off(q - 1);
  for (int k = 1; k < q; ++k)
    off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(off);
}

namespace {

void enumerate_degree(int dims, int deg, std::vector<int>& work, int pos,
                      std::vector<std::vector<int>>& out) {
  if (pos == dims - 1) {
    work[pos] = deg;
    out.push_back(work);
    return;
  }
  for (int a = deg; a >= 0; --a) {
    work[pos] = a;
    enumerate_degree(dims, deg - a, work, pos + 1, out);
  }
}

} // namespace

std::vector<std::vector<int>> total_degree_indices(int dims, int p,
                                                   bool include_constant) {
  if (dims < 1) throw InvalidInputError("multi-index set: dims must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> work(dims, 0);
  if (include_constant) out.push_back(work);
  for (int deg = 1; deg <= p; ++deg) enumerate_degree(dims, deg, work, 0, out);
  return out;
}

ChaosBasis::ChaosBasis(int dims, int degree, PolyFamily family, double scale,
                       int n_terms, bool include_constant)
    : dims_(dims), degree_(degree), family_(family), scale_(scale),
      include_constant_(include_constant) {
  if (!(scale > 0.0)) throw InvalidInputError("chaos basis: scale must be positive");
  indices_ = total_degree_indices(dims, degree, include_constant);
  if (n_terms >= 0) {
    if (n_terms > static_cast<int>(indices_.size()))
      throw TruncationError("chaos basis: requested more terms than degree " +
                                std::to_string(degree) + " provides",
                            static_cast<int>(indices_.size()));
    indices_.resize(n_terms);
  }
}

VectorXd ChaosBasis::eval(const VectorXd& x) const {
  if (x.size() != dims_) throw DimensionError("chaos basis: point dimension mismatch");
  if (!x.allFinite()) throw InvalidInputError("chaos basis: non-finite point");
  VectorXd psi(size());
  for (int j = 0; j < size(); ++j) {
    double v = 1.0;
    for (int k = 0; k < dims_; ++k) {
      const int ord = indices_[j][k];
      if (ord == 0) continue;
      const double t = x[k] / scale_;
      v *= (family_ == PolyFamily::HermiteProb) ? hermite_norm(ord, t)
                                                : legendre_norm(ord, t);
    }
    psi[j] = v;
  }
  return psi;
}

TensorRule tensor_rule(int dims, int points_per_dim, PolyFamily family,
                       double scale) {
  const GaussRule rule1 = (family == PolyFamily::HermiteProb)
                              ? gauss_hermite(points_per_dim)
                              : gauss_legendre(points_per_dim);
  const int q = points_per_dim;
  long total = 1;
  for (int d = 0; d < dims; ++d) {
    total *= q;
    if (total > 50'000'000L)
      throw InvalidInputError("tensor rule: grid too large");
  }
  TensorRule t;
  t.points.resize(total, dims);
  t.weights.resize(total);
  for (long i = 0; i < total; ++i) {
    long rest = i;
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      const int k = static_cast<int>(rest % q);
      rest /= q;
      t.points(i, d) = scale * rule1.points[k];
      w *= rule1.weights[k];
    }
    t.weights[i] = w;
  }
  return t;
}

} // namespace rfield::pc
