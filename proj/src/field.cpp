#include "rfield/field.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace rfield {

double SymField::sup_norm() const {
  const mat::VectorXd c = mat::sym_vec_weights(n);
  double best = 0.0;
  for (int a = 0; a < n_nodes(); ++a) {
    const double fro2 = (data.row(a).transpose().array().square() * c.array()).sum();
    best = std::max(best, fro2);
  }
  return std::sqrt(best);
}

SymField RealizationSet::realization(int l) const {
  SymField f(n, n_nodes);
  const int ch = n_channels();
  for (int a = 0; a < n_nodes; ++a)
    f.data.row(a) = data.row(l).segment(a * ch, ch);
  return f;
}

void RealizationSet::set_realization(int l, const SymField& f) {
  const int ch = n_channels();
  for (int a = 0; a < n_nodes; ++a)
    data.row(l).segment(a * ch, ch) = f.data.row(a);
}

RealizationSet RealizationSet::empty(int matrix_dim, int n_nodes, int nu) {
  RealizationSet r;
  r.n = matrix_dim;
  r.n_nodes = n_nodes;
  r.data = Eigen::MatrixXd::Zero(nu, n_nodes * mat::sym_vec_size(matrix_dim));
  return r;
}

void save_field_csv(const std::string& path, const Mesh& mesh, const SymField& f) {
  if (mesh.n_nodes() != f.n_nodes())
    throw DimensionError("field csv: mesh/field node mismatch");
  std::ofstream out(path);
  if (!out) throw InvalidInputError("field csv: cannot write " + path);
  out << "node";
  for (int d = 0; d < mesh.dim; ++d) out << ",x" << d;
  out << ",n";
  for (int k = 0; k < f.n_channels(); ++k) out << ",w" << (k + 1);
  out << "\n";
  char buf[64];
  for (int a = 0; a < f.n_nodes(); ++a) {
    out << a;
    for (int d = 0; d < mesh.dim; ++d) {
      std::snprintf(buf, sizeof(buf), ",%.17g", mesh.nodes(a, d));
      out << buf;
    }
    out << "," << f.n;
    for (int k = 0; k < f.n_channels(); ++k) {
      std::snprintf(buf, sizeof(buf), ",%.17g", f.data(a, k));
      out << buf;
    }
    out << "\n";
  }
}

SymField load_field_csv(const std::string& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("field csv: cannot open " + path);
  std::string line;
  std::getline(in, line); // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = line.find(',', pos);
      vals.push_back(std::strtod(line.c_str() + pos, nullptr));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw InvalidInputError("field csv: empty file " + path);
  const int ch = mat::sym_vec_size(expected_dim);
  SymField f(expected_dim, static_cast<int>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto& v = rows[a];
    if (static_cast<int>(v.size()) < 2 + ch)
      throw InvalidInputError("field csv: short row in " + path);
    // layout: node, coords..., n, channels...; channels are the tail
    for (int k = 0; k < ch; ++k)
      f.data(static_cast<int>(a), k) = v[v.size() - ch + k];
  }
  return f;
}

namespace {
constexpr char kRealMagic[4] = {'R', 'F', 'L', 'B'};
constexpr std::uint32_t kRealVersion = 1;

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
} // namespace

void save_realizations(const std::string& path, const Mesh& mesh,
                       const RealizationSet& r) {
  if (mesh.n_nodes() != r.n_nodes)
    throw DimensionError("realizations: mesh/data node mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("realizations: cannot write " + path);
  out.write(kRealMagic, 4);
  put(out, kRealVersion);
  put(out, static_cast<std::uint32_t>(r.n));
  put(out, mesh.content_hash());
  put(out, static_cast<std::uint64_t>(r.n_nodes));
  put(out, static_cast<std::uint64_t>(r.count()));
  for (int l = 0; l < r.count(); ++l)
    for (int k = 0; k < r.flat_size(); ++k) put(out, r.data(l, k));
}

RealizationSet load_realizations(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("realizations: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kRealMagic, 4) != 0)
    throw InvalidInputError("realizations: bad magic in " + path);
  if (get<std::uint32_t>(in) != kRealVersion)
    throw InvalidInputError("realizations: unsupported version in " + path);
  RealizationSet r;
  r.n = static_cast<int>(get<std::uint32_t>(in));
  const std::uint64_t hash = get<std::uint64_t>(in);
  if (hash != mesh.content_hash())
    throw InvalidInputError("realizations: mesh hash mismatch for " + path);
  r.n_nodes = static_cast<int>(get<std::uint64_t>(in));
  const auto nu = static_cast<int>(get<std::uint64_t>(in));
  r.data.resize(nu, r.flat_size());
  for (int l = 0; l < nu; ++l)
    for (int k = 0; k < r.flat_size(); ++k) r.data(l, k) = get<double>(in);
  if (!in) throw InvalidInputError("realizations: truncated file " + path);
  return r;
}

} // namespace rfield
