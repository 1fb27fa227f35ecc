#include "rfield/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rfield {

Eigen::VectorXd Mesh::centroid(int e) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
  for (int v = 0; v <= dim; ++v) c += nodes.row(elems(e, v)).transpose();
  return c / (dim + 1.0);
}

double Mesh::elem_measure(int e) const {
  if (dim == 1) {
    return std::abs(nodes(elems(e, 1), 0) - nodes(elems(e, 0), 0));
  }
  const auto p0 = nodes.row(elems(e, 0));
  const auto p1 = nodes.row(elems(e, 1));
  const auto p2 = nodes.row(elems(e, 2));
  const double det = (p1(0) - p0(0)) * (p2(1) - p0(1)) -
                     (p2(0) - p0(0)) * (p1(1) - p0(1));
  return 0.5 * std::abs(det);
}

std::vector<int> Mesh::interior_nodes() const {
  std::vector<int> idx;
  for (int a = 0; a < n_nodes(); ++a)
    if (!boundary[a]) idx.push_back(a);
  return idx;
}

std::uint64_t Mesh::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  mix(&dim, sizeof(dim));
  for (int a = 0; a < n_nodes(); ++a)
    for (int d = 0; d < dim; ++d) {
      const double x = nodes(a, d);
      mix(&x, sizeof(x));
    }
  for (int e = 0; e < n_elems(); ++e)
    for (int v = 0; v <= dim; ++v) {
      const int id = elems(e, v);
      mix(&id, sizeof(id));
    }
  mix(boundary.data(), boundary.size());
  return h;
}

void Mesh::finalize() {
  for (int e = 0; e < n_elems(); ++e)
    if (!(elem_measure(e) > 0.0))
      throw InvalidInputError("mesh: element " + std::to_string(e) +
                              " has nonpositive measure");
  node_weight = Eigen::VectorXd::Zero(n_nodes());
  for (int e = 0; e < n_elems(); ++e) {
    const double share = elem_measure(e) / (dim + 1.0);
    for (int v = 0; v <= dim; ++v) node_weight[elems(e, v)] += share;
  }
}

Mesh Mesh::interval(int n_cells, double a, double b) {
  if (n_cells < 2) throw InvalidInputError("mesh: need at least 2 cells");
  Mesh m;
  m.dim = 1;
  const int n = n_cells + 1;
  m.nodes.resize(n, 1);
  for (int i = 0; i < n; ++i) m.nodes(i, 0) = a + (b - a) * i / n_cells;
  m.elems.resize(n_cells, 2);
  for (int e = 0; e < n_cells; ++e) {
    m.elems(e, 0) = e;
    m.elems(e, 1) = e + 1;
  }
  m.boundary.assign(n, 0);
  m.boundary.front() = 1;
  m.boundary.back() = 1;
  m.finalize();
  return m;
}

Mesh Mesh::rectangle(int nx, int ny, double ax, double bx, double ay, double by) {
  if (nx < 1 || ny < 1) throw InvalidInputError("mesh: empty grid");
  Mesh m;
  m.dim = 2;
  const int n = (nx + 1) * (ny + 1);
  m.nodes.resize(n, 2);
  m.boundary.assign(n, 0);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const int a = j * (nx + 1) + i;
      m.nodes(a, 0) = ax + (bx - ax) * i / nx;
      m.nodes(a, 1) = ay + (by - ay) * j / ny;
      if (i == 0 || i == nx || j == 0 || j == ny) m.boundary[a] = 1;
    }
  m.elems.resize(2 * nx * ny, 3);
  int e = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i;
      const int b = a + 1;
      const int c = a + (nx + 1);
      const int d = c + 1;
      m.elems.row(e++) << a, b, d;
      m.elems.row(e++) << a, d, c;
    }
  m.finalize();
  return m;
}

Mesh Mesh::load_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("mesh: cannot open " + path);
  Mesh m;
  int n_nodes = 0, n_elems = 0;
  in >> m.dim >> n_nodes >> n_elems;
  if (!in || (m.dim != 1 && m.dim != 2))
    throw InvalidInputError("mesh: bad header in " + path);
  m.nodes.resize(n_nodes, m.dim);
  m.boundary.assign(n_nodes, 0);
  for (int a = 0; a < n_nodes; ++a) {
    for (int d = 0; d < m.dim; ++d) in >> m.nodes(a, d);
    int flag = 0;
    in >> flag;
    m.boundary[a] = static_cast<std::uint8_t>(flag != 0);
  }
  m.elems.resize(n_elems, m.dim + 1);
  for (int e = 0; e < n_elems; ++e)
    for (int v = 0; v <= m.dim; ++v) in >> m.elems(e, v);
  if (!in) throw InvalidInputError("mesh: truncated file " + path);
  m.finalize();
  return m;
}

void Mesh::save_text(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("mesh: cannot write " + path);
  out << dim << " " << n_nodes() << " " << n_elems() << "\n";
  char buf[64];
  for (int a = 0; a < n_nodes(); ++a) {
    for (int d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof(buf), "%.17g ", nodes(a, d));
      out << buf;
    }
    out << int(boundary[a]) << "\n";
  }
  for (int e = 0; e < n_elems(); ++e) {
    for (int v = 0; v <= dim; ++v) out << elems(e, v) << (v == dim ? '\n' : ' ');
  }
}

} // namespace rfield
