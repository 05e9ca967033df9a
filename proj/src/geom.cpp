#include "nnpde/geom.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "nnpde/rng.hpp"

namespace nnpde {

Domain Domain::unit_hypercube(int d) {
  if (d < 1) throw std::invalid_argument("hypercube dimension must be >= 1");
  return {DomainKind::unit_hypercube, d};
}

Domain Domain::l_shape() { return {DomainKind::l_shape, 2}; }

std::string Domain::name() const {
  return kind == DomainKind::l_shape ? "l_shape" : "unit_hypercube(" + std::to_string(dim) + ")";
}

bool Domain::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim) return false;
  if (kind == DomainKind::unit_hypercube) return (x.array() > 0.0).all() && (x.array() < 1.0).all();
  const bool in_box = (x.array() > -1.0).all() && (x.array() < 1.0).all();
  return in_box && !(x(0) >= 0.0 && x(1) <= 0.0);
}

bool Domain::on_boundary(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  return boundary_piece(*this, x, tol) >= 0;
}

Measures measures(const Domain& domain) {
  if (domain.kind == DomainKind::unit_hypercube) return {1.0, 2.0 * domain.dim};
  return {3.0, 8.0};
}

const std::vector<Edge>& l_shape_edges() {
  static const std::vector<Edge> edges = {
      {{-1.0, -1.0}, {0.0, -1.0}}, {{0.0, -1.0}, {0.0, 0.0}}, {{0.0, 0.0}, {1.0, 0.0}},
      {{1.0, 0.0}, {1.0, 1.0}},    {{1.0, 1.0}, {-1.0, 1.0}}, {{-1.0, 1.0}, {-1.0, -1.0}}};
  return edges;
}

int boundary_piece_count(const Domain& domain) {
  return domain.kind == DomainKind::unit_hypercube ? 2 * domain.dim
                                                   : static_cast<int>(l_shape_edges().size());
}

int boundary_piece(const Domain& domain, const Eigen::Ref<const Eigen::VectorXd>& x, double tol) {
  if (x.size() != domain.dim) return -1;
  if (domain.kind == DomainKind::unit_hypercube) {
    if ((x.array() < -tol).any() || (x.array() > 1.0 + tol).any()) return -1;
    for (int k = 0; k < domain.dim; ++k) {
      if (std::abs(x(k)) <= tol) return 2 * k;
      if (std::abs(x(k) - 1.0) <= tol) return 2 * k + 1;
    }
    return -1;
  }
  const Eigen::Vector2d p(x(0), x(1));
  const auto& edges = l_shape_edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Eigen::Vector2d ab = edges[e].b - edges[e].a;
    const double t = (p - edges[e].a).dot(ab) / ab.squaredNorm();
    if (t < -tol || t > 1.0 + tol) continue;
    if ((edges[e].a + t * ab - p).norm() <= tol) return static_cast<int>(e);
  }
  return -1;
}

SampleSet sample_interior(const Domain& domain, Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  Rng rng(seed, streams::interior);
  SampleSet out{Eigen::MatrixXd(domain.dim, n), SampleOrigin::interior, seed};
  if (domain.kind == DomainKind::unit_hypercube) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (int k = 0; k < domain.dim; ++k) {
        double u;
        do {
          u = rng.uniform();
        } while (u == 0.0);  // open cube
        out.points(k, i) = u;
      }
    return out;
  }
  Eigen::Index filled = 0;
  while (filled < n) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    if (x >= 0.0 && y <= 0.0) continue;
    if (x == -1.0 || y == -1.0) continue;
    if (x * x + y * y < 1e-16) continue;
    out.points(0, filled) = x;
    out.points(1, filled) = y;
    ++filled;
  }
  return out;
}

SampleSet sample_boundary(const Domain& domain, Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample count must be >= 1");
  Rng rng(seed, streams::boundary);
  SampleSet out{Eigen::MatrixXd(domain.dim, m), SampleOrigin::boundary, seed};
  if (domain.kind == DomainKind::unit_hypercube) {
    // All 2d faces have unit measure.
    const std::uint64_t faces = 2 * static_cast<std::uint64_t>(domain.dim);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto face = static_cast<int>(rng.below(faces));
      for (int k = 0; k < domain.dim; ++k) out.points(k, i) = rng.uniform();
      out.points(face / 2, i) = (face % 2 == 0) ? 0.0 : 1.0;
    }
    return out;
  }
  const auto& edges = l_shape_edges();
  double total = 0.0;
  for (const auto& e : edges) total += e.length();
  for (Eigen::Index i = 0; i < m; ++i) {
    double r = rng.uniform() * total;
    std::size_t e = 0;
    while (e + 1 < edges.size() && r >= edges[e].length()) {
      r -= edges[e].length();
      ++e;
    }
    const double t = rng.uniform();
    const Eigen::Vector2d p = edges[e].a + t * (edges[e].b - edges[e].a);
    out.points.col(i) = p;
  }
  return out;
}

void write_csv(std::ostream& os, const SampleSet& samples) {
  for (int k = 0; k < samples.dim(); ++k) os << (k ? "," : "") << 'x' << (k + 1);
  os << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < samples.dim(); ++k) os << (k ? "," : "") << samples.points(k, i);
    os << '\n';
  }
}

SampleSet read_sample_csv(std::istream& is, SampleOrigin origin) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("sample CSV: missing header");
  int d = 0;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
      if (cell != "x" + std::to_string(d + 1)) throw std::runtime_error("sample CSV: bad header '" + cell + "'");
      ++d;
    }
  }
  if (d == 0) throw std::runtime_error("sample CSV: empty header");
  std::vector<double> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int count = 0;
    while (std::getline(ls, cell, ',')) {
      values.push_back(std::stod(cell));
      ++count;
    }
    if (count != d) throw std::runtime_error("sample CSV: ragged row");
  }
  SampleSet out;
  out.origin = origin;
  out.points = Eigen::Map<Eigen::MatrixXd>(values.data(), d, static_cast<Eigen::Index>(values.size()) / d);
  return out;
}

}  // namespace nnpde
