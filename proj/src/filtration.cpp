#include "phgm/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phgm/error.hpp"

namespace phgm {

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd d) : d_(std::move(d)) {
  if (d_.rows() != d_.cols()) fail(Errc::shape_mismatch, "distance matrix must be square");
  const Eigen::Index n = d_.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (d_(j, j) != 0.0) fail(Errc::invalid_argument, "distance matrix diagonal must be zero");
    for (Eigen::Index k = 0; k < n; ++k) {
      const double v = d_(j, k);
      if (!std::isfinite(v)) fail(Errc::non_finite, "distance matrix has a non-finite entry");
      if (v < 0.0) fail(Errc::invalid_argument, "distance matrix has a negative entry");
      if (v != d_(k, j)) fail(Errc::not_symmetric, "distance matrix is not symmetric");
    }
  }
}

DistanceMatrix pairwise_distances(const PointCloud& pc) {
  if (pc.size() == 0) fail(Errc::invalid_argument, "empty point cloud");
  if (!pc.points.allFinite()) fail(Errc::non_finite, "point cloud has a non-finite coordinate");
  const Eigen::Index n = pc.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      const double v = (pc.points.row(j) - pc.points.row(k)).norm();
      d(j, k) = v;
      d(k, j) = v;
    }
  return DistanceMatrix(std::move(d));
}

namespace {

std::int64_t choose3(std::int64_t x) { return x < 3 ? 0 : x * (x - 1) * (x - 2) / 6; }
std::int64_t choose2(std::int64_t x) { return x < 2 ? 0 : x * (x - 1) / 2; }

bool simplex_less(const Simplex& x, const Simplex& y) {
  if (x.value != y.value) return x.value < y.value;
  if (x.dim != y.dim) return x.dim < y.dim;
  return x.vertices < y.vertices;
}

}  // namespace

FilteredComplex::FilteredComplex(int n_vertices, int max_dim, std::vector<Simplex> simplices)
    : n_(n_vertices), max_dim_(max_dim), simplices_(std::move(simplices)) {
  std::sort(simplices_.begin(), simplices_.end(), simplex_less);
  vertex_ids_.assign(n_, -1);
  edge_lookup_.assign(static_cast<std::size_t>(n_) * n_, -1);
  if (max_dim_ >= 2) triangle_lookup_.assign(static_cast<std::size_t>(choose3(n_)), -1);
  for (std::size_t id = 0; id < simplices_.size(); ++id) {
    const auto& s = simplices_[id];
    const int i = static_cast<int>(id);
    switch (s.dim) {
      case 0: vertex_ids_[s.vertices[0]] = i; break;
      case 1:
        edge_lookup_[static_cast<std::size_t>(s.vertices[0]) * n_ + s.vertices[1]] = i;
        edge_lookup_[static_cast<std::size_t>(s.vertices[1]) * n_ + s.vertices[0]] = i;
        edge_ids_.push_back(i);
        break;
      case 2:
        triangle_lookup_[static_cast<std::size_t>(
            triangle_key(s.vertices[0], s.vertices[1], s.vertices[2]))] = i;
        triangle_ids_.push_back(i);
        break;
      default: fail(Errc::invalid_argument, "simplex dimension above 2");
    }
  }
}

std::int64_t FilteredComplex::triangle_key(int a, int b, int c) const {
  // Combinatorial number system for sorted a < b < c.
  return choose3(c) + choose2(b) + a;
}

int FilteredComplex::edge_id(int u, int v) const {
  if (u == v) return -1;
  return edge_lookup_[static_cast<std::size_t>(u) * n_ + v];
}

int FilteredComplex::triangle_id(int u, int v, int w) const {
  if (max_dim_ < 2) return -1;
  std::array<int, 3> t{u, v, w};
  std::sort(t.begin(), t.end());
  if (t[0] == t[1] || t[1] == t[2]) return -1;
  return triangle_lookup_[static_cast<std::size_t>(triangle_key(t[0], t[1], t[2]))];
}

std::vector<int> FilteredComplex::boundary(int id) const {
  const auto& s = simplices_[id];
  const auto& v = s.vertices;
  if (s.dim == 1) return {vertex_ids_[v[0]], vertex_ids_[v[1]]};
  if (s.dim == 2) return {edge_id(v[0], v[1]), edge_id(v[0], v[2]), edge_id(v[1], v[2])};
  return {};
}

void FilteredComplex::check_invariants() const {
  for (std::size_t id = 0; id < simplices_.size(); ++id) {
    if (id > 0 && simplex_less(simplices_[id], simplices_[id - 1]))
      fail(Errc::invalid_argument, "complex is not in simplexwise order");
    for (int face : boundary(static_cast<int>(id))) {
      if (face < 0 || face >= static_cast<int>(id))
        fail(Errc::invalid_argument, "complex is not closed under faces");
      if (simplices_[face].value > simplices_[id].value)
        fail(Errc::invalid_argument, "face value exceeds simplex value");
    }
  }
}

FilteredComplex build_vr_complex(const DistanceMatrix& d, int max_dim, double max_radius) {
  if (max_dim != 1 && max_dim != 2) fail(Errc::invalid_argument, "max_dim must be 1 or 2");
  if (!(max_radius > 0.0)) fail(Errc::invalid_argument, "max_radius must be positive");
  const int n = d.size();
  std::vector<Simplex> simplices;
  for (int v = 0; v < n; ++v) simplices.push_back(Simplex{{v, -1, -1}, 0, 0.0});
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (d(a, b) <= max_radius) simplices.push_back(Simplex{{a, b, -1}, 1, d(a, b)});
  if (max_dim == 2) {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        const double ab = d(a, b);
        if (ab > max_radius) continue;
        for (int c = b + 1; c < n; ++c) {
          const double v = std::max({ab, d(a, c), d(b, c)});
          if (v <= max_radius) simplices.push_back(Simplex{{a, b, c}, 2, v});
        }
      }
  }
  return FilteredComplex(n, max_dim, std::move(simplices));
}

PointCloud laplacian_eigenmap(const Eigen::MatrixXd& w, int embed_dim) {
  const Eigen::Index n = w.rows();
  if (w.cols() != n) fail(Errc::shape_mismatch, "connectivity matrix must be square");
  if (embed_dim < 1 || embed_dim >= n)
    fail(Errc::invalid_argument, "embed_dim must be in [1, n)");
  if (!w.allFinite()) fail(Errc::non_finite, "connectivity matrix has a non-finite entry");
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      if (w(j, k) < 0.0) fail(Errc::invalid_argument, "connectivity scores must be nonnegative");
      if (w(j, k) != w(k, j)) fail(Errc::not_symmetric, "connectivity matrix is not symmetric");
    }
  const Eigen::VectorXd degree = w.rowwise().sum();
  for (Eigen::Index j = 0; j < n; ++j)
    if (degree(j) <= 0.0)
      fail(Errc::isolated_vertex, "vertex " + std::to_string(j) + " has no connections");

  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd lap = -(inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  // Push the trivial direction above the spectrum (which lies in [0, 2]) so
  // the smallest embed_dim eigenpairs are the informative ones, even when a
  // disconnected graph makes the zero eigenvalue degenerate.
  const Eigen::VectorXd trivial = degree.cwiseSqrt().normalized();
  lap += 4.0 * trivial * trivial.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  if (eig.info() != Eigen::Success) fail(Errc::non_finite, "Laplacian eigendecomposition failed");
  PointCloud out;
  out.points = eig.eigenvectors().leftCols(embed_dim);
  // Fix each eigenvector's sign: largest-magnitude entry positive.
  for (int c = 0; c < embed_dim; ++c) {
    Eigen::Index arg;
    out.points.col(c).cwiseAbs().maxCoeff(&arg);
    if (out.points(arg, c) < 0.0) out.points.col(c) *= -1.0;
  }
  return out;
}

}  // namespace phgm
