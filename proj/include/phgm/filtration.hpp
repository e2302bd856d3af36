#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace phgm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One point per row.
struct PointCloud {
  Eigen::MatrixXd points;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

// Symmetric, zero diagonal, finite and nonnegative. Construction validates.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(Eigen::MatrixXd d);

  int size() const { return static_cast<int>(d_.rows()); }
  double operator()(int j, int k) const { return d_(j, k); }
  const Eigen::MatrixXd& matrix() const { return d_; }

private:
  Eigen::MatrixXd d_;
};

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  auto operator<=>(const Edge&) const = default;
};

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

struct Simplex {
  std::array<int, 3> vertices{-1, -1, -1};  // sorted, unused slots -1
  int dim = 0;
  double value = 0.0;
};

// Vietoris-Rips complex up to triangles in simplexwise order: sorted by
// (value, dimension, lexicographic vertices). A simplex's position in the
// list is its tie-rank and doubles as its id.
class FilteredComplex {
public:
  FilteredComplex() = default;
  FilteredComplex(int n_vertices, int max_dim, std::vector<Simplex> simplices);

  int n_vertices() const { return n_; }
  int max_dim() const { return max_dim_; }
  std::size_t size() const { return simplices_.size(); }
  const Simplex& operator[](std::size_t id) const { return simplices_[id]; }
  const std::vector<Simplex>& simplices() const { return simplices_; }

  // Ids, or -1 when the simplex is not in the complex.
  int vertex_id(int v) const { return vertex_ids_[v]; }
  int edge_id(int u, int v) const;
  int triangle_id(int u, int v, int w) const;

  // Edge ids in filtration order.
  const std::vector<int>& edge_ids() const { return edge_ids_; }
  const std::vector<int>& triangle_ids() const { return triangle_ids_; }

  // Faces of a simplex as ids (2 for an edge, 3 for a triangle).
  std::vector<int> boundary(int id) const;

  // Throws if a face is missing, appears later, or has a larger value.
  void check_invariants() const;

private:
  std::int64_t triangle_key(int a, int b, int c) const;

  int n_ = 0;
  int max_dim_ = 1;
  std::vector<Simplex> simplices_;
  std::vector<int> vertex_ids_;
  std::vector<int> edge_lookup_;      // n*n
  std::vector<int> triangle_lookup_;  // indexed by combinatorial rank
  std::vector<int> edge_ids_;
  std::vector<int> triangle_ids_;
};

DistanceMatrix pairwise_distances(const PointCloud& pc);

FilteredComplex build_vr_complex(const DistanceMatrix& d, int max_dim = 2,
                                 double max_radius = kInf);

// Symmetric normalized Laplacian embedding of a connectivity matrix. The
// trivial eigenvector D^{1/2} 1 is dropped; rows of the returned cloud are
// the entries of the next embed_dim eigenvectors.
PointCloud laplacian_eigenmap(const Eigen::MatrixXd& w, int embed_dim = 3);

}  // namespace phgm
