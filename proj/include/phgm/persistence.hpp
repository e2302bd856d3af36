#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phgm/filtration.hpp"

namespace phgm {

struct Bar {
  int dim = 0;
  double birth = 0.0;
  double death = kInf;
  int birth_simplex = -1;
  int death_simplex = -1;  // -1 when the bar never dies

  bool infinite() const { return death == kInf; }
  double persistence() const { return death - birth; }
};

struct MstEdge {
  Edge edge;
  double length = 0.0;
};

struct MstResult {
  std::vector<MstEdge> edges;     // Kruskal order, i = 1..n-1
  Eigen::MatrixXi merge_step;     // 1-based step at which j, k first share a component; 0 on the diagonal
  std::vector<double> prefix_length;  // prefix_length[i] = sum of the first i edge lengths

  int n() const { return static_cast<int>(merge_step.rows()); }
  double total_weight() const { return prefix_length.back(); }
};

// Kruskal with union-find; ties broken by lexicographic edge order.
MstResult kruskal_mst(const DistanceMatrix& d);

// H0 and H1 bars of a filtered complex. H0 comes from column reduction of
// the vertex-edge boundary matrix; H1 from reduction of the edge-triangle
// coboundary matrix in reverse filtration order, with H0 death edges cleared.
// Both yield the same pairs as a plain homology reduction. Bar values are
// filtration values multiplied by death_scale. Zero-length H1 pairs are
// dropped; every vertex keeps its H0 bar.
std::vector<Bar> reduce_boundary(const FilteredComplex& k, double death_scale = 0.5);

std::vector<Bar> h0_from_mst(const MstResult& mst, double death_scale = 0.5);

std::vector<Bar> bars_of_dim(std::span<const Bar> bars, int dim);

// Bottleneck distance between two diagrams of one dimension under the
// l-infinity ground metric, with diagonal matching at half the persistence.
// Infinite bars must come in equal numbers and are matched by sorted birth.
double bottleneck_distance(std::span<const Bar> a, std::span<const Bar> b);

}  // namespace phgm
