#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phgm/filtration.hpp"
#include "phgm/persistence.hpp"

namespace phgm {

struct TimedEdge {
  Edge edge;
  double time = 0.0;
  bool operator==(const TimedEdge&) const = default;
};

// Sufficient statistics of the H0 competing-exponentials likelihood.
// w(j, k) is the sum of d_i over every Kruskal step i at which (j, k) joined
// two different components.
struct H0Features {
  int n = 0;
  std::vector<double> deaths;  // d_1..d_{n-1}, death_scale applied
  std::vector<Edge> winners;   // e_1..e_{n-1}
  Eigen::MatrixXd w;
};

struct LoopRecord {
  double birth = 0.0;
  double death = 0.0;
  Edge birth_edge;
  Edge death_edge;
  std::vector<int> loop_vertices;  // sorted
  std::vector<TimedEdge> b1;       // formed before the loop
  std::vector<TimedEdge> b2;       // formed during its lifetime
};

struct SubjectFeatures {
  int n = 0;
  double death_scale = 0.5;
  std::string source;
  H0Features h0;
  std::vector<LoopRecord> loops;

  // Diagrams recoverable from the features: finite H0 deaths plus one
  // infinite bar, and the modelled H1 loops.
  std::vector<Bar> diagram(int dim) const;
};

H0Features extract_h0(const MstResult& mst, double death_scale);
H0Features extract_h0(const DistanceMatrix& d, double death_scale);

// Loop records for every finite, positive-length H1 bar. B-sets are
// deduplicated across loops in order of (death, birth, bar index).
std::vector<LoopRecord> extract_h1(const FilteredComplex& k, std::span<const Bar> bars,
                                   const MstResult& mst, double death_scale);

struct ExtractOptions {
  double death_scale = 0.5;
  double max_radius = kInf;
  std::string source;
};

SubjectFeatures extract_features(const DistanceMatrix& d, const ExtractOptions& options);

// Throws if any of the structural invariants of the features is violated.
// Extracted deaths must be nondecreasing; simulated ones need not be.
void check_features(const SubjectFeatures& f, bool require_sorted_deaths);

// GF(2) oracles over the boundary matrices at a given filtration time.
// Edges of a cycle through birth_edge using only edges up to it.
std::vector<Edge> loop_edges_gf2(const FilteredComplex& k, int birth_edge);
// Triangles (ids) up to death_triangle, including it, whose boundary is the loop.
std::vector<int> fill_triangles_gf2(const FilteredComplex& k, std::span<const Edge> loop,
                                    int death_triangle);

// Vertices on the tree path from u to v, endpoints included.
std::vector<int> mst_path_vertices(const MstResult& mst, int u, int v);

}  // namespace phgm
