#include "phgm/events.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "phgm/error.hpp"
#include "phgm/gf2.hpp"
#include "phgm/log.hpp"

namespace phgm {

std::vector<Bar> SubjectFeatures::diagram(int dim) const {
  std::vector<Bar> out;
  if (dim == 0) {
    for (double d : h0.deaths) out.push_back(Bar{0, 0.0, d});
    out.push_back(Bar{0, 0.0, kInf});
  } else if (dim == 1) {
    for (const auto& loop : loops) out.push_back(Bar{1, loop.birth, loop.death});
  }
  return out;
}

H0Features extract_h0(const MstResult& mst, double death_scale) {
  if (!(death_scale > 0.0)) fail(Errc::invalid_argument, "death_scale must be positive");
  H0Features h0;
  h0.n = mst.n();
  std::vector<double> prefix{0.0};
  for (const auto& e : mst.edges) {
    const double d = death_scale * e.length;
    h0.deaths.push_back(d);
    h0.winners.push_back(e.edge);
    prefix.push_back(prefix.back() + d);
  }
  // Edge (j, k) stays admissible for steps 1..merge_step(j, k).
  h0.w = Eigen::MatrixXd::Zero(h0.n, h0.n);
  for (int j = 0; j < h0.n; ++j)
    for (int k = 0; k < h0.n; ++k)
      if (j != k) h0.w(j, k) = prefix[mst.merge_step(j, k)];
  return h0;
}

H0Features extract_h0(const DistanceMatrix& d, double death_scale) {
  return extract_h0(kruskal_mst(d), death_scale);
}

std::vector<int> mst_path_vertices(const MstResult& mst, int u, int v) {
  const int n = mst.n();
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : mst.edges) {
    adj[e.edge.a].push_back(e.edge.b);
    adj[e.edge.b].push_back(e.edge.a);
  }
  std::vector<int> parent(n, -1);
  std::vector<int> stack{u};
  parent[u] = u;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    if (x == v) break;
    for (int y : adj[x])
      if (parent[y] < 0) {
        parent[y] = x;
        stack.push_back(y);
      }
  }
  if (parent[v] < 0) fail(Errc::inconsistent_bar, "loop endpoints are not joined by the tree");
  std::vector<int> path{v};
  for (int x = v; x != u; x = parent[x]) path.push_back(parent[x]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

// Component labels of the graph made of edges with id < limit.
UnionFind components_before(const FilteredComplex& k, int limit) {
  UnionFind uf(k.n_vertices());
  for (int e : k.edge_ids()) {
    if (e >= limit) break;
    uf.unite(k[e].vertices[0], k[e].vertices[1]);
  }
  return uf;
}


}  // namespace

std::vector<LoopRecord> extract_h1(const FilteredComplex& k, std::span<const Bar> bars,
                                   const MstResult& mst, double death_scale) {
  if (!(death_scale > 0.0)) fail(Errc::invalid_argument, "death_scale must be positive");
  const int n = k.n_vertices();
  if (mst.n() != n) fail(Errc::shape_mismatch, "tree and complex disagree on vertex count");
  std::vector<char> in_tree(static_cast<std::size_t>(n) * n, 0);
  for (const auto& e : mst.edges) {
    in_tree[static_cast<std::size_t>(e.edge.a) * n + e.edge.b] = 1;
    in_tree[static_cast<std::size_t>(e.edge.b) * n + e.edge.a] = 1;
  }

  struct Candidate {
    std::size_t bar_index;
    int birth_edge;
    int death_triangle;
    int death_edge;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const Bar& bar = bars[i];
    if (bar.dim != 1) continue;
    if (bar.infinite()) {
      log_warning("skipping H1 bar born at " + std::to_string(bar.birth) +
                  " that never dies within the complex");
      continue;
    }
    if (!(bar.death > bar.birth)) continue;
    if (bar.birth_simplex < 0 || k[bar.birth_simplex].dim != 1)
      fail(Errc::inconsistent_bar, "H1 bar birth simplex is not an edge");
    if (bar.death_simplex < 0 || k[bar.death_simplex].dim != 2)
      fail(Errc::inconsistent_bar, "H1 bar death simplex is not a triangle");
    const auto faces = k.boundary(bar.death_simplex);
    candidates.push_back({i, bar.birth_simplex, bar.death_simplex,
                          *std::max_element(faces.begin(), faces.end())});
  }
  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
    const Bar& bx = bars[x.bar_index];
    const Bar& by = bars[y.bar_index];
    if (bx.death != by.death) return bx.death < by.death;
    if (bx.birth != by.birth) return bx.birth < by.birth;
    return x.bar_index < y.bar_index;
  });

  std::vector<char> consumed(k.size(), 0);
  std::vector<LoopRecord> out;
  for (const auto& c : candidates) {
    const Simplex& be = k[c.birth_edge];
    LoopRecord rec;
    rec.birth = death_scale * be.value;
    rec.death = death_scale * k[c.death_triangle].value;
    rec.birth_edge = {be.vertices[0], be.vertices[1]};
    rec.death_edge = {k[c.death_edge].vertices[0], k[c.death_edge].vertices[1]};
    rec.loop_vertices = mst_path_vertices(mst, be.vertices[0], be.vertices[1]);
    std::sort(rec.loop_vertices.begin(), rec.loop_vertices.end());

    UnionFind at_birth = components_before(k, c.birth_edge + 1);
    UnionFind at_death = components_before(k, c.death_triangle);
    const int root_birth = at_birth.find(be.vertices[0]);
    const int root_death = at_death.find(be.vertices[0]);

    std::vector<int> tilde;
    for (int g : k.edge_ids()) {
      if (g >= c.death_triangle) break;
      const int u = k[g].vertices[0];
      const int v = k[g].vertices[1];
      if (at_death.find(u) != root_death) continue;
      if (g <= c.birth_edge && at_birth.find(u) == root_birth) continue;
      if (g == c.death_edge || in_tree[static_cast<std::size_t>(u) * n + v]) continue;
      tilde.push_back(g);
    }
    for (int g : tilde) {
      if (consumed[g]) continue;
      TimedEdge te{{k[g].vertices[0], k[g].vertices[1]}, death_scale * k[g].value};
      (g < c.birth_edge ? rec.b1 : rec.b2).push_back(te);
    }
    for (int g : tilde) consumed[g] = 1;
    out.push_back(std::move(rec));
  }
  return out;
}

SubjectFeatures extract_features(const DistanceMatrix& d, const ExtractOptions& options) {
  if (d.size() < 2) fail(Errc::invalid_argument, "need at least two vertices");
  SubjectFeatures f;
  f.n = d.size();
  f.death_scale = options.death_scale;
  f.source = options.source;
  const MstResult mst = kruskal_mst(d);
  f.h0 = extract_h0(mst, options.death_scale);
  const FilteredComplex k = build_vr_complex(d, 2, options.max_radius);
  const std::vector<Bar> bars = reduce_boundary(k, options.death_scale);
  f.loops = extract_h1(k, bars, mst, options.death_scale);
  check_features(f, true);
  return f;
}

void check_features(const SubjectFeatures& f, bool require_sorted_deaths) {
  const int n = f.n;
  const auto& h0 = f.h0;
  if (h0.n != n || h0.w.rows() != n || h0.w.cols() != n)
    fail(Errc::shape_mismatch, "H0 statistics do not match the vertex count");
  if (static_cast<int>(h0.deaths.size()) != n - 1 || static_cast<int>(h0.winners.size()) != n - 1)
    fail(Errc::shape_mismatch, "expected n-1 H0 deaths and winners");
  UnionFind uf(n);
  for (const auto& e : h0.winners) {
    if (e.a < 0 || e.b >= n || e.a >= e.b) fail(Errc::invalid_argument, "bad winner edge");
    if (uf.find(e.a) == uf.find(e.b)) fail(Errc::invalid_argument, "H0 winners contain a cycle");
    uf.unite(e.a, e.b);
  }
  for (std::size_t i = 0; i < h0.deaths.size(); ++i) {
    if (!(h0.deaths[i] >= 0.0) || !std::isfinite(h0.deaths[i]))
      fail(Errc::degenerate_bar, "H0 death times must be finite and nonnegative");
    if (require_sorted_deaths && i > 0 && h0.deaths[i] < h0.deaths[i - 1])
      fail(Errc::invalid_argument, "H0 death times must be nondecreasing");
  }
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (h0.w(j, k) != h0.w(k, j)) fail(Errc::not_symmetric, "W is not symmetric");

  std::vector<Edge> seen;
  for (const auto& loop : f.loops) {
    if (!(loop.birth > 0.0) || !(loop.death > loop.birth))
      fail(Errc::degenerate_bar, "loop needs 0 < birth < death");
    for (const auto& g : loop.b1) {
      if (g.time > loop.birth) fail(Errc::invalid_argument, "B1 edge formed after the loop");
      seen.push_back(g.edge);
    }
    for (const auto& g : loop.b2) {
      if (g.time < loop.birth || g.time > loop.death)
        fail(Errc::invalid_argument, "B2 edge formed outside the loop lifetime");
      seen.push_back(g.edge);
    }
    for (const auto* set : {&loop.b1, &loop.b2})
      for (const auto& g : *set)
        if (g.edge == loop.death_edge) fail(Errc::invalid_argument, "death edge listed in B-set");
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    fail(Errc::invalid_argument, "B-sets of different loops overlap");
}

std::vector<Edge> loop_edges_gf2(const FilteredComplex& k, int birth_edge) {
  if (birth_edge < 0 || k[birth_edge].dim != 1)
    fail(Errc::invalid_argument, "birth simplex is not an edge");
  std::vector<int> cols;
  for (int e : k.edge_ids()) {
    if (e > birth_edge) break;
    cols.push_back(e);
  }
  gf2::Matrix boundary(k.n_vertices(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    boundary.set(k[cols[c]].vertices[0], c);
    boundary.set(k[cols[c]].vertices[1], c);
  }
  auto x = gf2::solve_forced(boundary, gf2::BitVector(k.n_vertices()), cols.size() - 1);
  if (!x) fail(Errc::no_solution, "edge does not close a cycle");
  std::vector<Edge> out;
  for (auto c : x->ones()) out.push_back({k[cols[c]].vertices[0], k[cols[c]].vertices[1]});
  return out;
}

std::vector<int> fill_triangles_gf2(const FilteredComplex& k, std::span<const Edge> loop,
                                    int death_triangle) {
  if (death_triangle < 0 || k[death_triangle].dim != 2)
    fail(Errc::invalid_argument, "death simplex is not a triangle");
  std::vector<int> row_of(k.size(), -1);
  std::vector<int> rows;
  for (int e : k.edge_ids()) {
    if (e > death_triangle) break;
    row_of[e] = static_cast<int>(rows.size());
    rows.push_back(e);
  }
  std::vector<int> cols;
  for (int t : k.triangle_ids()) {
    if (t > death_triangle) break;
    cols.push_back(t);
  }
  gf2::Matrix boundary(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (int face : k.boundary(cols[c])) boundary.set(row_of[face], c);
  gf2::BitVector rhs(rows.size());
  for (const auto& e : loop) {
    const int id = k.edge_id(e.a, e.b);
    if (id < 0 || row_of[id] < 0) fail(Errc::no_solution, "loop edge absent at the death time");
    rhs.flip(row_of[id]);
  }
  auto y = gf2::solve_forced(boundary, rhs, cols.size() - 1);
  if (!y) fail(Errc::no_solution, "loop cannot be filled with the available triangles");
  std::vector<int> out;
  for (auto c : y->ones()) out.push_back(cols[c]);
  return out;
}

}  // namespace phgm
