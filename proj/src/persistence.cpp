#include "phgm/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "phgm/error.hpp"

namespace phgm {

namespace {

// Sorted-index column XOR: out = x symmetric-difference y.
void xor_into(std::vector<int>& x, const std::vector<int>& y, std::vector<int>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(x.begin(), x.end(), y.begin(), y.end(),
                                std::back_inserter(scratch));
  x.swap(scratch);
}

}  // namespace

MstResult kruskal_mst(const DistanceMatrix& d) {
  const int n = d.size();
  if (n < 2) fail(Errc::invalid_argument, "minimum spanning tree needs at least two vertices");
  std::vector<MstEdge> all;
  all.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) all.push_back({{a, b}, d(a, b)});
  std::sort(all.begin(), all.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.length != y.length) return x.length < y.length;
    return x.edge < y.edge;
  });

  MstResult out;
  out.merge_step = Eigen::MatrixXi::Zero(n, n);
  out.prefix_length.assign(1, 0.0);
  std::vector<int> component(n);
  std::iota(component.begin(), component.end(), 0);
  std::vector<std::vector<int>> members(n);
  for (int v = 0; v < n; ++v) members[v] = {v};

  for (const auto& e : all) {
    int ca = component[e.edge.a];
    int cb = component[e.edge.b];
    if (ca == cb) continue;
    const int step = static_cast<int>(out.edges.size()) + 1;
    for (int u : members[ca])
      for (int v : members[cb]) {
        out.merge_step(u, v) = step;
        out.merge_step(v, u) = step;
      }
    if (members[ca].size() < members[cb].size()) std::swap(ca, cb);
    for (int v : members[cb]) component[v] = ca;
    members[ca].insert(members[ca].end(), members[cb].begin(), members[cb].end());
    members[cb].clear();
    out.edges.push_back(e);
    out.prefix_length.push_back(out.prefix_length.back() + e.length);
    if (static_cast<int>(out.edges.size()) == n - 1) break;
  }
  return out;
}

std::vector<Bar> reduce_boundary(const FilteredComplex& k, double death_scale) {
  if (!(death_scale > 0.0)) fail(Errc::invalid_argument, "death_scale must be positive");
  std::vector<Bar> bars;
  const int n = k.n_vertices();
  std::vector<int> scratch;

  // H0: vertex rows, edge columns, low = largest vertex id.
  std::unordered_map<int, std::vector<int>> reduced_by_low;
  std::vector<bool> vertex_paired(n, false);
  std::vector<int> positive_edges;
  for (int e : k.edge_ids()) {
    std::vector<int> col = k.boundary(e);
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      auto it = reduced_by_low.find(col.back());
      if (it == reduced_by_low.end()) break;
      xor_into(col, it->second, scratch);
    }
    if (col.empty()) {
      positive_edges.push_back(e);
      continue;
    }
    const int low = col.back();
    const int vertex = k[low].vertices[0];
    vertex_paired[vertex] = true;
    bars.push_back(Bar{0, 0.0, death_scale * k[e].value, low, e});
    reduced_by_low.emplace(low, std::move(col));
  }
  for (int v = 0; v < n; ++v)
    if (!vertex_paired[v]) bars.push_back(Bar{0, 0.0, kInf, k.vertex_id(v), -1});

  // H1: coboundary columns of the surviving edges, latest edge first. Rows
  // run in reverse filtration order, so the pivot is the earliest triangle.
  std::unordered_map<int, std::vector<int>> cocycle_by_pivot;
  std::vector<Bar> h1;
  for (auto it = positive_edges.rbegin(); it != positive_edges.rend(); ++it) {
    const int e = *it;
    const auto& ev = k[e].vertices;
    std::vector<int> col;
    if (k.max_dim() >= 2) {
      for (int c = 0; c < n; ++c) {
        if (c == ev[0] || c == ev[1]) continue;
        const int t = k.triangle_id(ev[0], ev[1], c);
        if (t >= 0) col.push_back(t);
      }
      std::sort(col.begin(), col.end());
    }
    while (!col.empty()) {
      auto found = cocycle_by_pivot.find(col.front());
      if (found == cocycle_by_pivot.end()) break;
      xor_into(col, found->second, scratch);
    }
    const double birth = k[e].value;
    if (col.empty()) {
      h1.push_back(Bar{1, death_scale * birth, kInf, e, -1});
      continue;
    }
    const int t = col.front();
    if (k[t].value > birth)
      h1.push_back(Bar{1, death_scale * birth, death_scale * k[t].value, e, t});
    cocycle_by_pivot.emplace(t, std::move(col));
  }
  // Report H1 in birth order.
  std::sort(h1.begin(), h1.end(),
            [](const Bar& x, const Bar& y) { return x.birth_simplex < y.birth_simplex; });
  bars.insert(bars.end(), h1.begin(), h1.end());
  return bars;
}

std::vector<Bar> h0_from_mst(const MstResult& mst, double death_scale) {
  if (!(death_scale > 0.0)) fail(Errc::invalid_argument, "death_scale must be positive");
  std::vector<Bar> bars;
  bars.reserve(mst.edges.size() + 1);
  for (const auto& e : mst.edges) bars.push_back(Bar{0, 0.0, death_scale * e.length, -1, -1});
  bars.push_back(Bar{0, 0.0, kInf, -1, -1});
  return bars;
}

std::vector<Bar> bars_of_dim(std::span<const Bar> bars, int dim) {
  std::vector<Bar> out;
  for (const auto& b : bars)
    if (b.dim == dim) out.push_back(b);
  return out;
}

namespace {

// Hopcroft-Karp maximum matching on a bipartite graph with equal sides.
class BipartiteMatcher {
public:
  explicit BipartiteMatcher(int n) : n_(n), adj_(n), match_l_(n), match_r_(n), dist_(n) {}

  void add_edge(int l, int r) { adj_[l].push_back(r); }

  int max_matching() {
    std::fill(match_l_.begin(), match_l_.end(), -1);
    std::fill(match_r_.begin(), match_r_.end(), -1);
    int matched = 0;
    while (bfs())
      for (int l = 0; l < n_; ++l)
        if (match_l_[l] < 0 && dfs(l)) ++matched;
    return matched;
  }

private:
  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (int l = 0; l < n_; ++l) {
      if (match_l_[l] < 0) {
        dist_[l] = 0;
        q.push(l);
      } else {
        dist_[l] = -1;
      }
    }
    while (!q.empty()) {
      const int l = q.front();
      q.pop();
      for (int r : adj_[l]) {
        const int next = match_r_[r];
        if (next < 0) {
          found = true;
        } else if (dist_[next] < 0) {
          dist_[next] = dist_[l] + 1;
          q.push(next);
        }
      }
    }
    return found;
  }

  bool dfs(int l) {
    for (int r : adj_[l]) {
      const int next = match_r_[r];
      if (next < 0 || (dist_[next] == dist_[l] + 1 && dfs(next))) {
        match_l_[l] = r;
        match_r_[r] = l;
        return true;
      }
    }
    dist_[l] = -1;
    return false;
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> match_l_, match_r_, dist_;
};

double linf(const Bar& x, const Bar& y) {
  return std::max(std::abs(x.birth - y.birth), std::abs(x.death - y.death));
}

bool matchable_within(const std::vector<Bar>& a, const std::vector<Bar>& b, double eps) {
  const int m = static_cast<int>(a.size());
  const int k = static_cast<int>(b.size());
  // Left: a[0..m), diagonal images of b. Right: b[0..k), diagonal images of a.
  BipartiteMatcher matcher(m + k);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j)
      if (linf(a[i], b[j]) <= eps) matcher.add_edge(i, j);
    if (a[i].persistence() / 2.0 <= eps) matcher.add_edge(i, k + i);
  }
  for (int j = 0; j < k; ++j) {
    if (b[j].persistence() / 2.0 <= eps) matcher.add_edge(m + j, j);
    for (int i = 0; i < m; ++i) matcher.add_edge(m + j, k + i);
  }
  return matcher.max_matching() == m + k;
}

}  // namespace

double bottleneck_distance(std::span<const Bar> a, std::span<const Bar> b) {
  std::vector<Bar> fa, fb;
  std::vector<double> ia, ib;
  for (const auto& x : a) (x.infinite() ? ia.push_back(x.birth) : fa.push_back(x));
  for (const auto& x : b) (x.infinite() ? ib.push_back(x.birth) : fb.push_back(x));
  if (ia.size() != ib.size())
    fail(Errc::mismatched_infinite_bars, "diagrams have different numbers of infinite bars");

  double infinite_cost = 0.0;
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  for (std::size_t i = 0; i < ia.size(); ++i)
    infinite_cost = std::max(infinite_cost, std::abs(ia[i] - ib[i]));

  std::vector<double> candidates{0.0};
  for (const auto& x : fa) {
    candidates.push_back(x.persistence() / 2.0);
    for (const auto& y : fb) candidates.push_back(linf(x, y));
  }
  for (const auto& y : fb) candidates.push_back(y.persistence() / 2.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // The largest candidate (or the max diagonal cost) is always feasible.
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (matchable_within(fa, fb, candidates[mid])) hi = mid; else lo = mid + 1;
  }
  return std::max(candidates[lo], infinite_cost);
}

}  // namespace phgm
