// Acceptance suite: one PASS/FAIL line per criterion. `--only N` runs a
// single criterion; the exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "helpers.hpp"
#include "phgm/analysis.hpp"
#include "phgm/error.hpp"
#include "phgm/gf2.hpp"
#include "phgm/inference.hpp"
#include "phgm/model.hpp"
#include "phgm/persistence.hpp"
#include "phgm/simulate.hpp"

using namespace phgm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome h0_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(46));
    const auto d = pairwise_distances(test::random_cloud(rng, n));
    const auto reduced = test::sorted_finite_deaths(reduce_boundary(build_vr_complex(d, 1), 0.5), 0);
    const auto kruskal = test::sorted_finite_deaths(h0_from_mst(kruskal_mst(d), 0.5), 0);
    mismatches += reduced != kruskal;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(mismatches) + " mismatching clouds of 100, " + fmt(secs, 3) + " s"};
}

Outcome w_equivalence() {
  Rng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(11));
    const auto d = pairwise_distances(test::random_cloud(rng, n));
    const Eigen::MatrixXd lam = test::planted_lambda(rng, n);
    const double fast = h0_loglik(lam, extract_h0(d, 0.5));
    const double naive = static_cast<double>(test::naive_h0_loglik(lam, test::naive_kruskal(d, 0.5)));
    worst = std::max(worst, std::abs(fast - naive) / std::max(1.0, std::abs(naive)));
  }
  return {worst <= 1e-12, "max relative difference " + fmt(worst, 3)};
}

Outcome unit_square() {
  const auto pc = test::unit_square();
  const auto d = pairwise_distances(pc);
  const auto k = build_vr_complex(d, 2);
  const auto bars = reduce_boundary(k, 1.0);
  const auto h1 = bars_of_dim(bars, 1);
  bool ok = h1.size() == 1 && std::abs(h1[0].birth - 1.0) <= 1e-9 &&
            std::abs(h1[0].death - std::sqrt(2.0)) <= 1e-9;
  if (!ok) return {false, std::to_string(h1.size()) + " H1 bars"};

  const auto loops = extract_h1(k, bars, kruskal_mst(d), 1.0);
  ok = loops.size() == 1 && loops[0].b1.empty() && loops[0].b2.size() == 1 &&
       loops[0].b2[0].edge == Edge{1, 3} && loops[0].death_edge == Edge{0, 2} &&
       loops[0].loop_vertices == std::vector<int>{0, 1, 2, 3};
  if (!ok) return {false, "loop record B-sets differ from the expected record"};

  // Loop edges: vertex-edge incidence at the birth edge, right-hand side 0.
  const int birth = k.edge_id(loops[0].birth_edge.a, loops[0].birth_edge.b);
  const auto cycle = loop_edges_gf2(k, birth);
  std::vector<int> edge_cols;
  for (int id : k.edge_ids())
    if (id <= birth) edge_cols.push_back(id);
  gf2::Matrix d1(4, edge_cols.size());
  gf2::BitVector x(edge_cols.size());
  for (std::size_t c = 0; c < edge_cols.size(); ++c) {
    const auto& v = k[edge_cols[c]].vertices;
    d1.set(v[0], c);
    d1.set(v[1], c);
    if (std::find(cycle.begin(), cycle.end(), Edge{v[0], v[1]}) != cycle.end()) x.set(c);
  }
  const bool loop_ok = gf2::verify(d1, x, gf2::BitVector(4)) && x.count() == 4;

  // Filling: edge-triangle incidence up to the death triangle, right-hand side the loop.
  const auto& all_edges = k.edge_ids();
  const int death = h1[0].death_simplex;
  const auto fill = fill_triangles_gf2(k, cycle, death);
  std::vector<int> tri_cols;
  for (int id : k.triangle_ids())
    if (id <= death) tri_cols.push_back(id);
  gf2::Matrix d2(all_edges.size(), tri_cols.size());
  gf2::BitVector y(tri_cols.size()), rhs(all_edges.size());
  for (std::size_t c = 0; c < tri_cols.size(); ++c) {
    for (int face : k.boundary(tri_cols[c]))
      d2.set(std::find(all_edges.begin(), all_edges.end(), face) - all_edges.begin(), c);
    if (std::find(fill.begin(), fill.end(), tri_cols[c]) != fill.end()) y.set(c);
  }
  for (const auto& e : cycle)
    rhs.set(std::find(all_edges.begin(), all_edges.end(), k.edge_id(e.a, e.b)) - all_edges.begin());
  const bool fill_ok = gf2::verify(d2, y, rhs);
  return {loop_ok && fill_ok, std::string("bar (1, sqrt 2); B1 empty, B2 {(1,3)}; loop ") +
                                  (loop_ok ? "verifies" : "fails") + ", filling " +
                                  (fill_ok ? "verifies" : "fails")};
}

std::vector<SubjectFeatures> circle_subjects(Rng& rng, int n, int count) {
  std::vector<SubjectFeatures> out;
  while (static_cast<int>(out.size()) < count) {
    auto f = extract_features(pairwise_distances(test::noisy_circle(rng, n, 0.1)), {});
    if (!f.loops.empty()) out.push_back(std::move(f));
  }
  return out;
}

Outcome gradient() {
  Rng rng(1004);
  double worst = 0.0;
  int loops = 0;
  for (int hier = 0; hier < 2; ++hier) {
    GroupedData data;
    const int groups = hier ? 2 : 1;
    for (int p = 0; p < groups; ++p) {
      data.groups.push_back(circle_subjects(rng, 12, 2));
      data.labels.push_back("g" + std::to_string(p + 1));
      for (const auto& f : data.groups.back()) loops += static_cast<int>(f.loops.size());
    }
    ModelConfig cfg;
    cfg.hierarchical = hier;
    const Posterior post(data, cfg);
    for (int trial = 0; trial < 10; ++trial) {
      LatentState s;
      for (int p = 0; p < groups; ++p) s.z.push_back(test::positive_latent(rng, 12, 5));
      if (hier) s.zbar = test::positive_latent(rng, 12, 5);
      s.log_kappa = std::log(2.0 + 6.0 * rng.uniform());
      auto x = post.pack(s);
      std::vector<double> g(x.size()), scratch(x.size());
      post.log_density(x, g);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5, keep = x[i];
        x[i] = keep + h;
        const double up = post.log_density(x, scratch);
        x[i] = keep - h;
        const double down = post.log_density(x, scratch);
        x[i] = keep;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, std::abs(g[i] - fd) / std::max({1.0, std::abs(g[i]), std::abs(fd)}));
      }
    }
  }
  return {worst < 1e-5, "20 states, " + std::to_string(loops) + " loop records, max relative error " +
                            fmt(worst, 3)};
}

Outcome log_concavity() {
  Rng rng(1005);
  const int n = 10, m = 5;
  const auto subjects = circle_subjects(rng, n, 3);
  const auto ell = [&](const Eigen::MatrixXd& lam) {
    double v = prior_logdensity_lambda(lam, m, 6.0, 0.1);
    for (const auto& f : subjects) v += subject_loglik(lam, f);
    return v;
  };
  int violations = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd l1 = test::planted_lambda(rng, n, m), l2 = test::planted_lambda(rng, n, m);
    const double t = rng.uniform_open();
    const double gap = ell(t * l1 + (1 - t) * l2) - (t * ell(l1) + (1 - t) * ell(l2));
    worst = std::min(worst, gap);
    violations += gap < -1e-9;
  }
  return {violations == 0, std::to_string(violations) + " violations in 200 probes, smallest gap " + fmt(worst, 3)};
}

Outcome sampler() {
  const auto t0 = std::chrono::steady_clock::now();
  const LogDensity density = [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v -= 0.5 * x[i] * x[i];
      g[i] = -x[i];
    }
    return v;
  };
  SamplerConfig scfg;
  scfg.n_warmup = 1000;
  scfg.n_samples = 2000;
  scfg.seed = 1006;
  const auto out = nuts_chain(density, std::vector<double>(10, 0.5), scfg);
  double worst_mean = 0.0, lo_var = INFINITY, hi_var = 0.0;
  for (int c = 0; c < 10; ++c) {
    double mean = 0.0, sq = 0.0;
    for (const auto& d : out.draws) mean += d[c];
    mean /= out.draws.size();
    for (const auto& d : out.draws) sq += (d[c] - mean) * (d[c] - mean);
    const double var = sq / (out.draws.size() - 1);
    worst_mean = std::max(worst_mean, std::abs(mean));
    lo_var = std::min(lo_var, var);
    hi_var = std::max(hi_var, var);
  }
  const int div = static_cast<int>(std::count(out.divergent.begin(), out.divergent.end(), true));
  const double secs = seconds_since(t0);
  return {worst_mean < 0.1 && lo_var >= 0.85 && hi_var <= 1.15 && div == 0 && secs < 30.0,
          "max |mean| " + fmt(worst_mean, 3) + ", variance in [" + fmt(lo_var, 4) + ", " + fmt(hi_var, 4) +
              "], " + std::to_string(div) + " divergent draws (" +
              std::to_string(out.warmup_divergences) + " during warmup), " + fmt(secs, 3) + " s"};
}

Outcome contraction() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1007);
  const Eigen::MatrixXd lambda0 = test::planted_lambda(rng, 10);
  std::vector<double> errors;
  for (int s : {10, 50, 200}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      GroupedData data;
      data.labels = {"g1"};
      data.groups = {simulate_from_model(lambda0, s, 100 * s + seed)};
      const auto est = warm_start(data, ModelConfig{}, seed);
      total += test::offdiag_rel_error(est.z[0] * est.z[0].transpose(), lambda0);
    }
    errors.push_back(total / 5);
  }
  const double secs = seconds_since(t0);
  const bool ok = errors[0] > errors[1] && errors[1] > errors[2] && errors[2] < 0.15 && secs < 300;
  return {ok, "mean error S=10: " + fmt(errors[0]) + ", S=50: " + fmt(errors[1]) + ", S=200: " + fmt(errors[2]) +
                  ", " + fmt(secs, 3) + " s"};
}

Outcome paper_scale() {
  const auto t0 = std::chrono::steady_clock::now();
  GroupSimSpec spec;
  spec.delta = 1.0;
  spec.seed = 1008;
  const auto sim = simulate_gaussian_groups(spec);
  GroupedData data;
  for (std::size_t g = 0; g < sim.groups.size(); ++g) {
    data.labels.push_back("g" + std::to_string(g + 1));
    std::vector<SubjectFeatures> feats;
    for (const auto& pc : sim.groups[g]) feats.push_back(extract_features(pairwise_distances(pc), {}));
    data.groups.push_back(std::move(feats));
  }
  ModelConfig cfg;
  const auto init = warm_start(data, cfg, 1);
  SamplerConfig scfg;
  scfg.seed = 1;
  const auto samples = nuts_sample(data, cfg, scfg, init);
  const auto diag = diagnostics(samples, 40);
  const double acf40 = diag.median_abs_acf(40);

  std::vector<Eigen::MatrixXd> embeds;
  for (int p = 0; p < 3; ++p) embeds.push_back(truncated_embed(posterior_mean_lambda(samples, p), 2));
  const auto aligned = align_groups(embeds, 0);
  const auto centroid = [](const Eigen::MatrixXd& e, int from, int to) {
    return Eigen::RowVectorXd(e.middleRows(from, to - from).colwise().mean());
  };
  int moved = 0;
  for (int v : sim.switched) {
    const auto& e2 = aligned[1];
    const auto& e3 = aligned[2];
    const bool near_a_in_2 = (e2.row(v) - centroid(e2, 0, 45)).norm() < (e2.row(v) - centroid(e2, 75, 150)).norm();
    const bool near_b_in_3 = (e3.row(v) - centroid(e3, 75, 150)).norm() < (e3.row(v) - centroid(e3, 0, 45)).norm();
    moved += near_a_in_2 && near_b_in_3;
  }
  const double frac = moved / static_cast<double>(sim.switched.size());
  const double secs = seconds_since(t0);
  const bool ok = acf40 < 0.1 && frac >= 0.8 && secs < 1800;
  return {ok, "(a) median |ACF(40)| " + fmt(acf40, 3) + (acf40 < 0.1 ? " ok" : " > 0.1") + "; (b) " +
                  std::to_string(moved) + "/30 switched vertices change side" + (frac >= 0.8 ? " ok" : " < 80%") +
                  "; " + fmt(secs, 4) + " s"};
}

std::vector<Bar> random_diagram(Rng& rng) {
  std::vector<Bar> out(rng.below(7));
  for (auto& b : out) {
    b.dim = 1;
    b.birth = rng.uniform() * 5;
    b.death = b.birth + 0.05 + rng.uniform() * 3;
  }
  return out;
}

// Exhaustive minimum over partial matchings; unmatched points pay half their persistence.
double brute_bottleneck(const std::vector<Bar>& a, const std::vector<Bar>& b) {
  double best = INFINITY;
  std::vector<int> match(a.size(), -1);
  std::vector<bool> used(b.size(), false);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == a.size()) {
      double cost = 0.0;
      for (std::size_t p = 0; p < a.size(); ++p)
        cost = std::max(cost, match[p] < 0 ? a[p].persistence() / 2
                                           : std::max(std::abs(a[p].birth - b[match[p]].birth),
                                                      std::abs(a[p].death - b[match[p]].death)));
      for (std::size_t q = 0; q < b.size(); ++q)
        if (!used[q]) cost = std::max(cost, b[q].persistence() / 2);
      best = std::min(best, cost);
      return;
    }
    match[i] = -1;
    rec(i + 1);
    for (std::size_t q = 0; q < b.size(); ++q) {
      if (used[q]) continue;
      used[q] = true;
      match[i] = static_cast<int>(q);
      rec(i + 1);
      used[q] = false;
    }
    match[i] = -1;
  };
  rec(0);
  return best;
}

Outcome bottleneck() {
  Rng rng(1009);
  int bad_oracle = 0, bad_sym = 0, bad_id = 0, bad_tri = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_diagram(rng), b = random_diagram(rng), c = random_diagram(rng);
    const double ab = bottleneck_distance(a, b), bc = bottleneck_distance(b, c), ac = bottleneck_distance(a, c);
    for (const auto& [x, y, v] : {std::tuple{&a, &b, ab}, std::tuple{&b, &c, bc}, std::tuple{&a, &c, ac}})
      bad_oracle += std::abs(v - brute_bottleneck(*x, *y)) > 1e-12;
    bad_sym += ab != bottleneck_distance(b, a);
    auto copy = a;
    std::reverse(copy.begin(), copy.end());
    bad_id += bottleneck_distance(a, copy) != 0.0;
    bad_id += (!a.empty() || !b.empty()) && ab == 0.0;
    bad_tri += ac > ab + bc + 1e-12;
  }
  const bool ok = bad_oracle + bad_sym + bad_id + bad_tri == 0;
  return {ok, "oracle mismatches " + std::to_string(bad_oracle) + ", asymmetric " + std::to_string(bad_sym) +
                  ", identity failures " + std::to_string(bad_id) + ", triangle failures " +
                  std::to_string(bad_tri)};
}

Outcome fdr() {
  long long vectors = 0, mismatches = 0;
  for (int len = 1; len <= 6; ++len) {
    std::vector<int> g(len, 0);
    std::vector<double> v(len);
    while (true) {
      for (int i = 0; i < len; ++i) v[i] = g[i] * 0.05;
      ++vectors;
      mismatches += bayesian_fdr_select(v, 0.1) != test::fdr_oracle(g);
      int pos = 0;
      while (pos < len && ++g[pos] > 20) g[pos++] = 0;
      if (pos == len) break;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(vectors) + " vectors"};
}

Outcome classifier() {
  Rng rng(1011);
  const Eigen::MatrixXd l1 = test::planted_lambda(rng, 10);
  const Eigen::MatrixXd l2 = 4.0 * l1;
  GroupedData data;
  data.labels = {"g1", "g2"};
  data.groups = {simulate_from_model(l1, 20, 1), simulate_from_model(l2, 20, 2)};
  std::vector<Eigen::MatrixXd> hats;
  for (int p = 0; p < 2; ++p) {
    GroupedData one;
    one.labels = {data.labels[p]};
    one.groups = {data.groups[p]};
    const auto s = warm_start(one, ModelConfig{}, p);
    hats.push_back(s.z[0] * s.z[0].transpose());
  }
  std::vector<SubjectFeatures> all;
  std::vector<int> truth;
  for (int p = 0; p < 2; ++p)
    for (const auto& f : data.groups[p]) {
      all.push_back(f);
      truth.push_back(p);
    }
  const auto c = ml_classify(all, truth, hats);
  return {c.accuracy >= 0.9, "in-sample accuracy " + fmt(c.accuracy, 3) + " over 40 subjects"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PHGM_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> data_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() == ".svg" || e.path().filename() == "run.json") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "phgm_acceptance_e2e";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  for (int r = 0; r < 2; ++r) {
    const fs::path dir = root / ("run" + std::to_string(r));
    const auto q = [&](const char* sub) { return "\"" + (dir / sub).string() + "\""; };
    const int codes[] = {
        run_cli("simulate gaussian-groups --delta 1 --n 40 --subjects 3 --seed 12 -o " + q("sim")),
        run_cli("extract --input " + q("sim/manifest.json") + " -o " + q("feat")),
        run_cli("fit-hier --input " + q("feat/manifest.json") + " --n-warmup 100 --n-samples 60 --seed 12 -o " +
                q("fit")),
        run_cli("analyze --fit " + q("fit") + " --bottleneck-knn --knn-k 3 -o " + q("an"))};
    for (int c : codes)
      if (c != 0) return {false, "a pipeline stage exited with status " + std::to_string(c)};
    runs.push_back(data_files(dir));
  }
  std::vector<std::string> differing;
  for (const auto& [name, bytes] : runs[0])
    if (!runs[1].count(name) || runs[1].at(name) != bytes) differing.push_back(name);
  if (runs[0].size() != runs[1].size()) differing.push_back("(file sets differ)");
  return {differing.empty() && !runs[0].empty(),
          std::to_string(runs[0].size()) + " data files compared, " + std::to_string(differing.size()) + " differ" +
              (differing.empty() ? "" : " (first: " + differing.front() + ")")};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "H0 Kruskal/reduction equivalence", h0_equivalence},
    {2, "W sufficient statistic equals explicit admissible sets", w_equivalence},
    {3, "unit-square H1 bar, loop record and GF(2) checks", unit_square},
    {4, "analytic gradient vs central differences", gradient},
    {5, "log-concavity in lambda", log_concavity},
    {6, "NUTS on a 10-dimensional standard normal", sampler},
    {7, "MAP contraction with growing subject counts", contraction},
    {8, "Gaussian-group reproduction at n=150", paper_scale},
    {9, "bottleneck distance properties", bottleneck},
    {10, "Bayesian FDR rule on the probability grid", fdr},
    {11, "maximum-likelihood classifier floor", classifier},
    {12, "end-to-end determinism through the CLI", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: phgm_acceptance [--only N]\n";
      return 2;
    }
  }
  if (only < 0 || only > 12) {
    std::cerr << "criterion must lie in 1..12\n";
    return 2;
  }
  int failures = 0;
  for (const auto& c : kCriteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(seconds_since(t0), 3) << " s)" << std::endl;
  }
  return failures ? 1 : 0;
}
