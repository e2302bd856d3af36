#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "phgm/error.hpp"
#include "phgm/inference.hpp"
#include "phgm/simulate.hpp"

using namespace phgm;

namespace {

LogDensity standard_normal() {
  return [](std::span<const double> x, std::span<double> g) {
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v -= 0.5 * x[i] * x[i];
      g[i] = -x[i];
    }
    return v;
  };
}

GroupedData model_data(const Eigen::MatrixXd& lambda0, int subjects, std::uint64_t seed) {
  GroupedData data;
  data.labels = {"g1"};
  data.groups = {simulate_from_model(lambda0, subjects, seed)};
  return data;
}

GroupedData small_group_data(std::uint64_t seed, int n, int subjects) {
  GroupSimSpec spec;
  spec.n = n;
  spec.subjects_per_group = subjects;
  spec.seed = seed;
  const auto sim = simulate_gaussian_groups(spec);
  GroupedData data;
  for (std::size_t g = 0; g < sim.groups.size(); ++g) {
    data.labels.push_back("g" + std::to_string(g + 1));
    std::vector<SubjectFeatures> feats;
    for (const auto& pc : sim.groups[g]) feats.push_back(extract_features(pairwise_distances(pc), {}));
    data.groups.push_back(std::move(feats));
  }
  return data;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("sampler config validation") {
    SamplerConfig bad;
    bad.target_accept = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = {};
    bad.max_tree_depth = 13;
    CHECK_THROWS_AS(bad.validate(), Error);
    SamplerConfig{}.validate();
  }

  TEST_CASE("NUTS on a 10-dimensional standard normal") {
    SamplerConfig scfg;
    scfg.n_warmup = 1000;
    scfg.n_samples = 2000;
    scfg.seed = 3;
    const auto out = nuts_chain(standard_normal(), std::vector<double>(10, 0.5), scfg);
    REQUIRE(out.draws.size() == 2000);
    for (int c = 0; c < 10; ++c) {
      double mean = 0.0, sq = 0.0;
      for (const auto& d : out.draws) mean += d[c];
      mean /= out.draws.size();
      for (const auto& d : out.draws) sq += (d[c] - mean) * (d[c] - mean);
      const double var = sq / (out.draws.size() - 1);
      CHECK(std::abs(mean) < 0.1);
      CHECK(var >= 0.85);
      CHECK(var <= 1.15);
    }
    for (bool dv : out.divergent) CHECK_FALSE(dv);
    double energy = 0.0;
    for (double e : out.energy_error) energy += e;
    CHECK(std::abs(energy / out.energy_error.size()) < 0.1);
  }

  TEST_CASE("NUTS recovers a correlated Gaussian covariance") {
    Eigen::Matrix2d cov;
    cov << 1.0, 0.8, 0.8, 1.0;
    const Eigen::Matrix2d prec = cov.inverse();
    const LogDensity density = [&](std::span<const double> x, std::span<double> g) {
      const Eigen::Vector2d v(x[0], x[1]);
      const Eigen::Vector2d pg = -prec * v;
      g[0] = pg[0];
      g[1] = pg[1];
      return 0.5 * v.dot(pg);
    };
    SamplerConfig scfg;
    scfg.n_warmup = 1000;
    scfg.n_samples = 5000;
    scfg.seed = 4;
    const auto out = nuts_chain(density, {0.0, 0.0}, scfg);
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& d : out.draws) mean += Eigen::Vector2d(d[0], d[1]);
    mean /= out.draws.size();
    Eigen::Matrix2d emp = Eigen::Matrix2d::Zero();
    for (const auto& d : out.draws) {
      const Eigen::Vector2d c = Eigen::Vector2d(d[0], d[1]) - mean;
      emp += c * c.transpose();
    }
    emp /= out.draws.size() - 1;
    CHECK((emp - cov).norm() / cov.norm() < 0.1);
    double energy = 0.0;
    for (double e : out.energy_error) energy += e;
    CHECK(std::abs(energy / out.energy_error.size()) < 0.1);
  }

  TEST_CASE("NUTS rejects points outside the support and is reproducible") {
    // Half-normal on x > 0: every retained draw must stay in the support.
    const LogDensity half = [](std::span<const double> x, std::span<double> g) -> double {
      if (x[0] <= 0.0) {
        g[0] = 0.0;
        return -INFINITY;
      }
      g[0] = -x[0];
      return -0.5 * x[0] * x[0];
    };
    SamplerConfig scfg;
    scfg.n_warmup = 300;
    scfg.n_samples = 500;
    scfg.seed = 9;
    const auto a = nuts_chain(half, {1.0}, scfg);
    const auto b = nuts_chain(half, {1.0}, scfg);
    for (const auto& d : a.draws) CHECK(d[0] > 0.0);
    CHECK(a.draws == b.draws);
    CHECK(a.step_size == b.step_size);
  }

  TEST_CASE("series diagnostics examples") {
    std::vector<double> alt(1000);
    for (int i = 0; i < 1000; ++i) alt[i] = i % 2 ? -1.0 : 1.0;
    CHECK(series_diagnostics(alt, 40).acf[1] == doctest::Approx(-0.999).epsilon(1e-9));

    Rng rng(61);
    std::vector<double> noise(1000);
    for (double& v : noise) v = rng.normal();
    const auto nd = series_diagnostics(noise, 40);
    CHECK(nd.acf[0] == doctest::Approx(1.0));
    for (int k = 1; k <= 40; ++k) CHECK(std::abs(nd.acf[k]) < 0.1);
    CHECK(nd.ess > 500.0);

    const std::vector<double> flat(100, 2.0);
    CHECK(series_diagnostics(flat, 10).zero_variance);
  }

  TEST_CASE("warm start ascends monotonically and is deterministic") {
    Rng rng(62, {1});
    const auto lambda0 = test::planted_lambda(rng, 8);
    const auto data = model_data(lambda0, 30, 5);
    ModelConfig cfg;
    std::vector<double> trace;
    const auto a = warm_start(data, cfg, 17, &trace);
    const auto b = warm_start(data, cfg, 17);
    REQUIRE(trace.size() > 1);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
    CHECK(feasible(a));
    CHECK(a.log_kappa == doctest::Approx(std::log(6.0)));
    CHECK(a.z[0] == b.z[0]);
    const auto c = warm_start(data, cfg, 18);
    CHECK(c.z[0] != a.z[0]);
  }

  TEST_CASE("warm start recovers the rate matrix of simulated data") {
    Rng rng(63, {1});
    const auto lambda0 = test::planted_lambda(rng, 10);
    const auto data = model_data(lambda0, 200, 6);
    const auto s = warm_start(data, ModelConfig{}, 1);
    CHECK(test::offdiag_rel_error(s.z[0] * s.z[0].transpose(), lambda0) < 0.15);
  }

  TEST_CASE("warm-started chain stays near the mode, feasible and reproducible") {
    const auto data = small_group_data(8, 30, 3);
    ModelConfig cfg;
    const auto init = warm_start(data, cfg, 2);
    const double map = Posterior(data, cfg).log_density(init, nullptr);
    SamplerConfig scfg;
    scfg.n_warmup = 150;
    scfg.n_samples = 60;
    scfg.seed = 5;
    const auto a = nuts_sample(data, cfg, scfg, init);
    const auto b = nuts_sample(data, cfg, scfg, init);
    REQUIRE(a.draws.size() == 60);
    CHECK(std::abs(a.log_post.front() - map) <= 0.01 * std::abs(map));
    for (const auto& d : a.draws) CHECK(feasible(d));
    CHECK(a.log_post == b.log_post);
    CHECK(a.draws.back().z[2] == b.draws.back().z[2]);

    const auto diag = diagnostics(a, 10);
    CHECK(diag.elements.size() == 3u * 30 * 31 / 2);
    CHECK(diag.log_post_trace.size() == 60);
    CHECK(diag.mean_accept > 0.0);
  }

  TEST_CASE("hierarchical chain carries the consensus matrix") {
    const auto data = small_group_data(9, 20, 2);
    ModelConfig cfg;
    cfg.hierarchical = true;
    const auto init = warm_start(data, cfg, 3);
    CHECK(init.hierarchical());
    SamplerConfig scfg;
    scfg.n_warmup = 60;
    scfg.n_samples = 20;
    const auto s = nuts_sample(data, cfg, scfg, init);
    CHECK(s.hierarchical);
    for (const auto& d : s.draws) {
      CHECK(d.zbar.rows() == 20);
      CHECK(feasible(d));
    }
  }

  TEST_CASE("infeasible starts are rejected") {
    const auto data = small_group_data(10, 12, 1);
    LatentState s;
    for (int p = 0; p < 3; ++p) s.z.push_back(-Eigen::MatrixXd::Ones(12, 5) + Eigen::MatrixXd::Identity(12, 5) * 3);
    s.log_kappa = std::log(6.0);
    try {
      nuts_sample(data, ModelConfig{}, SamplerConfig{}, s);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::infeasible_start);
    }
  }
}
