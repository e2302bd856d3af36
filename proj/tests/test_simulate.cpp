#include <doctest.h>

#include <cmath>
#include <map>

#include "helpers.hpp"
#include "phgm/error.hpp"
#include "phgm/model.hpp"
#include "phgm/persistence.hpp"
#include "phgm/simulate.hpp"

using namespace phgm;

TEST_SUITE("simulate") {
  TEST_CASE("gaussian groups: shapes, overlap and switched set") {
    GroupSimSpec spec;
    spec.seed = 7;
    const auto sim = simulate_gaussian_groups(spec);
    REQUIRE(sim.groups.size() == 3);
    for (const auto& g : sim.groups) {
      REQUIRE(g.size() == 10);
      for (const auto& pc : g) {
        CHECK(pc.size() == 150);
        CHECK(pc.dim() == 2);
      }
    }
    const auto& o = sim.oracles;
    CHECK(o[0].topRows(75) == o[1].topRows(75));
    for (int i = 75; i < 150; ++i) CHECK(o[0].row(i) != o[1].row(i));
    CHECK(o[2].topRows(45) == o[0].topRows(45));
    CHECK(o[2].bottomRows(75) == o[1].bottomRows(75));
    for (int i = 45; i < 75; ++i) CHECK(o[2].row(i) != o[0].row(i));
    REQUIRE(sim.switched.size() == 30);
    CHECK(sim.switched.front() == 45);
    CHECK(sim.switched.back() == 74);

    const auto again = simulate_gaussian_groups(spec);
    CHECK(again.groups[2][9].points == sim.groups[2][9].points);
    spec.seed = 8;
    CHECK(simulate_gaussian_groups(spec).groups[0][0].points != sim.groups[0][0].points);
  }

  TEST_CASE("gaussian groups: cluster separation follows delta") {
    for (double delta : {0.5, 1.0, 2.0}) {
      GroupSimSpec spec;
      spec.delta = delta;
      spec.seed = 3;
      const auto o = simulate_gaussian_groups(spec).oracles[1];
      const Eigen::RowVector2d near = o.topRows(75).colwise().mean();
      const Eigen::RowVector2d far = o.bottomRows(75).colwise().mean();
      for (int c = 0; c < 2; ++c) CHECK(std::abs(far[c] - near[c] - delta) < 3 * spec.cluster_sd);
    }
    GroupSimSpec bad;
    bad.delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("circles") {
    CircleSpec spec;
    spec.noise_sd = 0.0;
    spec.subjects = 2;
    const auto clouds = simulate_circles(spec);
    REQUIRE(clouds.size() == 2);
    int inner = 0;
    for (int i = 0; i < clouds[0].size(); ++i) {
      const double r = clouds[0].points.row(i).norm();
      CHECK((std::abs(r - 1.0) < 1e-12 || std::abs(r - 2.0) < 1e-12));
      inner += r < 1.5;
    }
    CHECK(inner == 75);
    const auto bars = reduce_boundary(build_vr_complex(pairwise_distances(clouds[0]), 2), 1.0);
    int persistent = 0;
    for (const auto& b : bars_of_dim(bars, 1)) persistent += b.persistence() > 0.3;
    CHECK(persistent >= 2);

    spec.noise_sd = 0.05;
    spec.random_angles = true;
    spec.seed = 4;
    CHECK(simulate_circles(spec)[1].points == simulate_circles(spec)[1].points);
  }

  TEST_CASE("from model: two vertices give exponential deaths") {
    Eigen::MatrixXd lam(2, 2);
    lam << 1.0, 2.0, 2.0, 1.0;
    const auto feats = simulate_from_model(lam, 10000, 11);
    double mean = 0.0;
    for (const auto& f : feats) mean += f.h0.deaths[0];
    mean /= feats.size();
    CHECK(std::abs(mean - 0.5) < 0.02);
  }

  TEST_CASE("from model: first winner is drawn in proportion to its rate") {
    Eigen::MatrixXd lam(3, 3);
    lam << 1, 1, 2, 1, 1, 3, 2, 3, 1;
    const auto feats = simulate_from_model(lam, 10000, 12);
    std::map<Edge, int> counts;
    for (const auto& f : feats) {
      ++counts[f.h0.winners[0]];
      check_features(f, false);
    }
    CHECK(std::abs(counts[Edge{0, 1}] / 1e4 - 1.0 / 6) < 0.02);
    CHECK(std::abs(counts[Edge{0, 2}] / 1e4 - 2.0 / 6) < 0.02);
    CHECK(std::abs(counts[Edge{1, 2}] / 1e4 - 3.0 / 6) < 0.02);
  }

  TEST_CASE("from model: reproducible, and the truth maximizes the mean likelihood") {
    Rng rng(13, {1});
    const Eigen::MatrixXd lam0 = test::planted_lambda(rng, 8);
    const auto feats = simulate_from_model(lam0, 500, 14);
    const auto again = simulate_from_model(lam0, 500, 14);
    CHECK(feats[499].h0.deaths == again[499].h0.deaths);
    CHECK(feats[499].h0.winners == again[499].h0.winners);
    const auto mean_ll = [&](const Eigen::MatrixXd& lam) {
      double v = 0.0;
      for (const auto& f : feats) v += h0_loglik(lam, f.h0);
      return v / feats.size();
    };
    const double at_truth = mean_ll(lam0);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::MatrixXd pert = lam0;
      for (int j = 0; j < 8; ++j)
        for (int k = j + 1; k < 8; ++k) {
          const double f = rng.uniform() < 0.5 ? 0.5 : 1.5;
          pert(j, k) *= f;
          pert(k, j) *= f;
        }
      CHECK(at_truth > mean_ll(pert));
    }
    CHECK(at_truth > mean_ll(lam0 * 0.5));
    CHECK(at_truth > mean_ll(lam0 * 1.5));
  }
}
