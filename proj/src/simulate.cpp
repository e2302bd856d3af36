#include "phgm/simulate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phgm/error.hpp"
#include "phgm/rng.hpp"

namespace phgm {

namespace {

enum Stream : std::uint64_t { kOracle = 10, kNoise = 11, kCircle = 12, kModel = 13 };

void add_noise(Eigen::MatrixXd& pts, double sd, Rng rng) {
  if (sd == 0.0) return;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index c = 0; c < pts.cols(); ++c) pts(i, c) += sd * rng.normal();
}

}  // namespace

void GroupSimSpec::validate() const {
  if (n < 10) fail(Errc::invalid_argument, "n must be at least 10");
  if (subjects_per_group < 1) fail(Errc::invalid_argument, "need at least one subject per group");
  if (!(delta > 0.0)) fail(Errc::invalid_argument, "delta must be positive");
  if (!(cluster_sd > 0.0) || !(noise_sd >= 0.0))
    fail(Errc::invalid_argument, "standard deviations must be positive");
}

GroupSimulation simulate_gaussian_groups(const GroupSimSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int half = n / 2;
  const int keep = 3 * n / 10;
  Rng rng(spec.seed, {kOracle});
  auto draw = [&](double centre) {
    return Eigen::Vector2d(centre + spec.cluster_sd * rng.normal(),
                           centre + spec.cluster_sd * rng.normal());
  };
  Eigen::MatrixXd g1(n, 2), g2(n, 2), g3(n, 2);
  for (int i = 0; i < n; ++i) g1.row(i) = draw(0.0);
  g2 = g1;
  for (int i = half; i < n; ++i) g2.row(i) = draw(spec.delta);
  g3 = g2;
  for (int i = 0; i < keep; ++i) g3.row(i) = g1.row(i);
  for (int i = keep; i < half; ++i) g3.row(i) = draw(spec.delta);

  GroupSimulation out;
  out.oracles = {g1, g2, g3};
  for (int g = 0; g < 3; ++g) {
    std::vector<PointCloud> clouds;
    for (int s = 0; s < spec.subjects_per_group; ++s) {
      PointCloud pc{out.oracles[g]};
      add_noise(pc.points, spec.noise_sd,
                Rng(spec.seed, {kNoise, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(s)}));
      clouds.push_back(std::move(pc));
    }
    out.groups.push_back(std::move(clouds));
  }
  for (int i = keep; i < half; ++i) out.switched.push_back(i);
  return out;
}

void CircleSpec::validate() const {
  if (n < 6) fail(Errc::invalid_argument, "n must be at least 6");
  if (!(r1 > 0.0) || !(r2 > 0.0)) fail(Errc::invalid_argument, "radii must be positive");
  if (!(noise_sd >= 0.0)) fail(Errc::invalid_argument, "noise_sd must be nonnegative");
  if (subjects < 1) fail(Errc::invalid_argument, "need at least one subject");
}

std::vector<PointCloud> simulate_circles(const CircleSpec& spec) {
  spec.validate();
  const int n1 = spec.n / 2;
  std::vector<PointCloud> out;
  for (int s = 0; s < spec.subjects; ++s) {
    Rng angles(spec.seed, {kCircle, static_cast<std::uint64_t>(s), 0});
    Eigen::MatrixXd pts(spec.n, 2);
    for (int i = 0; i < spec.n; ++i) {
      const bool inner = i < n1;
      const int count = inner ? n1 : spec.n - n1;
      const int idx = inner ? i : i - n1;
      const double r = inner ? spec.r1 : spec.r2;
      const double theta = spec.random_angles ? 2.0 * std::numbers::pi * angles.uniform()
                                              : 2.0 * std::numbers::pi * idx / count;
      pts(i, 0) = r * std::cos(theta);
      pts(i, 1) = r * std::sin(theta);
    }
    add_noise(pts, spec.noise_sd, Rng(spec.seed, {kCircle, static_cast<std::uint64_t>(s), 1}));
    out.push_back(PointCloud{std::move(pts)});
  }
  return out;
}

std::vector<SubjectFeatures> simulate_from_model(const Eigen::MatrixXd& lambda0, int subjects,
                                                 std::uint64_t seed) {
  const auto n = static_cast<int>(lambda0.rows());
  if (lambda0.cols() != n) fail(Errc::shape_mismatch, "rate matrix must be square");
  if (n < 2) fail(Errc::invalid_argument, "need at least two vertices");
  if (subjects < 1) fail(Errc::invalid_argument, "need at least one subject");
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      if (!(lambda0(j, k) > 0.0) || !std::isfinite(lambda0(j, k)))
        fail(Errc::non_positive_rate, "off-diagonal rates must be positive and finite");
      if (lambda0(j, k) != lambda0(k, j)) fail(Errc::not_symmetric, "rate matrix is not symmetric");
    }

  std::vector<SubjectFeatures> out;
  for (int s = 0; s < subjects; ++s) {
    Rng rng(seed, {kModel, static_cast<std::uint64_t>(s)});
    std::vector<int> comp(n);
    std::vector<std::vector<int>> members(n);
    for (int v = 0; v < n; ++v) {
      comp[v] = v;
      members[v] = {v};
    }
    Eigen::MatrixXi merge_step = Eigen::MatrixXi::Zero(n, n);
    SubjectFeatures f;
    f.n = n;
    f.death_scale = 1.0;
    f.source = "model:" + std::to_string(s);
    f.h0.n = n;
    for (int step = 1; step < n; ++step) {
      double total = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k)
          if (comp[j] != comp[k]) total += lambda0(j, k);
      const double d = rng.exponential(total);
      const double u = rng.uniform() * total;
      // Falls back to the last admissible edge if roundoff leaves u >= acc.
      Edge winner{-1, -1};
      double acc = 0.0;
      bool found = false;
      for (int j = 0; j < n && !found; ++j)
        for (int k = j + 1; k < n; ++k) {
          if (comp[j] == comp[k]) continue;
          acc += lambda0(j, k);
          winner = {j, k};
          if (u < acc) {
            found = true;
            break;
          }
        }
      f.h0.deaths.push_back(d);
      f.h0.winners.push_back(winner);
      int keep = comp[winner.a], gone = comp[winner.b];
      if (members[keep].size() < members[gone].size()) std::swap(keep, gone);
      for (int a : members[keep])
        for (int b : members[gone]) merge_step(a, b) = merge_step(b, a) = step;
      for (int b : members[gone]) comp[b] = keep;
      members[keep].insert(members[keep].end(), members[gone].begin(), members[gone].end());
      members[gone].clear();
    }
    std::vector<double> prefix{0.0};
    for (double d : f.h0.deaths) prefix.push_back(prefix.back() + d);
    f.h0.w = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (j != k) f.h0.w(j, k) = prefix[merge_step(j, k)];
    check_features(f, false);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace phgm
