#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "phgm/events.hpp"
#include "phgm/filtration.hpp"
#include "phgm/model.hpp"
#include "phgm/rng.hpp"

namespace phgm::test {

inline PointCloud random_cloud(Rng& rng, int n, int dim = 2) {
  PointCloud pc;
  pc.points.resize(n, dim);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < dim; ++c) pc.points(i, c) = rng.normal();
  return pc;
}

inline PointCloud cloud_of(std::initializer_list<std::initializer_list<double>> rows) {
  PointCloud pc;
  const int cols = static_cast<int>(rows.begin()->size());
  pc.points.resize(static_cast<Eigen::Index>(rows.size()), cols);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) pc.points(r, c++) = v;
    ++r;
  }
  return pc;
}

inline PointCloud line3() { return cloud_of({{0.0}, {1.0}, {3.0}}); }
inline PointCloud unit_square() { return cloud_of({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// Points scattered around a circle so the cloud carries at least one loop.
inline PointCloud noisy_circle(Rng& rng, int n, double noise = 0.08) {
  PointCloud pc;
  pc.points.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    pc.points(i, 0) = std::cos(t) + noise * rng.normal();
    pc.points(i, 1) = std::sin(t) + noise * rng.normal();
  }
  return pc;
}

// Explicit Kruskal run: the admissible set at every step is listed edge by
// edge from the current component labels.
struct NaiveStep {
  Edge winner;
  double death = 0.0;
  std::vector<Edge> admissible;
};

inline std::vector<NaiveStep> naive_kruskal(const DistanceMatrix& d, double death_scale) {
  const int n = d.size();
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<NaiveStep> steps;
  for (int i = 0; i + 1 < n; ++i) {
    NaiveStep s;
    bool found = false;
    double best = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        if (label[a] == label[b]) continue;
        s.admissible.push_back({a, b});
        if (!found || d(a, b) < best) {
          found = true;
          best = d(a, b);
          s.winner = {a, b};
        }
      }
    s.death = death_scale * best;
    const int from = label[s.winner.b], to = label[s.winner.a];
    for (int& l : label)
      if (l == from) l = to;
    steps.push_back(std::move(s));
  }
  return steps;
}

// Competing-exponentials likelihood with every admissible set enumerated.
inline long double naive_h0_loglik(const Eigen::MatrixXd& lambda, const std::vector<NaiveStep>& steps) {
  long double total = 0.0L;
  for (const auto& s : steps) {
    total += std::log(static_cast<long double>(lambda(s.winner.a, s.winner.b)));
    long double rate = 0.0L;
    for (const auto& e : s.admissible) rate += lambda(e.a, e.b);
    total -= static_cast<long double>(s.death) * rate;
  }
  return total;
}

// Positive-entry latent matrix; its Gram matrix lies inside the cone.
inline Eigen::MatrixXd positive_latent(Rng& rng, int n, int m, double floor = 0.05) {
  Eigen::MatrixXd z(n, m);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < m; ++c) z(i, c) = floor + std::abs(rng.normal()) / std::sqrt(double(m));
  return z;
}

inline Eigen::MatrixXd random_rotation(Rng& rng, int m) {
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
}

// Rate matrix Z Z' of a positive latent matrix.
inline Eigen::MatrixXd planted_lambda(Rng& rng, int n, int m = 5) {
  const Eigen::MatrixXd z = positive_latent(rng, n, m, 0.2);
  return z * z.transpose();
}

inline double offdiag_rel_error(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  double num = 0.0, den = 0.0;
  for (int j = 0; j < truth.rows(); ++j)
    for (int k = 0; k < truth.cols(); ++k) {
      if (j == k) continue;
      num += (est(j, k) - truth(j, k)) * (est(j, k) - truth(j, k));
      den += truth(j, k) * truth(j, k);
    }
  return std::sqrt(num / den);
}

inline std::vector<double> sorted_finite_deaths(const std::vector<Bar>& bars, int dim) {
  std::vector<double> out;
  for (const auto& b : bars)
    if (b.dim == dim && !b.infinite()) out.push_back(b.death);
  std::sort(out.begin(), out.end());
  return out;
}

// Selection at level 0.1 for probabilities given in twentieths, in integer
// arithmetic. Vertex i is in iff fewer than k vertices outrank it, where k is
// the largest count whose top-k complement sum is at most 0.1 k.
inline std::vector<int> fdr_oracle(const std::vector<int>& twentieths) {
  const int n = static_cast<int>(twentieths.size());
  std::vector<int> sorted = twentieths;
  std::sort(sorted.rbegin(), sorted.rend());
  int best = 0, complement = 0;
  for (int k = 1; k <= n; ++k) {
    complement += 20 - sorted[k - 1];
    if (complement <= 2 * k) best = k;
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    int rank = 0;
    for (int j = 0; j < n; ++j)
      rank += twentieths[j] > twentieths[i] || (twentieths[j] == twentieths[i] && j < i);
    if (rank < best) out.push_back(i);
  }
  return out;
}

}  // namespace phgm::test
