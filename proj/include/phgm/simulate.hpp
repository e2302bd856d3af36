#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "phgm/events.hpp"
#include "phgm/filtration.hpp"

namespace phgm {

struct GroupSimSpec {
  int n = 150;
  int subjects_per_group = 10;
  double delta = 1.0;
  double cluster_sd = 0.25;
  double noise_sd = 0.07;
  std::uint64_t seed = 0;

  void validate() const;
};

// Three related oracle configurations in the plane. Group 2 keeps the first
// half of group 1 and moves the rest near (delta, delta); group 3 keeps the
// first 30% of group 1, moves the next 20% near (delta, delta) and takes the
// remaining half from group 2.
struct GroupSimulation {
  std::vector<Eigen::MatrixXd> oracles;         // one n x 2 matrix per group
  std::vector<std::vector<PointCloud>> groups;  // [group][subject]
  std::vector<int> switched;                    // vertices that change cluster between groups 2 and 3
};

GroupSimulation simulate_gaussian_groups(const GroupSimSpec& spec);

struct CircleSpec {
  int n = 150;
  double r1 = 1.0;
  double r2 = 2.0;
  double noise_sd = 0.05;
  int subjects = 10;
  bool random_angles = false;
  std::uint64_t seed = 0;

  void validate() const;
};

// Points split evenly between two concentric circles plus Gaussian noise.
std::vector<PointCloud> simulate_circles(const CircleSpec& spec);

// H0 features drawn step by step from the competing-exponentials law: at each
// step the death time is Exp(sum of admissible rates) and the winner is drawn
// proportionally to its rate.
std::vector<SubjectFeatures> simulate_from_model(const Eigen::MatrixXd& lambda0, int subjects,
                                                 std::uint64_t seed);

}  // namespace phgm
