#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "phgm/inference.hpp"

namespace phgm {

// Elementwise mean of Z^p Z^p' over the draws.
Eigen::MatrixXd posterior_mean_lambda(const PosteriorSamples& samples, int group);

// Top-r eigenvectors scaled by sqrt(max(eigenvalue, 0)); each column's
// largest-magnitude entry is made positive.
Eigen::MatrixXd truncated_embed(const Eigen::MatrixXd& lambda_hat, int r = 2);

// Orthonormal R minimizing ||a R - ref||_F.
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref);

// Rotates every embedding onto embeds[ref]; the reference is returned as is.
std::vector<Eigen::MatrixXd> align_groups(std::span<const Eigen::MatrixXd> embeds, int ref);

// Z^g mapped onto zbar by the optimal rotation and scale.
Eigen::MatrixXd align_to_consensus(const Eigen::MatrixXd& zg, const Eigen::MatrixXd& zbar);

// result[i][d] = ||z_i^(p) - z_i^(q)|| in draw d, after aligning both groups
// to that draw's consensus matrix.
std::vector<std::vector<double>> latent_distance_posterior(const PosteriorSamples& samples, int p,
                                                           int q);

// Median over vertices of the posterior-mean distance.
double default_fdr_threshold(const std::vector<std::vector<double>>& distances);

// Fraction of draws with distance above tau, per vertex.
std::vector<double> signal_probabilities(const std::vector<std::vector<double>>& distances,
                                         double tau);

// Largest prefix of the probabilities sorted in descending order whose mean
// complement is at most level. Returns ascending vertex indices.
std::vector<int> bayesian_fdr_select(std::span<const double> v, double level = 0.1);

struct Classification {
  std::vector<int> predicted;
  Eigen::MatrixXi confusion;  // rows truth, columns predicted
  double accuracy = 0.0;
};

// Assigns each subject to the group whose rate matrix gives the largest
// likelihood; ties go to the lowest group index.
Classification ml_classify(std::span<const SubjectFeatures> features, std::span<const int> truth,
                           std::span<const Eigen::MatrixXd> lambda_hats);

// Leave-one-out k-nearest-neighbour vote; ties go to the smallest label.
Classification knn_classify(const Eigen::MatrixXd& dist, std::span<const int> labels, int k = 5);

// Pairwise bottleneck distances between subjects' diagrams. dims holds the
// homology dimensions whose distances are summed.
Eigen::MatrixXd bottleneck_matrix(std::span<const SubjectFeatures> features,
                                  std::span<const int> dims);

}  // namespace phgm
