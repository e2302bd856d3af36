#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phgm/events.hpp"

namespace phgm {

struct ModelConfig {
  int m = 5;               // latent dimension
  double alpha = 0.1;      // log-barrier exponent
  double kappa_shape = 2.0;
  double kappa_scale = 3.0;  // Gamma(shape, scale): prior mean 6
  double kappa0 = 6.0;       // fixed precision of the consensus prior
  bool hierarchical = false;

  void validate() const;
};

// Latent coordinates, one n x m matrix per group, plus the consensus matrix
// in the hierarchical model. Rates are lambda_jk = z_j . z_k.
struct LatentState {
  std::vector<Eigen::MatrixXd> z;
  Eigen::MatrixXd zbar;  // empty unless hierarchical
  double log_kappa = 0.0;

  bool hierarchical() const { return zbar.size() > 0; }
};

struct GroupedData {
  std::vector<std::vector<SubjectFeatures>> groups;
  std::vector<std::string> labels;

  int n() const;             // throws shape_mismatch on disagreement
  std::size_t subjects() const;
};

// Smallest z_j . z_k over j <= k; positive iff Z lies in an acute cone.
double min_inner_product(const Eigen::MatrixXd& z);
bool feasible(const LatentState& s);

// log(1 - exp(-x)) for x > 0, accurate at both ends.
double log1mexp(double x);

double h0_loglik(const Eigen::MatrixXd& lambda, const H0Features& h0);
double h1_loglik(const Eigen::MatrixXd& lambda, std::span<const LoopRecord> loops);
double subject_loglik(const Eigen::MatrixXd& lambda, const SubjectFeatures& f);

// Unnormalized conic prior; -inf outside the cone.
double prior_logdensity(const Eigen::MatrixXd& z, double kappa, double alpha);
// The same prior written in terms of lambda (for m columns).
double prior_logdensity_lambda(const Eigen::MatrixXd& lambda, int m, double kappa, double alpha);

// Rotation- and scale-invariant squared distance ||Zp||^2 - ||Zp' Zbar||_*^2 / ||Zbar||^2.
double procrustes_dist2(const Eigen::MatrixXd& zp, const Eigen::MatrixXd& zbar);
double nuclear_norm(const Eigen::MatrixXd& a);

// Hierarchical prior of one group given the consensus; -inf outside the cone.
double hier_prior_logdensity(const Eigen::MatrixXd& zp, const Eigen::MatrixXd& zbar,
                             double kappa, double alpha);

// Log-likelihood of one group's subjects pooled into a few matrices: per-edge
// counts of log-rate terms, per-edge linear coefficients, and the remaining
// log(1 - exp(-lambda tau)) terms.
class PooledLikelihood {
public:
  PooledLikelihood() = default;
  PooledLikelihood(int n, std::span<const SubjectFeatures> subjects);

  int n() const { return n_; }
  // Value, and if grad is non-null, d/d lambda_jk for j < k (symmetric fill).
  double evaluate(const Eigen::MatrixXd& lambda, Eigen::MatrixXd* grad) const;
  // Event counts per pair (upper triangle); a tail term counts as one.
  const Eigen::MatrixXd& event_weight() const { return weight_; }

private:
  struct TailTerm {
    int j, k;
    double tau;
  };
  int n_ = 0;
  Eigen::MatrixXd log_count_;  // upper triangle
  Eigen::MatrixXd linear_;     // upper triangle
  Eigen::MatrixXd weight_;     // upper triangle
  std::vector<TailTerm> tails_;
};

// Log-posterior over a flat parameter vector:
// [Z^1 | ... | Z^P | Zbar (hierarchical) | log kappa], matrices row-major.
class Posterior {
public:
  Posterior(const GroupedData& data, ModelConfig cfg);

  int n() const { return n_; }
  int m() const { return cfg_.m; }
  int groups() const { return static_cast<int>(pooled_.size()); }
  const ModelConfig& config() const { return cfg_; }
  std::size_t dim() const;

  void pack(const LatentState& s, std::span<double> x) const;
  LatentState unpack(std::span<const double> x) const;
  std::vector<double> pack(const LatentState& s) const;

  // Returns -inf (and a zero gradient) at infeasible points.
  double log_density(std::span<const double> x, std::span<double> grad) const;
  double log_density(const LatentState& s, LatentState* grad) const;

  // Replaces grad by a block-diagonal Gauss-Newton step: each latent row
  // is premultiplied by the inverse of its m x m curvature block.
  void precondition(const LatentState& s, LatentState& grad) const;
  // Diagonal of the inverse curvature blocks, packed like the parameters.
  std::vector<double> curvature_variance(const LatentState& s) const;

  // Likelihood of the data alone at each group's rates.
  double log_likelihood(const LatentState& s) const;

private:
  std::vector<std::vector<Eigen::MatrixXd>> curvature(const LatentState& s) const;

  int n_;
  ModelConfig cfg_;
  std::vector<PooledLikelihood> pooled_;
};

// Convenience wrapper over Posterior.
std::pair<double, LatentState> log_posterior(const LatentState& s, const GroupedData& data,
                                             const ModelConfig& cfg);

}  // namespace phgm
