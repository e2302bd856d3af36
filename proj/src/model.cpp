#include "phgm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "phgm/error.hpp"

namespace phgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double rate(const Eigen::MatrixXd& lambda, const Edge& e) {
  const double v = lambda(e.a, e.b);
  if (!(v > 0.0)) fail(Errc::non_positive_rate, "rate must be positive");
  return v;
}

// d/dx log(1 - exp(-x tau)) = tau / expm1(x tau).
double dlog1mexp(double x, double tau) { return tau / std::expm1(x * tau); }

// Gradient wrt Z of a function of lambda = Z Z' whose derivative wrt the
// free entries lambda_jk (j <= k) is g: d/dz_j = 2 g_jj z_j + sum_k g_jk z_k.
Eigen::MatrixXd chain_to_z(Eigen::MatrixXd g, const Eigen::MatrixXd& z) {
  g.diagonal() *= 2.0;
  return g * z;
}

// Adds alpha * sum_{j<=k} log lambda_jk to value and alpha / lambda_jk to g.
double add_barrier(const Eigen::MatrixXd& lambda, double alpha, Eigen::MatrixXd* g) {
  const Eigen::Index n = lambda.rows();
  double value = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j; k < n; ++k) {
      value += std::log(lambda(j, k));
      if (g) {
        const double d = alpha / lambda(j, k);
        (*g)(j, k) += d;
        if (k != j) (*g)(k, j) += d;
      }
    }
  return alpha * value;
}

double min_upper(const Eigen::MatrixXd& lambda) {
  double lo = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < lambda.rows(); ++j)
    for (Eigen::Index k = j; k < lambda.cols(); ++k) lo = std::min(lo, lambda(j, k));
  return lo;
}

}  // namespace

void ModelConfig::validate() const {
  if (m < 1) fail(Errc::invalid_argument, "latent dimension m must be at least 1");
  if (!(alpha > 0.0)) fail(Errc::invalid_argument, "alpha must be positive");
  if (!(kappa_shape > 0.0) || !(kappa_scale > 0.0))
    fail(Errc::invalid_argument, "kappa prior parameters must be positive");
  if (!(kappa0 > 0.0)) fail(Errc::invalid_argument, "kappa0 must be positive");
}

int GroupedData::n() const {
  int n = -1;
  for (const auto& g : groups)
    for (const auto& s : g) {
      if (n < 0) n = s.n;
      else if (s.n != n) fail(Errc::shape_mismatch, "subjects disagree on the vertex count");
    }
  if (n < 0) fail(Errc::invalid_argument, "no subjects");
  return n;
}

std::size_t GroupedData::subjects() const {
  std::size_t c = 0;
  for (const auto& g : groups) c += g.size();
  return c;
}

double min_inner_product(const Eigen::MatrixXd& z) { return min_upper(z * z.transpose()); }

bool feasible(const LatentState& s) {
  for (const auto& z : s.z)
    if (!(min_inner_product(z) > 0.0)) return false;
  if (s.hierarchical() && !(min_inner_product(s.zbar) > 0.0)) return false;
  return true;
}

double log1mexp(double x) {
  return x < std::numbers::ln2 ? std::log(-std::expm1(-x)) : std::log1p(-std::exp(-x));
}

double h0_loglik(const Eigen::MatrixXd& lambda, const H0Features& h0) {
  const int n = h0.n;
  if (lambda.rows() != n || lambda.cols() != n)
    fail(Errc::shape_mismatch, "rate matrix does not match the features");
  double value = 0.0;
  for (const auto& e : h0.winners) value += std::log(rate(lambda, e));
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) value -= rate(lambda, {j, k}) * h0.w(j, k);
  return value;
}

double h1_loglik(const Eigen::MatrixXd& lambda, std::span<const LoopRecord> loops) {
  double value = 0.0;
  for (const auto& loop : loops) {
    const double b = loop.birth;
    const double d = loop.death;
    if (!(b > 0.0) || !(d > b)) fail(Errc::degenerate_bar, "loop needs 0 < birth < death");
    const double le = rate(lambda, loop.birth_edge);
    const double lf = rate(lambda, loop.death_edge);
    value += std::log(le) + std::log(lf) - le * b - lf * d;
    for (const auto& g : loop.b1) value += log1mexp(rate(lambda, g.edge) * b);
    for (const auto& h : loop.b2) {
      const double l = rate(lambda, h.edge);
      value += -l * b + log1mexp(l * (d - b));
    }
  }
  return value;
}

double subject_loglik(const Eigen::MatrixXd& lambda, const SubjectFeatures& f) {
  return h0_loglik(lambda, f.h0) + h1_loglik(lambda, f.loops);
}

double prior_logdensity(const Eigen::MatrixXd& z, double kappa, double alpha) {
  if (!(kappa > 0.0)) fail(Errc::invalid_argument, "kappa must be positive");
  const Eigen::MatrixXd lambda = z * z.transpose();
  if (!(min_upper(lambda) > 0.0)) return kNegInf;
  return prior_logdensity_lambda(lambda, static_cast<int>(z.cols()), kappa, alpha);
}

double prior_logdensity_lambda(const Eigen::MatrixXd& lambda, int m, double kappa, double alpha) {
  if (!(kappa > 0.0)) fail(Errc::invalid_argument, "kappa must be positive");
  if (!(min_upper(lambda) > 0.0)) return kNegInf;
  const double n = static_cast<double>(lambda.rows());
  return 0.5 * n * m * std::log(kappa) - 0.5 * kappa * lambda.trace() +
         add_barrier(lambda, alpha, nullptr);
}

double nuclear_norm(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().sum();
}

double procrustes_dist2(const Eigen::MatrixXd& zp, const Eigen::MatrixXd& zbar) {
  if (zp.rows() != zbar.rows() || zp.cols() != zbar.cols())
    fail(Errc::shape_mismatch, "latent matrices differ in shape");
  const double sb = zbar.squaredNorm();
  if (!(sb > 0.0)) fail(Errc::zero_consensus, "consensus matrix is zero");
  const double nu = nuclear_norm(zbar.transpose() * zp);
  return std::max(0.0, zp.squaredNorm() - nu * nu / sb);
}

double hier_prior_logdensity(const Eigen::MatrixXd& zp, const Eigen::MatrixXd& zbar,
                             double kappa, double alpha) {
  if (!(kappa > 0.0)) fail(Errc::invalid_argument, "kappa must be positive");
  if (zp.rows() != zbar.rows() || zp.cols() != zbar.cols())
    fail(Errc::shape_mismatch, "latent matrices differ in shape");
  const double sb = zbar.squaredNorm();
  if (!(sb > 0.0)) fail(Errc::zero_consensus, "consensus matrix is zero");
  const Eigen::MatrixXd lambda = zp * zp.transpose();
  if (!(min_upper(lambda) > 0.0)) return kNegInf;
  const double nu = nuclear_norm(zbar.transpose() * zp);
  const double bracket = sb * lambda.trace() - nu * nu;
  const double n = static_cast<double>(zp.rows());
  return 0.5 * n * zp.cols() * std::log(kappa) - 0.5 * kappa * bracket +
         add_barrier(lambda, alpha, nullptr);
}

PooledLikelihood::PooledLikelihood(int n, std::span<const SubjectFeatures> subjects)
    : n_(n), log_count_(Eigen::MatrixXd::Zero(n, n)), linear_(Eigen::MatrixXd::Zero(n, n)) {
  auto count = [&](const Edge& e, double c) { log_count_(e.a, e.b) += c; };
  auto linear = [&](const Edge& e, double c) { linear_(e.a, e.b) += c; };
  for (const auto& s : subjects) {
    if (s.n != n) fail(Errc::shape_mismatch, "subject vertex count differs from the group");
    for (const auto& e : s.h0.winners) count(e, 1.0);
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) linear_(j, k) += s.h0.w(j, k);
    for (const auto& loop : s.loops) {
      const double b = loop.birth;
      const double d = loop.death;
      if (!(b > 0.0) || !(d > b)) fail(Errc::degenerate_bar, "loop needs 0 < birth < death");
      count(loop.birth_edge, 1.0);
      count(loop.death_edge, 1.0);
      linear(loop.birth_edge, b);
      linear(loop.death_edge, d);
      for (const auto& g : loop.b1) tails_.push_back({g.edge.a, g.edge.b, b});
      for (const auto& h : loop.b2) {
        linear(h.edge, b);
        tails_.push_back({h.edge.a, h.edge.b, d - b});
      }
    }
  }
  weight_ = log_count_;
  for (const auto& t : tails_) weight_(t.j, t.k) += 1.0;
}

double PooledLikelihood::evaluate(const Eigen::MatrixXd& lambda, Eigen::MatrixXd* grad) const {
  if (grad) grad->setZero(n_, n_);
  double value = 0.0;
  for (int j = 0; j < n_; ++j)
    for (int k = j + 1; k < n_; ++k) {
      const double l = lambda(j, k);
      if (!(l > 0.0)) fail(Errc::non_positive_rate, "rate must be positive");
      const double c = log_count_(j, k);
      value += (c > 0.0 ? c * std::log(l) : 0.0) - linear_(j, k) * l;
      if (grad) {
        const double g = c / l - linear_(j, k);
        (*grad)(j, k) = g;
        (*grad)(k, j) = g;
      }
    }
  for (const auto& t : tails_) {
    const double l = lambda(t.j, t.k);
    value += log1mexp(l * t.tau);
    if (grad) {
      const double g = dlog1mexp(l, t.tau);
      (*grad)(t.j, t.k) += g;
      (*grad)(t.k, t.j) += g;
    }
  }
  return value;
}

Posterior::Posterior(const GroupedData& data, ModelConfig cfg) : n_(data.n()), cfg_(cfg) {
  cfg_.validate();
  if (data.groups.empty()) fail(Errc::invalid_argument, "no groups");
  for (const auto& g : data.groups) pooled_.emplace_back(n_, g);
}

std::size_t Posterior::dim() const {
  const std::size_t block = static_cast<std::size_t>(n_) * cfg_.m;
  return block * (pooled_.size() + (cfg_.hierarchical ? 1 : 0)) + 1;
}

void Posterior::pack(const LatentState& s, std::span<double> x) const {
  if (x.size() != dim()) fail(Errc::shape_mismatch, "parameter vector has wrong length");
  if (s.z.size() != pooled_.size() || s.hierarchical() != cfg_.hierarchical)
    fail(Errc::shape_mismatch, "state does not match the model");
  std::size_t pos = 0;
  auto put = [&](const Eigen::MatrixXd& z) {
    if (z.rows() != n_ || z.cols() != cfg_.m)
      fail(Errc::shape_mismatch, "latent matrix has wrong shape");
    for (int j = 0; j < n_; ++j)
      for (int c = 0; c < cfg_.m; ++c) x[pos++] = z(j, c);
  };
  for (const auto& z : s.z) put(z);
  if (cfg_.hierarchical) put(s.zbar);
  x[pos] = s.log_kappa;
}

std::vector<double> Posterior::pack(const LatentState& s) const {
  std::vector<double> x(dim());
  pack(s, x);
  return x;
}

LatentState Posterior::unpack(std::span<const double> x) const {
  if (x.size() != dim()) fail(Errc::shape_mismatch, "parameter vector has wrong length");
  LatentState s;
  std::size_t pos = 0;
  auto take = [&]() {
    Eigen::MatrixXd z(n_, cfg_.m);
    for (int j = 0; j < n_; ++j)
      for (int c = 0; c < cfg_.m; ++c) z(j, c) = x[pos++];
    return z;
  };
  for (std::size_t p = 0; p < pooled_.size(); ++p) s.z.push_back(take());
  if (cfg_.hierarchical) s.zbar = take();
  s.log_kappa = x[pos];
  return s;
}

namespace {

// Per-row curvature blocks sum_k w_jk z_k z_k^T + ridge * I, with
// w_jk = (events + alpha) / lambda_jk^2 and the diagonal weight quadrupled.
std::vector<Eigen::MatrixXd> curvature_blocks(const Eigen::MatrixXd& z, const Eigen::MatrixXd* weight,
                                              double alpha, double ridge) {
  const Eigen::Index n = z.rows();
  const Eigen::MatrixXd lambda = z * z.transpose();
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j; k < n; ++k) {
      const double events = (weight && k != j) ? (*weight)(j, k) : 0.0;
      const double l = lambda(j, k);
      w(j, k) = w(k, j) = (events + alpha) / (l * l);
    }
  w.diagonal() *= 4.0;
  std::vector<Eigen::MatrixXd> blocks;
  blocks.reserve(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd h = z.transpose() * w.col(j).asDiagonal() * z;
    h.diagonal().array() += ridge;
    blocks.push_back(std::move(h));
  }
  return blocks;
}

void precondition_rows(const std::vector<Eigen::MatrixXd>& blocks, Eigen::MatrixXd& grad) {
  for (Eigen::Index j = 0; j < grad.rows(); ++j) {
    const Eigen::VectorXd step = blocks[j].ldlt().solve(grad.row(j).transpose());
    if (step.allFinite()) grad.row(j) = step.transpose();
  }
}

void inverse_diagonal(const std::vector<Eigen::MatrixXd>& blocks, Eigen::MatrixXd& out) {
  for (Eigen::Index j = 0; j < out.rows(); ++j) {
    const Eigen::MatrixXd inv = blocks[j].ldlt().solve(
        Eigen::MatrixXd::Identity(blocks[j].rows(), blocks[j].cols()));
    out.row(j) = inv.diagonal().transpose();
  }
}

}  // namespace

std::vector<std::vector<Eigen::MatrixXd>> Posterior::curvature(const LatentState& s) const {
  const double kappa = std::exp(s.log_kappa);
  const double sb = cfg_.hierarchical ? s.zbar.squaredNorm() : 1.0;
  std::vector<std::vector<Eigen::MatrixXd>> out;
  double trace_sum = 0.0;
  for (int p = 0; p < groups(); ++p) {
    out.push_back(curvature_blocks(s.z[p], &pooled_[p].event_weight(), cfg_.alpha, kappa * sb));
    trace_sum += s.z[p].squaredNorm();
  }
  if (cfg_.hierarchical)
    out.push_back(curvature_blocks(s.zbar, nullptr, cfg_.alpha, cfg_.kappa0 + kappa * trace_sum));
  return out;
}

void Posterior::precondition(const LatentState& s, LatentState& grad) const {
  const auto blocks = curvature(s);
  for (int p = 0; p < groups(); ++p) precondition_rows(blocks[p], grad.z[p]);
  if (cfg_.hierarchical) precondition_rows(blocks.back(), grad.zbar);
}

std::vector<double> Posterior::curvature_variance(const LatentState& s) const {
  const auto blocks = curvature(s);
  LatentState var = s;
  for (int p = 0; p < groups(); ++p) inverse_diagonal(blocks[p], var.z[p]);
  if (cfg_.hierarchical) inverse_diagonal(blocks.back(), var.zbar);
  // log kappa: Gamma-like curvature of the (nm/2) P log kappa terms.
  var.log_kappa = 2.0 / (static_cast<double>(n_) * cfg_.m * (groups() + (cfg_.hierarchical ? 1 : 0)));
  return pack(var);
}

double Posterior::log_density(std::span<const double> x, std::span<double> grad) const {
  const LatentState s = unpack(x);
  if (grad.empty()) return log_density(s, nullptr);
  LatentState g;
  const double v = log_density(s, &g);
  pack(g, grad);
  return v;
}

double Posterior::log_density(const LatentState& s, LatentState* grad) const {
  const int P = groups();
  const int n = n_;
  const int m = cfg_.m;
  const double alpha = cfg_.alpha;
  auto zero_grad = [&]() {
    if (!grad) return;
    grad->z.assign(P, Eigen::MatrixXd::Zero(n, m));
    grad->zbar = cfg_.hierarchical ? Eigen::MatrixXd::Zero(n, m) : Eigen::MatrixXd();
    grad->log_kappa = 0.0;
  };
  if (static_cast<int>(s.z.size()) != P || s.hierarchical() != cfg_.hierarchical)
    fail(Errc::shape_mismatch, "state does not match the model");

  std::vector<Eigen::MatrixXd> lambdas;
  lambdas.reserve(P);
  for (const auto& z : s.z) {
    lambdas.push_back(z * z.transpose());
    if (!(min_upper(lambdas.back()) > 0.0) || !std::isfinite(lambdas.back().sum())) {
      zero_grad();
      return kNegInf;
    }
  }
  Eigen::MatrixXd lambda_bar;
  if (cfg_.hierarchical) {
    lambda_bar = s.zbar * s.zbar.transpose();
    if (!(min_upper(lambda_bar) > 0.0) || !std::isfinite(lambda_bar.sum())) {
      zero_grad();
      return kNegInf;
    }
  }
  if (!std::isfinite(s.log_kappa)) {
    zero_grad();
    return kNegInf;
  }

  const double kappa = std::exp(s.log_kappa);
  const double half_nm = 0.5 * n * m;
  double value = 0.0;
  double dvalue_dkappa = 0.0;
  if (grad) {
    grad->z.assign(P, Eigen::MatrixXd());
    grad->zbar = cfg_.hierarchical ? Eigen::MatrixXd::Zero(n, m) : Eigen::MatrixXd();
  }
  const double sb = cfg_.hierarchical ? s.zbar.squaredNorm() : 0.0;

  Eigen::MatrixXd g;
  for (int p = 0; p < P; ++p) {
    const Eigen::MatrixXd& z = s.z[p];
    const Eigen::MatrixXd& lambda = lambdas[p];
    value += pooled_[p].evaluate(lambda, grad ? &g : nullptr);
    value += add_barrier(lambda, alpha, grad ? &g : nullptr);
    value += half_nm * s.log_kappa;
    const double trace = lambda.trace();
    if (!cfg_.hierarchical) {
      value -= 0.5 * kappa * trace;
      dvalue_dkappa += half_nm / kappa - 0.5 * trace;
      if (grad) {
        g.diagonal().array() -= 0.5 * kappa;
        grad->z[p] = chain_to_z(g, z);
      }
      continue;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.zbar.transpose() * z,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double nu = svd.singularValues().sum();
    const double bracket = sb * trace - nu * nu;
    value -= 0.5 * kappa * bracket;
    dvalue_dkappa += half_nm / kappa - 0.5 * bracket;
    if (grad) {
      g.diagonal().array() -= 0.5 * kappa * sb;
      const Eigen::MatrixXd uvt = svd.matrixU() * svd.matrixV().transpose();
      grad->z[p] = chain_to_z(g, z) + kappa * nu * (s.zbar * uvt);
      grad->zbar += -kappa * trace * s.zbar + kappa * nu * (z * uvt.transpose());
    }
  }

  if (cfg_.hierarchical) {
    value -= 0.5 * cfg_.kappa0 * sb;
    Eigen::MatrixXd gbar;
    if (grad) gbar.setZero(n, n);
    value += add_barrier(lambda_bar, alpha, grad ? &gbar : nullptr);
    if (grad) grad->zbar += -cfg_.kappa0 * s.zbar + chain_to_z(gbar, s.zbar);
  }

  // Gamma(shape a, scale theta) on kappa, sampled as log kappa (+ Jacobian).
  const double a = cfg_.kappa_shape;
  const double theta = cfg_.kappa_scale;
  value += (a - 1.0) * s.log_kappa - kappa / theta - std::lgamma(a) - a * std::log(theta) +
           s.log_kappa;
  if (grad) grad->log_kappa = kappa * dvalue_dkappa + (a - 1.0) - kappa / theta + 1.0;
  return value;
}

double Posterior::log_likelihood(const LatentState& s) const {
  double value = 0.0;
  for (int p = 0; p < groups(); ++p)
    value += pooled_[p].evaluate(s.z[p] * s.z[p].transpose(), nullptr);
  return value;
}

std::pair<double, LatentState> log_posterior(const LatentState& s, const GroupedData& data,
                                             const ModelConfig& cfg) {
  Posterior post(data, cfg);
  LatentState grad;
  const double v = post.log_density(s, &grad);
  return {v, std::move(grad)};
}

}  // namespace phgm
