#include "phgm/inference.hpp"

#include <algorithm>
#include <deque>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "phgm/error.hpp"
#include "phgm/rng.hpp"

namespace phgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxDeltaH = 1000.0;

// Stream ids under the run seed.
enum Stream : std::uint64_t { kWarmStart = 1, kSampler = 2 };

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

struct PhasePoint {
  Eigen::VectorXd q, p, g;
  double logp = kNegInf;
};

class Nuts {
public:
  Nuts(const LogDensity& f, std::size_t dim, int max_depth, Rng rng)
      : f_(f), inv_metric_(Eigen::VectorXd::Ones(dim)), max_depth_(max_depth), rng_(rng) {}

  void evaluate(PhasePoint& z) const {
    z.g.resize(z.q.size());
    double v = f_(std::span<const double>(z.q.data(), z.q.size()),
                  std::span<double>(z.g.data(), z.g.size()));
    if (!std::isfinite(v) || !z.g.allFinite()) {
      v = kNegInf;
      z.g.setZero();
    }
    z.logp = v;
  }

  double hamiltonian(const PhasePoint& z) const {
    const double h = -z.logp + 0.5 * (z.p.array().square() * inv_metric_.array()).sum();
    return std::isnan(h) ? std::numeric_limits<double>::infinity() : h;
  }

  Eigen::VectorXd p_sharp(const PhasePoint& z) const {
    return (inv_metric_.array() * z.p.array()).matrix();
  }

  void sample_momentum(PhasePoint& z) {
    z.p.resize(z.q.size());
    for (Eigen::Index i = 0; i < z.p.size(); ++i)
      z.p[i] = rng_.normal() / std::sqrt(inv_metric_[i]);
  }

  void leapfrog(PhasePoint& z, double eps) const {
    z.p += 0.5 * eps * z.g;
    z.q += eps * (inv_metric_.array() * z.p.array()).matrix();
    evaluate(z);
    z.p += 0.5 * eps * z.g;
  }

  // Doubles the step until the one-step acceptance crosses 0.8.
  void init_step_size(const PhasePoint& start) {
    const double target = std::log(0.8);
    auto delta = [&]() {
      PhasePoint z = start;
      sample_momentum(z);
      const double h0 = hamiltonian(z);
      leapfrog(z, eps_);
      const double d = h0 - hamiltonian(z);
      return std::isnan(d) ? kNegInf : d;
    };
    const int direction = delta() > target ? 1 : -1;
    for (;;) {
      const double d = delta();
      if (direction == 1 && !(d > target)) break;
      if (direction == -1 && !(d < target)) break;
      eps_ = direction == 1 ? 2.0 * eps_ : 0.5 * eps_;
      if (eps_ > 1e7) fail(Errc::all_divergent, "step size search diverged: posterior is improper");
      if (eps_ < 1e-300) fail(Errc::all_divergent, "step size search collapsed to zero");
    }
  }

  struct Transition {
    double accept_stat = 0.0;
    int depth = 0;
    bool divergent = false;
    bool cone_exit = false;
    double energy_error = 0.0;
  };

  Transition transition(PhasePoint& z) {
    sample_momentum(z);
    divergent_ = false;
    cone_exit_ = false;
    PhasePoint z_fwd = z, z_bck = z, z_sample = z, z_propose = z;
    Eigen::VectorXd p_fwd_fwd = z.p, p_fwd_bck = z.p, p_bck_fwd = z.p, p_bck_bck = z.p;
    const Eigen::VectorXd ps = p_sharp(z);
    Eigen::VectorXd ps_fwd_fwd = ps, ps_fwd_bck = ps, ps_bck_fwd = ps, ps_bck_bck = ps;
    Eigen::VectorXd rho = z.p;
    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(z);
    int n_leapfrog = 0;
    double sum_metro = 0.0;
    int depth = 0;
    const Eigen::Index dim = z.q.size();

    while (depth < max_depth_) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(dim);
      Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(dim);
      bool valid = false;
      double lsw_subtree = kNegInf;
      if (rng_.uniform() > 0.5) {
        cursor_ = z_fwd;
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        ps_bck_fwd = ps_fwd_bck;
        valid = build_tree(depth, z_propose, ps_fwd_bck, ps_fwd_fwd, rho_fwd, p_fwd_bck, p_fwd_fwd,
                           h0, 1, n_leapfrog, lsw_subtree, sum_metro);
        z_fwd = cursor_;
      } else {
        cursor_ = z_bck;
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        ps_fwd_bck = ps_bck_fwd;
        valid = build_tree(depth, z_propose, ps_bck_fwd, ps_bck_bck, rho_bck, p_bck_fwd, p_bck_bck,
                           h0, -1, n_leapfrog, lsw_subtree, sum_metro);
        z_bck = cursor_;
      }
      if (!valid) break;
      ++depth;
      if (lsw_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (rng_.uniform() < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
      rho = rho_bck + rho_fwd;
      bool persist = criterion(ps_bck_bck, ps_fwd_fwd, rho);
      persist = persist && criterion(ps_bck_bck, ps_fwd_bck, rho_bck + p_fwd_bck);
      persist = persist && criterion(ps_bck_fwd, ps_fwd_fwd, rho_fwd + p_bck_fwd);
      if (!persist) break;
    }
    Transition t;
    t.depth = depth;
    t.divergent = divergent_;
    t.cone_exit = cone_exit_;
    t.accept_stat = n_leapfrog > 0 ? sum_metro / n_leapfrog : 0.0;
    t.energy_error = hamiltonian(z_sample) - h0;
    z = std::move(z_sample);
    return t;
  }

  double eps_ = 0.1;
  Eigen::VectorXd& inv_metric() { return inv_metric_; }

private:
  static bool criterion(const Eigen::VectorXd& ps_minus, const Eigen::VectorXd& ps_plus,
                        const Eigen::VectorXd& rho) {
    return ps_plus.dot(rho) > 0.0 && ps_minus.dot(rho) > 0.0;
  }

  bool build_tree(int depth, PhasePoint& z_propose, Eigen::VectorXd& ps_beg,
                  Eigen::VectorXd& ps_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                  Eigen::VectorXd& p_end, double h0, int sign, int& n_leapfrog,
                  double& log_sum_weight, double& sum_metro) {
    if (depth == 0) {
      leapfrog(cursor_, sign * eps_);
      ++n_leapfrog;
      if (cursor_.logp == kNegInf) {
        cone_exit_ = true;
        return false;
      }
      const double h = hamiltonian(cursor_);
      if (h - h0 > kMaxDeltaH) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = cursor_;
      ps_beg = p_sharp(cursor_);
      ps_end = ps_beg;
      rho += cursor_.p;
      p_beg = cursor_.p;
      p_end = p_beg;
      return !divergent_;
    }
    const Eigen::Index dim = cursor_.q.size();
    double lsw_init = kNegInf;
    Eigen::VectorXd p_init_end(dim), ps_init_end(dim);
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(dim);
    if (!build_tree(depth - 1, z_propose, ps_beg, ps_init_end, rho_init, p_beg, p_init_end, h0,
                    sign, n_leapfrog, lsw_init, sum_metro))
      return false;

    PhasePoint z_propose_final = cursor_;
    double lsw_final = kNegInf;
    Eigen::VectorXd p_final_beg(dim), ps_final_beg(dim);
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(dim);
    if (!build_tree(depth - 1, z_propose_final, ps_final_beg, ps_end, rho_final, p_final_beg,
                    p_end, h0, sign, n_leapfrog, lsw_final, sum_metro))
      return false;

    const double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      z_propose = z_propose_final;
    } else if (rng_.uniform() < std::exp(lsw_final - lsw_subtree)) {
      z_propose = z_propose_final;
    }
    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = criterion(ps_beg, ps_end, rho_subtree);
    persist = persist && criterion(ps_beg, ps_final_beg, rho_init + p_final_beg);
    persist = persist && criterion(ps_init_end, ps_end, rho_final + p_init_end);
    return persist;
  }

  const LogDensity& f_;
  Eigen::VectorXd inv_metric_;
  int max_depth_;
  Rng rng_;
  PhasePoint cursor_;
  bool divergent_ = false;
  bool cone_exit_ = false;
};

class DualAveraging {
public:
  void restart(double eps) {
    mu_ = std::log(10.0 * eps);
    s_bar_ = 0.0;
    x_bar_ = 0.0;
    counter_ = 0;
  }
  double learn(double accept_stat, double delta) {
    ++counter_;
    accept_stat = std::min(1.0, accept_stat);
    const double eta = 1.0 / (counter_ + kT0);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / kGamma;
    const double x_eta = std::pow(static_cast<double>(counter_), -kKappa);
    x_bar_ = x_eta * x + (1.0 - x_eta) * x_bar_;
    return std::exp(x);
  }
  double final_step() const { return std::exp(x_bar_); }
  bool started() const { return counter_ > 0; }

private:
  static constexpr double kGamma = 0.05;
  static constexpr double kT0 = 10.0;
  static constexpr double kKappa = 0.75;
  double mu_ = 0.0, s_bar_ = 0.0, x_bar_ = 0.0;
  int counter_ = 0;
};

class Welford {
public:
  explicit Welford(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(mean_) {}
  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd d = x - mean_;
    mean_ += d / n_;
    m2_ += (d.array() * (x - mean_).array()).matrix();
  }
  int count() const { return n_; }
  // Sample variance shrunk towards 1e-3.
  Eigen::VectorXd regularized_variance() const {
    const double n = n_;
    const Eigen::VectorXd var = m2_ / (n - 1.0);
    return (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
  }
  void reset() {
    n_ = 0;
    mean_.setZero();
    m2_.setZero();
  }

private:
  int n_ = 0;
  Eigen::VectorXd mean_, m2_;
};

// End points (exclusive) of the slow metric-adaptation windows.
std::vector<int> slow_windows(int n_warmup) {
  std::vector<int> ends;
  if (n_warmup < 20) return ends;
  const int init = n_warmup * 15 / 100;
  const int term = n_warmup / 10;
  const int slow_end = n_warmup - term;
  int start = init;
  int size = std::min(25, slow_end - init);
  while (start < slow_end) {
    int end = start + size;
    if (end + 2 * size > slow_end) end = slow_end;
    ends.push_back(end);
    start = end;
    size *= 2;
  }
  return ends;
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_warmup < 0 || n_samples < 1) fail(Errc::invalid_argument, "bad iteration counts");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    fail(Errc::invalid_argument, "target_accept must lie in (0, 1)");
  if (max_tree_depth < 1 || max_tree_depth > 12)
    fail(Errc::invalid_argument, "max_tree_depth must lie in [1, 12]");
  if (!(init_step > 0.0)) fail(Errc::invalid_argument, "init_step must be positive");
}

ChainOutput nuts_chain(const LogDensity& density, std::vector<double> init,
                       const SamplerConfig& scfg, const std::vector<double>& inv_metric) {
  scfg.validate();
  const auto dim = static_cast<Eigen::Index>(init.size());
  if (dim == 0) fail(Errc::invalid_argument, "empty parameter vector");
  Nuts nuts(density, init.size(), scfg.max_tree_depth, Rng(scfg.seed, {kSampler}));
  if (!inv_metric.empty()) {
    if (inv_metric.size() != init.size()) fail(Errc::shape_mismatch, "metric has wrong length");
    for (double v : inv_metric)
      if (!(v > 0.0) || !std::isfinite(v)) fail(Errc::invalid_argument, "metric must be positive");
    nuts.inv_metric() = Eigen::Map<const Eigen::VectorXd>(inv_metric.data(), dim);
  }
  PhasePoint z;
  z.q = Eigen::Map<const Eigen::VectorXd>(init.data(), dim);
  nuts.evaluate(z);
  if (z.logp == kNegInf) fail(Errc::infeasible_start, "initial point has zero posterior density");

  nuts.eps_ = scfg.init_step;
  DualAveraging da;
  if (scfg.n_warmup > 0) {
    nuts.init_step_size(z);
    da.restart(nuts.eps_);
  }
  const std::vector<int> windows = slow_windows(scfg.n_warmup);
  const int slow_begin = scfg.n_warmup * 15 / 100;
  std::size_t next_window = 0;
  Welford welford(dim);

  ChainOutput out;
  for (int it = 0; it < scfg.n_warmup; ++it) {
    const auto t = nuts.transition(z);
    if (t.divergent) ++out.warmup_divergences;
    if (t.cone_exit) ++out.warmup_cone_exits;
    nuts.eps_ = da.learn(t.accept_stat, scfg.target_accept);
    if (next_window < windows.size() && it >= slow_begin) {
      welford.add(z.q);
      if (it + 1 == windows[next_window]) {
        if (welford.count() >= 3) nuts.inv_metric() = welford.regularized_variance();
        welford.reset();
        nuts.init_step_size(z);
        da.restart(nuts.eps_);
        ++next_window;
      }
    }
  }
  if (scfg.n_warmup > 0) {
    if (out.warmup_divergences > 0.9 * scfg.n_warmup)
      fail(Errc::all_divergent,
           "more than 90% of warmup transitions diverged; rescale the data or lower init_step");
    if (da.started()) nuts.eps_ = da.final_step();
  }

  out.draws.reserve(scfg.n_samples);
  for (int it = 0; it < scfg.n_samples; ++it) {
    const auto t = nuts.transition(z);
    out.draws.emplace_back(z.q.data(), z.q.data() + dim);
    out.log_post.push_back(z.logp);
    out.accept_stat.push_back(t.accept_stat);
    out.depth.push_back(t.depth);
    out.divergent.push_back(t.divergent);
    out.cone_exit.push_back(t.cone_exit);
    out.energy_error.push_back(t.energy_error);
  }
  out.step_size = nuts.eps_;
  out.inv_metric.assign(nuts.inv_metric().data(), nuts.inv_metric().data() + dim);
  return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Rates of every latent matrix at a packed point.
std::vector<Eigen::MatrixXd> rates(const Posterior& post, const std::vector<double>& at) {
  const LatentState st = post.unpack(at);
  std::vector<Eigen::MatrixXd> out;
  for (const auto& z : st.z) out.push_back(z * z.transpose());
  if (st.hierarchical()) out.push_back(st.zbar * st.zbar.transpose());
  return out;
}

// No rate may shrink below a quarter of its current value in one step.
bool keeps_margin(const std::vector<Eigen::MatrixXd>& from, const std::vector<Eigen::MatrixXd>& to) {
  for (std::size_t p = 0; p < from.size(); ++p)
    if (!((to[p].array() - 0.25 * from[p].array()).minCoeff() > 0.0)) return false;
  return true;
}

// Block Gauss-Newton ascent in Z (log kappa fixed) with an Armijo halving search.
void ascend(const Posterior& post, std::vector<double>& x, int max_iter, double tol,
            std::vector<double>* trace) {
  const std::size_t dim = x.size();
  std::vector<double> g(dim), xn(dim), gn(dim), d(dim);
  auto eval = [&](const std::vector<double>& at, std::vector<double>& grad) {
    const double v = post.log_density(at, grad);
    grad.back() = 0.0;
    return v;
  };
  double f = eval(x, g);
  if (!std::isfinite(f)) fail(Errc::infeasible_start, "initial state has zero density");
  if (trace) trace->assign(1, f);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    if (gmax < tol * (1.0 + std::abs(f))) break;
    LatentState dir = post.unpack(g);
    post.precondition(post.unpack(x), dir);
    post.pack(dir, d);
    d.back() = 0.0;
    double slope = dot(g, d);
    if (!(slope > 0.0) || !std::isfinite(slope)) {
      d = g;
      slope = dot(g, g);
      step = 1e-2 / std::sqrt(slope);
    } else {
      step = std::min(1.0, 2.0 * step);
    }
    const std::vector<Eigen::MatrixXd> now = rates(post, x);
    bool accepted = false;
    double fn = kNegInf;
    for (int halving = 0; halving < 60; ++halving) {
      for (std::size_t i = 0; i < dim; ++i) xn[i] = x[i] + step * d[i];
      if (keeps_margin(now, rates(post, xn))) {
        fn = eval(xn, gn);
        if (std::isfinite(fn) && fn >= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    x.swap(xn);
    g.swap(gn);
    f = fn;
    if (trace) trace->push_back(f);
  }
}

}  // namespace

LatentState warm_start(const GroupedData& data, const ModelConfig& cfg, std::uint64_t seed,
                       std::vector<double>* trace, const WarmStartOptions& opts) {
  if (data.groups.empty() || data.subjects() == 0) fail(Errc::invalid_argument, "no data");
  Posterior post(data, cfg);
  const int n = post.n();
  const int m = cfg.m;
  const Rng root(seed, {kWarmStart});
  auto positive_init = [&](Rng rng) {
    Eigen::MatrixXd z(n, m);
    for (int j = 0; j < n; ++j)
      for (int c = 0; c < m; ++c) z(j, c) = std::abs(rng.normal()) / std::sqrt(m);
    return z;
  };
  LatentState s;
  for (int p = 0; p < post.groups(); ++p) s.z.push_back(positive_init(root.split(p)));
  if (cfg.hierarchical) s.zbar = positive_init(root.split(post.groups()));
  s.log_kappa = std::log(opts.kappa);
  if (!feasible(s)) fail(Errc::infeasible_start, "initial state lies outside the cone");

  std::vector<double> x = post.pack(s);
  // Stronger barriers first keep the iterates away from the cone boundary.
  for (double factor : opts.barrier_stages) {
    ModelConfig staged = cfg;
    staged.alpha = cfg.alpha * factor;
    ascend(Posterior(data, staged), x, opts.stage_iter, opts.tol, nullptr);
  }
  ascend(post, x, opts.max_iter, opts.tol, trace);
  LatentState out = post.unpack(x);
  out.log_kappa = std::log(opts.kappa);
  return out;
}

PosteriorSamples nuts_sample(const GroupedData& data, const ModelConfig& cfg,
                             const SamplerConfig& scfg, const LatentState& init) {
  Posterior post(data, cfg);
  if (!feasible(init)) fail(Errc::infeasible_start, "initial state lies outside the cone");
  LogDensity density = [&post](std::span<const double> x, std::span<double> g) {
    return post.log_density(x, g);
  };
  ChainOutput chain = nuts_chain(density, post.pack(init), scfg, post.curvature_variance(init));
  PosteriorSamples out;
  out.n = post.n();
  out.m = cfg.m;
  out.hierarchical = cfg.hierarchical;
  out.labels = data.labels;
  for (const auto& d : chain.draws) out.draws.push_back(post.unpack(d));
  out.log_post = std::move(chain.log_post);
  out.accept_stat = std::move(chain.accept_stat);
  out.depth = std::move(chain.depth);
  out.divergent = std::move(chain.divergent);
  out.cone_exit = std::move(chain.cone_exit);
  out.energy_error = std::move(chain.energy_error);
  out.step_size = chain.step_size;
  out.warmup_divergences = chain.warmup_divergences;
  out.warmup_cone_exits = chain.warmup_cone_exits;
  return out;
}

SeriesDiagnostics series_diagnostics(std::span<const double> x, int lag_max) {
  const auto n = static_cast<int>(x.size());
  if (n < 10) fail(Errc::invalid_argument, "diagnostics need at least 10 draws");
  if (lag_max < 0) fail(Errc::invalid_argument, "lag_max must be nonnegative");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  auto autocov = [&](int lag) {
    if (lag >= n) return 0.0;
    double s = 0.0;
    for (int t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / n;
  };
  SeriesDiagnostics out;
  const double c0 = autocov(0);
  if (!(c0 > 1e-28 * (1.0 + mean * mean))) {
    out.zero_variance = true;
    out.acf.assign(lag_max + 1, 0.0);
    out.acf[0] = 1.0;
    return out;
  }
  std::vector<double> rho(1, 1.0);
  auto rho_at = [&](int lag) {
    while (static_cast<int>(rho.size()) <= lag) rho.push_back(autocov(rho.size()) / c0);
    return rho[lag];
  };
  out.acf.resize(lag_max + 1);
  for (int k = 0; k <= lag_max; ++k) out.acf[k] = rho_at(k);
  double tau = -1.0;
  for (int k = 0; k < n; k += 2) {
    const double pair = rho_at(k) + rho_at(k + 1);
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  out.ess = std::min(n / tau, n * std::log10(static_cast<double>(n)));
  return out;
}

double ChainDiagnostics::median_abs_acf(int lag) const {
  if (lag < 0 || lag > lag_max) fail(Errc::invalid_argument, "lag outside the computed range");
  std::vector<double> v;
  for (const auto& e : elements)
    if (!e.series.zero_variance) v.push_back(std::abs(e.series.acf[lag]));
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

ChainDiagnostics diagnostics(const PosteriorSamples& samples, int lag_max) {
  const std::size_t draws = samples.draws.size();
  if (draws < 10) fail(Errc::invalid_argument, "diagnostics need at least 10 draws");
  ChainDiagnostics out;
  out.lag_max = lag_max;
  const int n = samples.n;
  std::vector<Eigen::MatrixXd> lambdas(draws);
  std::vector<double> series(draws);
  for (int p = 0; p < samples.groups(); ++p) {
    for (std::size_t d = 0; d < draws; ++d)
      lambdas[d] = samples.draws[d].z[p] * samples.draws[d].z[p].transpose();
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        for (std::size_t d = 0; d < draws; ++d) series[d] = lambdas[d](j, k);
        ElementDiagnostics e{p, j, k, series_diagnostics(series, lag_max)};
        if (e.series.zero_variance) ++out.zero_variance;
        out.elements.push_back(std::move(e));
      }
  }
  out.log_post_trace = samples.log_post;
  for (const auto& s : samples.draws) out.log_kappa_trace.push_back(s.log_kappa);
  out.log_post = series_diagnostics(samples.log_post, lag_max);
  out.mean_accept =
      std::accumulate(samples.accept_stat.begin(), samples.accept_stat.end(), 0.0) / draws;
  out.mean_depth = std::accumulate(samples.depth.begin(), samples.depth.end(), 0.0) / draws;
  out.divergences = static_cast<int>(std::count(samples.divergent.begin(), samples.divergent.end(), true));
  out.cone_exits = static_cast<int>(std::count(samples.cone_exit.begin(), samples.cone_exit.end(), true));
  return out;
}

}  // namespace phgm
