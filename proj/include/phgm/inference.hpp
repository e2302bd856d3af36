#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phgm/model.hpp"

namespace phgm {

struct SamplerConfig {
  int n_warmup = 500;
  int n_samples = 500;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
  double init_step = 0.1;

  void validate() const;
};

// Log density with gradient written into grad (same length as x).
// Returning -inf marks a point outside the support.
using LogDensity = std::function<double(std::span<const double> x, std::span<double> grad)>;

// Raw output of one chain over a flat parameter vector.
struct ChainOutput {
  std::vector<std::vector<double>> draws;
  std::vector<double> log_post;
  std::vector<double> accept_stat;
  std::vector<int> depth;
  std::vector<bool> divergent;
  std::vector<bool> cone_exit;  // trajectory stopped at a point outside the support
  std::vector<double> energy_error;  // H(selected) - H(initial) per transition
  double step_size = 0.0;
  std::vector<double> inv_metric;
  int warmup_divergences = 0;
  int warmup_cone_exits = 0;
};

// Multinomial NUTS with the generalized no-U-turn criterion, dual averaging
// of the step size and windowed diagonal metric adaptation during warmup.
// A non-empty inv_metric seeds the diagonal metric (default: identity).
ChainOutput nuts_chain(const LogDensity& density, std::vector<double> init,
                       const SamplerConfig& scfg, const std::vector<double>& inv_metric = {});

struct PosteriorSamples {
  int n = 0;
  int m = 0;
  bool hierarchical = false;
  std::vector<std::string> labels;
  std::vector<LatentState> draws;
  std::vector<double> log_post;
  std::vector<double> accept_stat;
  std::vector<int> depth;
  std::vector<bool> divergent;
  std::vector<bool> cone_exit;
  std::vector<double> energy_error;
  double step_size = 0.0;
  int warmup_divergences = 0;
  int warmup_cone_exits = 0;

  int groups() const { return draws.empty() ? 0 : static_cast<int>(draws.front().z.size()); }
};

struct WarmStartOptions {
  int max_iter = 5000;
  double tol = 1e-6;
  double kappa = 6.0;
  // Barrier multipliers of the preliminary ascents, each run for stage_iter steps.
  std::vector<double> barrier_stages{100.0, 10.0};
  int stage_iter = 500;
};

// Ascent in Z (and Zbar) with log kappa held fixed, after preliminary ascents
// under stronger barriers. If trace is non-null it receives the log-posterior
// of the final ascent after every iteration.
LatentState warm_start(const GroupedData& data, const ModelConfig& cfg, std::uint64_t seed,
                       std::vector<double>* trace = nullptr, const WarmStartOptions& opts = {});

PosteriorSamples nuts_sample(const GroupedData& data, const ModelConfig& cfg,
                             const SamplerConfig& scfg, const LatentState& init);

struct SeriesDiagnostics {
  std::vector<double> acf;  // lags 0..lag_max
  double ess = 0.0;
  bool zero_variance = false;
};

// Biased autocorrelation estimate and initial-positive-sequence ESS.
SeriesDiagnostics series_diagnostics(std::span<const double> x, int lag_max);

struct ElementDiagnostics {
  int group = 0;
  int j = 0;
  int k = 0;
  SeriesDiagnostics series;
};

struct ChainDiagnostics {
  int lag_max = 0;
  std::vector<ElementDiagnostics> elements;  // every lambda_jk, j <= k, per group
  SeriesDiagnostics log_post;
  std::vector<double> log_post_trace;
  std::vector<double> log_kappa_trace;
  double mean_accept = 0.0;
  double mean_depth = 0.0;
  int divergences = 0;
  int cone_exits = 0;
  int zero_variance = 0;

  // Median of |acf(lag)| over all elements with nonzero variance.
  double median_abs_acf(int lag) const;
};

ChainDiagnostics diagnostics(const PosteriorSamples& samples, int lag_max);

}  // namespace phgm
