#include "phgm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "phgm/error.hpp"
#include "phgm/persistence.hpp"

namespace phgm {

Eigen::MatrixXd posterior_mean_lambda(const PosteriorSamples& samples, int group) {
  if (samples.draws.empty()) fail(Errc::invalid_argument, "no draws");
  if (group < 0 || group >= samples.groups()) fail(Errc::invalid_argument, "group out of range");
  const int n = samples.n;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (const auto& d : samples.draws) sum.noalias() += d.z[group] * d.z[group].transpose();
  return sum / static_cast<double>(samples.draws.size());
}

Eigen::MatrixXd truncated_embed(const Eigen::MatrixXd& lambda_hat, int r) {
  const auto n = lambda_hat.rows();
  if (lambda_hat.cols() != n) fail(Errc::shape_mismatch, "matrix must be square");
  if (r < 1 || r > n) fail(Errc::invalid_argument, "rank must lie in [1, n]");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (lambda_hat + lambda_hat.transpose()));
  Eigen::MatrixXd out(n, r);
  for (int c = 0; c < r; ++c) {
    const Eigen::Index idx = n - 1 - c;  // eigenvalues ascending
    Eigen::VectorXd v = es.eigenvectors().col(idx);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.col(c) = v * std::sqrt(std::max(es.eigenvalues()[idx], 0.0));
  }
  return out;
}

Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  if (a.rows() != ref.rows() || a.cols() != ref.cols())
    fail(Errc::shape_mismatch, "embeddings differ in shape");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * ref,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<Eigen::MatrixXd> align_groups(std::span<const Eigen::MatrixXd> embeds, int ref) {
  if (ref < 0 || ref >= static_cast<int>(embeds.size()))
    fail(Errc::invalid_argument, "reference index out of range");
  std::vector<Eigen::MatrixXd> out;
  const Eigen::MatrixXd& target = embeds[ref];
  for (std::size_t p = 0; p < embeds.size(); ++p) {
    if (static_cast<int>(p) == ref) {
      out.push_back(target);
      continue;
    }
    Eigen::MatrixXd aligned = embeds[p] * procrustes_rotation(embeds[p], target);
    // The identity is a candidate rotation, so alignment never moves away.
    if ((aligned - target).norm() > (embeds[p] - target).norm()) aligned = embeds[p];
    out.push_back(std::move(aligned));
  }
  return out;
}

Eigen::MatrixXd align_to_consensus(const Eigen::MatrixXd& zg, const Eigen::MatrixXd& zbar) {
  const double sb = zbar.squaredNorm();
  if (!(sb > 0.0)) fail(Errc::zero_consensus, "consensus matrix is zero");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(zbar.transpose() * zg,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = svd.singularValues().sum() / sb;
  if (!(scale > 0.0)) fail(Errc::zero_consensus, "latent matrix is orthogonal to the consensus");
  return zg * svd.matrixV() * svd.matrixU().transpose() / scale;
}

std::vector<std::vector<double>> latent_distance_posterior(const PosteriorSamples& samples, int p,
                                                           int q) {
  if (!samples.hierarchical) fail(Errc::not_hierarchical, "samples carry no consensus matrix");
  const int g = samples.groups();
  if (p < 0 || q < 0 || p >= g || q >= g) fail(Errc::invalid_argument, "group out of range");
  const int n = samples.n;
  std::vector<std::vector<double>> out(n, std::vector<double>(samples.draws.size(), 0.0));
  if (p == q) return out;
  for (std::size_t d = 0; d < samples.draws.size(); ++d) {
    const auto& s = samples.draws[d];
    const Eigen::MatrixXd a = align_to_consensus(s.z[p], s.zbar);
    const Eigen::MatrixXd b = align_to_consensus(s.z[q], s.zbar);
    for (int i = 0; i < n; ++i) out[i][d] = (a.row(i) - b.row(i)).norm();
  }
  return out;
}

double default_fdr_threshold(const std::vector<std::vector<double>>& distances) {
  if (distances.empty()) fail(Errc::invalid_argument, "no vertices");
  std::vector<double> means;
  for (const auto& row : distances) {
    if (row.empty()) fail(Errc::invalid_argument, "no draws");
    means.push_back(std::accumulate(row.begin(), row.end(), 0.0) / row.size());
  }
  std::sort(means.begin(), means.end());
  const std::size_t h = means.size() / 2;
  return means.size() % 2 ? means[h] : 0.5 * (means[h - 1] + means[h]);
}

std::vector<double> signal_probabilities(const std::vector<std::vector<double>>& distances,
                                         double tau) {
  std::vector<double> v;
  for (const auto& row : distances) {
    if (row.empty()) fail(Errc::invalid_argument, "no draws");
    const auto above = std::count_if(row.begin(), row.end(), [&](double x) { return x > tau; });
    v.push_back(static_cast<double>(above) / row.size());
  }
  return v;
}

std::vector<int> bayesian_fdr_select(std::span<const double> v, double level) {
  for (double x : v)
    if (!(x >= 0.0 && x <= 1.0)) fail(Errc::invalid_argument, "probabilities must lie in [0, 1]");
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  std::size_t best = 0;
  double complement = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    complement += 1.0 - v[order[k - 1]];
    const double bound = level * static_cast<double>(k);
    if (complement <= bound + 1e-12 * static_cast<double>(k)) best = k;
  }
  std::vector<int> out(order.begin(), order.begin() + best);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

Classification finish(std::vector<int> predicted, std::span<const int> truth, int classes) {
  Classification c;
  c.confusion = Eigen::MatrixXi::Zero(classes, classes);
  int correct = 0;
  for (std::size_t s = 0; s < truth.size(); ++s) {
    c.confusion(truth[s], predicted[s]) += 1;
    if (truth[s] == predicted[s]) ++correct;
  }
  c.accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / truth.size();
  c.predicted = std::move(predicted);
  return c;
}

void check_labels(std::span<const int> labels, int classes) {
  for (int l : labels)
    if (l < 0 || l >= classes) fail(Errc::invalid_argument, "label out of range");
}

}  // namespace

Classification ml_classify(std::span<const SubjectFeatures> features, std::span<const int> truth,
                           std::span<const Eigen::MatrixXd> lambda_hats) {
  if (features.size() != truth.size())
    fail(Errc::shape_mismatch, "one label per subject is required");
  if (lambda_hats.empty()) fail(Errc::invalid_argument, "no groups");
  const int classes = static_cast<int>(lambda_hats.size());
  check_labels(truth, classes);
  std::vector<int> predicted;
  for (const auto& f : features) {
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < classes; ++g) {
      const double v = subject_loglik(lambda_hats[g], f);
      if (v > best_value) {
        best_value = v;
        best = g;
      }
    }
    predicted.push_back(best);
  }
  return finish(std::move(predicted), truth, classes);
}

Classification knn_classify(const Eigen::MatrixXd& dist, std::span<const int> labels, int k) {
  const auto s = static_cast<int>(dist.rows());
  if (dist.cols() != s || static_cast<int>(labels.size()) != s)
    fail(Errc::shape_mismatch, "distance matrix and labels disagree");
  if (k < 1 || k >= s) fail(Errc::bad_k, "k must satisfy 1 <= k < number of subjects");
  int classes = 0;
  for (int l : labels) {
    if (l < 0) fail(Errc::invalid_argument, "labels must be nonnegative");
    classes = std::max(classes, l + 1);
  }
  std::vector<int> predicted;
  std::vector<int> others;
  std::vector<int> votes(classes);
  for (int i = 0; i < s; ++i) {
    others.clear();
    for (int j = 0; j < s; ++j)
      if (j != i) others.push_back(j);
    std::stable_sort(others.begin(), others.end(),
                     [&](int a, int b) { return dist(i, a) < dist(i, b); });
    std::fill(votes.begin(), votes.end(), 0);
    for (int t = 0; t < k; ++t) ++votes[labels[others[t]]];
    predicted.push_back(static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin()));
  }
  return finish(std::move(predicted), labels, classes);
}

Eigen::MatrixXd bottleneck_matrix(std::span<const SubjectFeatures> features,
                                  std::span<const int> dims) {
  const auto s = static_cast<int>(features.size());
  std::vector<std::vector<std::vector<Bar>>> diagrams(s);
  for (int i = 0; i < s; ++i)
    for (int d : dims) diagrams[i].push_back(features[i].diagram(d));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = i + 1; j < s; ++j) {
      double v = 0.0;
      for (std::size_t d = 0; d < dims.size(); ++d)
        v += bottleneck_distance(diagrams[i][d], diagrams[j][d]);
      out(i, j) = out(j, i) = v;
    }
  return out;
}

}  // namespace phgm
