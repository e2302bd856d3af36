#include "phgm/phgm.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "phgm/analysis.hpp"
#include "phgm/error.hpp"
#include "phgm/events.hpp"
#include "phgm/inference.hpp"
#include "phgm/io.hpp"
#include "phgm/pipeline.hpp"
#include "phgm/simulate.hpp"

struct phgm_features {
  phgm::SubjectFeatures f;
};

struct phgm_dataset {
  phgm::GroupedData data;
};

struct phgm_fit {
  phgm::PosteriorSamples samples;
};

namespace {

using json = nlohmann::json;

thread_local std::string last_error;

phgm_status set_error(phgm_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs fn, translating exceptions into status codes.
template <class F>
phgm_status guard(F&& fn) {
  try {
    fn();
    last_error.clear();
    return PHGM_OK;
  } catch (const phgm::Error& e) {
    return set_error(static_cast<phgm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PHGM_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PHGM_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = phgm::io::parse_json(text, "options");
  if (!j.is_object()) phgm::fail(phgm::Errc::invalid_argument, "options must be a JSON object");
  return j;
}

void need(const void* p, const char* what) {
  if (!p) phgm::fail(phgm::Errc::invalid_argument, std::string(what) + " is null");
}

Eigen::MatrixXd row_major(const double* data, std::size_t rows, std::size_t cols) {
  need(data, "data");
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = data[i * cols + c];
  return m;
}

template <class F>
phgm_status command(const char* options_json, const char* out_dir, char** summary, F&& run) {
  return guard([&] {
    need(out_dir, "out_dir");
    const json s = run(parse_options(options_json), std::filesystem::path(out_dir));
    if (summary) *summary = dup_string(s.dump());
  });
}

}  // namespace

extern "C" {

const char* phgm_version(void) { return "1.0.0"; }

const char* phgm_status_name(phgm_status status) {
  if (status == PHGM_OK) return "ok";
  if (status == PHGM_INTERNAL) return "internal";
  return phgm::errc_name(static_cast<phgm::Errc>(status));
}

const char* phgm_last_error(void) { return last_error.c_str(); }

void phgm_free_string(char* s) { std::free(s); }

phgm_status phgm_features_extract(const double* data, size_t rows, size_t cols,
                                  phgm_input_kind kind, const char* options_json,
                                  phgm_features** out) {
  return guard([&] {
    need(out, "out");
    const json o = parse_options(options_json);
    const Eigen::MatrixXd raw = row_major(data, rows, cols);
    phgm::DistanceMatrix d;
    switch (kind) {
      case PHGM_INPUT_POINTS: d = phgm::pairwise_distances(phgm::PointCloud{raw}); break;
      case PHGM_INPUT_DISTANCES: d = phgm::DistanceMatrix(raw); break;
      case PHGM_INPUT_CONNECTIVITY:
        d = phgm::pairwise_distances(phgm::laplacian_eigenmap(raw, o.value("embed_dim", 3)));
        break;
      default: phgm::fail(phgm::Errc::invalid_argument, "unknown input kind");
    }
    phgm::ExtractOptions eo;
    eo.death_scale = o.value("death_scale", eo.death_scale);
    eo.max_radius = o.value("max_radius", eo.max_radius);
    eo.source = o.value("source", std::string());
    *out = new phgm_features{phgm::extract_features(d, eo)};
  });
}

phgm_status phgm_features_read(const char* path, phgm_features** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new phgm_features{phgm::io::read_features(path)};
  });
}

phgm_status phgm_features_write(const phgm_features* f, const char* path) {
  return guard([&] {
    need(f, "features");
    need(path, "path");
    phgm::io::write_features(path, f->f);
  });
}

phgm_status phgm_features_to_json(const phgm_features* f, char** out) {
  return guard([&] {
    need(f, "features");
    need(out, "out");
    *out = dup_string(phgm::io::features_to_json(f->f).dump());
  });
}

phgm_status phgm_features_from_json(const char* text, phgm_features** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    phgm::SubjectFeatures f = phgm::io::features_from_json(phgm::io::parse_json(text, "features"));
    phgm::check_features(f, false);
    *out = new phgm_features{std::move(f)};
  });
}

int phgm_features_n(const phgm_features* f) { return f ? f->f.n : 0; }

size_t phgm_features_loop_count(const phgm_features* f) { return f ? f->f.loops.size() : 0; }

phgm_status phgm_features_loglik(const phgm_features* f, const double* lambda, size_t n,
                                 double* out) {
  return guard([&] {
    need(f, "features");
    need(out, "out");
    if (static_cast<int>(n) != f->f.n)
      phgm::fail(phgm::Errc::shape_mismatch, "rate matrix does not match the features");
    *out = phgm::subject_loglik(row_major(lambda, n, n), f->f);
  });
}

void phgm_features_free(phgm_features* f) { delete f; }

phgm_status phgm_bottleneck_distance(const phgm_features* a, const phgm_features* b, int dim,
                                     double* out) {
  return guard([&] {
    need(a, "a");
    need(b, "b");
    need(out, "out");
    if (dim != 0 && dim != 1) phgm::fail(phgm::Errc::invalid_argument, "dim must be 0 or 1");
    const auto da = a->f.diagram(dim), db = b->f.diagram(dim);
    *out = phgm::bottleneck_distance(da, db);
  });
}

phgm_status phgm_simulate_from_model(const double* lambda, size_t n, int subjects, uint64_t seed,
                                     phgm_features** out_array) {
  return guard([&] {
    need(out_array, "out_array");
    auto feats = phgm::simulate_from_model(row_major(lambda, n, n), subjects, seed);
    for (std::size_t s = 0; s < feats.size(); ++s) out_array[s] = new phgm_features{std::move(feats[s])};
  });
}

phgm_status phgm_dataset_new(phgm_dataset** out) {
  return guard([&] {
    need(out, "out");
    *out = new phgm_dataset{};
  });
}

phgm_status phgm_dataset_add(phgm_dataset* d, const char* group, const phgm_features* f) {
  return guard([&] {
    need(d, "dataset");
    need(group, "group");
    need(f, "features");
    auto& data = d->data;
    if (!data.groups.empty() && data.groups.front().front().n != f->f.n)
      phgm::fail(phgm::Errc::shape_mismatch, "subject vertex count differs from the dataset");
    std::size_t g = 0;
    while (g < data.labels.size() && data.labels[g] != group) ++g;
    if (g == data.labels.size()) {
      data.labels.emplace_back(group);
      data.groups.emplace_back();
    }
    data.groups[g].push_back(f->f);
  });
}

phgm_status phgm_dataset_read(const char* manifest_path, phgm_dataset** out) {
  return guard([&] {
    need(manifest_path, "manifest_path");
    need(out, "out");
    *out = new phgm_dataset{phgm::pipeline::load_dataset(manifest_path)};
  });
}

size_t phgm_dataset_groups(const phgm_dataset* d) { return d ? d->data.groups.size() : 0; }

size_t phgm_dataset_subjects(const phgm_dataset* d) { return d ? d->data.subjects() : 0; }

void phgm_dataset_free(phgm_dataset* d) { delete d; }

phgm_status phgm_fit_run(const phgm_dataset* d, const char* options_json, phgm_fit** out) {
  return guard([&] {
    need(d, "dataset");
    need(out, "out");
    const json o = parse_options(options_json);
    const phgm::ModelConfig mc = phgm::pipeline::model_config(o);
    const phgm::SamplerConfig sc = phgm::pipeline::sampler_config(o);
    const phgm::LatentState init = phgm::warm_start(d->data, mc, sc.seed);
    auto fit = std::make_unique<phgm_fit>();
    fit->samples = phgm::nuts_sample(d->data, mc, sc, init);
    *out = fit.release();
  });
}

phgm_status phgm_fit_map(const phgm_dataset* d, const char* options_json, phgm_fit** out) {
  return guard([&] {
    need(d, "dataset");
    need(out, "out");
    const json o = parse_options(options_json);
    const phgm::ModelConfig mc = phgm::pipeline::model_config(o);
    const phgm::Posterior post(d->data, mc);
    auto fit = std::make_unique<phgm_fit>();
    auto& s = fit->samples;
    s.draws.push_back(phgm::warm_start(d->data, mc, o.value("seed", std::uint64_t{0})));
    s.n = post.n();
    s.m = mc.m;
    s.hierarchical = mc.hierarchical;
    s.labels = d->data.labels;
    s.log_post.push_back(post.log_density(s.draws.back(), nullptr));
    s.accept_stat.push_back(1.0);
    s.depth.push_back(0);
    s.divergent.push_back(false);
    s.cone_exit.push_back(false);
    s.energy_error.push_back(0.0);
    *out = fit.release();
  });
}

phgm_status phgm_fit_write_draws(const phgm_fit* f, const char* path) {
  return guard([&] {
    need(f, "fit");
    need(path, "path");
    phgm::io::write_file(path, phgm::io::draws_to_jsonl(f->samples));
  });
}

phgm_status phgm_fit_read_draws(const char* path, phgm_fit** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto fit = std::make_unique<phgm_fit>();
    fit->samples = phgm::io::draws_from_jsonl(phgm::io::read_file(path), path);
    *out = fit.release();
  });
}

int phgm_fit_n(const phgm_fit* f) { return f ? f->samples.n : 0; }

int phgm_fit_groups(const phgm_fit* f) { return f ? f->samples.groups() : 0; }

size_t phgm_fit_draws(const phgm_fit* f) { return f ? f->samples.draws.size() : 0; }

phgm_status phgm_fit_lambda_mean(const phgm_fit* f, int group, double* out) {
  return guard([&] {
    need(f, "fit");
    need(out, "out");
    const Eigen::MatrixXd l = phgm::posterior_mean_lambda(f->samples, group);
    for (Eigen::Index i = 0; i < l.rows(); ++i)
      for (Eigen::Index c = 0; c < l.cols(); ++c) out[i * l.cols() + c] = l(i, c);
  });
}

void phgm_fit_free(phgm_fit* f) { delete f; }

phgm_status phgm_fdr_select(const double* probs, size_t len, double level, int* out,
                            size_t* count) {
  return guard([&] {
    need(count, "count");
    if (len > 0) {
      need(probs, "probs");
      need(out, "out");
    }
    const auto sel = phgm::bayesian_fdr_select(std::span<const double>(probs, len), level);
    std::copy(sel.begin(), sel.end(), out);
    *count = sel.size();
  });
}

phgm_status phgm_cmd_simulate(const char* kind, const char* options_json, const char* out_dir,
                              char** summary_json) {
  return command(options_json, out_dir, summary_json, [&](const json& o, const auto& out) {
    need(kind, "kind");
    return phgm::pipeline::simulate(kind, o, out);
  });
}

phgm_status phgm_cmd_extract(const char* options_json, const char* out_dir, char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::extract);
}

phgm_status phgm_cmd_fit(const char* options_json, const char* out_dir, char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::fit);
}

phgm_status phgm_cmd_diagnose(const char* options_json, const char* out_dir, char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::diagnose);
}

phgm_status phgm_cmd_analyze(const char* options_json, const char* out_dir, char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::analyze);
}

phgm_status phgm_cmd_classify(const char* options_json, const char* out_dir, char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::classify);
}

phgm_status phgm_cmd_bottleneck_knn(const char* options_json, const char* out_dir,
                                    char** summary_json) {
  return command(options_json, out_dir, summary_json, phgm::pipeline::bottleneck_knn);
}

}  // extern "C"
