#include "phgm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "phgm/analysis.hpp"
#include "phgm/error.hpp"
#include "phgm/events.hpp"
#include "phgm/io.hpp"
#include "phgm/rng.hpp"
#include "phgm/simulate.hpp"

namespace phgm::pipeline {

namespace {

template <class T>
T get(const json& opts, const char* key, T fallback) {
  if (!opts.contains(key) || opts[key].is_null()) return fallback;
  try {
    return opts[key].get<T>();
  } catch (const json::exception&) {
    fail(Errc::invalid_argument, std::string("option '") + key + "' has the wrong type");
  }
}

template <class T>
T require(const json& opts, const char* key) {
  if (!opts.contains(key) || opts[key].is_null())
    fail(Errc::invalid_argument, std::string("missing required option '") + key + "'");
  return get<T>(opts, key, T{});
}

std::string two_digits(std::size_t i, std::size_t count) {
  const std::size_t width = std::max<std::size_t>(2, std::to_string(count).size());
  std::string s = std::to_string(i);
  return std::string(width - std::min(width, s.size()), '0') + s;
}

std::string relative_to(const fs::path& target, const fs::path& base) {
  std::error_code ec;
  const fs::path rel = fs::relative(fs::absolute(target), fs::absolute(base), ec);
  return (ec || rel.empty() ? fs::absolute(target) : rel).generic_string();
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() ? p : base / p;
}

json model_json(const ModelConfig& c) {
  return {{"m", c.m},
          {"alpha", c.alpha},
          {"kappa_shape", c.kappa_shape},
          {"kappa_scale", c.kappa_scale},
          {"kappa0", c.kappa0},
          {"hierarchical", c.hierarchical}};
}

json sampler_json(const SamplerConfig& c) {
  return {{"n_warmup", c.n_warmup},
          {"n_samples", c.n_samples},
          {"target_accept", c.target_accept},
          {"max_tree_depth", c.max_tree_depth},
          {"seed", c.seed},
          {"init_step", c.init_step}};
}

struct FitDir {
  json meta;
  PosteriorSamples samples;
  fs::path features;  // manifest used for the fit
};

FitDir read_fit(const fs::path& dir) {
  FitDir f;
  f.meta = io::parse_json(io::read_file(dir / "fit.json"), (dir / "fit.json").string());
  f.samples = io::draws_from_jsonl(io::read_file(dir / "draws.jsonl"), (dir / "draws.jsonl").string());
  f.samples.labels = f.meta.value("labels", std::vector<std::string>{});
  f.samples.step_size = f.meta.value("step_size", 0.0);
  if (f.meta.contains("features")) f.features = resolve(f.meta["features"].get<std::string>(), dir);
  return f;
}

json diagnostics_summary(const ChainDiagnostics& d, const PosteriorSamples& s) {
  std::vector<double> ess;
  for (const auto& e : d.elements)
    if (!e.series.zero_variance) ess.push_back(e.series.ess);
  std::sort(ess.begin(), ess.end());
  json lags = json::array();
  for (int lag = 0; lag <= d.lag_max; ++lag) lags.push_back(d.median_abs_acf(lag));
  return {{"draws", s.draws.size()},
          {"lag_max", d.lag_max},
          {"median_abs_acf", lags},
          {"ess_min", ess.empty() ? 0.0 : ess.front()},
          {"ess_median", ess.empty() ? 0.0 : ess[ess.size() / 2]},
          {"log_post_ess", d.log_post.ess},
          {"mean_accept", d.mean_accept},
          {"mean_depth", d.mean_depth},
          {"divergences", d.divergences},
          {"cone_exits", d.cone_exits},
          {"zero_variance_elements", d.zero_variance},
          {"step_size", s.step_size}};
}

// Writes the diagnostics tables; returns the summary.
json write_diagnostics(const PosteriorSamples& s, int lag_max, const fs::path& out, bool plots) {
  const ChainDiagnostics d = diagnostics(s, lag_max);
  const std::vector<int> lags = [&] {
    std::vector<int> v;
    for (int l : {1, 2, 5, 10, 20, 40})
      if (l <= lag_max) v.push_back(l);
    return v;
  }();
  std::string csv = "group,j,k,zero_variance,ess";
  for (int l : lags) csv += ",acf_" + std::to_string(l);
  csv += '\n';
  for (const auto& e : d.elements) {
    csv += std::to_string(e.group) + "," + std::to_string(e.j) + "," + std::to_string(e.k) + "," +
           (e.series.zero_variance ? "1" : "0") + "," + io::format_double(e.series.ess);
    for (int l : lags) csv += "," + io::format_double(e.series.acf[l]);
    csv += '\n';
  }
  io::write_file(out / "diagnostics.csv", csv);

  std::string summary_csv = "lag,min,q25,median,q75,max\n";
  std::vector<double> v;
  for (int lag = 0; lag <= lag_max; ++lag) {
    v.clear();
    for (const auto& e : d.elements)
      if (!e.series.zero_variance) v.push_back(e.series.acf[lag]);
    std::sort(v.begin(), v.end());
    auto q = [&](double p) { return v.empty() ? 0.0 : v[static_cast<std::size_t>(p * (v.size() - 1))]; };
    summary_csv += std::to_string(lag) + "," + io::format_double(q(0.0)) + "," +
                   io::format_double(q(0.25)) + "," + io::format_double(q(0.5)) + "," +
                   io::format_double(q(0.75)) + "," + io::format_double(q(1.0)) + "\n";
  }
  io::write_file(out / "acf_summary.csv", summary_csv);

  std::string trace = "draw,log_post,log_kappa,accept_stat,depth,divergent,cone_exit\n";
  for (std::size_t i = 0; i < s.draws.size(); ++i)
    trace += std::to_string(i) + "," + io::format_double(s.log_post[i]) + "," +
             io::format_double(s.draws[i].log_kappa) + "," + io::format_double(s.accept_stat[i]) +
             "," + std::to_string(s.depth[i]) + "," + (s.divergent[i] ? "1" : "0") + "," +
             (i < s.cone_exit.size() && s.cone_exit[i] ? "1" : "0") + "\n";
  io::write_file(out / "trace.csv", trace);

  const json summary = diagnostics_summary(d, s);
  if (plots) {
    std::vector<double> median_acf = summary["median_abs_acf"].get<std::vector<double>>();
    io::write_file(out / "acf.svg", io::svg_bars(median_acf, "median |ACF| of lambda elements by lag"));
    std::vector<io::Series> traces{{"log posterior", s.log_post}};
    io::write_file(out / "trace_log_post.svg", io::svg_lines(traces, "log posterior trace"));
    if (s.n > 1) {
      std::vector<double> elem;
      for (const auto& st : s.draws) elem.push_back(st.z[0].row(0).dot(st.z[0].row(1)));
      io::write_file(out / "trace_lambda.svg",
                     io::svg_lines({{"lambda_{1,2} group 1", elem}}, "trace of one lambda element"));
    }
  }
  return summary;
}

std::vector<std::string> default_labels(std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t g = 0; g < count; ++g) out.push_back("g" + std::to_string(g + 1));
  return out;
}

}  // namespace

Manifest read_manifest(const fs::path& path) {
  const json j = io::parse_json(io::read_file(path), path.string());
  Manifest m;
  const fs::path base = path.parent_path();
  try {
    m.kind = j.at("kind").get<std::string>();
    for (const auto& g : j.at("groups")) {
      m.labels.push_back(g.at("label").get<std::string>());
      std::vector<fs::path> files;
      for (const auto& f : g.at("files")) files.push_back(resolve(f.get<std::string>(), base));
      m.files.push_back(std::move(files));
    }
    if (j.contains("extra")) m.extra = j["extra"];
  } catch (const json::exception& e) {
    fail(Errc::parse, path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json groups = json::array();
  const fs::path base = path.parent_path();
  for (std::size_t g = 0; g < m.labels.size(); ++g) {
    json files = json::array();
    for (const auto& f : m.files[g]) files.push_back(relative_to(f, base));
    groups.push_back({{"label", m.labels[g]}, {"files", files}});
  }
  json j = {{"kind", m.kind}, {"groups", groups}};
  if (!m.extra.empty()) j["extra"] = m.extra;
  io::write_file(path, j.dump(2) + "\n");
}

GroupedData load_dataset(const fs::path& manifest_path) {
  const Manifest m = read_manifest(manifest_path);
  if (m.kind != "features")
    fail(Errc::invalid_argument, manifest_path.string() + " does not list features files");
  GroupedData data;
  data.labels = m.labels;
  for (const auto& files : m.files) {
    std::vector<SubjectFeatures> group;
    for (const auto& f : files) group.push_back(io::read_features(f));
    data.groups.push_back(std::move(group));
  }
  data.n();
  return data;
}

ModelConfig model_config(const json& opts) {
  ModelConfig c;
  c.m = get(opts, "m", c.m);
  c.alpha = get(opts, "alpha", c.alpha);
  c.kappa_shape = get(opts, "kappa_shape", c.kappa_shape);
  c.kappa_scale = get(opts, "kappa_scale", c.kappa_scale);
  c.kappa0 = get(opts, "kappa0", c.kappa0);
  c.hierarchical = get(opts, "hierarchical", c.hierarchical);
  c.validate();
  return c;
}

SamplerConfig sampler_config(const json& opts) {
  SamplerConfig c;
  c.n_warmup = get(opts, "n_warmup", c.n_warmup);
  c.n_samples = get(opts, "n_samples", c.n_samples);
  c.target_accept = get(opts, "target_accept", c.target_accept);
  c.max_tree_depth = get(opts, "max_tree_depth", c.max_tree_depth);
  c.seed = get<std::uint64_t>(opts, "seed", c.seed);
  c.init_step = get(opts, "init_step", c.init_step);
  c.validate();
  return c;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

json simulate(const std::string& kind, const json& opts, const fs::path& out) {
  Manifest m;
  json summary = {{"kind", kind}};
  if (kind == "gaussian-groups") {
    GroupSimSpec spec;
    spec.n = get(opts, "n", spec.n);
    spec.subjects_per_group = get(opts, "subjects", spec.subjects_per_group);
    spec.delta = require<double>(opts, "delta");
    spec.cluster_sd = get(opts, "cluster_sd", spec.cluster_sd);
    spec.noise_sd = get(opts, "noise_sd", spec.noise_sd);
    spec.seed = get<std::uint64_t>(opts, "seed", spec.seed);
    const GroupSimulation sim = simulate_gaussian_groups(spec);
    m.kind = "points";
    m.labels = default_labels(sim.groups.size());
    for (std::size_t g = 0; g < sim.groups.size(); ++g) {
      std::vector<fs::path> files;
      for (std::size_t s = 0; s < sim.groups[g].size(); ++s) {
        const fs::path f = out / (m.labels[g] + "_s" + two_digits(s + 1, sim.groups[g].size()) + ".csv");
        io::write_file(f, io::matrix_to_csv(sim.groups[g][s].points));
        files.push_back(f);
      }
      m.files.push_back(std::move(files));
    }
    json oracles = json::array();
    for (const auto& o : sim.oracles) oracles.push_back(io::matrix_to_json(o));
    m.extra = {{"switched", sim.switched}, {"oracles", oracles}};
    summary["switched"] = sim.switched;
  } else if (kind == "circles") {
    CircleSpec spec;
    spec.n = get(opts, "n", spec.n);
    spec.subjects = get(opts, "subjects", spec.subjects);
    spec.r1 = get(opts, "r1", spec.r1);
    spec.r2 = get(opts, "r2", spec.r2);
    spec.noise_sd = get(opts, "noise_sd", spec.noise_sd);
    spec.random_angles = get(opts, "random_angles", spec.random_angles);
    spec.seed = get<std::uint64_t>(opts, "seed", spec.seed);
    const auto clouds = simulate_circles(spec);
    m.kind = "points";
    m.labels = {get<std::string>(opts, "label", "circles")};
    std::vector<fs::path> files;
    for (std::size_t s = 0; s < clouds.size(); ++s) {
      const fs::path f = out / ("circles_s" + two_digits(s + 1, clouds.size()) + ".csv");
      io::write_file(f, io::matrix_to_csv(clouds[s].points));
      files.push_back(f);
    }
    m.files.push_back(std::move(files));
  } else if (kind == "from-model") {
    std::vector<std::string> lambdas;
    if (opts.contains("lambda") && opts["lambda"].is_string())
      lambdas.push_back(opts["lambda"].get<std::string>());
    else
      lambdas = require<std::vector<std::string>>(opts, "lambda");
    if (lambdas.empty()) fail(Errc::invalid_argument, "missing required option 'lambda'");
    const int subjects = get(opts, "subjects", 10);
    const auto seed = get<std::uint64_t>(opts, "seed", 0);
    m.kind = "features";
    m.labels = default_labels(lambdas.size());
    for (std::size_t g = 0; g < lambdas.size(); ++g) {
      const Eigen::MatrixXd lambda0 = io::read_csv(lambdas[g], get(opts, "header", false));
      const auto feats = simulate_from_model(lambda0, subjects, Rng(seed, {14, g})());
      std::vector<fs::path> files;
      for (std::size_t s = 0; s < feats.size(); ++s) {
        const fs::path f = out / (m.labels[g] + "_s" + two_digits(s + 1, feats.size()) + ".json");
        io::write_features(f, feats[s]);
        files.push_back(f);
      }
      m.files.push_back(std::move(files));
    }
  } else {
    fail(Errc::invalid_argument, "unknown simulation kind '" + kind + "'");
  }
  write_manifest(out / "manifest.json", m);
  std::size_t count = 0;
  for (const auto& f : m.files) count += f.size();
  summary["files"] = count;
  summary["manifest"] = "manifest.json";
  return summary;
}

json extract(const json& opts, const fs::path& out) {
  Manifest in;
  const std::string kind_opt = get<std::string>(opts, "input_kind", "");
  if (opts.contains("input") && !opts["input"].is_null()) {
    in = read_manifest(get<std::string>(opts, "input", ""));
  } else {
    const auto inputs = get<std::vector<std::string>>(opts, "inputs", {});
    if (inputs.empty()) fail(Errc::invalid_argument, "no inputs: pass a manifest or CSV files");
    in.kind = "points";
    in.labels = {get<std::string>(opts, "group", "g1")};
    in.files.emplace_back(inputs.begin(), inputs.end());
  }
  if (!kind_opt.empty()) in.kind = kind_opt;
  if (in.kind != "points" && in.kind != "distances" && in.kind != "connectivity")
    fail(Errc::invalid_argument, "input kind must be points, distances or connectivity");

  ExtractOptions eo;
  eo.death_scale = get(opts, "death_scale", eo.death_scale);
  eo.max_radius = get(opts, "max_radius", eo.max_radius);
  const int embed_dim = get(opts, "embed_dim", 3);
  const bool header = get(opts, "header", false);
  const int threads = get(opts, "threads", 0);

  struct Job {
    std::size_t group;
    fs::path input, output;
  };
  std::vector<Job> jobs;
  Manifest res;
  res.kind = "features";
  res.labels = in.labels;
  res.extra = in.extra;
  for (std::size_t g = 0; g < in.files.size(); ++g) {
    std::vector<fs::path> outs;
    for (const auto& f : in.files[g]) {
      const fs::path o = out / in.labels[g] / (f.stem().string() + ".json");
      jobs.push_back({g, f, o});
      outs.push_back(o);
    }
    res.files.push_back(std::move(outs));
  }
  std::vector<std::size_t> loops(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const std::string name = job.input.string();
    const Eigen::MatrixXd raw = io::read_csv(job.input, header);
    DistanceMatrix d;
    try {
      if (in.kind == "points") d = pairwise_distances(PointCloud{raw});
      else if (in.kind == "distances") d = DistanceMatrix(raw);
      else d = pairwise_distances(laplacian_eigenmap(raw, embed_dim));
    } catch (const Error& e) {
      fail(e.code(), name + ": " + e.what());
    }
    ExtractOptions local = eo;
    local.source = job.input.filename().string();
    const SubjectFeatures f = extract_features(d, local);
    io::write_features(job.output, f);
    std::string diag;
    {
      auto h0 = f.diagram(0), h1 = f.diagram(1);
      h0.insert(h0.end(), h1.begin(), h1.end());
      diag = io::diagram_to_csv(h0);
    }
    io::write_file(job.output.parent_path() / (job.input.stem().string() + ".diagram.csv"), diag);
    loops[i] = f.loops.size();
  });
  write_manifest(out / "manifest.json", res);
  return {{"subjects", jobs.size()},
          {"loops", std::accumulate(loops.begin(), loops.end(), std::size_t{0})},
          {"manifest", "manifest.json"}};
}

json fit(const json& opts, const fs::path& out) {
  const fs::path input = require<std::string>(opts, "input");
  const ModelConfig mc = model_config(opts);
  const SamplerConfig sc = sampler_config(opts);
  const GroupedData data = load_dataset(input);
  WarmStartOptions wo;
  wo.max_iter = get(opts, "warm_max_iter", wo.max_iter);
  std::vector<double> trace;
  const LatentState init = warm_start(data, mc, sc.seed, &trace, wo);
  PosteriorSamples samples = nuts_sample(data, mc, sc, init);
  samples.labels = data.labels;

  json map = io::state_to_json(init);
  map["log_post"] = trace.back();
  map["iterations"] = trace.size() - 1;
  io::write_file(out / "map.json", map.dump() + "\n");
  io::write_file(out / "draws.jsonl", io::draws_to_jsonl(samples));
  json diag;
  if (samples.draws.size() >= 10)
    diag = write_diagnostics(samples, std::min<int>(get(opts, "lag_max", 40),
                                                    static_cast<int>(samples.draws.size()) - 1),
                             out, false);
  const int divergences =
      static_cast<int>(std::count(samples.divergent.begin(), samples.divergent.end(), true));
  const int cone_exits =
      static_cast<int>(std::count(samples.cone_exit.begin(), samples.cone_exit.end(), true));
  const double mean_accept =
      std::accumulate(samples.accept_stat.begin(), samples.accept_stat.end(), 0.0) /
      samples.accept_stat.size();
  json meta = {{"labels", data.labels},
               {"n", data.n()},
               {"m", mc.m},
               {"hierarchical", mc.hierarchical},
               {"features", relative_to(input, out)},
               {"model", model_json(mc)},
               {"sampler", sampler_json(sc)},
               {"step_size", samples.step_size},
               {"warmup_divergences", samples.warmup_divergences},
               {"divergences", divergences},
               {"warmup_cone_exits", samples.warmup_cone_exits},
               {"cone_exits", cone_exits},
               {"mean_accept", mean_accept},
               {"draws", samples.draws.size()},
               {"map_log_post", trace.back()},
               {"map_iterations", trace.size() - 1}};
  io::write_file(out / "fit.json", meta.dump(2) + "\n");
  json summary = meta;
  summary["diagnostics"] = diag;
  return summary;
}

json diagnose(const json& opts, const fs::path& out) {
  const FitDir f = read_fit(require<std::string>(opts, "fit"));
  const int lag_max = std::min<int>(get(opts, "lag_max", 40), static_cast<int>(f.samples.draws.size()) - 1);
  const json summary = write_diagnostics(f.samples, lag_max, out, get(opts, "plots", true));
  io::write_file(out / "diagnostics.json", summary.dump(2) + "\n");
  return summary;
}

json analyze(const json& opts, const fs::path& out) {
  const fs::path fit_dir = require<std::string>(opts, "fit");
  const FitDir f = read_fit(fit_dir);
  const PosteriorSamples& s = f.samples;
  const int groups = s.groups();
  std::vector<std::string> labels = s.labels.size() == static_cast<std::size_t>(groups)
                                        ? s.labels
                                        : default_labels(groups);
  const int rank = get(opts, "rank", 2);
  const int ref = get(opts, "ref", 0);
  const double level = get(opts, "fdr_level", 0.1);
  const bool plots = get(opts, "plots", true);
  const std::vector<int> highlight = get<std::vector<int>>(opts, "highlight", {});
  std::vector<int> category(s.n, 0);
  for (int v : highlight)
    if (v >= 0 && v < s.n) category[v] = 3;

  json report = {{"n", s.n}, {"groups", labels}, {"draws", s.draws.size()}, {"rank", rank}};
  std::vector<Eigen::MatrixXd> lambda_hats, embeds;
  for (int p = 0; p < groups; ++p) {
    lambda_hats.push_back(posterior_mean_lambda(s, p));
    embeds.push_back(truncated_embed(lambda_hats.back(), rank));
    io::write_file(out / ("lambda_hat_" + labels[p] + ".csv"), io::matrix_to_csv(lambda_hats.back()));
  }
  const auto aligned = align_groups(embeds, ref);
  std::vector<std::string> cols;
  for (int c = 0; c < rank; ++c) cols.push_back("z" + std::to_string(c + 1));
  json emb_files = json::array();
  for (int p = 0; p < groups; ++p) {
    const std::string name = "embedding_" + labels[p] + ".csv";
    io::write_file(out / name, io::matrix_to_csv(aligned[p], cols));
    emb_files.push_back(name);
    if (plots && rank >= 2)
      io::write_file(out / ("embedding_" + labels[p] + ".svg"),
                     io::svg_scatter(aligned[p], category, "latent embedding, " + labels[p]));
  }
  report["embeddings"] = emb_files;

  json contrasts = json::array();
  if (s.hierarchical) {
    for (int p = 0; p < groups; ++p)
      for (int q = p + 1; q < groups; ++q) {
        const auto dist = latent_distance_posterior(s, p, q);
        const double tau = opts.contains("fdr_threshold") && !opts["fdr_threshold"].is_null()
                               ? opts["fdr_threshold"].get<double>()
                               : default_fdr_threshold(dist);
        const auto v = signal_probabilities(dist, tau);
        const auto selected = bayesian_fdr_select(v, level);
        std::string csv = "vertex,mean,q05,q50,q95,signal_prob\n";
        std::vector<std::pair<double, int>> by_mean;
        for (int i = 0; i < s.n; ++i) {
          std::vector<double> row = dist[i];
          std::sort(row.begin(), row.end());
          auto q_at = [&](double a) { return row[static_cast<std::size_t>(a * (row.size() - 1))]; };
          const double mean = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
          by_mean.push_back({-mean, i});
          csv += std::to_string(i) + "," + io::format_double(mean) + "," + io::format_double(q_at(0.05)) +
                 "," + io::format_double(q_at(0.5)) + "," + io::format_double(q_at(0.95)) + "," +
                 io::format_double(v[i]) + "\n";
        }
        const std::string stem = "distance_" + labels[p] + "_" + labels[q];
        io::write_file(out / (stem + ".csv"), csv);
        if (plots) {
          std::sort(by_mean.begin(), by_mean.end());
          std::vector<io::Series> top;
          for (std::size_t k = 0; k < std::min<std::size_t>(20, by_mean.size()); ++k)
            top.push_back({std::to_string(by_mean[k].second), dist[by_mean[k].second]});
          io::write_file(out / (stem + ".svg"),
                         io::svg_violins(top, "latent distance posterior " + labels[p] + " vs " +
                                                  labels[q] + " (top 20 vertices)"));
        }
        contrasts.push_back({{"p", labels[p]},
                             {"q", labels[q]},
                             {"threshold", tau},
                             {"level", level},
                             {"selected", selected}});
      }
  }
  report["contrasts"] = contrasts;

  fs::path features = f.features;
  if (opts.contains("features") && !opts["features"].is_null())
    features = opts["features"].get<std::string>();
  if (!features.empty() && get(opts, "classify", true)) {
    const GroupedData data = load_dataset(features);
    std::vector<SubjectFeatures> subjects;
    std::vector<int> truth;
    for (std::size_t g = 0; g < data.groups.size(); ++g)
      for (const auto& sf : data.groups[g]) {
        subjects.push_back(sf);
        truth.push_back(static_cast<int>(g));
      }
    if (static_cast<int>(data.groups.size()) == groups) {
      const Classification c = ml_classify(subjects, truth, lambda_hats);
      io::write_file(out / "confusion_ml.csv", io::matrix_to_csv(c.confusion, labels));
      report["ml_classification"] = {{"accuracy", c.accuracy}, {"predicted", c.predicted}};
    }
    if (get(opts, "bottleneck_knn", false)) {
      const int k = get(opts, "knn_k", 5);
      const std::vector<int> dims = get<std::vector<int>>(opts, "dims", {0, 1});
      const Eigen::MatrixXd dm = bottleneck_matrix(subjects, dims);
      const Classification c = knn_classify(dm, truth, k);
      io::write_file(out / "confusion_knn.csv", io::matrix_to_csv(c.confusion, labels));
      report["knn_classification"] = {{"k", k}, {"accuracy", c.accuracy}, {"predicted", c.predicted}};
    }
  }
  io::write_file(out / "report.json", report.dump(2) + "\n");
  return report;
}

json classify(const json& opts, const fs::path& out) {
  const double holdout = get(opts, "holdout", 0.0);
  if (!(holdout >= 0.0 && holdout < 1.0)) fail(Errc::invalid_argument, "holdout must lie in [0, 1)");
  fs::path features;
  FitDir fd;
  const bool have_fit = opts.contains("fit") && !opts["fit"].is_null();
  if (have_fit) {
    fd = read_fit(opts["fit"].get<std::string>());
    features = fd.features;
  }
  if (opts.contains("input") && !opts["input"].is_null()) features = opts["input"].get<std::string>();
  if (features.empty()) fail(Errc::invalid_argument, "missing features manifest ('input')");
  const GroupedData data = load_dataset(features);
  const int groups = static_cast<int>(data.groups.size());

  std::vector<SubjectFeatures> test;
  std::vector<int> truth;
  std::vector<Eigen::MatrixXd> lambda_hats;
  json split = json::array();
  if (holdout == 0.0) {
    if (!have_fit) fail(Errc::invalid_argument, "in-sample classification needs a fit directory");
    if (fd.samples.groups() != groups) fail(Errc::shape_mismatch, "fit and features disagree on groups");
    for (int p = 0; p < groups; ++p) lambda_hats.push_back(posterior_mean_lambda(fd.samples, p));
    for (int g = 0; g < groups; ++g)
      for (const auto& sf : data.groups[g]) {
        test.push_back(sf);
        truth.push_back(g);
      }
  } else {
    const auto seed = get<std::uint64_t>(opts, "seed", 0);
    GroupedData train;
    train.labels = data.labels;
    for (int g = 0; g < groups; ++g) {
      const auto& members = data.groups[g];
      std::vector<std::size_t> order(members.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng(seed, {20, static_cast<std::uint64_t>(g)});
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
      const auto n_test = static_cast<std::size_t>(std::floor(holdout * members.size()));
      if (n_test == 0 || n_test >= members.size())
        fail(Errc::invalid_argument, "holdout leaves an empty train or test split");
      std::vector<SubjectFeatures> tr;
      std::vector<std::size_t> held;
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i < n_test) {
          test.push_back(members[order[i]]);
          truth.push_back(g);
          held.push_back(order[i]);
        } else {
          tr.push_back(members[order[i]]);
        }
      }
      std::sort(held.begin(), held.end());
      split.push_back(held);
      train.groups.push_back(std::move(tr));
    }
    ModelConfig mc = model_config(opts);
    mc.hierarchical = false;
    const LatentState map = warm_start(train, mc, seed);
    for (const auto& z : map.z) lambda_hats.push_back(z * z.transpose());
  }
  const Classification c = ml_classify(test, truth, lambda_hats);
  io::write_file(out / "confusion.csv", io::matrix_to_csv(c.confusion, data.labels));
  json result = {{"accuracy", c.accuracy},
                 {"labels", data.labels},
                 {"holdout", holdout},
                 {"predicted", c.predicted},
                 {"truth", truth}};
  if (holdout > 0.0) result["held_out"] = split;
  io::write_file(out / "classify.json", result.dump(2) + "\n");
  return result;
}

json bottleneck_knn(const json& opts, const fs::path& out) {
  const GroupedData data = load_dataset(require<std::string>(opts, "input"));
  const int k = get(opts, "knn_k", 5);
  const std::vector<int> dims = get<std::vector<int>>(opts, "dims", {0, 1});
  for (int d : dims)
    if (d != 0 && d != 1) fail(Errc::invalid_argument, "dims must be 0 and/or 1");
  std::vector<SubjectFeatures> subjects;
  std::vector<int> truth;
  for (std::size_t g = 0; g < data.groups.size(); ++g)
    for (const auto& sf : data.groups[g]) {
      subjects.push_back(sf);
      truth.push_back(static_cast<int>(g));
    }
  const int threads = get(opts, "threads", 0);
  const auto s = subjects.size();
  std::vector<std::vector<std::vector<Bar>>> diagrams(s);
  for (std::size_t i = 0; i < s; ++i)
    for (int d : dims) diagrams[i].push_back(subjects[i].diagram(d));
  Eigen::MatrixXd dm = Eigen::MatrixXd::Zero(s, s);
  parallel_for(s, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < s; ++j) {
      double v = 0.0;
      for (std::size_t d = 0; d < dims.size(); ++d)
        v += bottleneck_distance(diagrams[i][d], diagrams[j][d]);
      dm(i, j) = v;
    }
  });
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j) dm(j, i) = dm(i, j);
  const Classification c = knn_classify(dm, truth, k);
  io::write_file(out / "bottleneck_distances.csv", io::matrix_to_csv(dm));
  io::write_file(out / "confusion.csv", io::matrix_to_csv(c.confusion, data.labels));
  json result = {{"k", k}, {"dims", dims}, {"accuracy", c.accuracy}, {"labels", data.labels},
                 {"predicted", c.predicted}, {"truth", truth}};
  io::write_file(out / "knn.json", result.dump(2) + "\n");
  return result;
}

}  // namespace phgm::pipeline
