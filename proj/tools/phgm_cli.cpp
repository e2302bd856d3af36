// Command-line front end. Talks to the library only through phgm.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "phgm/phgm.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class Kind { integer, unsigned_integer, real, text, boolean, flag_false, texts, integers };

struct OptSpec {
  std::string name;  // long flag without dashes; config key uses '_' for '-'
  Kind kind;
  json fallback;     // null: omitted unless given
  std::string help;
  bool required = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string key_of(const std::string& name) {
  std::string k = name;
  for (char& c : k)
    if (c == '-') c = '_';
  return k;
}

// Options of one (sub)command plus the storage CLI11 parses into.
struct Command {
  CLI::App* app = nullptr;
  std::vector<OptSpec> specs;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<std::string>> lists;
  std::map<std::string, bool> flags;
  std::vector<std::string> positional;

  void add(const OptSpec& spec) {
    specs.push_back(spec);
    const std::string flag = spec.name == "out" ? "-o,--out" : "--" + spec.name;
    std::string help = spec.help;
    if (!spec.fallback.is_null()) help += " [default: " + spec.fallback.dump() + "]";
    if (spec.kind == Kind::boolean) {
      options[spec.name] = app->add_flag(flag, flags[spec.name], help);
    } else if (spec.kind == Kind::flag_false) {
      options[spec.name] = app->add_flag("--no-" + spec.name, flags[spec.name], help);
    } else if (spec.kind == Kind::texts || spec.kind == Kind::integers) {
      options[spec.name] = app->add_option(flag, lists[spec.name], help)->expected(1, -1);
    } else {
      options[spec.name] = app->add_option(flag, scalars[spec.name], help);
    }
  }

  static json convert(const OptSpec& spec, const std::string& text) {
    try {
      std::size_t used = 0;
      switch (spec.kind) {
        case Kind::integer: {
          const long long v = std::stoll(text, &used);
          if (used != text.size()) break;
          return v;
        }
        case Kind::unsigned_integer: {
          if (!text.empty() && text[0] == '-') break;
          const unsigned long long v = std::stoull(text, &used);
          if (used != text.size()) break;
          return v;
        }
        case Kind::real: {
          const double v = std::stod(text, &used);
          if (used != text.size()) break;
          return v;
        }
        default: return text;
      }
    } catch (const std::exception&) {
    }
    throw UsageError("--" + spec.name + ": invalid value '" + text + "'");
  }

  // Precedence: explicit flag, then config file, then built-in default.
  json resolve(const json& config) const {
    json out = json::object();
    for (const auto& spec : specs) {
      const std::string key = key_of(spec.name);
      const CLI::Option* opt = options.at(spec.name);
      if (opt->count() > 0) {
        switch (spec.kind) {
          case Kind::boolean: out[key] = true; break;
          case Kind::flag_false: out[key] = false; break;
          case Kind::texts: out[key] = lists.at(spec.name); break;
          case Kind::integers: {
            json arr = json::array();
            OptSpec scalar = spec;
            scalar.kind = Kind::integer;
            for (const auto& s : lists.at(spec.name)) arr.push_back(convert(scalar, s));
            out[key] = arr;
            break;
          }
          default: out[key] = convert(spec, scalars.at(spec.name));
        }
      } else if (config.contains(key)) {
        out[key] = config[key];
      } else if (!spec.fallback.is_null()) {
        out[key] = spec.fallback;
      } else if (spec.required) {
        throw UsageError("missing required option --" + spec.name);
      }
    }
    return out;
  }
};

std::vector<OptSpec> model_specs() {
  return {{"m", Kind::integer, 5, "latent dimension"},
          {"alpha", Kind::real, 0.1, "log-barrier exponent"},
          {"kappa-shape", Kind::real, 2.0, "Gamma shape of the kappa prior"},
          {"kappa-scale", Kind::real, 3.0, "Gamma scale of the kappa prior"},
          {"kappa0", Kind::real, 6.0, "precision of the consensus prior"}};
}

std::vector<OptSpec> sampler_specs() {
  return {{"n-warmup", Kind::integer, 500, "warmup iterations"},
          {"n-samples", Kind::integer, 500, "retained draws"},
          {"target-accept", Kind::real, 0.8, "dual-averaging target acceptance"},
          {"max-tree-depth", Kind::integer, 10, "maximum NUTS tree depth"},
          {"init-step", Kind::real, 0.1, "initial step size"},
          {"warm-max-iter", Kind::integer, 5000, "warm-start iteration cap"},
          {"lag-max", Kind::integer, 40, "largest ACF lag in diagnostics"}};
}

int exit_code_for(phgm_status s) {
  switch (s) {
    case PHGM_OK: return 0;
    case PHGM_INVALID_ARGUMENT:
    case PHGM_BAD_K: return 2;
    case PHGM_PARSE:
    case PHGM_IO:
    case PHGM_NON_FINITE:
    case PHGM_NOT_SYMMETRIC:
    case PHGM_ISOLATED_VERTEX:
    case PHGM_MISMATCHED_INFINITE_BARS:
    case PHGM_INCONSISTENT_BAR:
    case PHGM_NON_POSITIVE_RATE:
    case PHGM_DEGENERATE_BAR:
    case PHGM_SHAPE_MISMATCH:
    case PHGM_NOT_HIERARCHICAL: return 3;
    default: return 4;
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a flat JSON object");
  for (const auto& [k, v] : j.items())
    if (v.is_object()) throw UsageError("config file must be flat; key '" + k + "' holds an object");
  return j;
}

void write_run_json(const fs::path& out, const json& run) {
  std::error_code ec;
  fs::create_directories(out, ec);
  std::ofstream f(out / "run.json", std::ios::trunc);
  if (f) f << run.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistent-homology features and Bayesian latent position models"};
  app.require_subcommand(1);
  std::string config_path;
  std::string threads_text;
  app.add_option("--config", config_path, "flat JSON file with option values; flags override it");
  app.add_option("--threads", threads_text, "cap on worker threads (0 = all cores)");

  std::map<std::string, std::unique_ptr<Command>> commands;
  auto make = [&](CLI::App* parent, const std::string& name, const std::string& help) {
    auto cmd = std::make_unique<Command>();
    cmd->app = parent->add_subcommand(name, help);
    cmd->add({"out", Kind::text, nullptr, "output directory", true});
    Command* raw = cmd.get();
    commands[name] = std::move(cmd);
    return raw;
  };

  CLI::App* sim = app.add_subcommand("simulate", "simulate point clouds or features");
  sim->require_subcommand(1);
  {
    Command* c = make(sim, "gaussian-groups", "three related Gaussian-cluster groups");
    c->add({"delta", Kind::real, nullptr, "separation of the second cluster", true});
    c->add({"n", Kind::integer, 150, "points per subject"});
    c->add({"subjects", Kind::integer, 10, "subjects per group"});
    c->add({"cluster-sd", Kind::real, 0.25, "spread of the oracle points"});
    c->add({"noise-sd", Kind::real, 0.07, "per-subject noise"});
    c->add({"seed", Kind::unsigned_integer, 0, "random seed"});
  }
  {
    Command* c = make(sim, "circles", "points on two concentric circles");
    c->add({"n", Kind::integer, 150, "points per subject"});
    c->add({"subjects", Kind::integer, 10, "number of subjects"});
    c->add({"r1", Kind::real, 1.0, "inner radius"});
    c->add({"r2", Kind::real, 2.0, "outer radius"});
    c->add({"noise-sd", Kind::real, 0.05, "noise standard deviation"});
    c->add({"random-angles", Kind::boolean, false, "uniform random angles instead of equal spacing"});
    c->add({"seed", Kind::unsigned_integer, 0, "random seed"});
  }
  {
    Command* c = make(sim, "from-model", "H0 features drawn from the model itself");
    c->add({"lambda", Kind::texts, nullptr, "rate-matrix CSV, one per group", true});
    c->add({"subjects", Kind::integer, 10, "subjects per group"});
    c->add({"header", Kind::boolean, false, "CSV files have a header row"});
    c->add({"seed", Kind::unsigned_integer, 0, "random seed"});
  }
  {
    Command* c = make(&app, "extract", "extract features from CSV inputs");
    c->app->add_option("inputs", c->positional, "CSV files (one group)");
    c->add({"input", Kind::text, nullptr, "manifest listing grouped inputs"});
    c->add({"input-kind", Kind::text, nullptr, "points | distances | connectivity"});
    c->add({"group", Kind::text, "g1", "group label for positional inputs"});
    c->add({"death-scale", Kind::real, 0.5, "factor applied to filtration values"});
    c->add({"max-radius", Kind::real, nullptr, "largest edge length in the complex"});
    c->add({"embed-dim", Kind::integer, 3, "eigenmap dimension for connectivity inputs"});
    c->add({"header", Kind::boolean, false, "CSV files have a header row"});
  }
  for (const char* name : {"fit", "fit-hier"}) {
    Command* c = make(&app, name,
                      std::string(name) == "fit" ? "fit the per-group model"
                                                 : "fit the hierarchical model");
    c->add({"input", Kind::text, nullptr, "features manifest", true});
    for (const auto& s : model_specs()) c->add(s);
    for (const auto& s : sampler_specs()) c->add(s);
    c->add({"seed", Kind::unsigned_integer, 0, "random seed"});
  }
  {
    Command* c = make(&app, "diagnose", "chain diagnostics of a fit");
    c->add({"fit", Kind::text, nullptr, "fit directory", true});
    c->add({"lag-max", Kind::integer, 40, "largest ACF lag"});
    c->add({"plots", Kind::flag_false, true, "skip SVG plots"});
  }
  {
    Command* c = make(&app, "analyze", "posterior summaries, localization and classification");
    c->add({"fit", Kind::text, nullptr, "fit directory", true});
    c->add({"features", Kind::text, nullptr, "features manifest (defaults to the fit's)"});
    c->add({"rank", Kind::integer, 2, "embedding rank"});
    c->add({"ref", Kind::integer, 0, "reference group for alignment"});
    c->add({"fdr-level", Kind::real, 0.1, "Bayesian FDR level"});
    c->add({"fdr-threshold", Kind::real, nullptr, "distance threshold (default: median)"});
    c->add({"highlight", Kind::integers, nullptr, "vertices to highlight in plots"});
    c->add({"bottleneck-knn", Kind::boolean, false, "also run the bottleneck KNN baseline"});
    c->add({"knn-k", Kind::integer, 5, "neighbours for the KNN baseline"});
    c->add({"dims", Kind::integers, json::array({0, 1}), "homology dimensions for bottleneck"});
    c->add({"classify", Kind::flag_false, true, "skip classification"});
    c->add({"plots", Kind::flag_false, true, "skip SVG plots"});
  }
  {
    Command* c = make(&app, "bottleneck-knn", "KNN on bottleneck distances between diagrams");
    c->add({"input", Kind::text, nullptr, "features manifest", true});
    c->add({"knn-k", Kind::integer, 5, "neighbours"});
    c->add({"dims", Kind::integers, json::array({0, 1}), "homology dimensions summed"});
  }
  {
    Command* c = make(&app, "classify", "maximum-likelihood classification");
    c->add({"fit", Kind::text, nullptr, "fit directory (in-sample mode)"});
    c->add({"input", Kind::text, nullptr, "features manifest"});
    c->add({"holdout", Kind::real, 0.0, "fraction held out per group; refits the mode"});
    c->add({"seed", Kind::unsigned_integer, 0, "random seed for the split and refit"});
    for (const auto& s : model_specs()) c->add(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string name;
  Command* cmd = nullptr;
  std::string sim_kind;
  for (auto& [n, c] : commands)
    if (c->app->parsed()) {
      name = n;
      cmd = c.get();
    }
  if (!cmd) {
    std::cerr << app.help();
    return 2;
  }
  const bool is_sim = sim->parsed();
  if (is_sim) sim_kind = name;
  const std::string display = is_sim ? "simulate " + sim_kind : name;

  json config;
  json resolved;
  fs::path out;
  try {
    config = load_config(config_path);
    resolved = cmd->resolve(config);
    if (!cmd->positional.empty()) resolved["inputs"] = cmd->positional;
    else if (config.contains("inputs")) resolved["inputs"] = config["inputs"];
    if (!threads_text.empty()) {
      OptSpec t{"threads", Kind::integer, nullptr, ""};
      resolved["threads"] = Command::convert(t, threads_text);
    } else {
      resolved["threads"] = config.value("threads", 0);
    }
    if (name == "fit-hier") resolved["hierarchical"] = true;
    if (name == "fit") resolved["hierarchical"] = false;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << cmd->app->help();
    std::string usage_out;
    if (resolved.is_object() && resolved.contains("out")) usage_out = resolved["out"].get<std::string>();
    else if (cmd->options["out"]->count() > 0) usage_out = cmd->scalars["out"];
    else if (config.is_object() && config.contains("out") && config["out"].is_string())
      usage_out = config["out"].get<std::string>();
    if (!usage_out.empty())
      write_run_json(usage_out, {{"command", display},
                                 {"version", phgm_version()},
                                 {"status", "usage"},
                                 {"exit_code", 2},
                                 {"error", e.what()}});
    return 2;
  }
  out = resolved["out"].get<std::string>();
  const std::string opts = resolved.dump();
  char* summary = nullptr;
  phgm_status st = PHGM_OK;
  const std::string out_str = out.string();
  if (is_sim) st = phgm_cmd_simulate(sim_kind.c_str(), opts.c_str(), out_str.c_str(), &summary);
  else if (name == "extract") st = phgm_cmd_extract(opts.c_str(), out_str.c_str(), &summary);
  else if (name == "fit" || name == "fit-hier") st = phgm_cmd_fit(opts.c_str(), out_str.c_str(), &summary);
  else if (name == "diagnose") st = phgm_cmd_diagnose(opts.c_str(), out_str.c_str(), &summary);
  else if (name == "analyze") st = phgm_cmd_analyze(opts.c_str(), out_str.c_str(), &summary);
  else if (name == "classify") st = phgm_cmd_classify(opts.c_str(), out_str.c_str(), &summary);
  else if (name == "bottleneck-knn") st = phgm_cmd_bottleneck_knn(opts.c_str(), out_str.c_str(), &summary);

  const int code = exit_code_for(st);
  json run = {{"command", display},
              {"version", phgm_version()},
              {"config", resolved},
              {"status", phgm_status_name(st)},
              {"exit_code", code}};
  if (st == PHGM_OK && summary) {
    run["summary"] = json::parse(summary, nullptr, false);
  } else if (st != PHGM_OK) {
    run["error"] = phgm_last_error();
    std::cerr << "error (" << phgm_status_name(st) << "): " << phgm_last_error() << "\n";
    if (st == PHGM_ALL_DIVERGENT)
      std::cerr << "hint: the sampler diverged almost everywhere; try a smaller --init-step, a "
                   "higher --target-accept, or rescaled distances (--death-scale)\n";
    if (code == 2) std::cerr << "\n" << cmd->app->help();
  }
  phgm_free_string(summary);
  write_run_json(out, run);
  return code;
}
