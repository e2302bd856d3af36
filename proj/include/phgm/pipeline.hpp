#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phgm/inference.hpp"
#include "phgm/model.hpp"

// Command-level orchestration. Every command takes a flat JSON options
// object, writes its files under an output directory and returns a JSON
// summary of what it did.
namespace phgm::pipeline {

using json = nlohmann::json;
namespace fs = std::filesystem;

// A list of groups, each a list of files. Paths are stored relative to the
// manifest's directory.
struct Manifest {
  std::string kind;  // "points", "distances", "connectivity" or "features"
  std::vector<std::string> labels;
  std::vector<std::vector<fs::path>> files;  // resolved paths
  json extra = json::object();
};

Manifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const Manifest& m);

GroupedData load_dataset(const fs::path& manifest_path);

ModelConfig model_config(const json& opts);
SamplerConfig sampler_config(const json& opts);

// Runs fn(0..count-1) on up to threads workers (0 = hardware concurrency).
// The first failing index's exception is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

json simulate(const std::string& kind, const json& opts, const fs::path& out);
json extract(const json& opts, const fs::path& out);
json fit(const json& opts, const fs::path& out);
json diagnose(const json& opts, const fs::path& out);
json analyze(const json& opts, const fs::path& out);
json classify(const json& opts, const fs::path& out);
json bottleneck_knn(const json& opts, const fs::path& out);

}  // namespace phgm::pipeline
