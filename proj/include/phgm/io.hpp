#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "phgm/events.hpp"
#include "phgm/inference.hpp"

namespace phgm::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path);
// Creates parent directories as needed.
void write_file(const fs::path& path, std::string_view content);

// Shortest round-trip decimal form; "inf"/"-inf"/"nan" for non-finite values.
std::string format_double(double x);

// Comma-separated numbers, one row per line. Blank lines and lines starting
// with '#' are skipped. Errors name the source and the line.
Eigen::MatrixXd parse_csv(std::string_view text, const std::string& name, bool header = false);
Eigen::MatrixXd read_csv(const fs::path& path, bool header = false);
std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});
std::string matrix_to_csv(const Eigen::MatrixXi& m, const std::vector<std::string>& header = {});

json features_to_json(const SubjectFeatures& f);
SubjectFeatures features_from_json(const json& j);
void write_features(const fs::path& path, const SubjectFeatures& f);
SubjectFeatures read_features(const fs::path& path);

// dim,birth,death with "inf" for infinite deaths.
std::string diagram_to_csv(std::span<const Bar> bars);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);
json state_to_json(const LatentState& s);
LatentState state_from_json(const json& j);

// One line per draw.
std::string draws_to_jsonl(const PosteriorSamples& samples);
PosteriorSamples draws_from_jsonl(std::string_view text, const std::string& name);

json parse_json(std::string_view text, const std::string& name);

// Minimal static SVG charts.
struct Series {
  std::string label;
  std::vector<double> values;
};
std::string svg_scatter(const Eigen::MatrixXd& xy, const std::vector<int>& category,
                        const std::string& title);
std::string svg_lines(const std::vector<Series>& series, const std::string& title);
std::string svg_bars(const std::vector<double>& values, const std::string& title);
// One violin per sample list, drawn with a Gaussian kernel density.
std::string svg_violins(const std::vector<Series>& samples, const std::string& title);

}  // namespace phgm::io
