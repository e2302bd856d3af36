#include "phgm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "phgm/error.hpp"

namespace phgm::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Edge edge_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(Errc::parse, "edge must be a pair of vertices");
  return make_edge(j[0].get<int>(), j[1].get<int>());
}

json edge_to_json(const Edge& e) { return json::array({e.a, e.b}); }

json timed_to_json(const std::vector<TimedEdge>& v) {
  json out = json::array();
  for (const auto& t : v) out.push_back(json::array({edge_to_json(t.edge), t.time}));
  return out;
}

std::vector<TimedEdge> timed_from_json(const json& j) {
  std::vector<TimedEdge> out;
  for (const auto& t : j) {
    if (!t.is_array() || t.size() != 2) fail(Errc::parse, "B-set entries are [edge, time]");
    out.push_back({edge_from_json(t[0]), t[1].get<double>()});
  }
  return out;
}

json flat_rows(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(i, c));
  return out;
}

Eigen::MatrixXd unflatten(const json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    fail(Errc::parse, "flattened matrix has the wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) m(i, c) = j[i * cols + c].get<double>();
  return m;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Canvas {
  double x0, x1, y0, y1;
  static constexpr double w = 640, h = 420, pad = 50;
  double px(double x) const { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); }
  double py(double y) const { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); }
};

Canvas make_canvas(double x0, double x1, double y0, double y1) {
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
  return {x0 - mx, x1 + mx, y0 - my, y1 + my};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string svg_open(const std::string& title, const Canvas& c) {
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Canvas::w << "\" height=\""
     << Canvas::h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << Canvas::w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(title) << "</text>\n"
     << "<rect x=\"" << Canvas::pad << "\" y=\"" << Canvas::pad << "\" width=\""
     << Canvas::w - 2 * Canvas::pad << "\" height=\"" << Canvas::h - 2 * Canvas::pad
     << "\" fill=\"none\" stroke=\"#444\"/>\n"
     << "<text x=\"" << Canvas::pad << "\" y=\"" << Canvas::h - 30 << "\">"
     << format_double(c.x0) << "</text>\n"
     << "<text x=\"" << Canvas::w - Canvas::pad << "\" y=\"" << Canvas::h - 30
     << "\" text-anchor=\"end\">" << format_double(c.x1) << "</text>\n"
     << "<text x=\"" << Canvas::pad - 4 << "\" y=\"" << Canvas::h - Canvas::pad
     << "\" text-anchor=\"end\">" << format_double(c.y0) << "</text>\n"
     << "<text x=\"" << Canvas::pad - 4 << "\" y=\"" << Canvas::pad + 10
     << "\" text-anchor=\"end\">" << format_double(c.y1) << "</text>\n";
  return os.str();
}

std::string short_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(Errc::io, "cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(Errc::io, "write failed for " + path.string());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Eigen::MatrixXd parse_csv(std::string_view text, const std::string& name, bool header) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool header_pending = header;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::size_t col = 0;
    for (;;) {
      const auto comma = line.find(',');
      const std::string_view cell = line.substr(0, comma);
      ++col;
      double v;
      if (!parse_number(cell, v))
        fail(Errc::parse, name + ":" + std::to_string(line_no) + ": column " + std::to_string(col) +
                              ": not a number: '" + std::string(trim(cell)) + "'");
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(Errc::parse, name + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().size()) + " columns, found " +
                            std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(Errc::parse, name + ": no data rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  return m;
}

Eigen::MatrixXd read_csv(const fs::path& path, bool header) {
  return parse_csv(read_file(path), path.string(), header);
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  if (!header.empty()) out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(i, c));
    }
    out += '\n';
  }
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXi& m, const std::vector<std::string>& header) {
  return matrix_to_csv(Eigen::MatrixXd(m.cast<double>()), header);
}

json features_to_json(const SubjectFeatures& f) {
  json h0;
  h0["deaths"] = f.h0.deaths;
  json winners = json::array();
  for (const auto& e : f.h0.winners) winners.push_back(edge_to_json(e));
  h0["winners"] = std::move(winners);
  json w = json::array();
  for (int j = 0; j < f.n; ++j) {
    json row = json::array();
    for (int k = 0; k < f.n; ++k) row.push_back(f.h0.w(j, k));
    w.push_back(std::move(row));
  }
  h0["W"] = std::move(w);
  json loops = json::array();
  for (const auto& l : f.loops) {
    loops.push_back({{"b", l.birth},
                     {"d", l.death},
                     {"e", edge_to_json(l.birth_edge)},
                     {"f", edge_to_json(l.death_edge)},
                     {"L", l.loop_vertices},
                     {"B1", timed_to_json(l.b1)},
                     {"B2", timed_to_json(l.b2)}});
  }
  json out;
  out["n"] = f.n;
  out["death_scale"] = f.death_scale;
  out["source"] = f.source;
  out["h0"] = std::move(h0);
  out["loops"] = std::move(loops);
  return out;
}

SubjectFeatures features_from_json(const json& j) {
  try {
    SubjectFeatures f;
    f.n = j.at("n").get<int>();
    f.death_scale = j.at("death_scale").get<double>();
    f.source = j.value("source", std::string());
    const auto& h0 = j.at("h0");
    f.h0.n = f.n;
    f.h0.deaths = h0.at("deaths").get<std::vector<double>>();
    for (const auto& e : h0.at("winners")) f.h0.winners.push_back(edge_from_json(e));
    const auto& w = h0.at("W");
    if (!w.is_array() || static_cast<int>(w.size()) != f.n)
      fail(Errc::parse, "W must be an n x n array");
    f.h0.w.resize(f.n, f.n);
    for (int r = 0; r < f.n; ++r) {
      if (!w[r].is_array() || static_cast<int>(w[r].size()) != f.n)
        fail(Errc::parse, "W must be an n x n array");
      for (int c = 0; c < f.n; ++c) f.h0.w(r, c) = w[r][c].get<double>();
    }
    for (const auto& l : j.at("loops")) {
      LoopRecord rec;
      rec.birth = l.at("b").get<double>();
      rec.death = l.at("d").get<double>();
      rec.birth_edge = edge_from_json(l.at("e"));
      rec.death_edge = edge_from_json(l.at("f"));
      rec.loop_vertices = l.at("L").get<std::vector<int>>();
      rec.b1 = timed_from_json(l.at("B1"));
      rec.b2 = timed_from_json(l.at("B2"));
      f.loops.push_back(std::move(rec));
    }
    return f;
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("malformed features: ") + e.what());
  }
}

void write_features(const fs::path& path, const SubjectFeatures& f) {
  write_file(path, features_to_json(f).dump() + "\n");
}

SubjectFeatures read_features(const fs::path& path) {
  try {
    SubjectFeatures f = features_from_json(parse_json(read_file(path), path.string()));
    check_features(f, false);
    return f;
  } catch (const Error& e) {
    if (e.code() == Errc::io) throw;
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string diagram_to_csv(std::span<const Bar> bars) {
  std::string out = "dim,birth,death\n";
  for (const auto& b : bars)
    out += std::to_string(b.dim) + "," + format_double(b.birth) + "," + format_double(b.death) + "\n";
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(Errc::parse, "expected a nested array");
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != j[0].size()) fail(Errc::parse, "ragged matrix");
    for (std::size_t c = 0; c < j[i].size(); ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json state_to_json(const LatentState& s) {
  json z = json::array();
  for (const auto& m : s.z) z.push_back(matrix_to_json(m));
  json out = {{"log_kappa", s.log_kappa}, {"Z", std::move(z)}};
  if (s.hierarchical()) out["Zbar"] = matrix_to_json(s.zbar);
  return out;
}

LatentState state_from_json(const json& j) {
  try {
    LatentState s;
    s.log_kappa = j.at("log_kappa").get<double>();
    for (const auto& m : j.at("Z")) s.z.push_back(matrix_from_json(m));
    if (j.contains("Zbar")) s.zbar = matrix_from_json(j.at("Zbar"));
    return s;
  } catch (const json::exception& e) {
    fail(Errc::parse, std::string("malformed state: ") + e.what());
  }
}

std::string draws_to_jsonl(const PosteriorSamples& samples) {
  std::string out;
  for (std::size_t d = 0; d < samples.draws.size(); ++d) {
    const auto& s = samples.draws[d];
    json z = json::array();
    for (const auto& m : s.z) z.push_back(flat_rows(m));
    json line = {{"draw", d},
                 {"n", samples.n},
                 {"m", samples.m},
                 {"Z", std::move(z)},
                 {"log_kappa", s.log_kappa},
                 {"log_post", samples.log_post[d]},
                 {"accept_stat", samples.accept_stat[d]},
                 {"depth", samples.depth[d]},
                 {"divergent", static_cast<bool>(samples.divergent[d])},
                 {"cone_exit", d < samples.cone_exit.size() && samples.cone_exit[d]},
                 {"energy_error", samples.energy_error[d]}};
    if (s.hierarchical()) line["Zbar"] = flat_rows(s.zbar);
    out += line.dump();
    out += '\n';
  }
  return out;
}

PosteriorSamples draws_from_jsonl(std::string_view text, const std::string& name) {
  PosteriorSamples out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      const int n = j.at("n").get<int>();
      const int m = j.at("m").get<int>();
      if (out.draws.empty()) {
        out.n = n;
        out.m = m;
        out.hierarchical = j.contains("Zbar");
      } else if (n != out.n || m != out.m || j.contains("Zbar") != out.hierarchical) {
        fail(Errc::parse, where + ": draw shape differs from the first draw");
      }
      LatentState s;
      for (const auto& z : j.at("Z")) s.z.push_back(unflatten(z, n, m));
      if (out.hierarchical) s.zbar = unflatten(j.at("Zbar"), n, m);
      s.log_kappa = j.at("log_kappa").get<double>();
      if (!out.draws.empty() && s.z.size() != out.draws.front().z.size())
        fail(Errc::parse, where + ": group count differs from the first draw");
      out.draws.push_back(std::move(s));
      out.log_post.push_back(j.at("log_post").get<double>());
      out.accept_stat.push_back(j.at("accept_stat").get<double>());
      out.depth.push_back(j.at("depth").get<int>());
      out.divergent.push_back(j.at("divergent").get<bool>());
      out.cone_exit.push_back(j.value("cone_exit", false));
      out.energy_error.push_back(j.value("energy_error", 0.0));
    } catch (const json::exception& e) {
      fail(Errc::parse, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::parse && std::string(e.what()).starts_with(where)) throw;
      fail(Errc::parse, where + ": " + e.what());
    }
  }
  if (out.draws.empty()) fail(Errc::parse, name + ": no draws");
  return out;
}

json parse_json(std::string_view text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(Errc::parse, name + ": " + e.what());
  }
}

std::string svg_scatter(const Eigen::MatrixXd& xy, const std::vector<int>& category,
                        const std::string& title) {
  if (xy.cols() < 2) fail(Errc::shape_mismatch, "scatter needs two columns");
  const Canvas c = make_canvas(xy.col(0).minCoeff(), xy.col(0).maxCoeff(), xy.col(1).minCoeff(),
                               xy.col(1).maxCoeff());
  std::ostringstream os;
  os << svg_open(title, c);
  for (Eigen::Index i = 0; i < xy.rows(); ++i) {
    const int cat = i < static_cast<Eigen::Index>(category.size()) ? category[i] : 0;
    os << "<circle cx=\"" << short_number(c.px(xy(i, 0))) << "\" cy=\""
       << short_number(c.py(xy(i, 1))) << "\" r=\"3.5\" fill=\"" << kPalette[cat % 8]
       << "\" fill-opacity=\"0.8\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_lines(const std::vector<Series>& series, const std::string& title) {
  double lo = kInf, hi = -kInf;
  std::size_t len = 1;
  for (const auto& s : series) {
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    len = std::max(len, s.values.size());
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  const Canvas c = make_canvas(0.0, static_cast<double>(len - 1), lo, hi);
  std::ostringstream os;
  os << svg_open(title, c);
  for (std::size_t k = 0; k < series.size(); ++k) {
    os << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << kPalette[k % 8] << "\" points=\"";
    for (std::size_t i = 0; i < series[k].values.size(); ++i)
      if (std::isfinite(series[k].values[i]))
        os << short_number(c.px(static_cast<double>(i))) << ","
           << short_number(c.py(series[k].values[i])) << " ";
    os << "\"/>\n<text x=\"" << Canvas::w - Canvas::pad - 4 << "\" y=\"" << Canvas::pad + 16 + 14 * k
       << "\" text-anchor=\"end\" fill=\"" << kPalette[k % 8] << "\">" << escape(series[k].label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_bars(const std::vector<double>& values, const std::string& title) {
  double lo = 0.0, hi = 0.0;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const Canvas c = make_canvas(-0.5, static_cast<double>(values.size()) - 0.5, lo, hi);
  std::ostringstream os;
  os << svg_open(title, c);
  const double width = std::max(1.0, 0.7 * (c.px(1.0) - c.px(0.0)));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) continue;
    const double top = c.py(std::max(values[i], 0.0));
    const double bottom = c.py(std::min(values[i], 0.0));
    os << "<rect x=\"" << short_number(c.px(static_cast<double>(i)) - width / 2) << "\" y=\""
       << short_number(top) << "\" width=\"" << short_number(width) << "\" height=\""
       << short_number(std::max(bottom - top, 0.5)) << "\" fill=\"" << kPalette[0] << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string svg_violins(const std::vector<Series>& samples, const std::string& title) {
  double lo = kInf, hi = -kInf;
  for (const auto& s : samples)
    for (double v : s.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  const Canvas c = make_canvas(-0.5, static_cast<double>(samples.size()) - 0.5, lo, hi);
  std::ostringstream os;
  os << svg_open(title, c);
  const double half_width = 0.4 * (c.px(1.0) - c.px(0.0));
  constexpr int kGrid = 40;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& v = samples[k].values;
    if (v.empty()) continue;
    double mean = 0.0, var = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / v.size());
    const double bw = std::max(1.06 * sd * std::pow(static_cast<double>(v.size()), -0.2),
                               1e-3 * (hi - lo + 1e-12));
    const double vmin = *std::min_element(v.begin(), v.end());
    const double vmax = *std::max_element(v.begin(), v.end());
    std::vector<double> ys(kGrid + 1), dens(kGrid + 1);
    double peak = 0.0;
    for (int g = 0; g <= kGrid; ++g) {
      ys[g] = vmin + (vmax - vmin) * g / kGrid;
      double s = 0.0;
      for (double x : v) s += std::exp(-0.5 * std::pow((ys[g] - x) / bw, 2));
      dens[g] = s;
      peak = std::max(peak, s);
    }
    const double cx = c.px(static_cast<double>(k));
    os << "<polygon fill=\"" << kPalette[k % 8] << "\" fill-opacity=\"0.6\" points=\"";
    for (int g = 0; g <= kGrid; ++g)
      os << short_number(cx + half_width * dens[g] / peak) << "," << short_number(c.py(ys[g])) << " ";
    for (int g = kGrid; g >= 0; --g)
      os << short_number(cx - half_width * dens[g] / peak) << "," << short_number(c.py(ys[g])) << " ";
    os << "\"/>\n<text x=\"" << short_number(cx) << "\" y=\"" << Canvas::h - Canvas::pad + 14
       << "\" text-anchor=\"middle\" font-size=\"9\">" << escape(samples[k].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace phgm::io
