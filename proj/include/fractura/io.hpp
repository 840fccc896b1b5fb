#pragma once

// Serialization helpers shared by the library and the CLI: crack-set JSON,
// SVG snapshots, and 17-significant-digit CSV floats (round-trip exact).

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fractura/geometry.hpp"

namespace fractura {

inline std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline nlohmann::json crack_to_json(const CrackSet& K) {
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : K.segments()) j["segments"].push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  if (!K.isolated_points().empty()) {
    j["points"] = nlohmann::json::array();
    for (const auto& p : K.isolated_points()) j["points"].push_back({p.x, p.y});
  }
  return j;
}

inline CrackSet crack_from_json(const nlohmann::json& j) {
  std::vector<Segment> segs;
  if (j.contains("segments"))
    for (const auto& row : j.at("segments")) {
      if (!row.is_array() || row.size() != 4)
        throw ValidationError("crack segment rows must be [x1,y1,x2,y2]");
      segs.push_back({{row[0].get<double>(), row[1].get<double>()},
                      {row[2].get<double>(), row[3].get<double>()}});
    }
  std::vector<Point2> pts;
  if (j.contains("points"))
    for (const auto& row : j.at("points")) {
      if (!row.is_array() || row.size() != 2) throw ValidationError("crack point rows must be [x,y]");
      pts.push_back({row[0].get<double>(), row[1].get<double>()});
    }
  if (pts.empty()) return CrackSet::from_segments(std::move(segs));
  if (segs.empty()) return CrackSet::from_points(std::move(pts));
  throw ValidationError("mixed segment/point crack sets are not supported in JSON input");
}

// One stroke color per connected component, cycled deterministically.
inline std::string svg_snapshot(const CrackSet& K, const DomainBox& domain,
                                bool timestamp_comment = false) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  constexpr int palette_size = 8;

  double xmin, ymin, xmax, ymax;
  domain.bounds(xmin, ymin, xmax, ymax);
  const double margin = 0.05 * std::max(xmax - xmin, ymax - ymin);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_float(xmin - margin)
      << " " << format_float(ymin - margin) << " " << format_float(xmax - xmin + 2 * margin) << " "
      << format_float(ymax - ymin + 2 * margin) << "\">\n";
  if (timestamp_comment) {
    std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%d %H:%M:%S", std::gmtime(&now));
    out << "<!-- generated " << stamp << " -->\n";
  }
  out << "<g transform=\"translate(0," << format_float(ymin + ymax) << ") scale(1,-1)\">\n";
  out << "<polygon points=\"";
  for (const auto& p : domain.polygon()) out << format_float(p.x) << "," << format_float(p.y) << " ";
  out << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\""
      << format_float(0.004 * domain.diameter()) << "\"/>\n";
  for (std::size_t i = 0; i < K.segment_count(); ++i) {
    const Segment& s = K.segment(i);
    const char* color = palette[K.component_label(i) % palette_size];
    out << "<line x1=\"" << format_float(s.a.x) << "\" y1=\"" << format_float(s.a.y) << "\" x2=\""
        << format_float(s.b.x) << "\" y2=\"" << format_float(s.b.y) << "\" stroke=\"" << color
        << "\" stroke-width=\"" << format_float(0.01 * domain.diameter())
        << "\" stroke-linecap=\"round\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fractura
