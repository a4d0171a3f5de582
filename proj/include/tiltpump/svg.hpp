#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace tiltpump {

namespace detail {

inline std::string heat_color(double v) {  // v in [0,1], dark blue -> yellow
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  v = std::clamp(v, 0.0, 1.0) * 4.0;
  const int s = std::min(3, static_cast<int>(v));
  const double f = v - s;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(stops[s][0] + f * (stops[s + 1][0] - stops[s][0])),
                static_cast<int>(stops[s][1] + f * (stops[s + 1][1] - stops[s][1])),
                static_cast<int>(stops[s][2] + f * (stops[s + 1][2] - stops[s][2])));
  return buf;
}

}  // namespace detail

/// Minimal SVG heatmap: rows of `field` run along y (bottom-up), columns
/// along x. Meant for quick inspection; the CSV files are the data record.
inline void write_svg_heatmap(const std::filesystem::path& path, const Eigen::MatrixXd& field,
                              const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  const int W = 640, Hpx = 480, margin = 48;
  const int nx = static_cast<int>(field.cols()), ny = static_cast<int>(field.rows());
  const double lo = field.minCoeff(), hi = field.maxCoeff();
  const double scale = (hi > lo) ? 1.0 / (hi - lo) : 0.0;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << Hpx << "'>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  const double cw = double(W - 2 * margin) / nx, ch = double(Hpx - 2 * margin) / ny;
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double v = (field(iy, ix) - lo) * scale;
      out << "<rect x='" << margin + ix * cw << "' y='" << Hpx - margin - (iy + 1) * ch << "' width='" << cw + 0.5
          << "' height='" << ch + 0.5 << "' fill='" << detail::heat_color(v) << "'/>\n";
    }
  out << "<text x='" << W / 2 << "' y='" << Hpx - 12 << "' text-anchor='middle' font-size='12'>" << xlabel
      << "</text>\n";
  out << "<text x='16' y='" << Hpx / 2 << "' font-size='12' transform='rotate(-90 16 " << Hpx / 2 << ")'>" << ylabel
      << "</text>\n</svg>\n";
}

/// Multi-series line plot sharing one x grid.
inline void write_svg_lines(const std::filesystem::path& path, const std::vector<double>& x,
                            const std::vector<std::pair<std::string, std::vector<double>>>& series,
                            const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  const int W = 640, Hpx = 480, margin = 48;
  double lo = 1e300, hi = -1e300;
  for (const auto& [name, ys] : series)
    for (double v : ys) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi <= lo) hi = lo + 1.0;
  const double x0 = x.front(), x1 = x.back();
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << Hpx << "'>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  out << "<rect x='" << margin << "' y='" << margin << "' width='" << W - 2 * margin << "' height='"
      << Hpx - 2 * margin << "' fill='none' stroke='#888'/>\n";
  int c = 0;
  for (const auto& [name, ys] : series) {
    out << "<polyline fill='none' stroke='" << palette[c % 6] << "' stroke-width='1.2' points='";
    for (size_t i = 0; i < ys.size(); ++i) {
      const double px = margin + (x[i] - x0) / (x1 - x0) * (W - 2 * margin);
      const double py = Hpx - margin - (ys[i] - lo) / (hi - lo) * (Hpx - 2 * margin);
      out << px << "," << py << " ";
    }
    out << "'/>\n";
    out << "<text x='" << W - margin - 4 << "' y='" << margin + 14 + 14 * c << "' text-anchor='end' font-size='11' fill='"
        << palette[c % 6] << "'>" << name << "</text>\n";
    ++c;
  }
  out << "<text x='" << W / 2 << "' y='" << Hpx - 12 << "' text-anchor='middle' font-size='12'>" << xlabel
      << "</text>\n";
  out << "<text x='16' y='" << Hpx / 2 << "' font-size='12' transform='rotate(-90 16 " << Hpx / 2 << ")'>" << ylabel
      << "</text>\n</svg>\n";
}

}  // namespace tiltpump
