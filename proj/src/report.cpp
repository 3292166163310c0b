#include "dhym/report.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

namespace dhym::report {

namespace {

void append_le64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

// Map value in [0, 1] to a blue -> white -> red ramp; integer arithmetic so
// the emitted color strings are platform-independent.
std::string ramp_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int level = static_cast<int>(std::lround(t * 510.0));
  int r = 255, g = 255, b = 255;
  if (level <= 255) {
    r = level;
    g = level;
  } else {
    g = 510 - level;
    b = 510 - level;
  }
  std::ostringstream os;
  os << "rgb(" << r << "," << g << "," << b << ")";
  return os.str();
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // normalize the sign of zero so -0 and 0 print alike
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line.push_back(',');
    line += cells[i];
  }
  line.push_back('\n');
  return line;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void write_binary_field(const std::filesystem::path& path, const std::vector<double>& data,
                        const std::vector<int>& shape, double grid_spacing) {
  std::size_t expected = 1;
  for (int s : shape) {
    if (s <= 0) throw Error("write_binary_field: shape entries must be positive");
    expected *= static_cast<std::size_t>(s);
  }
  if (expected != data.size()) {
    throw Error("write_binary_field: shape does not match data size");
  }
  std::string raw;
  raw.reserve(8 * data.size());
  for (double v : data) append_le64(raw, v);
  write_text_file(path, raw);

  std::string sidecar = "{\n  \"dtype\": \"float64\",\n  \"byte_order\": \"little\",\n";
  sidecar += "  \"order\": \"row-major\",\n  \"shape\": [";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) sidecar += ", ";
    sidecar += std::to_string(shape[i]);
  }
  sidecar += "],\n  \"grid_spacing\": " + format_double(grid_spacing) + "\n}\n";
  write_text_file(path.string() + ".json", sidecar);
}

std::string svg_path_plot(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label) {
  const int w = 640, h = 640, margin = 48;
  double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;  // keep the origin in frame
  for (const auto& [x, y] : points) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  const double spanx = std::max(xmax - xmin, 1e-12);
  const double spany = std::max(ymax - ymin, 1e-12);
  xmin -= 0.05 * spanx;
  xmax += 0.05 * spanx;
  ymin -= 0.05 * spany;
  ymax += 0.05 * spany;
  const auto px = [&](double x) {
    return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin);
  };
  const auto py = [&](double y) {
    return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
     << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << format_double(px(xmin)) << "\" y1=\"" << format_double(py(0.0))
     << "\" x2=\"" << format_double(px(xmax)) << "\" y2=\"" << format_double(py(0.0))
     << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << format_double(px(0.0)) << "\" y1=\"" << format_double(py(ymin))
     << "\" x2=\"" << format_double(px(0.0)) << "\" y2=\"" << format_double(py(ymax))
     << "\" stroke=\"#999999\" stroke-width=\"1\"/>\n";
  if (!points.empty()) {
    os << "<path fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" d=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      os << (i == 0 ? "M" : " L") << format_double(px(points[i].first)) << " "
         << format_double(py(points[i].second));
    }
    os << "\"/>\n";
    os << "<circle cx=\"" << format_double(px(points.back().first)) << "\" cy=\""
       << format_double(py(points.back().second))
       << "\" r=\"4\" fill=\"#c03020\"/>\n";
  }
  os << "<text x=\"" << (w - margin) << "\" y=\"" << (h - margin / 3)
     << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"end\">" << x_label
     << "</text>\n";
  os << "<text x=\"" << (margin / 3) << "\" y=\"" << margin
     << "\" font-family=\"monospace\" font-size=\"14\">" << y_label << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string svg_heatmap(int nx, int ny, const std::vector<double>& values,
                        const std::string& label) {
  if (nx <= 0 || ny <= 0 || values.size() != static_cast<std::size_t>(nx) * ny) {
    throw Error("svg_heatmap: grid shape does not match value count");
  }
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  const int cell = std::max(2, 512 / std::max(nx, ny));
  const int w = nx * cell, h = ny * cell, footer = 28;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << (h + footer) << "\" viewBox=\"0 0 " << w << " " << (h + footer) << "\">\n";
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v = values[static_cast<std::size_t>(j) * nx + i];
      os << "<rect x=\"" << (i * cell) << "\" y=\"" << ((ny - 1 - j) * cell) << "\" width=\""
         << cell << "\" height=\"" << cell << "\" fill=\"" << ramp_color((v - vmin) / span)
         << "\"/>\n";
    }
  }
  os << "<text x=\"4\" y=\"" << (h + footer - 8)
     << "\" font-family=\"monospace\" font-size=\"14\">" << label
     << " min=" << format_double(vmin) << " max=" << format_double(vmax) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace dhym::report
