#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dhym/errors.hpp"

// Deterministic output helpers shared by the command-line tools: shortest
// round-trip float formatting, CSV assembly, self-contained SVG figures, and
// raw little-endian field files with JSON sidecars. Two runs over identical
// inputs must produce byte-identical files, so every number printed anywhere
// goes through format_double.
namespace dhym::report {

// Shortest representation that parses back to exactly the same double.
std::string format_double(double v);

// One CSV line: cells joined by commas, terminated by '\n'. Cells are
// expected to need no quoting (numbers and plain identifiers).
std::string csv_line(const std::vector<std::string>& cells);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// Raw float64 values in little-endian byte order plus a "<path>.json" sidecar
// describing shape (row-major), dtype, and grid spacing.
void write_binary_field(const std::filesystem::path& path, const std::vector<double>& data,
                        const std::vector<int>& shape, double grid_spacing);

// Planar curve through the given points (drawn in order) with axes through
// the origin when visible; used for paths in the complex plane.
std::string svg_path_plot(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label);

// Row-major ny x nx scalar field as a colored cell grid with a min/max
// legend; row 0 is drawn at the bottom.
std::string svg_heatmap(int nx, int ny, const std::vector<double>& values,
                        const std::string& label);

}  // namespace dhym::report
