#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mdensity::cli {

/// Opens a file for writing with '.' decimals and round-trip precision.
std::ofstream open_output(const std::filesystem::path& path);

std::string format_double(double v);

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
};

// Minimal SVG 1.1 emitters. CSVs are the files of record; these are previews.
void svg_lines(const std::filesystem::path& path, const std::string& title, const std::vector<Series>& series,
               const std::string& xlabel, const std::string& ylabel);
void svg_heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& values,
                 double lo, double hi);
void svg_quiver(const std::filesystem::path& path, const std::string& title, const std::vector<double>& px,
                const std::vector<double>& py, const std::vector<double>& vx, const std::vector<double>& vy,
                double lo, double hi);
void svg_histogram(const std::filesystem::path& path, const std::string& title, const std::vector<double>& values,
                   int bins);

}  // namespace mdensity::cli
