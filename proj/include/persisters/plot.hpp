#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace persisters {

// Minimal raster output: binary PPM (P6), enough for heatmaps and quick
// series plots without an image dependency.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // 3 bytes per pixel, row-major from the top

  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}
  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b);
  void write_ppm(const std::string& path) const;
};

// value in [0,1] -> viridis-like color
void colormap(double value, unsigned char& r, unsigned char& g, unsigned char& b);

struct HeatmapInfo {
  double t_min = 0.0, t_max = 0.0;  // horizontal axis
  double x_min = 0.0, x_max = 1.0;  // vertical axis (phenotype)
  double color_min = 0.0, color_max = 0.0;
};

// Snapshots (t, n) -> heatmap with t on the horizontal axis covering
// exactly [0, t_end] and x on the vertical covering [0, 1].
HeatmapInfo render_heatmap(const std::vector<std::pair<double, Eigen::VectorXd>>& snapshots,
                           double t_end, const std::string& path, int width = 800);

// Simple multi-series line plot over a shared time axis.
void render_series(const std::vector<double>& times,
                   const std::vector<std::pair<std::string, const std::vector<double>*>>& series,
                   const std::string& path, int width = 900, int height = 540);

}  // namespace persisters
