#include "persisters/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace persisters {

void Image::set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
  if (x < 0 || x >= width || y < 0 || y >= height) return;
  const std::size_t at = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[at] = r;
  rgb[at + 1] = g;
  rgb[at + 2] = b;
}

void Image::write_ppm(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

void colormap(double value, unsigned char& r, unsigned char& g, unsigned char& b) {
  static const double anchors[9][3] = {
      {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
      {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
      {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};
  const double v = std::clamp(value, 0.0, 1.0) * 8.0;
  const int i = std::min(static_cast<int>(v), 7);
  const double t = v - i;
  r = static_cast<unsigned char>(255.0 * ((1 - t) * anchors[i][0] + t * anchors[i + 1][0]));
  g = static_cast<unsigned char>(255.0 * ((1 - t) * anchors[i][1] + t * anchors[i + 1][1]));
  b = static_cast<unsigned char>(255.0 * ((1 - t) * anchors[i][2] + t * anchors[i + 1][2]));
}

HeatmapInfo render_heatmap(const std::vector<std::pair<double, Eigen::VectorXd>>& snapshots,
                           double t_end, const std::string& path, int width) {
  if (snapshots.empty()) throw std::invalid_argument("no snapshots to render");
  const int K = static_cast<int>(snapshots.front().second.size());
  const int height = std::max(K, 100);

  HeatmapInfo info;
  info.t_max = t_end;
  info.color_min = 0.0;
  info.color_max = 0.0;
  for (const auto& [t, n] : snapshots) info.color_max = std::max(info.color_max, n.maxCoeff());
  if (info.color_max <= 0.0) info.color_max = 1.0;

  Image img(width, height);
  std::size_t cur = 0;
  for (int px = 0; px < width; ++px) {
    const double t = t_end * (px + 0.5) / width;
    while (cur + 1 < snapshots.size() && snapshots[cur + 1].first <= t) ++cur;
    const Eigen::VectorXd& n = snapshots[cur].second;
    for (int py = 0; py < height; ++py) {
      // py = 0 is the top row, x = 1
      const double x = 1.0 - (py + 0.5) / height;
      int i = static_cast<int>(x * K);
      i = std::clamp(i, 0, K - 1);
      unsigned char r, g, b;
      colormap(n[i] / info.color_max, r, g, b);
      img.set(px, py, r, g, b);
    }
  }
  img.write_ppm(path);
  return info;
}

namespace {

const unsigned char palette[4][3] = {
    {31, 119, 180}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}};

}  // namespace

void render_series(const std::vector<double>& times,
                   const std::vector<std::pair<std::string, const std::vector<double>*>>& series,
                   const std::string& path, int width, int height) {
  if (times.size() < 2) throw std::invalid_argument("need at least two samples to plot");
  const int ml = 60, mr = 15, mt = 15, mb = 40;  // margins
  Image img(width, height);

  double ymin = 0.0, ymax = -1e300;
  for (const auto& [name, values] : series)
    for (double v : *values) {
      ymax = std::max(ymax, v);
      ymin = std::min(ymin, v);
    }
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double t0 = times.front(), t1 = times.back();

  auto px_of = [&](double t) {
    return ml + static_cast<int>((t - t0) / (t1 - t0) * (width - ml - mr));
  };
  auto py_of = [&](double y) {
    return height - mb - static_cast<int>((y - ymin) / (ymax - ymin) * (height - mt - mb));
  };

  // frame and light gridlines
  for (int x = ml; x <= width - mr; ++x) {
    img.set(x, mt, 180, 180, 180);
    img.set(x, height - mb, 0, 0, 0);
  }
  for (int y = mt; y <= height - mb; ++y) {
    img.set(ml, y, 0, 0, 0);
    img.set(width - mr, y, 180, 180, 180);
  }
  for (int gx = 1; gx < 10; ++gx) {
    const int x = ml + gx * (width - ml - mr) / 10;
    for (int y = mt; y <= height - mb; y += 3) img.set(x, y, 220, 220, 220);
  }

  std::size_t color = 0;
  for (const auto& [name, values] : series) {
    const auto& c = palette[color % 4];
    ++color;
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      int x0 = px_of(times[j]), y0 = py_of((*values)[j]);
      int x1 = px_of(times[j + 1]), y1 = py_of((*values)[j + 1]);
      const int steps = std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1});
      for (int sgm = 0; sgm <= steps; ++sgm) {
        const double w = static_cast<double>(sgm) / steps;
        img.set(static_cast<int>(x0 + w * (x1 - x0)), static_cast<int>(y0 + w * (y1 - y0)), c[0],
                c[1], c[2]);
      }
    }
  }
  img.write_ppm(path);
}

}  // namespace persisters
