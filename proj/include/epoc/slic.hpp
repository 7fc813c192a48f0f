#ifndef EPOC_SLIC_HPP
#define EPOC_SLIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "epoc/raster.hpp"

namespace epoc {

struct SlicConfig {
  int k = 256;               ///< target number of clusters
  double compactness = 10.0;  ///< weight m of the spatial term
  int iterations = 10;
  bool enforce_connectivity = true;

  void validate() const {
    if (k < 1) throw ValidationError("invalid granularity: k must be >= 1");
    if (!(compactness > 0.0)) throw ValidationError("SLIC compactness must be > 0");
    if (iterations < 1) throw ValidationError("SLIC iterations must be >= 1");
  }
};

struct ClusterCenter {
  double l = 0, a = 0, b = 0;
  double y = 0, x = 0;
};

/// sRGB (D65) to CIELAB. Output has three channels L, a, b.
inline FloatMap rgb_to_lab(const RasterImage& img) {
  if (img.channels() != 3) throw ValidationError("rgb_to_lab: input must be RGB");

  static const auto linear = [] {
    std::vector<double> table(256);
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      table[static_cast<std::size_t>(i)] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    return table;
  }();
  constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;
  constexpr double kEps = 216.0 / 24389.0;  // (6/29)^3
  const auto f = [](double t) { return t > kEps ? std::cbrt(t) : t * (841.0 / 108.0) + 4.0 / 29.0; };

  FloatMap lab(img.height(), img.width(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = linear[img(y, x, 0)];
      const double g = linear[img(y, x, 1)];
      const double b = linear[img(y, x, 2)];
      const double fx = f((0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / kXn);
      const double fy = f((0.2126729 * r + 0.7151522 * g + 0.0721750 * b) / kYn);
      const double fz = f((0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / kZn);
      lab(y, x, 0) = static_cast<float>(116.0 * fy - 16.0);
      lab(y, x, 1) = static_cast<float>(500.0 * (fx - fy));
      lab(y, x, 2) = static_cast<float>(200.0 * (fy - fz));
    }
  }
  return lab;
}

namespace detail {

// Grid of ny*nx seeds with ny*nx <= k, as close to square cells of side S as
// the image allows.
inline std::pair<int, int> slic_grid(int height, int width, int k, double step) {
  int ny = std::max(1, static_cast<int>(std::lround(height / step)));
  int nx = std::max(1, static_cast<int>(std::lround(width / step)));
  ny = std::min(ny, height);
  nx = std::min(nx, width);
  while (static_cast<long long>(ny) * nx > k) {
    if (ny >= nx) --ny; else --nx;
  }
  return {ny, nx};
}

inline double lab_gradient(const FloatMap& lab, int y, int x) {
  const int h = lab.height();
  const int w = lab.width();
  const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
  const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
  double g = 0;
  for (int c = 0; c < 3; ++c) {
    const double dv = lab(y1, x, c) - lab(y0, x, c);
    const double dh = lab(y, x1, c) - lab(y, x0, c);
    g += dv * dv + dh * dh;
  }
  return g;
}

// Relabels so that every token is 4-connected and at most one token survives
// per cluster. Each cluster keeps its largest fragment if that fragment has
// at least `min_size` pixels; every other fragment is absorbed, smallest
// first, into its largest adjacent region.
inline std::vector<std::uint32_t> enforce_connectivity(int height, int width,
                                                       const std::vector<std::int32_t>& cluster,
                                                       double min_size) {
  const std::size_t n = cluster.size();
  std::vector<std::uint32_t> comp(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::size_t> comp_size;
  std::vector<std::int32_t> comp_cluster;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] != std::numeric_limits<std::uint32_t>::max()) continue;
    const auto id = static_cast<std::uint32_t>(comp_size.size());
    std::size_t size = 0;
    comp[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      ++size;
      const int y = static_cast<int>(i / static_cast<std::size_t>(width));
      const int x = static_cast<int>(i % static_cast<std::size_t>(width));
      for (const auto& o : neighbor_offsets(Connectivity::four)) {
        const int yy = y + o.dy, xx = x + o.dx;
        if (yy < 0 || yy >= height || xx < 0 || xx >= width) continue;
        const auto j = static_cast<std::size_t>(yy) * static_cast<std::size_t>(width) + static_cast<std::size_t>(xx);
        if (comp[j] == std::numeric_limits<std::uint32_t>::max() && cluster[j] == cluster[i]) {
          comp[j] = id;
          stack.push_back(j);
        }
      }
    }
    comp_size.push_back(size);
    comp_cluster.push_back(cluster[start]);
  }

  const std::size_t n_comp = comp_size.size();
  std::vector<std::uint8_t> keeper(n_comp, 0);
  {
    std::vector<std::pair<std::size_t, std::uint32_t>> best;  // per cluster: (size, comp)
    std::int32_t max_cluster = 0;
    for (auto c : comp_cluster) max_cluster = std::max(max_cluster, c);
    best.assign(static_cast<std::size_t>(max_cluster) + 1, {0, 0});
    for (std::uint32_t c = 0; c < n_comp; ++c) {
      auto& b = best[static_cast<std::size_t>(comp_cluster[c])];
      if (comp_size[c] > b.first) b = {comp_size[c], c};
    }
    for (const auto& [size, c] : best) {
      if (size > 0 && static_cast<double>(size) >= min_size) keeper[c] = 1;
    }
  }

  std::vector<std::vector<std::uint32_t>> adjacent(n_comp);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
      if (x + 1 < width && comp[i + 1] != comp[i]) {
        adjacent[comp[i]].push_back(comp[i + 1]);
        adjacent[comp[i + 1]].push_back(comp[i]);
      }
      if (y + 1 < height) {
        const auto j = i + static_cast<std::size_t>(width);
        if (comp[j] != comp[i]) {
          adjacent[comp[i]].push_back(comp[j]);
          adjacent[comp[j]].push_back(comp[i]);
        }
      }
    }
  }
  for (auto& a : adjacent) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  std::vector<std::uint32_t> parent(n_comp);
  for (std::uint32_t c = 0; c < n_comp; ++c) parent[c] = c;
  const auto find = [&parent](std::uint32_t c) {
    while (parent[c] != c) {
      parent[c] = parent[parent[c]];
      c = parent[c];
    }
    return c;
  };

  std::set<std::pair<std::size_t, std::uint32_t>> pending;  // keeperless groups by (size, root)
  for (std::uint32_t c = 0; c < n_comp; ++c) {
    if (!keeper[c]) pending.insert({comp_size[c], c});
  }
  std::size_t groups = n_comp;
  while (!pending.empty() && groups > 1) {
    const auto [size, root] = *pending.begin();
    pending.erase(pending.begin());

    std::uint32_t target = root;
    std::size_t target_size = 0;
    for (auto c : adjacent[root]) {
      const auto r = find(c);
      if (r == root) continue;
      if (comp_size[r] > target_size || (comp_size[r] == target_size && r < target)) {
        target = r;
        target_size = comp_size[r];
      }
    }
    if (target == root) continue;

    if (!keeper[target]) pending.erase({comp_size[target], target});
    parent[root] = target;
    comp_size[target] += size;
    keeper[target] = keeper[target] || keeper[root];
    auto& into = adjacent[target];
    into.insert(into.end(), adjacent[root].begin(), adjacent[root].end());
    adjacent[root].clear();
    adjacent[root].shrink_to_fit();
    // Drop stale entries so adjacency lists stay proportional to live groups.
    for (auto& c : into) c = find(c);
    std::sort(into.begin(), into.end());
    into.erase(std::unique(into.begin(), into.end()), into.end());
    into.erase(std::remove(into.begin(), into.end(), target), into.end());
    --groups;
    if (!keeper[target]) pending.insert({comp_size[target], target});
  }

  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = find(comp[i]);
  return out;
}

}  // namespace detail

/**
 * SLIC superpixels: k-means in joint (L, a, b, y, x) space with a windowed
 * assignment step.
 *
 * Centers start on a regular grid of step S = sqrt(H*W/k) and move to the
 * lowest-gradient pixel of their 3x3 neighborhood. Each iteration assigns
 * every pixel within S of a center (a 2S x 2S window) to the center
 * minimizing sqrt(d_lab^2 + (d_xy/S)^2 m^2), then recomputes the centers.
 */
inline TokenIndexMap slic_segment(const RasterImage& img, const SlicConfig& cfg) {
  cfg.validate();
  const int h = img.height();
  const int w = img.width();
  const auto n = img.pixel_count();
  if (static_cast<std::size_t>(cfg.k) > n) throw ValidationError("invalid granularity: k exceeds pixel count");

  const FloatMap lab = rgb_to_lab(img);
  const double step = std::sqrt(static_cast<double>(n) / cfg.k);
  const auto [ny, nx] = detail::slic_grid(h, w, cfg.k, step);

  std::vector<ClusterCenter> centers;
  centers.reserve(static_cast<std::size_t>(ny) * static_cast<std::size_t>(nx));
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const int cy = std::min(h - 1, static_cast<int>((i + 0.5) * h / ny));
      const int cx = std::min(w - 1, static_cast<int>((j + 0.5) * w / nx));
      int by = cy, bx = cx;
      double best = detail::lab_gradient(lab, cy, cx);
      for (int yy = std::max(cy - 1, 0); yy <= std::min(cy + 1, h - 1); ++yy) {
        for (int xx = std::max(cx - 1, 0); xx <= std::min(cx + 1, w - 1); ++xx) {
          const double g = detail::lab_gradient(lab, yy, xx);
          if (g < best) {
            best = g;
            by = yy;
            bx = xx;
          }
        }
      }
      centers.push_back({lab(by, bx, 0), lab(by, bx, 1), lab(by, bx, 2), static_cast<double>(by),
                         static_cast<double>(bx)});
    }
  }

  const double spatial = (cfg.compactness / step) * (cfg.compactness / step);
  const auto distance = [&](const ClusterCenter& c, int y, int x) {
    const double dl = lab(y, x, 0) - c.l;
    const double da = lab(y, x, 1) - c.a;
    const double db = lab(y, x, 2) - c.b;
    const double dy = y - c.y;
    const double dx = x - c.x;
    return dl * dl + da * da + db * db + (dy * dy + dx * dx) * spatial;
  };

  std::vector<std::int32_t> label(n, -1);
  std::vector<double> dist(n);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(label.begin(), label.end(), -1);
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto& center = centers[c];
      const int y0 = std::max(0, static_cast<int>(std::floor(center.y - step)));
      const int y1 = std::min(h - 1, static_cast<int>(std::ceil(center.y + step)));
      const int x0 = std::max(0, static_cast<int>(std::floor(center.x - step)));
      const int x1 = std::min(w - 1, static_cast<int>(std::ceil(center.x + step)));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
          const double d = distance(center, y, x);
          if (d < dist[i]) {
            dist[i] = d;
            label[i] = static_cast<std::int32_t>(c);
          }
        }
      }
    }
    // Pixels outside every window fall back to an exhaustive search.
    for (std::size_t i = 0; i < n; ++i) {
      if (label[i] >= 0) continue;
      const int y = static_cast<int>(i / static_cast<std::size_t>(w));
      const int x = static_cast<int>(i % static_cast<std::size_t>(w));
      for (std::size_t c = 0; c < centers.size(); ++c) {
        const double d = distance(centers[c], y, x);
        if (d < dist[i]) {
          dist[i] = d;
          label[i] = static_cast<std::int32_t>(c);
        }
      }
    }

    std::vector<ClusterCenter> sums(centers.size());
    std::vector<std::size_t> counts(centers.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
        auto& s = sums[static_cast<std::size_t>(label[i])];
        s.l += lab(y, x, 0);
        s.a += lab(y, x, 1);
        s.b += lab(y, x, 2);
        s.y += y;
        s.x += x;
        ++counts[static_cast<std::size_t>(label[i])];
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[c]);
      centers[c] = {sums[c].l * inv, sums[c].a * inv, sums[c].b * inv, sums[c].y * inv, sums[c].x * inv};
    }
  }

  if (!cfg.enforce_connectivity) {
    std::vector<std::uint32_t> raw(label.begin(), label.end());
    return TokenIndexMap::from_labels(h, w, raw);
  }
  const auto merged = detail::enforce_connectivity(h, w, label, step * step / 4.0);
  return TokenIndexMap::from_labels(h, w, merged);
}

}  // namespace epoc

#endif  // EPOC_SLIC_HPP
