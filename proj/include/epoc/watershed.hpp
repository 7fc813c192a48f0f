#ifndef EPOC_WATERSHED_HPP
#define EPOC_WATERSHED_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "epoc/morphology.hpp"
#include "epoc/raster.hpp"

namespace epoc {

/**
 * Watershed tokenizer parameters.
 *
 * `threshold` is the granularity knob: pixels with P < threshold seed the
 * flood, so raising it merges basins into fewer, larger tokens.
 */
struct WatershedConfig {
  double threshold = 0.3;
  Connectivity flood_connectivity = Connectivity::four;
  Connectivity seed_connectivity = Connectivity::eight;

  void validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw ValidationError("watershed threshold t must satisfy 0 < t < 1");
    }
  }
};

/// Seed regions: labels 1..count, 0 for unseeded pixels.
using SeedField = LabelField;

/// Throws unless `map` has one channel and every value is in [0, 1].
inline void validate_boundary_map(const FloatMap& map) {
  if (map.empty()) throw ValidationError("boundary map is empty");
  if (map.channels() != 1) throw ValidationError("boundary map must have exactly one channel");
  for (float v : map.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("boundary map value outside [0,1]");
  }
}

inline SeedField extract_seeds(const FloatMap& boundary, const WatershedConfig& cfg) {
  cfg.validate();
  BinaryMask below(boundary.height(), boundary.width());
  const auto values = boundary.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    below.set_index(i, static_cast<double>(values[i]) < cfg.threshold);
  }
  return connected_components(below, cfg.seed_connectivity);
}

/**
 * Priority flood from seed regions.
 *
 * Seed pixels are expanded first, in raster order; afterwards the frontier
 * pixel with the lowest probability is expanded next, earlier insertion
 * winning ties. A pixel joins the region of the first expanded neighbor that
 * reaches it, so ridge pixels are absorbed into a basin and the result covers
 * the whole image. Output id = seed label - 1.
 */
inline TokenIndexMap watershed_flood(const FloatMap& boundary, const SeedField& seeds,
                                     const WatershedConfig& cfg) {
  if (seeds.count == 0) throw ValidationError("watershed_flood: at least one seed is required");
  if (!boundary.same_shape(seeds.height, seeds.width) || boundary.channels() != 1) {
    throw ValidationError("watershed_flood: seed field does not match boundary map");
  }
  const int h = boundary.height();
  const int w = boundary.width();
  const auto values = boundary.data();
  const auto neighbors = neighbor_offsets(cfg.flood_connectivity);

  struct Entry {
    float value;
    std::uint64_t order;
    std::uint32_t index;
    bool operator>(const Entry& other) const noexcept {
      return value != other.value ? value > other.value : order > other.order;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::uint64_t order = 0;

  std::vector<std::uint32_t> label(seeds.labels);
  const auto expand = [&](std::uint32_t i) {
    const int y = static_cast<int>(i / static_cast<std::uint32_t>(w));
    const int x = static_cast<int>(i % static_cast<std::uint32_t>(w));
    for (const auto& o : neighbors) {
      const int yy = y + o.dy, xx = x + o.dx;
      if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
      const auto j = static_cast<std::uint32_t>(yy * w + xx);
      if (label[j] != 0) continue;
      label[j] = label[i];
      frontier.push({values[j], order++, j});
    }
  };

  for (std::uint32_t i = 0; i < label.size(); ++i) {
    if (seeds.labels[i] != 0) expand(i);
  }
  while (!frontier.empty()) {
    const auto top = frontier.top();
    frontier.pop();
    expand(top.index);
  }

  std::vector<std::uint32_t> ids(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) ids[i] = label[i] - 1;
  return TokenIndexMap(h, w, seeds.count, std::move(ids));
}

/// Threshold-seeded watershed over a boundary probability map. Falls back to
/// a single whole-image token when no pixel is below the threshold.
inline TokenIndexMap epoc_segment(const FloatMap& boundary, const WatershedConfig& cfg) {
  cfg.validate();
  validate_boundary_map(boundary);
  const auto seeds = extract_seeds(boundary, cfg);
  if (seeds.count == 0) {
    return TokenIndexMap(boundary.height(), boundary.width(), 1,
                         std::vector<std::uint32_t>(boundary.pixel_count(), 0));
  }
  return watershed_flood(boundary, seeds, cfg);
}

/**
 * Non-learned boundary estimate: luma, box blur of the given radius, Sobel
 * magnitude, normalized by its maximum. Borders replicate edge pixels.
 */
inline FloatMap gradient_boundary(const RasterImage& img, int smoothing_radius) {
  if (smoothing_radius < 0) throw ValidationError("gradient_boundary: radius must be >= 0");
  const int h = img.height();
  const int w = img.width();
  const auto n = img.pixel_count();

  std::vector<double> gray(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      gray[i] = img.channels() == 3 ? 0.299 * img(y, x, 0) + 0.587 * img(y, x, 1) + 0.114 * img(y, x, 2)
                                    : static_cast<double>(img(y, x, 0));
    }
  }

  const auto at = [w](const std::vector<double>& v, int y, int x) {
    return v[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
  };

  if (smoothing_radius > 0) {
    const int r = smoothing_radius;
    const double norm = 1.0 / (2 * r + 1);
    std::vector<double> tmp(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int d = -r; d <= r; ++d) s += at(gray, y, std::clamp(x + d, 0, w - 1));
        tmp[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = s * norm;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int d = -r; d <= r; ++d) s += at(tmp, std::clamp(y + d, 0, h - 1), x);
        gray[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = s * norm;
      }
    }
  }

  FloatMap out(h, w, 1);
  std::vector<double> mag(n);
  double peak = 0;
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const double gx = (at(gray, ym, xp) + 2 * at(gray, y, xp) + at(gray, yp, xp)) -
                        (at(gray, ym, xm) + 2 * at(gray, y, xm) + at(gray, yp, xm));
      const double gy = (at(gray, yp, xm) + 2 * at(gray, yp, x) + at(gray, yp, xp)) -
                        (at(gray, ym, xm) + 2 * at(gray, ym, x) + at(gray, ym, xp));
      const double m = std::sqrt(gx * gx + gy * gy);
      mag[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = m;
      peak = std::max(peak, m);
    }
  }
  if (peak > 0) {
    auto data = out.data();
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<float>(std::min(1.0, mag[i] / peak));
  }
  return out;
}

}  // namespace epoc

#endif  // EPOC_WATERSHED_HPP
