#ifndef EPOC_MORPHOLOGY_HPP
#define EPOC_MORPHOLOGY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "epoc/raster.hpp"

namespace epoc {

/**
 * Disk-shaped structuring element.
 *
 * A kernel of odd size k has integer radius r = k / 2 and contains every
 * offset with dy^2 + dx^2 <= r^2. Size 3 is the 4-neighborhood plus center,
 * size 5 is the 13-pixel disk.
 */
class StructuringElement {
 public:
  static StructuringElement disk(int kernel_size) { return StructuringElement(kernel_size); }
  static StructuringElement disk_of_radius(int radius) {
    if (radius < 0) throw ValidationError("StructuringElement: radius must be >= 0");
    return StructuringElement(2 * radius + 1);
  }

  int kernel_size() const noexcept { return kernel_size_; }
  int radius() const noexcept { return kernel_size_ / 2; }
  const std::vector<Offset>& offsets() const noexcept { return offsets_; }

  /// Horizontal half-extent of the disk on row offset dy, |dy| <= radius.
  int half_width(int dy) const noexcept { return half_widths_[static_cast<std::size_t>(dy + radius())]; }

 private:
  explicit StructuringElement(int kernel_size) : kernel_size_(kernel_size) {
    if (kernel_size < 1 || kernel_size % 2 == 0) {
      throw ValidationError("StructuringElement: kernel size must be odd and >= 1");
    }
    const int r = radius();
    for (int dy = -r; dy <= r; ++dy) {
      int hw = 0;
      while ((hw + 1) * (hw + 1) + dy * dy <= r * r) ++hw;
      half_widths_.push_back(hw);
      for (int dx = -hw; dx <= hw; ++dx) offsets_.push_back({dy, dx});
    }
  }

  int kernel_size_;
  std::vector<Offset> offsets_;
  std::vector<int> half_widths_;
};

namespace detail {

// For every pixel, the horizontal distance to the nearest pixel in the same
// row whose bit equals `target`. Pixels beyond the row ends count as `target`
// when `outside_matches` is set; otherwise an unreachable distance is stored.
inline std::vector<int> row_distance(const BinaryMask& mask, bool target, bool outside_matches) {
  const int h = mask.height();
  const int w = mask.width();
  const int far = std::numeric_limits<int>::max() / 2;
  std::vector<int> dist(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    int* row = dist.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
    int last = outside_matches ? -1 : -far;
    for (int x = 0; x < w; ++x) {
      if (mask(y, x) == target) last = x;
      row[x] = x - last;
    }
    last = outside_matches ? w : far + w;
    for (int x = w - 1; x >= 0; --x) {
      if (mask(y, x) == target) last = x;
      row[x] = std::min(row[x], last - x);
    }
  }
  return dist;
}

}  // namespace detail

/// Binary dilation; neighbors outside the image count as unset.
inline BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  const int h = mask.height();
  const int w = mask.width();
  const int r = se.radius();
  const auto near_set = detail::row_distance(mask, true, false);
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int dy = -r; dy <= r; ++dy) {
      const int yy = y + dy;
      if (yy < 0 || yy >= h) continue;
      const int hw = se.half_width(dy);
      const int* row = near_set.data() + static_cast<std::size_t>(yy) * static_cast<std::size_t>(w);
      for (int x = 0; x < w; ++x) {
        if (row[x] <= hw) out.set(y, x);
      }
    }
  }
  return out;
}

/// Binary erosion; neighbors outside the image count as unset, so pixels
/// closer than the radius to the border always erode away.
inline BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  const int h = mask.height();
  const int w = mask.width();
  const int r = se.radius();
  BinaryMask out(h, w);
  if (2 * r >= h || 2 * r >= w) return out;
  const auto near_unset = detail::row_distance(mask, false, true);
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) out.set(y, x, mask(y, x));
    for (int dy = -r; dy <= r; ++dy) {
      const int hw = se.half_width(dy);
      const int* row = near_unset.data() + static_cast<std::size_t>(y + dy) * static_cast<std::size_t>(w);
      for (int x = r; x < w - r; ++x) {
        if (row[x] <= hw) out.set(y, x, false);
      }
    }
  }
  return out;
}

/**
 * Connected-component labeling with union-find.
 *
 * Labels are 1..K in raster-scan first-touch order; unset pixels get 0.
 */
inline LabelField connected_components(const BinaryMask& mask, Connectivity conn) {
  const int h = mask.height();
  const int w = mask.width();
  const std::size_t n = mask.pixel_count();
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);

  auto find = [&parent](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  };

  // Only already-visited neighbors: W, N, and for 8-connectivity NW and NE.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      const auto i = static_cast<std::uint32_t>(y * w + x);
      if (x > 0 && mask(y, x - 1)) unite(i, i - 1);
      if (y > 0 && mask(y - 1, x)) unite(i, i - static_cast<std::uint32_t>(w));
      if (conn == Connectivity::eight && y > 0) {
        if (x > 0 && mask(y - 1, x - 1)) unite(i, i - static_cast<std::uint32_t>(w) - 1);
        if (x + 1 < w && mask(y - 1, x + 1)) unite(i, i - static_cast<std::uint32_t>(w) + 1);
      }
    }
  }

  LabelField out{h, w, std::vector<std::uint32_t>(n, 0), 0};
  std::vector<std::uint32_t> root_label(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask.at_index(i)) continue;
    const auto root = find(static_cast<std::uint32_t>(i));
    if (root_label[root] == 0) root_label[root] = ++out.count;
    out.labels[i] = root_label[root];
  }
  return out;
}

/**
 * Token boundaries: the union over tokens of dilate(mask) & ~erode(mask).
 *
 * Evaluated directly: a pixel is on the boundary iff some pixel of its
 * footprint is outside the image or carries a different id. A whole-image
 * token therefore yields the 1-pixel border ring.
 */
inline BinaryMask boundaries_from_labels(const TokenIndexMap& seg, int kernel_size = 3) {
  const auto se = StructuringElement::disk(kernel_size);
  const int h = seg.height();
  const int w = seg.width();
  BinaryMask out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto id = seg(y, x);
      for (const auto& o : se.offsets()) {
        const int yy = y + o.dy;
        const int xx = x + o.dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w || seg(yy, xx) != id) {
          out.set(y, x);
          break;
        }
      }
    }
  }
  return out;
}

/// Clears the outermost 1-pixel ring.
inline void clear_border(BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  for (int x = 0; x < w; ++x) {
    mask.set(0, x, false);
    mask.set(h - 1, x, false);
  }
  for (int y = 0; y < h; ++y) {
    mask.set(y, 0, false);
    mask.set(y, w - 1, false);
  }
}

}  // namespace epoc

#endif  // EPOC_MORPHOLOGY_HPP
