#ifndef EPOC_PATCH_HPP
#define EPOC_PATCH_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "epoc/raster.hpp"

namespace epoc {

struct PatchConfig {
  int p = 16;  ///< patches per side
};

/**
 * Square-grid tokenization into p*p tokens, ids in raster order.
 *
 * Pixel (y, x) falls in row floor(y*p/H) and column floor(x*p/W), so sizes
 * that p does not divide produce near-equal stripes instead of padding.
 */
inline TokenIndexMap patch_segment(int height, int width, const PatchConfig& cfg) {
  if (height < 1 || width < 1) throw ValidationError("patch_segment: empty image");
  if (cfg.p < 1 || cfg.p > std::min(height, width)) {
    throw ValidationError("invalid granularity: p must be in [1, min(height, width)]");
  }
  const auto p = static_cast<std::int64_t>(cfg.p);
  std::vector<std::uint32_t> col_of(static_cast<std::size_t>(width));
  for (int x = 0; x < width; ++x) col_of[static_cast<std::size_t>(x)] = static_cast<std::uint32_t>(x * p / width);

  std::vector<std::uint32_t> ids(static_cast<std::size_t>(height) * static_cast<std::size_t>(width));
  for (int y = 0; y < height; ++y) {
    const auto row = static_cast<std::uint32_t>(y * p / height);
    auto* out = ids.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
    for (int x = 0; x < width; ++x) out[x] = row * static_cast<std::uint32_t>(p) + col_of[static_cast<std::size_t>(x)];
  }
  return TokenIndexMap(height, width, static_cast<std::uint32_t>(p * p), std::move(ids));
}

}  // namespace epoc

#endif  // EPOC_PATCH_HPP
