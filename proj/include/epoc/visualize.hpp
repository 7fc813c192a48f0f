#ifndef EPOC_VISUALIZE_HPP
#define EPOC_VISUALIZE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "epoc/morphology.hpp"
#include "epoc/raster.hpp"

namespace epoc {

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed multiplicative-hash palette. Hashes id + 1 so that id 0 is not
/// black; the rare all-zero hash is remapped to gray.
inline Rgb palette_color(std::uint32_t id) {
  const std::uint32_t hash = (id + 1u) * 2654435761u;
  Rgb rgb{static_cast<std::uint8_t>(hash >> 24), static_cast<std::uint8_t>(hash >> 16),
          static_cast<std::uint8_t>(hash >> 8)};
  if (rgb == Rgb{0, 0, 0}) rgb = {64, 64, 64};
  return rgb;
}

/**
 * Paints every token in its palette color, alpha-blended over `base` when
 * given, and draws token boundaries (without the image border ring) in black.
 */
inline RasterImage visualize(const TokenIndexMap& seg, const std::optional<RasterImage>& base = std::nullopt,
                             double alpha = 0.5) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("visualize: alpha must be in [0,1]");
  if (base && !base->same_shape(seg.height(), seg.width())) {
    throw ValidationError("visualize: base image dimensions differ from segmentation");
  }
  auto edges = boundaries_from_labels(seg, 3);
  clear_border(edges);

  RasterImage out(seg.height(), seg.width(), 3);
  for (int y = 0; y < seg.height(); ++y) {
    for (int x = 0; x < seg.width(); ++x) {
      if (edges(y, x)) continue;
      const auto color = palette_color(seg(y, x));
      for (int c = 0; c < 3; ++c) {
        if (!base) {
          out(y, x, c) = color[static_cast<std::size_t>(c)];
          continue;
        }
        const double under = (*base)(y, x, base->channels() == 3 ? c : 0);
        const double v = alpha * color[static_cast<std::size_t>(c)] + (1.0 - alpha) * under;
        out(y, x, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

}  // namespace epoc

#endif  // EPOC_VISUALIZE_HPP
