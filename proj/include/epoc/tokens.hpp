#ifndef EPOC_TOKENS_HPP
#define EPOC_TOKENS_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "epoc/raster.hpp"

namespace epoc {

struct PixelBox {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;
};

/// Normalized (x, y, w, h) box, each component in [0, 1].
struct NormalizedBox {
  double x = 0, y = 0, w = 0, h = 0;
};

struct TokenRecord {
  std::uint32_t id = 0;
  std::size_t area = 0;
  PixelBox box;
  NormalizedBox bbox;
  BinaryMask shape;  ///< token pixels inside `box`
};

inline std::vector<PixelBox> token_boxes(const TokenIndexMap& seg) {
  const int h = seg.height();
  const int w = seg.width();
  std::vector<int> y0(seg.n_tokens(), h), y1(seg.n_tokens(), -1), x0(seg.n_tokens(), w), x1(seg.n_tokens(), -1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto id = seg(y, x);
      y0[id] = std::min(y0[id], y);
      y1[id] = std::max(y1[id], y);
      x0[id] = std::min(x0[id], x);
      x1[id] = std::max(x1[id], x);
    }
  }
  std::vector<PixelBox> boxes(seg.n_tokens());
  for (std::uint32_t i = 0; i < seg.n_tokens(); ++i) {
    boxes[i] = {y0[i], x0[i], y1[i] - y0[i] + 1, x1[i] - x0[i] + 1};
  }
  return boxes;
}

/// Extracts area, tight bounding box and cropped shape mask of every token.
inline std::vector<TokenRecord> token_records(const TokenIndexMap& seg) {
  const auto boxes = token_boxes(seg);
  const auto areas = seg.areas();
  const double H = seg.height();
  const double W = seg.width();
  std::vector<TokenRecord> records;
  records.reserve(seg.n_tokens());
  for (std::uint32_t i = 0; i < seg.n_tokens(); ++i) {
    const auto& b = boxes[i];
    TokenRecord rec{i, areas[i], b, {b.left / W, b.top / H, b.width / W, b.height / H},
                    BinaryMask(b.height, b.width)};
    for (int y = 0; y < b.height; ++y) {
      for (int x = 0; x < b.width; ++x) rec.shape.set(y, x, seg(b.top + y, b.left + x) == i);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace epoc

#endif  // EPOC_TOKENS_HPP
