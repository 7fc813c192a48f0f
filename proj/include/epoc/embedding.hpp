#ifndef EPOC_EMBEDDING_HPP
#define EPOC_EMBEDDING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "epoc/io.hpp"
#include "epoc/raster.hpp"
#include "epoc/tokens.hpp"

namespace epoc {

/// N x D row-major matrix; row i is the vector of token i.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
      : rows_(rows), dim_(dim), data_(std::move(data)) {
    if (data_.size() != rows_ * dim_) throw ValidationError("EmbeddingMatrix: data length != rows*dim");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * dim_ + j]; }
  std::span<const float> data() const noexcept { return data_; }

  /// Serialized form: an FMAP with height = rows, width = dim, one channel.
  FloatMap to_fmap() const {
    return FloatMap(static_cast<int>(rows_), static_cast<int>(dim_), 1, data_);
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

/// Row-wise concatenation [a | b].
inline EmbeddingMatrix concat(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  if (a.rows() != b.rows()) throw ValidationError("concat: row counts differ");
  EmbeddingMatrix out(a.rows(), a.dim() + b.dim());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(a.row(i).begin(), a.row(i).end(), dst.begin());
    std::copy(b.row(i).begin(), b.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(a.dim()));
  }
  return out;
}

enum class UpsampleMode { nearest, bilinear };

/// Resamples a feature map with half-pixel (align_corners = false) centers.
inline FloatMap upsample(const FloatMap& features, int target_h, int target_w,
                         UpsampleMode mode = UpsampleMode::bilinear) {
  if (target_h < 1 || target_w < 1) throw ValidationError("upsample: target dims must be >= 1");
  if (features.same_shape(target_h, target_w)) return features;

  const int sh = features.height();
  const int sw = features.width();
  const int c = features.channels();
  const double scale_y = static_cast<double>(sh) / target_h;
  const double scale_x = static_cast<double>(sw) / target_w;
  FloatMap out(target_h, target_w, c);

  if (mode == UpsampleMode::nearest) {
    for (int y = 0; y < target_h; ++y) {
      const int sy = std::min(sh - 1, static_cast<int>(std::floor((y + 0.5) * scale_y)));
      for (int x = 0; x < target_w; ++x) {
        const int sx = std::min(sw - 1, static_cast<int>(std::floor((x + 0.5) * scale_x)));
        for (int k = 0; k < c; ++k) out(y, x, k) = features(sy, sx, k);
      }
    }
    return out;
  }

  struct Tap {
    int lo, hi;
    double frac;
  };
  const auto taps = [](int target, int source, double scale) {
    std::vector<Tap> t(static_cast<std::size_t>(target));
    for (int i = 0; i < target; ++i) {
      const double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(source - 1));
      const int lo = static_cast<int>(std::floor(s));
      t[static_cast<std::size_t>(i)] = {lo, std::min(lo + 1, source - 1), s - lo};
    }
    return t;
  };
  const auto ty = taps(target_h, sh, scale_y);
  const auto tx = taps(target_w, sw, scale_x);
  for (int y = 0; y < target_h; ++y) {
    const auto& a = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_w; ++x) {
      const auto& b = tx[static_cast<std::size_t>(x)];
      for (int k = 0; k < c; ++k) {
        const double top = features(a.lo, b.lo, k) * (1 - b.frac) + features(a.lo, b.hi, k) * b.frac;
        const double bot = features(a.hi, b.lo, k) * (1 - b.frac) + features(a.hi, b.hi, k) * b.frac;
        out(y, x, k) = static_cast<float>(top * (1 - a.frac) + bot * a.frac);
      }
    }
  }
  return out;
}

/// Raw pixels as a feature map scaled to [0, 1].
inline FloatMap image_features(const RasterImage& img) {
  FloatMap out(img.height(), img.width(), img.channels());
  auto dst = out.data();
  const auto src = img.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / 255.0f;
  return out;
}

/// Average-pools the feature vectors of every token.
inline EmbeddingMatrix content_embed(const FloatMap& features, const TokenIndexMap& seg) {
  if (!features.same_shape(seg.height(), seg.width())) {
    throw ValidationError("content_embed: feature map and segmentation dimensions differ");
  }
  const auto c = static_cast<std::size_t>(features.channels());
  std::vector<double> sums(seg.n_tokens() * c, 0.0);
  std::vector<std::size_t> counts(seg.n_tokens(), 0);
  const auto ids = seg.ids();
  const auto data = features.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double* s = sums.data() + ids[i] * c;
    for (std::size_t k = 0; k < c; ++k) s[k] += data[i * c + k];
    ++counts[ids[i]];
  }
  EmbeddingMatrix out(seg.n_tokens(), c);
  for (std::size_t t = 0; t < seg.n_tokens(); ++t) {
    auto row = out.row(t);
    for (std::size_t k = 0; k < c; ++k) {
      row[k] = static_cast<float>(sums[t * c + k] / static_cast<double>(counts[t]));
    }
  }
  return out;
}

/**
 * Resamples a shape mask to res x res cells. A cell is set iff at least half
 * of the source area it covers is set. Computed exactly in integer units of
 * 1/res source pixels.
 */
inline BinaryMask downsample_mask(const BinaryMask& shape, int res) {
  if (res < 1) throw ValidationError("mask resolution must be >= 1");
  const long long h = shape.height();
  const long long w = shape.width();
  // Prefix sums over columns per row keep the per-cell cost at O(rows).
  std::vector<long long> prefix(static_cast<std::size_t>(h * (w + 1)), 0);
  for (long long y = 0; y < h; ++y) {
    for (long long x = 0; x < w; ++x) {
      prefix[static_cast<std::size_t>(y * (w + 1) + x + 1)] =
          prefix[static_cast<std::size_t>(y * (w + 1) + x)] + (shape(static_cast<int>(y), static_cast<int>(x)) ? 1 : 0);
    }
  }
  // Set-area of row y over the scaled interval [a, b) where source pixel x
  // spans [x*res, (x+1)*res).
  const auto row_area = [&](long long y, long long a, long long b) {
    const long long x0 = a / res, x1 = (b - 1) / res;
    const auto px = [&](long long x) { return shape(static_cast<int>(y), static_cast<int>(x)) ? 1LL : 0LL; };
    if (x0 == x1) return px(x0) * (b - a);
    long long s = px(x0) * ((x0 + 1) * res - a) + px(x1) * (b - x1 * res);
    const auto* row = prefix.data() + y * (w + 1);
    s += (row[x1] - row[x0 + 1]) * res;
    return s;
  };

  BinaryMask out(res, res);
  for (long long r = 0; r < res; ++r) {
    const long long ya = r * h, yb = (r + 1) * h;  // scaled row interval
    for (long long c = 0; c < res; ++c) {
      const long long xa = c * w, xb = (c + 1) * w;
      long long covered = 0;
      for (long long y = ya / res; y * res < yb; ++y) {
        const long long overlap = std::min(yb, (y + 1) * res) - std::max(ya, y * res);
        covered += overlap * row_area(y, xa, xb);
      }
      // Cell area is h*w in scaled units squared.
      out.set(static_cast<int>(r), static_cast<int>(c), 2 * covered >= h * w);
    }
  }
  return out;
}

/// Row = flattened res x res shape mask followed by normalized (x, y, w, h).
inline EmbeddingMatrix position_embed(const TokenIndexMap& seg, int mask_res = 16) {
  if (mask_res < 1) throw ValidationError("mask resolution must be >= 1");
  const auto cells = static_cast<std::size_t>(mask_res) * static_cast<std::size_t>(mask_res);
  EmbeddingMatrix out(seg.n_tokens(), cells + 4);
  for (const auto& rec : token_records(seg)) {
    auto row = out.row(rec.id);
    const auto mask = downsample_mask(rec.shape, mask_res);
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < cells; ++i) row[i] = bits[i] ? 1.0f : 0.0f;
    row[cells + 0] = static_cast<float>(rec.bbox.x);
    row[cells + 1] = static_cast<float>(rec.bbox.y);
    row[cells + 2] = static_cast<float>(rec.bbox.w);
    row[cells + 3] = static_cast<float>(rec.bbox.h);
  }
  return out;
}

enum class Activation { relu, identity };

struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<float> weight;  ///< out_dim x in_dim, row-major
  std::vector<float> bias;    ///< out_dim
};

struct MlpWeights {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::relu;

  void validate() const {
    if (layers.empty()) throw ValidationError("MLP has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.in_dim == 0 || l.out_dim == 0) throw ValidationError("MLP layer with zero dimension");
      if (l.weight.size() != l.in_dim * l.out_dim || l.bias.size() != l.out_dim) {
        throw ValidationError("MLP layer weight/bias sizes do not match its dimensions");
      }
      if (i > 0 && layers[i - 1].out_dim != l.in_dim) throw ValidationError("MLP layer dimensions do not chain");
    }
  }
};

/// Applies the MLP to [content | position] row by row. No activation after
/// the last layer.
inline EmbeddingMatrix fuse(const EmbeddingMatrix& content, const EmbeddingMatrix& position,
                            const MlpWeights& weights) {
  weights.validate();
  if (content.rows() != position.rows()) throw ValidationError("fuse: row counts differ");
  if (weights.layers.front().in_dim != content.dim() + position.dim()) {
    throw ValidationError("fuse: first layer input width != content dim + position dim");
  }
  const auto joined = concat(content, position);
  EmbeddingMatrix out(joined.rows(), weights.layers.back().out_dim);
  std::vector<double> cur, next;
  for (std::size_t r = 0; r < joined.rows(); ++r) {
    cur.assign(joined.row(r).begin(), joined.row(r).end());
    for (std::size_t li = 0; li < weights.layers.size(); ++li) {
      const auto& layer = weights.layers[li];
      next.assign(layer.out_dim, 0.0);
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        const float* wrow = layer.weight.data() + o * layer.in_dim;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in_dim; ++i) acc += static_cast<double>(wrow[i]) * cur[i];
        if (li + 1 < weights.layers.size() && weights.activation == Activation::relu) acc = std::max(acc, 0.0);
        next[o] = acc;
      }
      std::swap(cur, next);
    }
    auto dst = out.row(r);
    for (std::size_t i = 0; i < cur.size(); ++i) dst[i] = static_cast<float>(cur[i]);
  }
  return out;
}

// MLP1: "MLP1" | u32 n_layers | per layer: u32 in, u32 out, f32 weights
// (out x in, row-major), f32 biases (all LE).

inline std::vector<char> encode_mlp(const MlpWeights& weights) {
  weights.validate();
  detail::ByteWriter out;
  out.magic("MLP1");
  out.u32(static_cast<std::uint32_t>(weights.layers.size()));
  for (const auto& l : weights.layers) {
    out.u32(static_cast<std::uint32_t>(l.in_dim));
    out.u32(static_cast<std::uint32_t>(l.out_dim));
    for (float v : l.weight) out.f32(v);
    for (float v : l.bias) out.f32(v);
  }
  return out.bytes();
}

inline MlpWeights decode_mlp(std::vector<char> bytes, const std::string& where = "mlp") {
  detail::ByteReader in(std::move(bytes), where);
  in.expect_magic("MLP1");
  const auto n_layers = in.u32();
  if (n_layers == 0) throw FormatError(FormatFault::dimension_overflow, where);
  MlpWeights weights;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    DenseLayer l;
    const auto in_dim = in.u32();
    const auto out_dim = in.u32();
    const auto n = detail::checked_samples(in_dim, out_dim, 1, where);
    in.require((n + out_dim) * 4);
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.weight.resize(n);
    for (auto& v : l.weight) v = in.f32();
    l.bias.resize(out_dim);
    for (auto& v : l.bias) v = in.f32();
    weights.layers.push_back(std::move(l));
  }
  weights.validate();
  return weights;
}

inline void write_mlp(const std::string& path, const MlpWeights& weights) {
  detail::write_file(path, encode_mlp(weights));
}

inline MlpWeights read_mlp(const std::string& path) { return decode_mlp(detail::read_file(path), path); }

enum class TruncationStrategy { smallest_first, random };

struct TruncationResult {
  std::vector<std::uint32_t> retained;  ///< ascending ids
  double area_fraction = 1.0;
};

/**
 * Keeps at most `budget` tokens. smallest_first drops the smallest tokens
 * (equal areas: the higher id goes first); random keeps a uniform sample
 * drawn from a generator seeded with `seed`.
 */
inline TruncationResult truncate(const TokenIndexMap& seg, std::size_t budget,
                                 TruncationStrategy strategy, std::uint64_t seed = 0) {
  if (budget < 1) throw ValidationError("truncate: budget must be >= 1");
  const auto areas = seg.areas();
  std::vector<std::uint32_t> order(seg.n_tokens());
  std::iota(order.begin(), order.end(), 0u);
  if (budget < order.size()) {
    if (strategy == TruncationStrategy::smallest_first) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return areas[a] > areas[b]; });
    } else {
      std::mt19937_64 rng(seed);
      std::shuffle(order.begin(), order.end(), rng);
    }
    order.resize(budget);
  }
  std::sort(order.begin(), order.end());
  std::size_t kept = 0;
  for (auto id : order) kept += areas[id];
  return {std::move(order), static_cast<double>(kept) / static_cast<double>(seg.pixel_count())};
}

}  // namespace epoc

#endif  // EPOC_EMBEDDING_HPP
