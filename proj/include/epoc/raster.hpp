#ifndef EPOC_RASTER_HPP
#define EPOC_RASTER_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "epoc/error.hpp"

namespace epoc {

namespace detail {

inline std::size_t checked_area(int height, int width, int channels, const char* what) {
  if (height < 1 || width < 1) {
    throw ValidationError(std::string(what) + ": height and width must be >= 1");
  }
  if (channels < 1) {
    throw ValidationError(std::string(what) + ": channels must be >= 1");
  }
  return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
         static_cast<std::size_t>(channels);
}

}  // namespace detail

/**
 * Row-major, channel-interleaved raster.
 *
 * Sample (y, x, c) lives at ((y * width) + x) * channels + c.
 */
template <class T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int height, int width, int channels = 1, T fill = T{})
      : height_(height), width_(width), channels_(channels),
        data_(detail::checked_area(height, width, channels, "Raster"), fill) {}

  Raster(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (data_.size() != detail::checked_area(height, width, channels, "Raster")) {
      throw ValidationError("Raster: data length does not match height*width*channels");
    }
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
  const T& operator()(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

  std::span<T> pixel(int y, int x) noexcept {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }
  std::span<const T> pixel(int y, int x) const noexcept {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  bool same_shape(int height, int width) const noexcept {
    return height_ == height && width_ == width;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

/// 8-bit image, 1 (grayscale) or 3 (RGB) channels.
class RasterImage : public Raster<std::uint8_t> {
 public:
  RasterImage() = default;
  RasterImage(int height, int width, int channels, std::uint8_t fill = 0)
      : Raster(height, width, check_channels(channels), fill) {}
  RasterImage(int height, int width, int channels, std::vector<std::uint8_t> data)
      : Raster(height, width, check_channels(channels), std::move(data)) {}

 private:
  static int check_channels(int channels) {
    if (channels != 1 && channels != 3) {
      throw ValidationError("RasterImage: channels must be 1 or 3");
    }
    return channels;
  }
};

/// 32-bit float raster. With one channel and values in [0,1] it doubles as a
/// boundary probability map.
using FloatMap = Raster<float>;

/// Boolean raster stored one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, bool fill = false)
      : height_(height), width_(width),
        bits_(detail::checked_area(height, width, 1, "BinaryMask"), fill ? 1 : 0) {}

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t pixel_count() const noexcept { return bits_.size(); }

  bool operator()(int y, int x) const noexcept { return bits_[index(y, x)] != 0; }
  bool get(int y, int x) const noexcept { return bits_[index(y, x)] != 0; }
  void set(int y, int x, bool value = true) noexcept { bits_[index(y, x)] = value ? 1 : 0; }

  bool at_index(std::size_t i) const noexcept { return bits_[i] != 0; }
  void set_index(std::size_t i, bool value = true) noexcept { bits_[i] = value ? 1 : 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }
  bool any() const noexcept {
    for (auto b : bits_) {
      if (b) return true;
    }
    return false;
  }

  bool same_shape(const BinaryMask& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int y, int x) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/**
 * Panoptic token segmentation: every pixel carries an id in [0, n_tokens) and
 * every id occurs at least once. The constructor enforces both.
 */
class TokenIndexMap {
 public:
  TokenIndexMap() = default;

  TokenIndexMap(int height, int width, std::uint32_t n_tokens, std::vector<std::uint32_t> ids)
      : height_(height), width_(width), n_tokens_(n_tokens), ids_(std::move(ids)) {
    if (ids_.size() != detail::checked_area(height, width, 1, "TokenIndexMap")) {
      throw ValidationError("TokenIndexMap: id count does not match height*width");
    }
    if (n_tokens_ == 0) {
      throw ValidationError("TokenIndexMap: n_tokens must be >= 1");
    }
    std::vector<std::uint8_t> seen(n_tokens_, 0);
    std::uint32_t distinct = 0;
    for (auto id : ids_) {
      if (id >= n_tokens_) throw ValidationError("TokenIndexMap: id out of range");
      if (!seen[id]) {
        seen[id] = 1;
        ++distinct;
      }
    }
    if (distinct != n_tokens_) {
      throw ValidationError("TokenIndexMap: ids are not contiguous (some id in [0,N) is unused)");
    }
  }

  /// Relabels arbitrary labels to 0..N-1 in raster-scan first-touch order.
  static TokenIndexMap from_labels(int height, int width, std::span<const std::uint32_t> labels) {
    if (labels.size() != detail::checked_area(height, width, 1, "TokenIndexMap")) {
      throw ValidationError("TokenIndexMap: label count does not match height*width");
    }
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    std::vector<std::uint32_t> ids(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto [it, inserted] = remap.try_emplace(labels[i], static_cast<std::uint32_t>(remap.size()));
      ids[i] = it->second;
    }
    return TokenIndexMap(height, width, static_cast<std::uint32_t>(remap.size()), std::move(ids));
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::uint32_t n_tokens() const noexcept { return n_tokens_; }
  std::size_t pixel_count() const noexcept { return ids_.size(); }

  std::uint32_t operator()(int y, int x) const noexcept {
    return ids_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)];
  }
  std::span<const std::uint32_t> ids() const noexcept { return ids_; }

  /// Pixel count of every token, indexed by id.
  std::vector<std::size_t> areas() const {
    std::vector<std::size_t> out(n_tokens_, 0);
    for (auto id : ids_) ++out[id];
    return out;
  }

  BinaryMask token_mask(std::uint32_t id) const {
    BinaryMask mask(height_, width_);
    for (std::size_t i = 0; i < ids_.size(); ++i) mask.set_index(i, ids_[i] == id);
    return mask;
  }

  friend bool operator==(const TokenIndexMap&, const TokenIndexMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::uint32_t n_tokens_ = 0;
  std::vector<std::uint32_t> ids_;
};

/// Per-pixel component labels: 0 is background, components are 1..count.
struct LabelField {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> labels;
  std::uint32_t count = 0;

  std::uint32_t operator()(int y, int x) const noexcept {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
};

enum class Connectivity { four = 4, eight = 8 };

inline Connectivity connectivity_from_int(int value) {
  if (value == 4) return Connectivity::four;
  if (value == 8) return Connectivity::eight;
  throw ValidationError("connectivity must be 4 or 8");
}

struct Offset {
  int dy;
  int dx;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Neighbor enumeration order: N, S, W, E, then the diagonals NW, NE, SW, SE.
inline std::span<const Offset> neighbor_offsets(Connectivity conn) noexcept {
  static constexpr Offset kOffsets[8] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1},
                                         {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  return {kOffsets, conn == Connectivity::four ? std::size_t{4} : std::size_t{8}};
}

}  // namespace epoc

#endif  // EPOC_RASTER_HPP
