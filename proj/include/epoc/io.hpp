#ifndef EPOC_IO_HPP
#define EPOC_IO_HPP

#include <png.h>

#include <bit>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "epoc/error.hpp"
#include "epoc/raster.hpp"

namespace epoc {

namespace detail {

// Hard cap on samples in a single file; anything larger is treated as a
// corrupted header rather than an allocation request.
inline constexpr std::uint64_t kMaxSamples = std::uint64_t{1} << 31;

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  const std::vector<char>& bytes() const noexcept { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::vector<char> bytes, std::string where)
      : bytes_(std::move(bytes)), where_(std::move(where)) {}

  void expect_magic(std::string_view m) {
    if (bytes_.size() < m.size() || std::string_view(bytes_.data(), m.size()) != m) {
      throw FormatError(FormatFault::bad_magic, where_);
    }
    pos_ = m.size();
  }
  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void require(std::uint64_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(FormatFault::truncated, where_);
  }
  const std::string& where() const noexcept { return where_; }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
  std::string where_;
};

inline std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

inline std::uint64_t checked_samples(std::uint32_t h, std::uint32_t w, std::uint32_t c,
                                     const std::string& where) {
  const std::uint64_t n = std::uint64_t{h} * w * c;
  if (h == 0 || w == 0 || c == 0 || n > kMaxSamples ||
      h > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      w > static_cast<std::uint32_t>(std::numeric_limits<int>::max()) ||
      c > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw FormatError(FormatFault::dimension_overflow, where);
  }
  return n;
}

}  // namespace detail

// FMAP: "FMP1" | u32 height | u32 width | u32 channels | f32 samples (all LE).

inline std::vector<char> encode_fmap(const FloatMap& map) {
  detail::ByteWriter out;
  out.magic("FMP1");
  out.u32(static_cast<std::uint32_t>(map.height()));
  out.u32(static_cast<std::uint32_t>(map.width()));
  out.u32(static_cast<std::uint32_t>(map.channels()));
  for (float v : map.data()) out.f32(v);
  return out.bytes();
}

inline FloatMap decode_fmap(std::vector<char> bytes, const std::string& where = "fmap") {
  detail::ByteReader in(std::move(bytes), where);
  in.expect_magic("FMP1");
  const auto h = in.u32();
  const auto w = in.u32();
  const auto c = in.u32();
  const auto n = detail::checked_samples(h, w, c, where);
  in.require(n * 4);
  std::vector<float> data(n);
  for (auto& v : data) v = in.f32();
  return FloatMap(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(data));
}

inline void write_fmap(const std::string& path, const FloatMap& map) {
  detail::write_file(path, encode_fmap(map));
}

inline FloatMap read_fmap(const std::string& path) {
  return decode_fmap(detail::read_file(path), path);
}

// SEG: "SEG1" | u32 height | u32 width | u32 n_tokens | u32 ids (all LE).

inline std::vector<char> encode_seg(const TokenIndexMap& seg) {
  detail::ByteWriter out;
  out.magic("SEG1");
  out.u32(static_cast<std::uint32_t>(seg.height()));
  out.u32(static_cast<std::uint32_t>(seg.width()));
  out.u32(seg.n_tokens());
  for (auto id : seg.ids()) out.u32(id);
  return out.bytes();
}

inline TokenIndexMap decode_seg(std::vector<char> bytes, const std::string& where = "seg") {
  detail::ByteReader in(std::move(bytes), where);
  in.expect_magic("SEG1");
  const auto h = in.u32();
  const auto w = in.u32();
  const auto n_tokens = in.u32();
  const auto n = detail::checked_samples(h, w, 1, where);
  in.require(n * 4);
  std::vector<std::uint32_t> ids(n);
  for (auto& id : ids) {
    id = in.u32();
    if (id >= n_tokens) throw FormatError(FormatFault::id_out_of_range, where);
  }
  return TokenIndexMap(static_cast<int>(h), static_cast<int>(w), n_tokens, std::move(ids));
}

inline void write_seg(const std::string& path, const TokenIndexMap& seg) {
  detail::write_file(path, encode_seg(seg));
}

inline TokenIndexMap read_seg(const std::string& path) {
  return decode_seg(detail::read_file(path), path);
}

// PNG

/// Decoded PNG samples before any normalization. bit_depth is 8 or 16.
struct PngSamples {
  int height = 0;
  int width = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; only trivially destructible state lives
// between setjmp and the libpng calls.
inline bool read_png_rows(std::FILE* fp, PngSamples& out, std::vector<png_byte>& buffer,
                          char (&message)[256]) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep* volatile rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::snprintf(message, sizeof message, "libpng decode error");
    delete[] rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * static_cast<std::size_t>(out.height));
  rows = new png_bytep[static_cast<std::size_t>(out.height)];
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + rowbytes * static_cast<std::size_t>(y);
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  delete[] rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

inline bool write_png_rows(std::FILE* fp, int height, int width, int color_type, int bit_depth,
                           const png_byte* data, std::size_t rowbytes) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, data + rowbytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace detail

inline PngSamples read_png_samples(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_byte header[8] = {};
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw FormatError(FormatFault::bad_magic, path);
  }
  std::rewind(fp.get());
  PngSamples out;
  std::vector<png_byte> buffer;
  char message[256] = {};
  if (!detail::read_png_rows(fp.get(), out, buffer, message)) {
    throw FormatError(FormatFault::truncated, path);
  }
  if (out.channels != 1 && out.channels != 3) throw FormatError(FormatFault::unsupported, path);
  out.samples.resize(static_cast<std::size_t>(out.height) * static_cast<std::size_t>(out.width) *
                     static_cast<std::size_t>(out.channels));
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      out.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = buffer[i];
  }
  return out;
}

/// Reads any 8/16-bit grayscale or RGB PNG as an 8-bit image (alpha dropped).
inline RasterImage read_png(const std::string& path) {
  auto png = read_png_samples(path);
  std::vector<std::uint8_t> data(png.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = png.bit_depth == 16
                  ? static_cast<std::uint8_t>((png.samples[i] * 255u + 32767u) / 65535u)
                  : static_cast<std::uint8_t>(png.samples[i]);
  }
  return RasterImage(png.height, png.width, png.channels, std::move(data));
}

/// Reads a grayscale PNG as a single-channel map, dividing every sample by
/// the largest representable sample (255 or 65535).
inline FloatMap read_png_float(const std::string& path) {
  auto png = read_png_samples(path);
  if (png.channels != 1) throw FormatError(FormatFault::unsupported, path);
  const float max_sample = png.bit_depth == 16 ? 65535.0f : 255.0f;
  std::vector<float> data(png.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(png.samples[i]) / max_sample;
  return FloatMap(png.height, png.width, 1, std::move(data));
}

inline void write_png(const std::string& path, const RasterImage& img) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  const int color = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  const auto rowbytes = static_cast<std::size_t>(img.width()) * static_cast<std::size_t>(img.channels());
  if (!detail::write_png_rows(fp.get(), img.height(), img.width(), color, 8, img.data().data(), rowbytes)) {
    throw IoError("png encode failed for " + path);
  }
}

/// 16-bit grayscale writer; samples are row-major.
inline void write_png16(const std::string& path, int height, int width,
                        std::span<const std::uint16_t> samples) {
  if (samples.size() != detail::checked_area(height, width, 1, "write_png16")) {
    throw ValidationError("write_png16: sample count does not match dimensions");
  }
  std::vector<png_byte> bytes(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bytes[2 * i] = static_cast<png_byte>(samples[i] >> 8);
    bytes[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xFF);
  }
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  if (!detail::write_png_rows(fp.get(), height, width, PNG_COLOR_TYPE_GRAY, 16, bytes.data(),
                              static_cast<std::size_t>(width) * 2)) {
    throw IoError("png encode failed for " + path);
  }
}

/// True when the path names a PNG by extension (case-insensitive).
inline bool has_png_extension(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".png";
}

}  // namespace epoc

#endif  // EPOC_IO_HPP
