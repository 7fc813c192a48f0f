#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <numeric>
#include <random>

#include "epoc/io.hpp"
#include "epoc/morphology.hpp"
#include "epoc/raster.hpp"
#include "oracles.hpp"

using namespace epoc;

namespace {

BinaryMask random_mask(int h, int w, double density, std::mt19937& rng) {
  std::bernoulli_distribution bit(density);
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(y, x, bit(rng));
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("epoc_test_" + name)).string();
}

}  // namespace

TEST(Raster, ConstructorsValidate) {
  EXPECT_THROW(RasterImage(0, 4, 3), ValidationError);
  EXPECT_THROW(RasterImage(4, 4, 2), ValidationError);
  EXPECT_THROW(FloatMap(2, 2, 1, std::vector<float>(3)), ValidationError);
  EXPECT_THROW(TokenIndexMap(1, 2, 2, {0, 2}), ValidationError);
  EXPECT_THROW(TokenIndexMap(1, 2, 3, {0, 1}), ValidationError);  // id 2 unused
  EXPECT_NO_THROW(TokenIndexMap(1, 2, 2, {1, 0}));
}

TEST(Raster, FromLabelsCompactsInFirstTouchOrder) {
  const std::vector<std::uint32_t> raw{7, 7, 3, 9, 3, 7};
  const auto seg = TokenIndexMap::from_labels(2, 3, raw);
  EXPECT_EQ(seg.n_tokens(), 3u);
  const std::vector<std::uint32_t> expected{0, 0, 1, 2, 1, 0};
  EXPECT_TRUE(std::equal(seg.ids().begin(), seg.ids().end(), expected.begin()));
}

TEST(StructuringElement, DiskSizes) {
  EXPECT_EQ(StructuringElement::disk(1).offsets().size(), 1u);
  EXPECT_EQ(StructuringElement::disk(3).offsets().size(), 5u);
  EXPECT_EQ(StructuringElement::disk(5).offsets().size(), 13u);
  EXPECT_THROW(StructuringElement::disk(4), ValidationError);
  EXPECT_THROW(StructuringElement::disk(0), ValidationError);
  for (int k : {1, 3, 5, 7, 11}) {
    const auto se = StructuringElement::disk(k);
    const auto& off = se.offsets();
    EXPECT_NE(std::find(off.begin(), off.end(), Offset{0, 0}), off.end());
    for (const auto& o : off) {
      EXPECT_NE(std::find(off.begin(), off.end(), Offset{-o.dy, -o.dx}), off.end());
    }
  }
}

TEST(Morphology, DilateExamples) {
  BinaryMask empty(6, 6);
  EXPECT_EQ(dilate(empty, StructuringElement::disk(5)), empty);

  BinaryMask one(5, 5);
  one.set(2, 2);
  const auto d = dilate(one, StructuringElement::disk(3));
  EXPECT_EQ(d.count(), 5u);
  EXPECT_TRUE(d(1, 2) && d(3, 2) && d(2, 1) && d(2, 3) && d(2, 2));

  BinaryMask col(10, 10);
  for (int y = 0; y < 10; ++y) col.set(y, 5);
  const auto dc = dilate(col, StructuringElement::disk(5));
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(dc(y, x), x >= 3 && x <= 7) << y << "," << x;
}

TEST(Morphology, ErodeExamples) {
  BinaryMask full(10, 10, true);
  const auto e = erode(full, StructuringElement::disk(3));
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) EXPECT_EQ(e(y, x), y >= 1 && y <= 8 && x >= 1 && x <= 8);

  BinaryMask one(5, 5);
  one.set(2, 2);
  EXPECT_FALSE(erode(one, StructuringElement::disk(3)).any());
}

TEST(Morphology, MatchesFootprintOracle) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 24);
    const int w = 1 + static_cast<int>(rng() % 24);
    const auto m = random_mask(h, w, trial % 2 ? 0.2 : 0.8, rng);
    for (int k : {1, 3, 5, 9}) {
      const auto se = StructuringElement::disk(k);
      ASSERT_EQ(dilate(m, se), oracle::dilate(m, k / 2)) << "trial " << trial << " k " << k;
      ASSERT_EQ(erode(m, se), oracle::erode(m, k / 2)) << "trial " << trial << " k " << k;
    }
  }
}

TEST(Morphology, ExtensivityAndMonotonicity) {
  std::mt19937 rng(5);
  const auto se = StructuringElement::disk(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_mask(16, 16, 0.4, rng);
    auto b = a;
    for (int i = 0; i < 20; ++i) b.set(static_cast<int>(rng() % 16), static_cast<int>(rng() % 16));
    const auto da = dilate(a, se), db = dilate(b, se), ea = erode(a, se), eb = erode(b, se);
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      ASSERT_TRUE(!a.at_index(i) || da.at_index(i));
      ASSERT_TRUE(!ea.at_index(i) || a.at_index(i));
      ASSERT_TRUE(!da.at_index(i) || db.at_index(i));
      ASSERT_TRUE(!ea.at_index(i) || eb.at_index(i));
    }
  }
}

TEST(Morphology, ClosingIsExtensiveAwayFromBorder) {
  std::mt19937 rng(9);
  const auto se = StructuringElement::disk(5);
  for (int trial = 0; trial < 30; ++trial) {
    BinaryMask m(20, 20);
    for (int y = 2; y < 18; ++y)
      for (int x = 2; x < 18; ++x) m.set(y, x, rng() % 3 == 0);
    const auto closed = erode(dilate(m, se), se);
    for (std::size_t i = 0; i < m.pixel_count(); ++i) ASSERT_TRUE(!m.at_index(i) || closed.at_index(i));
  }
}

TEST(ConnectedComponents, DiagonalPair) {
  BinaryMask m(2, 2);
  m.set(0, 0);
  m.set(1, 1);
  EXPECT_EQ(connected_components(m, Connectivity::four).count, 2u);
  EXPECT_EQ(connected_components(m, Connectivity::eight).count, 1u);
  EXPECT_EQ(connected_components(BinaryMask(3, 3), Connectivity::eight).count, 0u);
}

TEST(ConnectedComponents, ExhaustiveFourByFour) {
  for (std::uint32_t bits = 0; bits < (1u << 16); ++bits) {
    BinaryMask m(4, 4);
    for (int i = 0; i < 16; ++i) m.set(i / 4, i % 4, (bits >> i) & 1u);
    for (int conn : {4, 8}) {
      std::uint32_t count = 0;
      const auto expected = oracle::flood_fill_labels(m, conn, &count);
      const auto got = connected_components(m, connectivity_from_int(conn));
      // Both number components in raster first-touch order, so labels agree exactly.
      ASSERT_EQ(got.count, count);
      ASSERT_EQ(got.labels, expected) << "mask " << bits << " conn " << conn;
    }
  }
}

TEST(ConnectedComponents, RandomMasksMatchFloodFill) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_mask(32, 32, 0.45, rng);
    for (int conn : {4, 8}) {
      std::uint32_t count = 0;
      const auto expected = oracle::flood_fill_labels(m, conn, &count);
      const auto got = connected_components(m, connectivity_from_int(conn));
      ASSERT_EQ(got.count, count);
      ASSERT_TRUE(oracle::same_partition(got.labels, expected));
    }
  }
}

TEST(Boundaries, SingleTokenGivesBorderRing) {
  const TokenIndexMap seg(6, 7, 1, std::vector<std::uint32_t>(42, 0));
  const auto b = boundaries_from_labels(seg);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) EXPECT_EQ(b(y, x), y == 0 || y == 5 || x == 0 || x == 6);
}

TEST(Boundaries, ColumnSplit) {
  std::vector<std::uint32_t> ids(64);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ids[static_cast<std::size_t>(y * 8 + x)] = x < 4 ? 0 : 1;
  const auto b = boundaries_from_labels(TokenIndexMap(8, 8, 2, ids));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      const bool ring = y == 0 || y == 7 || x == 0 || x == 7;
      EXPECT_EQ(b(y, x), ring || x == 3 || x == 4) << y << "," << x;
    }
}

TEST(Boundaries, MatchesLiteralUnionDefinition) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const auto seg = oracle::random_seg(12 + trial % 7, 10 + trial % 5, 5, rng);
    for (int k : {3, 5}) {
      const auto b = boundaries_from_labels(seg, k);
      ASSERT_EQ(b, oracle::union_boundary(seg, k / 2));
      if (seg.n_tokens() >= 2) {
        ASSERT_TRUE(b.any());
      }
    }
  }
}

TEST(Boundaries, InvariantUnderIdPermutation) {
  std::mt19937 rng(8);
  const auto seg = oracle::random_seg(20, 20, 6, rng);
  std::vector<std::uint32_t> perm(seg.n_tokens());
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::uint32_t> ids(seg.ids().begin(), seg.ids().end());
  for (auto& id : ids) id = perm[id];
  const TokenIndexMap permuted(20, 20, seg.n_tokens(), ids);
  EXPECT_EQ(boundaries_from_labels(seg), boundaries_from_labels(permuted));
}

TEST(FileIo, FmapRoundTripIsBitExact) {
  FloatMap m(3, 4, 2);
  std::mt19937 rng(1);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  for (auto& v : m.data()) v = u(rng);
  m(0, 0, 0) = -0.0f;
  m(1, 1, 1) = std::numeric_limits<float>::denorm_min();
  const auto path = temp_path("roundtrip.fmap");
  write_fmap(path, m);
  const auto back = read_fmap(path);
  ASSERT_EQ(back.height(), 3);
  ASSERT_EQ(back.channels(), 2);
  EXPECT_EQ(std::memcmp(back.data().data(), m.data().data(), m.data().size_bytes()), 0);
  EXPECT_EQ(encode_fmap(back), encode_fmap(m));
}

TEST(FileIo, FmapHeaderLayout) {
  const FloatMap m(1, 2, 1, std::vector<float>{1.0f, 0.5f});
  const auto bytes = encode_fmap(m);
  const std::vector<unsigned char> expected{'F', 'M', 'P', '1', 1, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0,
                                            0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x3F};
  ASSERT_EQ(bytes.size(), expected.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(bytes[i]), expected[i]);
}

TEST(FileIo, SegRoundTripAndLayout) {
  const TokenIndexMap seg(2, 2, 2, {0, 1, 1, 0});
  const auto bytes = encode_seg(seg);
  EXPECT_EQ(std::string(bytes.data(), 4), "SEG1");
  EXPECT_EQ(bytes.size(), 16u + 16u);
  EXPECT_EQ(decode_seg(bytes), seg);
  const auto path = temp_path("roundtrip.seg");
  write_seg(path, seg);
  EXPECT_EQ(read_seg(path), seg);
}

TEST(FileIo, DistinctErrors) {
  const auto fault_of = [](auto&& fn) {
    try {
      fn();
    } catch (const FormatError& e) {
      return e.fault();
    }
    ADD_FAILURE() << "no FormatError";
    return FormatFault::unsupported;
  };

  // id 5 with n_tokens = 3.
  auto bad_id = encode_seg(TokenIndexMap(1, 2, 2, {0, 1}));
  bad_id[12] = 3;
  bad_id[20] = 5;
  EXPECT_EQ(fault_of([&] { decode_seg(bad_id); }), FormatFault::id_out_of_range);

  auto truncated = encode_fmap(FloatMap(2, 2, 1));
  truncated.pop_back();
  EXPECT_EQ(fault_of([&] { decode_fmap(truncated); }), FormatFault::truncated);

  auto huge = encode_fmap(FloatMap(1, 1, 1));
  for (int i = 4; i < 12; ++i) huge[static_cast<std::size_t>(i)] = static_cast<char>(0xFF);
  EXPECT_EQ(fault_of([&] { decode_fmap(huge); }), FormatFault::dimension_overflow);

  auto zero = encode_seg(TokenIndexMap(1, 1, 1, {0}));
  zero[4] = 0;
  EXPECT_EQ(fault_of([&] { decode_seg(zero); }), FormatFault::dimension_overflow);
}

TEST(FileIo, EveryMutatedMagicIsRejected) {
  const auto fmap = encode_fmap(FloatMap(2, 2, 1));
  const auto seg = encode_seg(TokenIndexMap(1, 1, 1, {0}));
  for (int pos = 0; pos < 4; ++pos) {
    for (int bit = 0; bit < 8; ++bit) {
      auto f = fmap;
      f[static_cast<std::size_t>(pos)] = static_cast<char>(f[static_cast<std::size_t>(pos)] ^ (1 << bit));
      EXPECT_THROW(decode_fmap(f), FormatError);
      auto s = seg;
      s[static_cast<std::size_t>(pos)] = static_cast<char>(s[static_cast<std::size_t>(pos)] ^ (1 << bit));
      EXPECT_THROW(decode_seg(s), FormatError);
    }
  }
  EXPECT_THROW(decode_fmap(encode_seg(TokenIndexMap(1, 1, 1, {0}))), FormatError);
}

TEST(FileIo, MissingFileIsIoError) {
  EXPECT_THROW(read_fmap("/nonexistent/dir/x.fmap"), IoError);
  EXPECT_THROW(read_png("/nonexistent/dir/x.png"), IoError);
}

TEST(Png, SixteenBitGrayscaleNormalizes) {
  const auto path = temp_path("gray16.png");
  const std::vector<std::uint16_t> samples{0, 65535, 32768, 1};
  write_png16(path, 2, 2, samples);
  const auto map = read_png_float(path);
  ASSERT_EQ(map.channels(), 1);
  EXPECT_EQ(map(0, 0), 0.0f);
  EXPECT_EQ(map(0, 1), 1.0f);
  EXPECT_FLOAT_EQ(map(1, 0), 32768.0f / 65535.0f);
  EXPECT_FLOAT_EQ(map(1, 1), 1.0f / 65535.0f);
}

TEST(Png, EightBitRoundTrip) {
  RasterImage rgb(3, 5, 3);
  std::mt19937 rng(4);
  for (auto& v : rgb.data()) v = static_cast<std::uint8_t>(rng());
  const auto path = temp_path("rgb8.png");
  write_png(path, rgb);
  EXPECT_EQ(read_png(path), rgb);

  RasterImage gray(2, 2, 1, std::vector<std::uint8_t>{0, 255, 51, 102});
  write_png(path, gray);
  const auto map = read_png_float(path);
  EXPECT_EQ(map(0, 1), 1.0f);
  EXPECT_FLOAT_EQ(map(1, 0), 0.2f);
}

TEST(Png, RejectsNonPng) {
  const auto path = temp_path("not.png");
  std::ofstream(path) << "definitely not a png file";
  try {
    read_png(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.fault(), FormatFault::bad_magic);
  }
}
