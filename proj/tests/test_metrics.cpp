#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "epoc/metrics.hpp"
#include "epoc/patch.hpp"
#include "oracles.hpp"

using namespace epoc;

namespace {

TokenIndexMap column_split(int h, int w, int split) {
  std::vector<std::uint32_t> ids(static_cast<std::size_t>(h * w));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) ids[static_cast<std::size_t>(y * w + x)] = x < split ? 0 : 1;
  return TokenIndexMap(h, w, 2, ids);
}

// Precision/recall straight from the definition with brute-force dilation.
PrResult pr_oracle(const TokenIndexMap& pred, const BinaryMask& gt, const PrConfig& cfg) {
  auto pb = oracle::union_boundary(pred, 1);
  auto gb = gt;
  if (cfg.exclude_border) {
    for (int y = 0; y < gb.height(); ++y)
      for (int x = 0; x < gb.width(); ++x)
        if (y == 0 || x == 0 || y == gb.height() - 1 || x == gb.width() - 1) {
          pb.set(y, x, false);
          gb.set(y, x, false);
        }
  }
  const auto dp = oracle::dilate(pb, cfg.recall_tolerance);
  const auto dg = oracle::dilate(gb, cfg.precision_tolerance);
  double pn = 0, ph = 0, gn = 0, gh = 0;
  for (std::size_t i = 0; i < pb.pixel_count(); ++i) {
    pn += pb.at_index(i);
    ph += pb.at_index(i) && dg.at_index(i);
    gn += gb.at_index(i);
    gh += gb.at_index(i) && dp.at_index(i);
  }
  return {pn == 0 ? 1.0 : ph / pn, gn == 0 ? 1.0 : gh / gn};
}

double mono_oracle(const TokenIndexMap& pred, const BinaryMask& gt, int tol) {
  std::size_t clean = 0;
  for (std::uint32_t t = 0; t < pred.n_tokens(); ++t) {
    const auto core = oracle::erode(pred.token_mask(t), tol);
    bool hit = false;
    for (std::size_t i = 0; i < core.pixel_count(); ++i) hit = hit || (core.at_index(i) && gt.at_index(i));
    clean += hit ? 0 : 1;
  }
  return static_cast<double>(clean) / pred.n_tokens();
}

}  // namespace

TEST(BoundaryPr, SelfMatch) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto seg = oracle::random_seg(30, 40, 6, rng);
    for (bool border : {true, false}) {
      const auto pr = boundary_pr(seg, boundaries_from_labels(seg), {.exclude_border = border});
      EXPECT_DOUBLE_EQ(pr.precision, 1.0);
      EXPECT_DOUBLE_EQ(pr.recall, 1.0);
    }
  }
}

TEST(BoundaryPr, ThreePixelShiftWithinTolerance) {
  const auto gt = boundaries_from_labels(column_split(64, 64, 23));
  const auto pred = column_split(64, 64, 20);
  const auto pr = boundary_pr(pred, gt, {});
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  // Tolerance 1 no longer bridges the gap.
  const auto tight = boundary_pr(pred, gt, {.recall_tolerance = 1, .precision_tolerance = 1});
  EXPECT_DOUBLE_EQ(tight.recall, 0.0);
  EXPECT_DOUBLE_EQ(tight.precision, 0.0);
}

TEST(BoundaryPr, SingleTokenPrediction) {
  const TokenIndexMap whole(32, 32, 1, std::vector<std::uint32_t>(1024, 0));
  const auto gt = boundaries_from_labels(column_split(32, 32, 16));
  const auto pr = boundary_pr(whole, gt, {.exclude_border = true});
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 0.0);
}

TEST(BoundaryPr, MatchesDefinitionOracle) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto pred = oracle::random_seg(20, 24, 5, rng);
    const auto gt = boundaries_from_labels(oracle::random_seg(20, 24, 4, rng));
    const PrConfig cfg{.recall_tolerance = static_cast<int>(rng() % 4), .precision_tolerance = static_cast<int>(rng() % 4),
                       .exclude_border = trial % 2 == 0};
    const auto got = boundary_pr(pred, gt, cfg);
    const auto want = pr_oracle(pred, gt, cfg);
    ASSERT_DOUBLE_EQ(got.precision, want.precision);
    ASSERT_DOUBLE_EQ(got.recall, want.recall);
  }
}

TEST(BoundaryPr, MonotoneInToleranceAndPermutationInvariant) {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 15; ++trial) {
    const auto pred = oracle::random_seg(40, 40, 6, rng);
    const auto gt = boundaries_from_labels(oracle::random_seg(40, 40, 5, rng));
    double last_p = -1, last_r = -1;
    for (int tol = 0; tol <= 8; ++tol) {
      const auto pr = boundary_pr(pred, gt, {.recall_tolerance = tol, .precision_tolerance = tol});
      ASSERT_GE(pr.precision, 0.0);
      ASSERT_LE(pr.recall, 1.0);
      ASSERT_GE(pr.precision, last_p);
      ASSERT_GE(pr.recall, last_r);
      last_p = pr.precision;
      last_r = pr.recall;
    }
    std::vector<std::uint32_t> perm(pred.n_tokens());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::uint32_t> ids(pred.ids().begin(), pred.ids().end());
    for (auto& id : ids) id = perm[id];
    const TokenIndexMap permuted(40, 40, pred.n_tokens(), ids);
    const auto a = boundary_pr(pred, gt), b = boundary_pr(permuted, gt);
    EXPECT_EQ(a.precision, b.precision);
    EXPECT_EQ(a.recall, b.recall);
    EXPECT_EQ(monosemanticity(pred, gt, {3}), monosemanticity(permuted, gt, {3}));
  }
}

TEST(BoundaryPr, DimensionMismatch) {
  EXPECT_THROW(boundary_pr(column_split(8, 8, 4), BinaryMask(8, 9)), ValidationError);
  EXPECT_THROW(monosemanticity(column_split(8, 8, 4), BinaryMask(9, 8)), ValidationError);
}

TEST(Monosemanticity, TokensInsideRegionsScoreOne) {
  const auto gt = boundaries_from_labels(column_split(128, 128, 64));
  // 2x2 patches align with the GT split, so no core touches a boundary.
  EXPECT_DOUBLE_EQ(monosemanticity(patch_segment(128, 128, {2}), gt, {10}), 1.0);
}

TEST(Monosemanticity, StraddlingTokenIsPolysemantic) {
  // A 200x200 token centered on a vertical GT boundary inside a 300x300 scene.
  std::vector<std::uint32_t> ids(300 * 300, 1);
  for (int y = 50; y < 250; ++y)
    for (int x = 50; x < 250; ++x) ids[static_cast<std::size_t>(y * 300 + x)] = 0;
  const TokenIndexMap pred(300, 300, 2, ids);
  const auto gt = boundaries_from_labels(column_split(300, 300, 150));
  const auto records = token_records(pred);
  const auto core = erode(records[0].shape, StructuringElement::disk_of_radius(25));
  EXPECT_GE(core.count(), 150u * 150u);
  // The 50px frame around the square has an empty core and counts as clean.
  EXPECT_DOUBLE_EQ(monosemanticity(pred, gt, {25}), 0.5);
}

TEST(Monosemanticity, ThinTokenHasEmptyCore) {
  const auto gt = boundaries_from_labels(column_split(100, 100, 50));
  // Columns 40..79 (40px wide < 51px disk) straddle the boundary but have no core.
  std::vector<std::uint32_t> ids(100 * 100, 0);
  for (int y = 0; y < 100; ++y)
    for (int x = 40; x < 80; ++x) ids[static_cast<std::size_t>(y * 100 + x)] = 1;
  const TokenIndexMap pred(100, 100, 2, ids);
  EXPECT_DOUBLE_EQ(monosemanticity(pred, gt, {25}), 1.0);
}

TEST(Monosemanticity, MatchesOracleAndIsMonotone) {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pred = oracle::random_seg(24, 24, 3, rng);
    const auto gt = boundaries_from_labels(oracle::random_seg(24, 24, 3, rng));
    double last = -1;
    for (int tol = 0; tol <= 6; ++tol) {
      const double m = monosemanticity(pred, gt, {tol});
      ASSERT_DOUBLE_EQ(m, mono_oracle(pred, gt, tol)) << "trial " << trial << " tol " << tol;
      ASSERT_GE(m, last);
      last = m;
    }
  }
}

TEST(Monosemanticity, SelfEvaluationFixedPoint) {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto seg = oracle::random_seg(60, 60, 4, rng);
    const auto report = evaluate(seg, boundaries_from_labels(seg), {}, {2});
    EXPECT_DOUBLE_EQ(report.precision, 1.0);
    EXPECT_DOUBLE_EQ(report.recall, 1.0);
    EXPECT_DOUBLE_EQ(report.monosemanticity, 1.0);
  }
}

TEST(SizeDistribution, Examples) {
  const auto uniform = size_distribution(patch_segment(64, 64, {4}));
  ASSERT_EQ(uniform.size(), 16u);
  for (double v : uniform) EXPECT_EQ(v, 1.0 / 16.0);
  EXPECT_EQ(size_distribution(TokenIndexMap(3, 3, 1, std::vector<std::uint32_t>(9, 0))), std::vector<double>{1.0});

  std::mt19937 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = size_distribution(oracle::random_seg(33, 17, 9, rng));
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-9);
    EXPECT_TRUE(std::is_sorted(d.rbegin(), d.rend()));
  }
}

TEST(Metrics, ConfigValidation) {
  const auto seg = column_split(8, 8, 4);
  EXPECT_THROW(boundary_pr(seg, BinaryMask(8, 8), {.recall_tolerance = -1}), ValidationError);
  EXPECT_THROW(monosemanticity(seg, BinaryMask(8, 8), {-2}), ValidationError);
}
