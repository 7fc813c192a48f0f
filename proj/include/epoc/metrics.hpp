#ifndef EPOC_METRICS_HPP
#define EPOC_METRICS_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "epoc/morphology.hpp"
#include "epoc/raster.hpp"
#include "epoc/tokens.hpp"

namespace epoc {

/**
 * Boundary precision/recall settings.
 *
 * Tolerances are disk radii in pixels. With exclude_border the 1-pixel image
 * ring is removed from both the predicted and the ground-truth boundary.
 */
struct PrConfig {
  int recall_tolerance = 5;
  int precision_tolerance = 5;
  bool exclude_border = true;

  void validate() const {
    if (recall_tolerance < 0 || precision_tolerance < 0) {
      throw ValidationError("boundary tolerances must be >= 0");
    }
  }
};

struct MonoConfig {
  int erosion_tolerance = 25;

  void validate() const {
    if (erosion_tolerance < 0) throw ValidationError("monosemanticity tolerance must be >= 0");
  }
};

struct PrResult {
  double precision = 1.0;
  double recall = 1.0;
};

struct MetricReport {
  double precision = 1.0;
  double recall = 1.0;
  double monosemanticity = 1.0;
  std::uint32_t n_tokens = 0;
  std::vector<double> size_distribution;  ///< relative areas, descending
};

/// Fraction of `of` covered by `by`; 1 when `of` is empty.
inline double coverage(const BinaryMask& of, const BinaryMask& by) {
  std::size_t total = 0, hit = 0;
  const auto a = of.bits();
  const auto b = by.bits();
  for (std::size_t i = 0; i < a.size(); ++i) {
    total += a[i];
    hit += a[i] & b[i];
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

inline PrResult boundary_pr(const TokenIndexMap& pred, const BinaryMask& gt_boundary, const PrConfig& cfg = {}) {
  cfg.validate();
  if (pred.height() != gt_boundary.height() || pred.width() != gt_boundary.width()) {
    throw ValidationError("boundary_pr: prediction and ground truth dimensions differ");
  }
  BinaryMask predicted = boundaries_from_labels(pred, 3);
  BinaryMask truth = gt_boundary;
  if (cfg.exclude_border) {
    clear_border(predicted);
    clear_border(truth);
  }
  const auto near_pred = dilate(predicted, StructuringElement::disk_of_radius(cfg.recall_tolerance));
  const auto near_truth = dilate(truth, StructuringElement::disk_of_radius(cfg.precision_tolerance));
  return {coverage(predicted, near_truth), coverage(truth, near_pred)};
}

/**
 * Fraction of tokens whose core, the token eroded by a disk of radius
 * erosion_tolerance, misses every ground-truth boundary pixel. Tokens whose
 * core is empty count as monosemantic.
 */
inline double monosemanticity(const TokenIndexMap& pred, const BinaryMask& gt_boundary, const MonoConfig& cfg = {}) {
  cfg.validate();
  if (pred.height() != gt_boundary.height() || pred.width() != gt_boundary.width()) {
    throw ValidationError("monosemanticity: prediction and ground truth dimensions differ");
  }
  const auto se = StructuringElement::disk_of_radius(cfg.erosion_tolerance);
  const int span = se.kernel_size();
  std::size_t clean = 0;
  for (const auto& rec : token_records(pred)) {
    if (rec.box.height < span || rec.box.width < span) {
      ++clean;
      continue;
    }
    // The crop holds exactly the token pixels; everything outside it is
    // foreign to the token, which matches the erosion border rule.
    const auto core = erode(rec.shape, se);
    bool crosses = false;
    for (int y = 0; y < rec.box.height && !crosses; ++y) {
      for (int x = 0; x < rec.box.width; ++x) {
        if (core(y, x) && gt_boundary(rec.box.top + y, rec.box.left + x)) {
          crosses = true;
          break;
        }
      }
    }
    if (!crosses) ++clean;
  }
  return static_cast<double>(clean) / static_cast<double>(pred.n_tokens());
}

inline std::vector<double> size_distribution(const TokenIndexMap& seg) {
  const auto areas = seg.areas();
  const double total = static_cast<double>(seg.pixel_count());
  std::vector<double> out;
  out.reserve(areas.size());
  for (auto a : areas) out.push_back(static_cast<double>(a) / total);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline MetricReport evaluate(const TokenIndexMap& pred, const BinaryMask& gt_boundary,
                             const PrConfig& pr_cfg = {}, const MonoConfig& mono_cfg = {}) {
  const auto pr = boundary_pr(pred, gt_boundary, pr_cfg);
  return {pr.precision, pr.recall, monosemanticity(pred, gt_boundary, mono_cfg), pred.n_tokens(),
          size_distribution(pred)};
}

}  // namespace epoc

#endif  // EPOC_METRICS_HPP
