#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "treecrf/raster.hpp"

namespace treecrf {

/// Rows are reference classes, columns predictions. Pixels ignored on either side are skipped.
struct Confusion {
  int class_count = 0;
  std::vector<std::uint64_t> counts;

  explicit Confusion(int classes = 0) : class_count(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}
  std::uint64_t& at(int ref, int pred) { return counts[static_cast<std::size_t>(ref) * class_count + pred]; }
  std::uint64_t at(int ref, int pred) const { return counts[static_cast<std::size_t>(ref) * class_count + pred]; }
  std::uint64_t total() const;
};

Confusion confusion(const LabelMap& reference, const LabelMap& prediction, int class_count);

struct SegMetrics {
  double overall_accuracy = 0.0;
  double average_accuracy = 0.0;  // mean recall over supported classes
  double mean_f1 = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;             // NaN for classes without reference pixels
  std::vector<int> unsupported;      // excluded from the means
};

/// Throws ValidationError when the confusion matrix is empty.
SegMetrics metrics(const Confusion& confusion);

nlohmann::json metrics_json(const SegMetrics& m);
/// Aligned table: one F1 column per class, then OA, AA and mean F1, all in percent.
std::string metrics_table(const SegMetrics& m, const std::string& row_name);

/// Per class c, pixels of class c with a 4-neighbour of another valid class, dilated to
/// a band of `width` pixels (odd) by a square structuring element. H x W x C, values 0/1.
Raster boundary_gt(const LabelMap& labels, int class_count, int width = 1);

/// Thins a single-channel map to ridge pixels along the dominant Sobel axis.
Raster non_max_suppression(const Raster& probability);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (false positive rate, true positive rate)
  double auc = 0.0;
};

/// ROC of single-channel scores against a single-channel 0/1 reference line. A reference
/// pixel is detected at threshold t when a score >= t lies within the Chebyshev radius
/// (tolerance_px - 1) / 2; a positive is false only when no reference pixel lies within
/// that radius. Rates are relative to the reference and non-reference pixel counts.
RocCurve roc_auc(const Raster& scores, const Raster& reference, int tolerance_px);

struct BoundaryReport {
  std::vector<double> auc;  // NaN where a class has no reference boundary
  std::vector<RocCurve> curves;
  double mean_auc = 0.0;
};

/// Per class: NMS of the predicted channel, then ROC against the 1 px class boundary.
BoundaryReport evaluate_boundaries(const Raster& predicted, const LabelMap& reference, int tolerance_px);

nlohmann::json boundary_json(const BoundaryReport& report, int tolerance_px);

}  // namespace treecrf
