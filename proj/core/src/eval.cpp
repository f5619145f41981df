#include "treecrf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "treecrf/errors.hpp"

namespace treecrf {

std::uint64_t Confusion::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Confusion confusion(const LabelMap& reference, const LabelMap& prediction, int class_count) {
  if (reference.height() != prediction.height() || reference.width() != prediction.width()) {
    throw ValidationError("confusion: reference and prediction shapes differ");
  }
  Confusion cm(class_count);
  for (std::size_t p = 0; p < reference.pixel_count(); ++p) {
    const int r = reference.labels()[p];
    const int q = prediction.labels()[p];
    if (r == kIgnore || q == kIgnore) continue;
    if (r >= class_count || q >= class_count) {
      throw ValidationError("confusion: label " + std::to_string(std::max(r, q)) + " outside " +
                            std::to_string(class_count) + " classes");
    }
    ++cm.at(r, q);
  }
  return cm;
}

SegMetrics metrics(const Confusion& cm) {
  const int n = cm.class_count;
  const auto total = cm.total();
  if (total == 0) throw ValidationError("metrics undefined: no labelled pixels");
  SegMetrics m;
  m.precision.assign(n, 0.0);
  m.recall.assign(n, 0.0);
  m.f1.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::uint64_t diagonal = 0;
  double recall_sum = 0.0;
  double f1_sum = 0.0;
  int supported = 0;
  for (int c = 0; c < n; ++c) {
    std::uint64_t support = 0;
    std::uint64_t predicted = 0;
    for (int k = 0; k < n; ++k) {
      support += cm.at(c, k);
      predicted += cm.at(k, c);
    }
    const auto tp = cm.at(c, c);
    diagonal += tp;
    if (support == 0) {
      m.unsupported.push_back(c);
      continue;
    }
    m.recall[c] = static_cast<double>(tp) / static_cast<double>(support);
    m.precision[c] = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double denom = m.precision[c] + m.recall[c];
    m.f1[c] = denom > 0 ? 2.0 * m.precision[c] * m.recall[c] / denom : 0.0;
    recall_sum += m.recall[c];
    f1_sum += m.f1[c];
    ++supported;
  }
  m.overall_accuracy = static_cast<double>(diagonal) / static_cast<double>(total);
  m.average_accuracy = recall_sum / supported;
  m.mean_f1 = f1_sum / supported;
  return m;
}

namespace {
nlohmann::json nullable(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }
}  // namespace

nlohmann::json metrics_json(const SegMetrics& m) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < m.f1.size(); ++c) {
    per_class.push_back({{"class", c},
                         {"precision", nullable(m.precision[c])},
                         {"recall", nullable(m.recall[c])},
                         {"f1", nullable(m.f1[c])}});
  }
  nlohmann::json j = {{"oa", m.overall_accuracy}, {"aa", m.average_accuracy}, {"f1", m.mean_f1},
                      {"per_class", per_class}};
  if (!m.unsupported.empty()) {
    j["excluded_classes"] = m.unsupported;
    j["note"] = "classes without reference pixels are excluded from AA and mean F1";
  }
  return j;
}

std::string metrics_table(const SegMetrics& m, const std::string& row_name) {
  std::ostringstream os;
  const int name_width = std::max<int>(10, static_cast<int>(row_name.size()) + 2);
  os << std::left << std::setw(name_width) << "method" << std::right;
  for (std::size_t c = 0; c < m.f1.size(); ++c) os << std::setw(9) << ("F1 c" + std::to_string(c));
  os << std::setw(9) << "OA" << std::setw(9) << "AA" << std::setw(9) << "F1" << '\n';
  os << std::left << std::setw(name_width) << row_name << std::right << std::fixed << std::setprecision(2);
  for (double f : m.f1) {
    if (std::isnan(f)) {
      os << std::setw(9) << "-";
    } else {
      os << std::setw(9) << 100.0 * f;
    }
  }
  os << std::setw(9) << 100.0 * m.overall_accuracy << std::setw(9) << 100.0 * m.average_accuracy << std::setw(9)
     << 100.0 * m.mean_f1 << '\n';
  return os.str();
}

Raster boundary_gt(const LabelMap& labels, int class_count, int width) {
  if (width < 1 || width % 2 == 0) throw ValidationError("boundary width must be a positive odd number");
  const int h = labels.height();
  const int w = labels.width();
  Raster line(h, w, class_count, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int l = labels.at(r, c);
      if (l == kIgnore) continue;
      if (l >= class_count) throw ValidationError("boundary_gt: label outside class range");
      const int dr[4] = {-1, 0, 0, 1};
      const int dc[4] = {0, -1, 1, 0};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k];
        const int cc = c + dc[k];
        if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
        const int o = labels.at(rr, cc);
        if (o != kIgnore && o != l) {
          line.at(r, c, l) = 1.0f;
          break;
        }
      }
    }
  }
  const int radius = (width - 1) / 2;
  if (radius == 0) return line;
  Raster band(h, w, class_count, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int k = 0; k < class_count; ++k) {
        if (line.at(r, c, k) == 0.0f) continue;
        for (int rr = std::max(0, r - radius); rr <= std::min(h - 1, r + radius); ++rr) {
          for (int cc = std::max(0, c - radius); cc <= std::min(w - 1, c + radius); ++cc) band.at(rr, cc, k) = 1.0f;
        }
      }
    }
  }
  return band;
}

Raster non_max_suppression(const Raster& prob) {
  if (prob.channels() != 1) throw ValidationError("non_max_suppression expects a single channel");
  const int h = prob.height();
  const int w = prob.width();
  auto v = [&](int r, int c) { return prob.at(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1)); };
  std::vector<double> gx(prob.pixel_count());
  std::vector<double> gy(prob.pixel_count());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto p = static_cast<std::size_t>(r) * w + c;
      gx[p] = (v(r - 1, c + 1) + 2.0 * v(r, c + 1) + v(r + 1, c + 1)) -
              (v(r - 1, c - 1) + 2.0 * v(r, c - 1) + v(r + 1, c - 1));
      gy[p] = (v(r + 1, c - 1) + 2.0 * v(r + 1, c) + v(r + 1, c + 1)) -
              (v(r - 1, c - 1) + 2.0 * v(r - 1, c) + v(r - 1, c + 1));
    }
  }
  auto inside = [&](int r, int c) {
    const float x = prob.at(r, c);
    return v(r - 1, c) >= x && v(r + 1, c) >= x && v(r, c - 1) >= x && v(r, c + 1) >= x;
  };
  Raster out(h, w, 1, 0.0f);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const auto p = static_cast<std::size_t>(r) * w + c;
      const bool horizontal = std::abs(gx[p]) >= std::abs(gy[p]);
      const auto& g = horizontal ? gx : gy;
      const int dr = horizontal ? 0 : 1;
      const int dc = horizontal ? 1 : 0;
      const float self = prob.at(r, c);
      if (self < std::max(v(r - dr, c - dc), v(r + dr, c + dc))) continue;
      // Plateau across a ridge: drop the pixel when an equal neighbour lies inside the
      // plateau and has a strictly weaker gradient. Line ends, corners, junctions and
      // two-pixel bands have no such neighbour and survive.
      bool suppressed = false;
      if (v(r - dc, c - dr) >= self && v(r + dc, c + dr) >= self) {
        for (int side : {-1, 1}) {
          const int rr = r + side * dr;
          const int cc = c + side * dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w || prob.at(rr, cc) != self || !inside(rr, cc)) continue;
          const double theirs = std::abs(g[static_cast<std::size_t>(rr) * w + cc]);
          if (theirs < std::abs(g[p])) suppressed = true;
        }
      }
      if (!suppressed) out.at(r, c) = self;
    }
  }
  return out;
}

RocCurve roc_auc(const Raster& scores, const Raster& reference, int tolerance_px) {
  if (scores.channels() != 1 || reference.channels() != 1) throw ValidationError("roc_auc expects single channels");
  if (scores.height() != reference.height() || scores.width() != reference.width()) {
    throw ValidationError("roc_auc: score and reference shapes differ");
  }
  if (tolerance_px < 1 || tolerance_px % 2 == 0) throw ValidationError("tolerance must be a positive odd number");
  const int h = scores.height();
  const int w = scores.width();
  const int radius = (tolerance_px - 1) / 2;

  // Positive events: best score near each reference pixel. Negative events: scores of
  // pixels with no reference pixel nearby. Pixels near but off the line count for neither.
  std::vector<std::pair<float, int>> events;  // (score, 1 positive / 0 negative)
  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const bool on_line = reference.at(r, c) > 0.5f;
      float best = -std::numeric_limits<float>::infinity();
      bool near_line = false;
      for (int rr = std::max(0, r - radius); rr <= std::min(h - 1, r + radius); ++rr) {
        for (int cc = std::max(0, c - radius); cc <= std::min(w - 1, c + radius); ++cc) {
          best = std::max(best, scores.at(rr, cc));
          near_line = near_line || reference.at(rr, cc) > 0.5f;
        }
      }
      if (on_line) {
        ++positives;
        events.emplace_back(best, 1);
      } else {
        ++negatives;
        if (!near_line) events.emplace_back(scores.at(r, c), 0);
      }
    }
  }
  if (positives == 0 || negatives == 0) throw ValidationError("roc_auc: reference has no positives or no negatives");

  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < events.size();) {
    const float t = events[k].first;
    for (; k < events.size() && events[k].first == t; ++k) (events[k].second ? tp : fp) += 1;
    curve.points.emplace_back(static_cast<double>(fp) / negatives, static_cast<double>(tp) / positives);
  }
  if (curve.points.back() != std::pair{1.0, 1.0}) curve.points.emplace_back(1.0, 1.0);
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& [x0, y0] = curve.points[k - 1];
    const auto& [x1, y1] = curve.points[k];
    curve.auc += 0.5 * (x1 - x0) * (y0 + y1);
  }
  return curve;
}

BoundaryReport evaluate_boundaries(const Raster& predicted, const LabelMap& reference, int tolerance_px) {
  if (predicted.height() != reference.height() || predicted.width() != reference.width()) {
    throw ValidationError("boundary evaluation: prediction and reference shapes differ");
  }
  const int classes = predicted.channels();
  const Raster lines = boundary_gt(reference, classes, 1);
  BoundaryReport report;
  double sum = 0.0;
  int counted = 0;
  for (int k = 0; k < classes; ++k) {
    Raster channel(predicted.height(), predicted.width(), 1);
    Raster line(predicted.height(), predicted.width(), 1);
    bool any = false;
    for (std::size_t p = 0; p < channel.pixel_count(); ++p) {
      channel.values()[p] = predicted.pixel(p)[k];
      line.values()[p] = lines.pixel(p)[k];
      any = any || line.values()[p] > 0.5f;
    }
    if (!any) {
      report.auc.push_back(std::numeric_limits<double>::quiet_NaN());
      report.curves.emplace_back();
      continue;
    }
    auto curve = roc_auc(non_max_suppression(channel), line, tolerance_px);
    report.auc.push_back(curve.auc);
    sum += curve.auc;
    ++counted;
    report.curves.push_back(std::move(curve));
  }
  report.mean_auc = counted > 0 ? sum / counted : std::numeric_limits<double>::quiet_NaN();
  return report;
}

nlohmann::json boundary_json(const BoundaryReport& report, int tolerance_px) {
  nlohmann::json per_class = nlohmann::json::array();
  for (std::size_t c = 0; c < report.auc.size(); ++c) per_class.push_back({{"class", c}, {"auc", nullable(report.auc[c])}});
  return {{"tolerance_px", tolerance_px}, {"mean_auc", nullable(report.mean_auc)}, {"per_class", per_class}};
}

}  // namespace treecrf
