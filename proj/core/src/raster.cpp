#include "treecrf/raster.hpp"

#include <algorithm>
#include <cmath>

#include "treecrf/errors.hpp"

namespace treecrf {

Raster::Raster(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels < 0) throw ValidationError("raster dimensions must be non-negative");
  values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Raster::Raster(int height, int width, int channels, std::vector<float> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  if (height < 0 || width < 0 || channels < 0) throw ValidationError("raster dimensions must be non-negative");
  if (values_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw ValidationError("raster value count does not match height*width*channels");
  }
}

bool Raster::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

bool Raster::within_unit_interval() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

LabelMap::LabelMap(int height, int width, std::uint8_t fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ValidationError("label map dimensions must be non-negative");
  labels_.assign(static_cast<std::size_t>(height) * width, fill);
}

LabelMap::LabelMap(int height, int width, std::vector<std::uint8_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height < 0 || width < 0) throw ValidationError("label map dimensions must be non-negative");
  if (labels_.size() != static_cast<std::size_t>(height) * width) {
    throw ValidationError("label count does not match height*width");
  }
}

bool LabelMap::valid_for(int class_count) const {
  return std::all_of(labels_.begin(), labels_.end(),
                     [class_count](std::uint8_t l) { return l == kIgnore || l < class_count; });
}

}  // namespace treecrf
