#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace treecrf {

/// Label value for unlabeled pixels. Excluded from metrics and co-occurrence counts.
inline constexpr std::uint8_t kIgnore = 255;

/// Dense H x W x C float grid, row-major with the channel index innermost.
class Raster {
 public:
  Raster() = default;
  Raster(int height, int width, int channels, float fill = 0.0f);
  Raster(int height, int width, int channels, std::vector<float> values);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }

  float& at(int row, int col, int ch = 0) { return values_[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const { return values_[index(row, col, ch)]; }

  /// All channels of one pixel.
  std::span<const float> pixel(std::size_t p) const {
    return {values_.data() + p * channels_, static_cast<std::size_t>(channels_)};
  }
  std::span<float> pixel(std::size_t p) {
    return {values_.data() + p * channels_, static_cast<std::size_t>(channels_)};
  }

  const std::vector<float>& values() const { return values_; }
  std::vector<float>& values() { return values_; }

  bool all_finite() const;
  bool within_unit_interval() const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_ + ch;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> values_;
};

/// Per-pixel class ids in [0, C) or kIgnore.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, std::uint8_t fill = 0);
  LabelMap(int height, int width, std::vector<std::uint8_t> labels);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return labels_.size(); }

  std::uint8_t& at(int row, int col) { return labels_[static_cast<std::size_t>(row) * width_ + col]; }
  std::uint8_t at(int row, int col) const {
    return labels_[static_cast<std::size_t>(row) * width_ + col];
  }

  const std::vector<std::uint8_t>& labels() const { return labels_; }
  std::vector<std::uint8_t>& labels() { return labels_; }

  /// True when every label is < class_count or kIgnore.
  bool valid_for(int class_count) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> labels_;
};

/// Integer id map, used for region partitions.
struct IdMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> ids;

  friend bool operator==(const IdMap&, const IdMap&) = default;
};

}  // namespace treecrf
