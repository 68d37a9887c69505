// Copyright 2026 The pcfa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Filter-array geometry and the image containers shared by every module.
//
// The sensor carries a 4x4 repeating superpixel: an RGGB Bayer layout at
// 2x2 macro-pixel scale, and inside each macro-pixel a 2x2 unit of linear
// polarizers at 0, 45, 90 and 135 degrees. Every pixel therefore observes
// exactly one of twelve (color, angle) channels.

#ifndef PCFA_CORE_HPP
#define PCFA_CORE_HPP

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcfa/error.hpp"

namespace pcfa {

enum class Color : std::uint8_t { R = 0, G = 1, B = 2 };
enum class Angle : std::uint8_t { A0 = 0, A45 = 1, A90 = 2, A135 = 3 };

inline constexpr int kColorCount = 3;
inline constexpr int kAngleCount = 4;
inline constexpr int kChannelCount = 12;
inline constexpr int kPatternPeriod = 4;

inline constexpr std::array<Color, kColorCount> kColors{Color::R, Color::G, Color::B};
inline constexpr std::array<Angle, kAngleCount> kAngles{Angle::A0, Angle::A45, Angle::A90,
                                                        Angle::A135};

constexpr double angle_degrees(Angle a) noexcept { return 45.0 * static_cast<int>(a); }

inline char color_letter(Color c) { return "rgb"[static_cast<int>(c)]; }

/// Zero-padded three-digit angle tag used in file names ("000", "045", ...).
inline std::string angle_tag(Angle a) {
  static const std::array<const char*, kAngleCount> tags{"000", "045", "090", "135"};
  return tags[static_cast<int>(a)];
}

/// One of the twelve sensor channels.
///
/// Channels are totally ordered color-major, angle-minor: index() is
/// 4 * color + angle, so (R,0) is 0, (R,45) is 1, ..., (B,135) is 11. The
/// defaulted comparison follows the same order.
struct ChannelId {
  Color color = Color::R;
  Angle angle = Angle::A0;

  constexpr int index() const noexcept {
    return static_cast<int>(color) * kAngleCount + static_cast<int>(angle);
  }

  static constexpr ChannelId from_index(int i) {
    if (i < 0 || i >= kChannelCount) {
      throw ValidationError("channel index out of range: " + std::to_string(i));
    }
    return ChannelId{static_cast<Color>(i / kAngleCount), static_cast<Angle>(i % kAngleCount)};
  }

  friend constexpr auto operator<=>(const ChannelId&, const ChannelId&) = default;
};

/// "<angle>_<color>", e.g. "090_r". Matches the dataset file naming.
inline std::string channel_name(ChannelId id) {
  return angle_tag(id.angle) + "_" + color_letter(id.color);
}

inline constexpr std::array<ChannelId, kChannelCount> all_channels() {
  std::array<ChannelId, kChannelCount> out{};
  for (int i = 0; i < kChannelCount; ++i) out[i] = ChannelId::from_index(i);
  return out;
}

/// Row-major floating point image plane, indexed (row, col).
using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskPlane = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int wrap_period(long v) {
  const long m = v % kPatternPeriod;
  return static_cast<int>(m < 0 ? m + kPatternPeriod : m);
}

// ---------------------------------------------------------------------------

/// The 4x4 repeating superpixel of an RGB-polarization filter array.
class PcfaPattern {
 public:
  using Layout = std::array<std::array<ChannelId, kPatternPeriod>, kPatternPeriod>;

  /// Throws ValidationError unless every (R,a) and (B,a) occurs exactly once
  /// and every (G,a) exactly twice.
  PcfaPattern(std::string name, const Layout& layout) : name_(std::move(name)), layout_(layout) {
    std::array<int, kChannelCount> counts{};
    for (const auto& row : layout_) {
      for (const auto& id : row) ++counts[id.index()];
    }
    for (const auto id : all_channels()) {
      const int expected = id.color == Color::G ? 2 : 1;
      if (counts[id.index()] != expected) {
        throw ValidationError("pattern '" + name_ + "': channel " + channel_name(id) + " occurs " +
                              std::to_string(counts[id.index()]) + " times, expected " +
                              std::to_string(expected));
      }
    }
  }

  const std::string& name() const noexcept { return name_; }
  const Layout& layout() const noexcept { return layout_; }

  /// Channel sampled at (row, col); the superpixel tiles the plane.
  ChannelId at(long row, long col) const noexcept {
    return layout_[wrap_period(row)][wrap_period(col)];
  }

  /// Superpixel offsets (row, col) at which `id` is sampled.
  std::vector<std::pair<int, int>> offsets(ChannelId id) const {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < kPatternPeriod; ++r) {
      for (int c = 0; c < kPatternPeriod; ++c) {
        if (layout_[r][c] == id) out.emplace_back(r, c);
      }
    }
    return out;
  }

  friend bool operator==(const PcfaPattern& a, const PcfaPattern& b) {
    return a.name_ == b.name_ && a.layout_ == b.layout_;
  }

 private:
  std::string name_;
  Layout layout_;
};

/// The canonical layout (Sony IMX250MYR style). Each 2x2 polarization unit is
///
///     90  45
///    135   0
///
/// and the macro-pixels follow RGGB, so the superpixel reads
///
///     R90  R45  G90  G45
///     R135 R0   G135 G0
///     G90  G45  B90  B45
///     G135 G0   B135 B0
inline PcfaPattern default_pattern() {
  constexpr std::array<std::array<Angle, 2>, 2> unit{{{Angle::A90, Angle::A45},
                                                      {Angle::A135, Angle::A0}}};
  constexpr std::array<std::array<Color, 2>, 2> bayer{{{Color::R, Color::G}, {Color::G, Color::B}}};
  PcfaPattern::Layout layout{};
  for (int r = 0; r < kPatternPeriod; ++r) {
    for (int c = 0; c < kPatternPeriod; ++c) {
      layout[r][c] = ChannelId{bayer[r / 2][c / 2], unit[r % 2][c % 2]};
    }
  }
  return PcfaPattern("imx250myr", layout);
}

inline ChannelId channel_at(const PcfaPattern& pattern, long row, long col) {
  return pattern.at(row, col);
}

inline void require_superpixel_dims(int width, int height) {
  if (width <= 0 || height <= 0 || width % kPatternPeriod != 0 || height % kPatternPeriod != 0) {
    throw ValidationError("image dimensions " + std::to_string(width) + "x" +
                          std::to_string(height) + " are not positive multiples of 4");
  }
}

// ---------------------------------------------------------------------------

/// Twelve binary sampling masks that partition the image plane.
class ChannelMasks {
 public:
  ChannelMasks(int width, int height, std::array<MaskPlane, kChannelCount> masks)
      : width_(width), height_(height), masks_(std::move(masks)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const MaskPlane& mask(ChannelId id) const { return masks_[id.index()]; }
  long popcount(ChannelId id) const { return masks_[id.index()].cast<long>().sum(); }

 private:
  int width_;
  int height_;
  std::array<MaskPlane, kChannelCount> masks_;
};

inline ChannelMasks build_masks(const PcfaPattern& pattern, int width, int height) {
  require_superpixel_dims(width, height);
  std::array<MaskPlane, kChannelCount> masks;
  for (auto& m : masks) m = MaskPlane::Zero(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) masks[pattern.at(r, c).index()](r, c) = 1;
  }
  return ChannelMasks(width, height, std::move(masks));
}

// ---------------------------------------------------------------------------

enum class StackKind : std::uint8_t { chromatic, polarimetric };

/// A stack of equally sized planes: 12 chromatic channels indexed by
/// ChannelId::index(), or 4 polarimetric (angle-only) channels indexed by
/// angle. Values are normalized intensities; intermediate solver stacks may
/// leave [0, 1] but must stay finite.
class ImageStack {
 public:
  ImageStack() = default;

  ImageStack(StackKind kind, int width, int height, double fill = 0.0) : kind_(kind) {
    if (width <= 0 || height <= 0) throw ValidationError("image stack needs positive dimensions");
    planes_.assign(kind == StackKind::chromatic ? kChannelCount : kAngleCount,
                   Plane::Constant(height, width, fill));
  }

  static ImageStack chromatic(int width, int height, double fill = 0.0) {
    return ImageStack(StackKind::chromatic, width, height, fill);
  }
  static ImageStack polarimetric(int width, int height, double fill = 0.0) {
    return ImageStack(StackKind::polarimetric, width, height, fill);
  }

  StackKind kind() const noexcept { return kind_; }
  int channel_count() const noexcept { return static_cast<int>(planes_.size()); }
  int width() const noexcept { return planes_.empty() ? 0 : static_cast<int>(planes_[0].cols()); }
  int height() const noexcept { return planes_.empty() ? 0 : static_cast<int>(planes_[0].rows()); }
  bool empty() const noexcept { return planes_.empty(); }

  Plane& plane(int i) { return planes_.at(static_cast<std::size_t>(i)); }
  const Plane& plane(int i) const { return planes_.at(static_cast<std::size_t>(i)); }

  Plane& operator[](ChannelId id) {
    require(StackKind::chromatic);
    return planes_[id.index()];
  }
  const Plane& operator[](ChannelId id) const {
    require(StackKind::chromatic);
    return planes_[id.index()];
  }
  Plane& operator[](Angle a) {
    require(StackKind::polarimetric);
    return planes_[static_cast<int>(a)];
  }
  const Plane& operator[](Angle a) const {
    require(StackKind::polarimetric);
    return planes_[static_cast<int>(a)];
  }

  double& at(int channel, int row, int col) { return planes_[channel](row, col); }
  double at(int channel, int row, int col) const { return planes_[channel](row, col); }

  /// Throws unless all planes share dimensions and every value is finite.
  void validate() const {
    if (planes_.empty()) throw ValidationError("image stack is empty");
    const int expected = kind_ == StackKind::chromatic ? kChannelCount : kAngleCount;
    if (channel_count() != expected) throw ValidationError("image stack has wrong channel count");
    for (const auto& p : planes_) {
      if (p.rows() != height() || p.cols() != width()) {
        throw ValidationError("image stack planes differ in size");
      }
      if (!p.isFinite().all()) throw ValidationError("image stack contains non-finite values");
    }
  }

  ImageStack clamped(double lo = 0.0, double hi = 1.0) const {
    ImageStack out = *this;
    for (auto& p : out.planes_) p = p.max(lo).min(hi);
    return out;
  }

  friend bool operator==(const ImageStack& a, const ImageStack& b) {
    if (a.kind_ != b.kind_ || a.planes_.size() != b.planes_.size()) return false;
    for (std::size_t i = 0; i < a.planes_.size(); ++i) {
      if (a.planes_[i].rows() != b.planes_[i].rows() || a.planes_[i].cols() != b.planes_[i].cols() ||
          !(a.planes_[i] == b.planes_[i]).all()) {
        return false;
      }
    }
    return true;
  }

 private:
  void require(StackKind k) const {
    if (kind_ != k) throw ValidationError("channel accessor does not match stack kind");
  }

  StackKind kind_ = StackKind::chromatic;
  std::vector<Plane> planes_;
};

/// The observed single-plane sensor readout.
class MosaicImage {
 public:
  MosaicImage(Plane data, PcfaPattern pattern) : data_(std::move(data)), pattern_(std::move(pattern)) {
    require_superpixel_dims(static_cast<int>(data_.cols()), static_cast<int>(data_.rows()));
    if (!data_.isFinite().all()) throw ValidationError("mosaic contains non-finite values");
    if ((data_ < 0.0).any() || (data_ > 1.0).any()) {
      throw ValidationError("mosaic values must lie in [0, 1]");
    }
  }

  int width() const noexcept { return static_cast<int>(data_.cols()); }
  int height() const noexcept { return static_cast<int>(data_.rows()); }
  const Plane& data() const noexcept { return data_; }
  const PcfaPattern& pattern() const noexcept { return pattern_; }
  double operator()(int row, int col) const { return data_(row, col); }

 private:
  Plane data_;
  PcfaPattern pattern_;
};

}  // namespace pcfa

#endif  // PCFA_CORE_HPP
