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

#ifndef PCFA_MOSAIC_HPP
#define PCFA_MOSAIC_HPP

#include <array>

#include "pcfa/baselines.hpp"
#include "pcfa/core.hpp"

namespace pcfa {

/// Forward model: every pixel keeps the channel its filter passes.
inline MosaicImage mosaic(const ImageStack& stack, const PcfaPattern& pattern) {
  if (stack.kind() != StackKind::chromatic || stack.channel_count() != kChannelCount) {
    throw ValidationError("mosaic needs a 12-channel chromatic stack");
  }
  stack.validate();
  require_superpixel_dims(stack.width(), stack.height());
  Plane out(stack.height(), stack.width());
  for (int r = 0; r < stack.height(); ++r) {
    for (int c = 0; c < stack.width(); ++c) out(r, c) = stack[pattern.at(r, c)](r, c);
  }
  return MosaicImage(std::move(out), pattern);
}

/// Twelve planes holding mosaic values on their own sample support only.
struct SparseChannelStack {
  ImageStack values;                              // zero where invalid
  std::array<MaskPlane, kChannelCount> valid;     // 1 at sampled positions

  const MaskPlane& validity(ChannelId id) const { return valid[id.index()]; }
};

inline SparseChannelStack scatter(const MosaicImage& m) {
  SparseChannelStack out{ImageStack::chromatic(m.width(), m.height()), {}};
  for (auto& v : out.valid) v = MaskPlane::Zero(m.height(), m.width());
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const auto id = m.pattern().at(r, c);
      out.values[id](r, c) = m(r, c);
      out.valid[id.index()](r, c) = 1;
    }
  }
  return out;
}

/// Dense starting point for the joint solver: sparse-aware bicubic per
/// channel, clamped to [0, 1]. Shares its code path with bicubic_demosaic.
inline ImageStack initialize(const MosaicImage& m) { return bicubic_demosaic(m).clamped(); }

/// Color-agnostic polarimetric grouping: angle plane a at pixel p takes the
/// channel (color(p), a), i.e. the four angles of whichever color filter sits
/// over p. On a mosaic-derived stack this is exactly what the raw samples
/// provide when grouped by angle.
inline ImageStack rearrange_polarimetric(const ImageStack& stack, const PcfaPattern& pattern) {
  if (stack.kind() != StackKind::chromatic) throw ValidationError("expected a chromatic stack");
  ImageStack out = ImageStack::polarimetric(stack.width(), stack.height());
  for (int r = 0; r < stack.height(); ++r) {
    for (int c = 0; c < stack.width(); ++c) {
      const Color color = pattern.at(r, c).color;
      for (const auto a : kAngles) out[a](r, c) = stack[ChannelId{color, a}](r, c);
    }
  }
  return out;
}

/// Per-angle average of the three color planes.
inline ImageStack angle_average(const ImageStack& stack) {
  if (stack.kind() != StackKind::chromatic) throw ValidationError("expected a chromatic stack");
  ImageStack out = ImageStack::polarimetric(stack.width(), stack.height());
  for (const auto a : kAngles) {
    out[a] = (stack[ChannelId{Color::R, a}] + stack[ChannelId{Color::G, a}] +
              stack[ChannelId{Color::B, a}]) /
             3.0;
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_MOSAIC_HPP
