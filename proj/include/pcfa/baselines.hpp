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

// Per-channel interpolation of scattered mosaic samples.
//
// Each channel is sampled on a union of rectangular period-4 sublattices,
// one per occurrence of the channel in the superpixel. Interpolation is
// normalized convolution: the zero-filled value plane and the validity plane
// are filtered with the same separable kernel and divided. Filtering is
// evaluated per sublattice with clamp-to-edge node indices, which extends
// the samples past the border by replication.

#ifndef PCFA_BASELINES_HPP
#define PCFA_BASELINES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "pcfa/core.hpp"

namespace pcfa {

enum class InterpKernel : std::uint8_t { bilinear, bicubic };

namespace detail {

/// Catmull-Rom (Keys, a = -0.5).
inline double cubic_weight(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

inline double linear_weight(double t) {
  t = std::abs(t);
  return t < 1.0 ? 1.0 - t : 0.0;
}

/// Four taps around a fractional lattice coordinate: node indices (clamped
/// to [0, count)) and their weights.
struct Taps {
  std::array<int, 4> node{};
  std::array<double, 4> weight{};
};

inline Taps make_taps(double u, int count, InterpKernel kernel) {
  Taps taps;
  const double base = std::floor(u);
  const double t = u - base;
  for (int k = 0; k < 4; ++k) {
    const int offset = k - 1;
    const long idx = static_cast<long>(base) + offset;
    taps.node[k] = static_cast<int>(std::clamp<long>(idx, 0, count - 1));
    const double dist = t - offset;
    taps.weight[k] = kernel == InterpKernel::bicubic ? cubic_weight(dist) : linear_weight(dist);
  }
  return taps;
}

}  // namespace detail

/// Interpolates a channel whose samples live at `offsets` (+ multiples of 4)
/// inside `samples`. Values at other positions of `samples` are ignored.
/// Sample positions reproduce their value exactly.
inline Plane interpolate_sublattices(const Plane& samples,
                                     std::span<const std::pair<int, int>> offsets,
                                     InterpKernel kernel) {
  const int height = static_cast<int>(samples.rows());
  const int width = static_cast<int>(samples.cols());
  require_superpixel_dims(width, height);
  if (offsets.empty()) throw ValidationError("channel has no sample positions");
  const int grid_h = height / kPatternPeriod;
  const int grid_w = width / kPatternPeriod;

  std::vector<std::vector<detail::Taps>> row_taps(offsets.size());
  std::vector<std::vector<detail::Taps>> col_taps(offsets.size());
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    row_taps[s].reserve(height);
    col_taps[s].reserve(width);
    for (int y = 0; y < height; ++y) {
      row_taps[s].push_back(detail::make_taps(double(y - offsets[s].first) / kPatternPeriod, grid_h, kernel));
    }
    for (int x = 0; x < width; ++x) {
      col_taps[s].push_back(detail::make_taps(double(x - offsets[s].second) / kPatternPeriod, grid_w, kernel));
    }
  }
  auto node_value = [&](std::size_t s, int i, int j) {
    return samples(offsets[s].first + kPatternPeriod * i, offsets[s].second + kPatternPeriod * j);
  };

  Plane out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Accumulating differences from a reference node keeps constant inputs
      // exact in floating point.
      const auto& rt0 = row_taps[0][y];
      const auto& ct0 = col_taps[0][x];
      const double ref = node_value(0, rt0.node[1], ct0.node[1]);
      double num = 0.0;
      double den = 0.0;
      for (std::size_t s = 0; s < offsets.size(); ++s) {
        const auto& rt = row_taps[s][y];
        const auto& ct = col_taps[s][x];
        for (int a = 0; a < 4; ++a) {
          if (rt.weight[a] == 0.0) continue;
          for (int b = 0; b < 4; ++b) {
            if (ct.weight[b] == 0.0) continue;
            const double w = rt.weight[a] * ct.weight[b];
            num += w * (node_value(s, rt.node[a], ct.node[b]) - ref);
            den += w;
          }
        }
      }
      out(y, x) = std::abs(den) > 1e-12 ? ref + num / den : ref;
    }
  }
  for (const auto& [r0, c0] : offsets) {
    for (int y = r0; y < height; y += kPatternPeriod) {
      for (int x = c0; x < width; x += kPatternPeriod) out(y, x) = samples(y, x);
    }
  }
  return out;
}

/// Fills all twelve channels of a mosaic independently.
inline ImageStack interpolate_mosaic(const MosaicImage& mosaic, InterpKernel kernel) {
  ImageStack out = ImageStack::chromatic(mosaic.width(), mosaic.height());
  for (const auto id : all_channels()) {
    const auto offsets = mosaic.pattern().offsets(id);
    out[id] = interpolate_sublattices(mosaic.data(), offsets, kernel);
  }
  return out;
}

inline ImageStack bilinear_demosaic(const MosaicImage& mosaic) {
  return interpolate_mosaic(mosaic, InterpKernel::bilinear);
}

/// Sparse-aware bicubic. This is also the ADMM initializer.
inline ImageStack bicubic_demosaic(const MosaicImage& mosaic) {
  return interpolate_mosaic(mosaic, InterpKernel::bicubic);
}

}  // namespace pcfa

#endif  // PCFA_BASELINES_HPP
