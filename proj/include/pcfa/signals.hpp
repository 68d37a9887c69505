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

// Patch signal matrices.
//
// A patch of size p x p over k planes is vectorized channel-major, then
// row, then column: element (ch, dy, dx) lands at ch*p*p + dy*p + dx.
// Polarimetric signals use the four color-agnostic angle planes (64 rows
// for p = 4), chromatic signals all twelve channels (192 rows), and
// single-channel signals one plane (16 rows).

#ifndef PCFA_SIGNALS_HPP
#define PCFA_SIGNALS_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pcfa/core.hpp"
#include "pcfa/mosaic.hpp"
#include "pcfa/random.hpp"

namespace pcfa {

enum class SignalKind : std::uint8_t { pol = 0, rgb = 1, channel = 2 };

inline std::string to_string(SignalKind k) {
  switch (k) {
    case SignalKind::pol: return "pol";
    case SignalKind::rgb: return "rgb";
    case SignalKind::channel: return "channel";
  }
  return "unknown";
}

inline int signal_planes(SignalKind k) {
  switch (k) {
    case SignalKind::pol: return kAngleCount;
    case SignalKind::rgb: return kChannelCount;
    case SignalKind::channel: return 1;
  }
  return 0;
}

inline int signal_rows(SignalKind k, int patch) { return signal_planes(k) * patch * patch; }

/// Patch side implied by a row count, or 0 when rows do not fit the kind.
inline int patch_for_rows(SignalKind k, long rows) {
  const int planes = signal_planes(k);
  if (planes == 0 || rows <= 0 || rows % planes != 0) return 0;
  const long area = rows / planes;
  const long side = std::lround(std::sqrt(static_cast<double>(area)));
  return side * side == area ? static_cast<int>(side) : 0;
}

struct SignalMatrix {
  SignalKind kind = SignalKind::rgb;
  int patch = 4;
  Eigen::MatrixXd data;  // rows x samples, column-major

  long rows() const { return data.rows(); }
  long cols() const { return data.cols(); }

  void validate() const {
    if (rows() != signal_rows(kind, patch)) {
      throw ValidationError("signal matrix has " + std::to_string(rows()) + " rows, kind " +
                            to_string(kind) + " with patch " + std::to_string(patch) + " needs " +
                            std::to_string(signal_rows(kind, patch)));
    }
    if (!data.allFinite()) throw ValidationError("signal matrix contains non-finite values");
  }
};

/// Copies the p x p patch at (row, col) of `planes` into `out`.
inline void gather_patch(std::span<const Plane* const> planes, int row, int col, int patch,
                         Eigen::Ref<Eigen::VectorXd> out) {
  long k = 0;
  for (const Plane* p : planes) {
    for (int dy = 0; dy < patch; ++dy) {
      for (int dx = 0; dx < patch; ++dx) out[k++] = (*p)(row + dy, col + dx);
    }
  }
}

struct ExtractOptions {
  int patch = 4;
  /// Patch corners are drawn from multiples of `step` so polarimetric
  /// patches always start on a macro-pixel boundary, like the solver's
  /// stride-2 patch grid.
  int step = 2;
  ChannelId channel{};  // used by SignalKind::channel
  PcfaPattern pattern = default_pattern();
};

/// Planes a signal of `kind` is cut from.
inline std::vector<Plane> signal_source(const ImageStack& stack, SignalKind kind,
                                        const ExtractOptions& opt) {
  std::vector<Plane> planes;
  switch (kind) {
    case SignalKind::pol: {
      const ImageStack pol = rearrange_polarimetric(stack, opt.pattern);
      for (int i = 0; i < pol.channel_count(); ++i) planes.push_back(pol.plane(i));
      break;
    }
    case SignalKind::rgb:
      for (int i = 0; i < stack.channel_count(); ++i) planes.push_back(stack.plane(i));
      break;
    case SignalKind::channel:
      planes.push_back(stack[opt.channel]);
      break;
  }
  return planes;
}

/// Random patch vectors from ground-truth stacks. Positions are drawn without
/// replacement while enough exist; past exhaustion every position is used
/// once and the remainder is drawn with replacement.
inline SignalMatrix extract_signals(std::span<const ImageStack> stacks, SignalKind kind,
                                    std::size_t samples, std::uint64_t seed,
                                    const ExtractOptions& opt = {}) {
  if (stacks.empty()) throw ValidationError("no training stacks");
  if (opt.patch < 1 || opt.step < 1) throw ValidationError("patch and step must be positive");
  struct Position {
    std::size_t stack;
    int row;
    int col;
  };
  std::vector<Position> positions;
  std::vector<std::vector<Plane>> sources;
  for (std::size_t s = 0; s < stacks.size(); ++s) {
    const auto& st = stacks[s];
    if (st.kind() != StackKind::chromatic) throw ValidationError("training stacks must be chromatic");
    st.validate();
    if (st.width() < opt.patch || st.height() < opt.patch) {
      throw ValidationError("patch larger than training image");
    }
    sources.push_back(signal_source(st, kind, opt));
    for (int r = 0; r + opt.patch <= st.height(); r += opt.step) {
      for (int c = 0; c + opt.patch <= st.width(); c += opt.step) positions.push_back({s, r, c});
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> picks;
  if (samples <= positions.size()) {
    picks = rng.sample_without_replacement(positions.size(), samples);
  } else {
    picks = rng.sample_without_replacement(positions.size(), positions.size());
    while (picks.size() < samples) picks.push_back(static_cast<std::size_t>(rng.below(positions.size())));
  }

  SignalMatrix out{kind, opt.patch, Eigen::MatrixXd(signal_rows(kind, opt.patch), samples)};
  for (std::size_t j = 0; j < picks.size(); ++j) {
    const auto& pos = positions[picks[j]];
    std::vector<const Plane*> ptrs;
    for (const auto& p : sources[pos.stack]) ptrs.push_back(&p);
    gather_patch(ptrs, pos.row, pos.col, opt.patch, out.data.col(static_cast<long>(j)));
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_SIGNALS_HPP
