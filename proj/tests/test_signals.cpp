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

#include <gtest/gtest.h>

#include <vector>

#include "pcfa/scene.hpp"
#include "pcfa/signals.hpp"

namespace pcfa {
namespace {

ImageStack indexed_stack(int w, int h) {
  ImageStack s = ImageStack::chromatic(w, h);
  for (int i = 0; i < kChannelCount; ++i) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) s.at(i, r, c) = 0.001 * (i * 1000 + r * 30 + c);
    }
  }
  return s;
}

TEST(Signals, RowCounts) {
  EXPECT_EQ(signal_rows(SignalKind::pol, 4), 64);
  EXPECT_EQ(signal_rows(SignalKind::rgb, 4), 192);
  EXPECT_EQ(signal_rows(SignalKind::channel, 4), 16);
  EXPECT_EQ(patch_for_rows(SignalKind::rgb, 192), 4);
  EXPECT_EQ(patch_for_rows(SignalKind::rgb, 194), 0);
  EXPECT_EQ(patch_for_rows(SignalKind::pol, 192), 0);
}

TEST(Signals, ConstantStackGivesConstantColumns) {
  const std::vector<ImageStack> stacks{ImageStack::chromatic(8, 8, 0.3)};
  const auto y = extract_signals(stacks, SignalKind::pol, 10, 1);
  EXPECT_EQ(y.rows(), 64);
  EXPECT_EQ(y.cols(), 10);
  EXPECT_TRUE((y.data.array() == 0.3).all());
}

TEST(Signals, RgbRowsAre192) {
  SceneSpec s;
  s.kind = SceneKind::noise;
  s.width = s.height = 16;
  const std::vector<ImageStack> stacks{synthesize_scene(s)};
  const auto y = extract_signals(stacks, SignalKind::rgb, 5, 2);
  EXPECT_EQ(y.rows(), 192);
  y.validate();
}

TEST(Signals, VectorizationIsChannelThenRowThenColumn) {
  const std::vector<ImageStack> stacks{indexed_stack(4, 4)};
  const auto y = extract_signals(stacks, SignalKind::rgb, 1, 0);
  for (int ch = 0; ch < 12; ++ch) {
    for (int dy = 0; dy < 4; ++dy) {
      for (int dx = 0; dx < 4; ++dx) {
        EXPECT_DOUBLE_EQ(y.data(ch * 16 + dy * 4 + dx, 0), stacks[0].at(ch, dy, dx));
      }
    }
  }
}

TEST(Signals, PolUsesColorAgnosticGrouping) {
  const std::vector<ImageStack> stacks{indexed_stack(4, 4)};
  const auto y = extract_signals(stacks, SignalKind::pol, 1, 0);
  const auto rp = rearrange_polarimetric(stacks[0], default_pattern());
  for (int a = 0; a < 4; ++a) {
    for (int dy = 0; dy < 4; ++dy) {
      for (int dx = 0; dx < 4; ++dx) EXPECT_DOUBLE_EQ(y.data(a * 16 + dy * 4 + dx, 0), rp.plane(a)(dy, dx));
    }
  }
}

TEST(Signals, SameSeedSameMatrix) {
  SceneSpec s;
  s.kind = SceneKind::noise;
  s.width = s.height = 32;
  const std::vector<ImageStack> stacks{synthesize_scene(s)};
  const auto a = extract_signals(stacks, SignalKind::rgb, 50, 9);
  const auto b = extract_signals(stacks, SignalKind::rgb, 50, 9);
  EXPECT_TRUE(a.data == b.data);
  const auto c = extract_signals(stacks, SignalKind::rgb, 50, 10);
  EXPECT_FALSE(a.data == c.data);
}

TEST(Signals, ExhaustionFallsBackToReplacement) {
  const std::vector<ImageStack> stacks{indexed_stack(8, 8)};
  // 3x3 aligned positions exist; ask for more.
  const auto y = extract_signals(stacks, SignalKind::channel, 20, 4);
  EXPECT_EQ(y.cols(), 20);
}

TEST(Signals, Errors) {
  const std::vector<ImageStack> none;
  EXPECT_THROW(extract_signals(none, SignalKind::rgb, 1, 0), ValidationError);
  const std::vector<ImageStack> tiny{ImageStack::chromatic(4, 4)};
  ExtractOptions opt;
  opt.patch = 8;
  EXPECT_THROW(extract_signals(tiny, SignalKind::rgb, 1, 0, opt), ValidationError);
}

}  // namespace
}  // namespace pcfa
