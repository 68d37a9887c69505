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

#include <png.h>

#include "pcfa/dataset.hpp"
#include "pcfa/mosaic.hpp"
#include "pcfa/random.hpp"

namespace pcfa {
namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("pcfa_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             std::to_string(counter++) + "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_png8(const std::string& path, const std::vector<unsigned char>& pixels, int w, int h) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, f);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < h; ++r) png_write_row(png, const_cast<png_bytep>(pixels.data() + r * w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(f);
}

TEST(Png, SixteenBitRoundTripIsExactOnQuantizedValues) {
  TempDir tmp;
  Rng rng(1);
  Plane p(12, 20);
  for (long i = 0; i < p.size(); ++i) p.data()[i] = quantize16(rng.uniform());
  p(0, 0) = 0.0;
  p(0, 1) = 1.0;
  const auto path = (tmp.path() / "a.png").string();
  write_png16(path, p);
  const Plane back = read_png(path);
  ASSERT_EQ(back.rows(), 12);
  ASSERT_EQ(back.cols(), 20);
  EXPECT_TRUE((back == p).all());
}

TEST(Png, QuantizationErrorIsHalfAStep) {
  TempDir tmp;
  Rng rng(2);
  Plane p(8, 8);
  for (long i = 0; i < p.size(); ++i) p.data()[i] = rng.uniform();
  write_png16((tmp.path() / "q.png").string(), p);
  const Plane back = read_png((tmp.path() / "q.png").string());
  EXPECT_LE((back - p).abs().maxCoeff(), 0.5 / 65535.0 + 1e-15);
}

TEST(Png, ReadsEightBit) {
  TempDir tmp;
  std::vector<unsigned char> px{0, 255, 128, 1, 2, 3, 4, 5};
  write_png8((tmp.path() / "e.png").string(), px, 4, 2);
  const Plane p = read_png((tmp.path() / "e.png").string());
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(p(0, 2), 128.0 / 255.0);
  EXPECT_DOUBLE_EQ(p(1, 3), 5.0 / 255.0);
}

TEST(Png, WritesAreDeterministic) {
  TempDir tmp;
  const Plane p = Plane::Constant(8, 8, 0.25);
  write_png16((tmp.path() / "1.png").string(), p);
  write_png16((tmp.path() / "2.png").string(), p);
  EXPECT_EQ(read_text(tmp.path() / "1.png"), read_text(tmp.path() / "2.png"));
}

TEST(Png, Errors) {
  TempDir tmp;
  EXPECT_THROW(read_png((tmp.path() / "missing.png").string()), IoError);
  write_text(tmp.path() / "bad.png", "not a png at all");
  EXPECT_THROW(read_png((tmp.path() / "bad.png").string()), FormatError);
  write_png16((tmp.path() / "t.png").string(), Plane::Constant(8, 8, 0.5));
  auto bytes = read_text(tmp.path() / "t.png");
  write_text(tmp.path() / "trunc.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_png((tmp.path() / "trunc.png").string()), FormatError);
  Plane nan = Plane::Zero(4, 4);
  nan(1, 1) = std::nan("");
  EXPECT_THROW(write_png16((tmp.path() / "n.png").string(), nan), ValidationError);
}

TEST(Dataset, SceneRoundTrip) {
  TempDir tmp;
  SceneSpec spec;
  spec.kind = SceneKind::polarized_disc;
  spec.width = 16;
  spec.height = 12;
  spec.dolp = 0.4;
  spec.seed = 3;
  const auto stack = synthesize_scene(spec);
  write_scene(tmp.path() / "s", stack, spec);
  const auto back = read_scene(tmp.path() / "s");
  for (int i = 0; i < kChannelCount; ++i) EXPECT_TRUE((back.plane(i) == quantize16(stack.plane(i))).all());
  EXPECT_EQ(read_scene_group(tmp.path() / "s"), "group2-polarized");
  const auto j = read_json(tmp.path() / "s" / kSceneMetaFile);
  const auto spec_back = scene_spec_from_json(j.at("spec"));
  EXPECT_EQ(to_json(spec_back), to_json(spec));
  EXPECT_TRUE(fs::is_regular_file(tmp.path() / "s" / "045_g.png"));
}

TEST(Dataset, MissingChannelIsReported) {
  TempDir tmp;
  write_scene(tmp.path() / "s", ImageStack::chromatic(8, 8, 0.5));
  fs::remove(tmp.path() / "s" / "135_b.png");
  try {
    read_scene(tmp.path() / "s");
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("135_b.png"), std::string::npos);
  }
}

TEST(Dataset, MismatchedChannelSizeRejected) {
  TempDir tmp;
  write_scene(tmp.path() / "s", ImageStack::chromatic(8, 8, 0.5));
  write_png16((tmp.path() / "s" / "000_r.png").string(), Plane::Constant(8, 12, 0.5));
  EXPECT_THROW(read_scene(tmp.path() / "s"), ValidationError);
}

TEST(Dataset, MosaicRoundTripWithSidecar) {
  TempDir tmp;
  SceneSpec spec;
  spec.kind = SceneKind::noise;
  spec.width = spec.height = 16;
  spec.seed = 4;
  write_scene(tmp.path() / "s", synthesize_scene(spec), spec);
  const auto stack = read_scene(tmp.path() / "s");
  const auto m = mosaic(stack, default_pattern());
  write_mosaic(tmp.path() / "m.png", m);
  const auto j = read_json(sidecar_path(tmp.path() / "m.png"));
  EXPECT_EQ(j.at("pattern"), "imx250myr");
  const auto back = read_mosaic(tmp.path() / "m.png");
  EXPECT_TRUE((back.data() == m.data()).all());
  const auto sc = scatter(back);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      const auto id = default_pattern().at(r, c);
      EXPECT_EQ(sc.values[id](r, c), stack[id](r, c));
    }
  }
}

TEST(Dataset, ConstantSceneGivesConstantMosaic) {
  TempDir tmp;
  write_mosaic(tmp.path() / "c.png", mosaic(ImageStack::chromatic(8, 8, 0.6), default_pattern()));
  const auto back = read_mosaic(tmp.path() / "c.png");
  EXPECT_TRUE((back.data() == quantize16(0.6)).all());
}

TEST(Dataset, UnknownPatternRejected) {
  TempDir tmp;
  write_mosaic(tmp.path() / "m.png", MosaicImage(Plane::Constant(8, 8, 0.5), default_pattern()));
  write_text(sidecar_path(tmp.path() / "m.png"), R"({"pattern":"other","width":8,"height":8,"bit_depth":16})");
  EXPECT_THROW(read_mosaic(tmp.path() / "m.png"), ValidationError);
}

TEST(Dataset, RunConfigWritten) {
  TempDir tmp;
  RunConfig c;
  c.command = "demosaic";
  c.method = "joint";
  c.seed = 9;
  c.parameters["max_iter"] = 50;
  write_run_config(tmp.path() / "out", c);
  const auto j = read_json(tmp.path() / "out" / kRunConfigFile);
  EXPECT_EQ(j.at("command"), "demosaic");
  EXPECT_EQ(j.at("parameters").at("max_iter"), 50);
}

}  // namespace
}  // namespace pcfa
