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

// Grayscale PNG planes on top of libpng. Planes are written as 16-bit
// (value v in [0, 1] stored as round(65535 v)) and read from 8- or 16-bit
// files, normalized back to [0, 1].

#ifndef PCFA_PNG_IO_HPP
#define PCFA_PNG_IO_HPP

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "pcfa/core.hpp"
#include "pcfa/error.hpp"

namespace pcfa {

inline constexpr double kPngMax16 = 65535.0;

/// The value a plane entry takes after a 16-bit write/read round trip.
inline double quantize16(double v) {
  const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return std::round(c * kPngMax16) / kPngMax16;
}

inline Plane quantize16(const Plane& p) { return p.unaryExpr([](double v) { return quantize16(v); }); }

namespace detail {

struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {0};
};

extern "C" inline void pcfa_png_error(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", msg);
  std::longjmp(state->jump, 1);
}

extern "C" inline void pcfa_png_warning(png_structp, png_const_charp) {}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace detail

/// Writes `plane` (values clamped to [0, 1]) as a 16-bit grayscale PNG.
inline void write_png16(const std::string& path, const Plane& plane) {
  if (plane.size() == 0) throw ValidationError("cannot write an empty plane");
  if (!plane.isFinite().all()) throw ValidationError("cannot write non-finite values to " + path);
  const auto width = static_cast<png_uint_32>(plane.cols());
  const auto height = static_cast<png_uint_32>(plane.rows());
  std::vector<png_byte> buffer(static_cast<std::size_t>(width) * height * 2);
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      const double v = plane(r, c) < 0.0 ? 0.0 : (plane(r, c) > 1.0 ? 1.0 : plane(r, c));
      const auto q = static_cast<unsigned>(std::lround(v * kPngMax16));
      const std::size_t at = (static_cast<std::size_t>(r) * width + c) * 2;
      buffer[at] = static_cast<png_byte>(q >> 8);
      buffer[at + 1] = static_cast<png_byte>(q & 0xff);
    }
  }
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + static_cast<std::size_t>(r) * width * 2;

  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path + " for writing");
  detail::PngErrorState err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, detail::pcfa_png_error,
                                            detail::pcfa_png_warning);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(err.jump)) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed for " + path + ": " + err.message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("cannot flush " + path);
}

/// Reads an 8- or 16-bit grayscale PNG into [0, 1].
inline Plane read_png(const std::string& path) {
  std::unique_ptr<std::FILE, detail::FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError(path + " is not a PNG file");
  }
  detail::PngErrorState err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, detail::pcfa_png_error,
                                           detail::pcfa_png_warning);
  if (!png) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }
  // Everything the jump target touches is declared before setjmp.
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  int color = 0;
  if (setjmp(err.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG read failed for " + path + ": " + err.message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &depth, &color, nullptr, nullptr, nullptr);
  if (color != PNG_COLOR_TYPE_GRAY || (depth != 8 && depth != 16)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + " must be an 8- or 16-bit grayscale PNG");
  }
  const std::size_t bytes = depth == 16 ? 2 : 1;
  buffer.resize(static_cast<std::size_t>(width) * height * bytes);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + static_cast<std::size_t>(r) * width * bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Plane out(height, width);
  const double scale = depth == 16 ? kPngMax16 : 255.0;
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      const std::size_t at = (static_cast<std::size_t>(r) * width + c) * bytes;
      const unsigned v = depth == 16 ? (static_cast<unsigned>(buffer[at]) << 8) | buffer[at + 1] : buffer[at];
      out(r, c) = v / scale;
    }
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_PNG_IO_HPP
