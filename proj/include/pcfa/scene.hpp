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

// Synthetic polarized color scenes.
//
// Each color channel c is described by an intensity S0_c(p), a degree of
// linear polarization DoLP_c(p) and an angle of polarization AoP_c(p); the
// four analyzer planes follow Malus modulation
//
//     I_c(p, t) = S0_c(p) / 2 * (1 + DoLP_c(p) * cos(2 t - 2 AoP_c(p))).
//
// Scenes of kind noise are unpolarized-illumination analogs (clutter of
// colored objects over a textured background); polarized-disc and
// birefringent-texture add a polarized object or a color-dependent
// polarization rotation.

#ifndef PCFA_SCENE_HPP
#define PCFA_SCENE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pcfa/core.hpp"
#include "pcfa/random.hpp"

namespace pcfa {

enum class SceneKind : std::uint8_t { constant, gradient, polarized_disc, birefringent_texture, noise };

inline std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::constant: return "constant";
    case SceneKind::gradient: return "gradient";
    case SceneKind::polarized_disc: return "polarized-disc";
    case SceneKind::birefringent_texture: return "birefringent-texture";
    case SceneKind::noise: return "noise";
  }
  return "unknown";
}

inline SceneKind scene_kind_from_string(const std::string& s) {
  for (auto k : {SceneKind::constant, SceneKind::gradient, SceneKind::polarized_disc,
                 SceneKind::birefringent_texture, SceneKind::noise}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown scene kind '" + s + "'");
}

struct SceneSpec {
  SceneKind kind = SceneKind::constant;
  int width = 128;
  int height = 128;
  double intensity = 0.8;                    // peak S0, in [0, 1]
  double dolp = 0.0;                         // in [0, 1]
  double aop_deg = 0.0;                      // in [0, 180)
  std::array<double, 3> chroma{1.0, 1.0, 1.0};
  std::uint64_t seed = 0;

  void validate() const {
    require_superpixel_dims(width, height);
    if (!(dolp >= 0.0 && dolp <= 1.0)) throw ValidationError("DoLP must lie in [0, 1]");
    if (!(intensity >= 0.0 && intensity <= 1.0)) throw ValidationError("intensity must lie in [0, 1]");
    if (!(aop_deg >= 0.0 && aop_deg < 180.0)) throw ValidationError("AoP must lie in [0, 180)");
    for (double c : chroma) {
      if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("chromaticity entries must lie in [0, 1]");
    }
  }

  /// Whether the scene carries any polarization (group 2 analog).
  bool polarized() const { return dolp > 0.0 || kind == SceneKind::birefringent_texture; }
};

/// Disc of the polarized-disc kind: center (row, col) and radius in pixels.
struct DiscGeometry {
  double row;
  double col;
  double radius;
};

inline DiscGeometry polarized_disc_geometry(const SceneSpec& spec) {
  return {0.5 * (spec.height - 1), 0.5 * (spec.width - 1), 0.3 * std::min(spec.width, spec.height)};
}

namespace detail {

/// Smooth value noise in [0, 1]: random lattice values every `cell` pixels,
/// blended with a C1 smoothstep.
inline Plane value_noise(Rng& rng, int width, int height, double cell) {
  const int gw = static_cast<int>(std::ceil(width / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(height / cell)) + 2;
  Plane lattice(gh, gw);
  for (int i = 0; i < gh; ++i) {
    for (int j = 0; j < gw; ++j) lattice(i, j) = rng.uniform();
  }
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  Plane out(height, width);
  for (int y = 0; y < height; ++y) {
    const double u = y / cell;
    const int i = static_cast<int>(u);
    const double ty = smooth(u - i);
    for (int x = 0; x < width; ++x) {
      const double v = x / cell;
      const int j = static_cast<int>(v);
      const double tx = smooth(v - j);
      const double top = lattice(i, j) * (1 - tx) + lattice(i, j + 1) * tx;
      const double bottom = lattice(i + 1, j) * (1 - tx) + lattice(i + 1, j + 1) * tx;
      out(y, x) = top * (1 - ty) + bottom * ty;
    }
  }
  return out;
}

inline Plane fractal_noise(Rng& rng, int width, int height, double cell, int octaves) {
  Plane sum = Plane::Zero(height, width);
  double amp = 1.0;
  double total = 0.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(rng, width, height, cell);
    total += amp;
    amp *= 0.5;
    cell = std::max(2.0, cell * 0.5);
  }
  return sum / total;
}

struct SceneFields {
  Plane shading;
  std::array<Plane, 3> albedo;
  std::array<Plane, 3> dolp;
  std::array<Plane, 3> aop;  // radians
};

inline SceneFields uniform_fields(const SceneSpec& spec) {
  const int w = spec.width;
  const int h = spec.height;
  SceneFields f;
  f.shading = Plane::Ones(h, w);
  const double aop = spec.aop_deg * std::numbers::pi / 180.0;
  for (int c = 0; c < 3; ++c) {
    f.albedo[c] = Plane::Constant(h, w, spec.chroma[c]);
    f.dolp[c] = Plane::Constant(h, w, spec.dolp);
    f.aop[c] = Plane::Constant(h, w, aop);
  }
  return f;
}

/// Textured background plus a clutter of flat-colored rectangles and discs.
inline void paint_clutter(Rng& rng, const SceneSpec& spec, SceneFields& f, int shapes) {
  const int w = spec.width;
  const int h = spec.height;
  f.shading = 0.35 + 0.6 * fractal_noise(rng, w, h, 16.0, 3);
  for (int c = 0; c < 3; ++c) {
    f.albedo[c] = spec.chroma[c] * (0.55 + 0.45 * value_noise(rng, w, h, 24.0));
  }
  const double dim = std::min(w, h);
  for (int s = 0; s < shapes; ++s) {
    const bool disc = rng.uniform() < 0.5;
    const double cy = rng.uniform(0.0, h);
    const double cx = rng.uniform(0.0, w);
    const double ry = rng.uniform(0.06, 0.22) * dim;
    const double rx = disc ? ry : rng.uniform(0.06, 0.22) * dim;
    std::array<double, 3> color{rng.uniform(0.15, 1.0), rng.uniform(0.15, 1.0), rng.uniform(0.15, 1.0)};
    const double level = rng.uniform(0.4, 1.0);
    const double slope = rng.uniform(-0.3, 0.3) / dim;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dy = (y - cy) / ry;
        const double dx = (x - cx) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        f.shading(y, x) = std::clamp(level + slope * (x - cx), 0.05, 1.0);
        for (int c = 0; c < 3; ++c) f.albedo[c](y, x) = color[c];
      }
    }
  }
}

inline ImageStack render(const SceneSpec& spec, const SceneFields& f) {
  ImageStack out = ImageStack::chromatic(spec.width, spec.height);
  for (const auto id : all_channels()) {
    const int c = static_cast<int>(id.color);
    const double theta = angle_degrees(id.angle) * std::numbers::pi / 180.0;
    const Plane s0 = spec.intensity * f.albedo[c] * f.shading;
    out[id] = 0.5 * s0 * (1.0 + f.dolp[c] * (2.0 * theta - 2.0 * f.aop[c]).cos());
  }
  return out;
}

}  // namespace detail

/// Deterministic given the spec (including its seed).
inline ImageStack synthesize_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  detail::SceneFields f = detail::uniform_fields(spec);
  const int w = spec.width;
  const int h = spec.height;

  switch (spec.kind) {
    case SceneKind::constant:
      break;
    case SceneKind::gradient:
      for (int x = 0; x < w; ++x) f.shading.col(x) = 0.2 + 0.8 * (w > 1 ? double(x) / (w - 1) : 0.0);
      break;
    case SceneKind::noise:
      detail::paint_clutter(rng, spec, f, 7);
      break;
    case SceneKind::polarized_disc: {
      detail::paint_clutter(rng, spec, f, 5);
      const auto disc = polarized_disc_geometry(spec);
      const double aop = spec.aop_deg * std::numbers::pi / 180.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double dy = y - disc.row;
          const double dx = x - disc.col;
          const bool inside = dy * dy + dx * dx <= disc.radius * disc.radius;
          for (int c = 0; c < 3; ++c) {
            if (inside) {
              f.albedo[c](y, x) = spec.chroma[c];
              f.dolp[c](y, x) = spec.dolp;
              f.aop[c](y, x) = aop;
            } else {
              f.dolp[c](y, x) = 0.0;
            }
          }
          if (inside) f.shading(y, x) = 0.9;
        }
      }
      break;
    }
    case SceneKind::birefringent_texture: {
      detail::paint_clutter(rng, spec, f, 5);
      const Plane thickness = 1.5 * detail::fractal_noise(rng, w, h, 32.0, 2);
      const Plane strength = 0.6 + 0.4 * detail::value_noise(rng, w, h, 20.0);
      constexpr std::array<double, 3> dispersion{0.8, 1.0, 1.25};
      const double aop = spec.aop_deg * std::numbers::pi / 180.0;
      for (int c = 0; c < 3; ++c) {
        f.dolp[c] = spec.dolp * strength;
        f.aop[c] = aop + (40.0 * std::numbers::pi / 180.0) *
                             (2.0 * std::numbers::pi * dispersion[c] * thickness).sin();
      }
      break;
    }
  }
  return detail::render(spec, f);
}

}  // namespace pcfa

#endif  // PCFA_SCENE_HPP
