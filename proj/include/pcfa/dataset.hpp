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

// On-disk layout.
//
// Scene directory: twelve 16-bit planes named "<angle>_<color>.png"
// (angle in 000/045/090/135, color in r/g/b) plus an optional scene.json
// holding the generating spec and a group tag. Mosaic: one 16-bit PNG plus
// "<file>.json" recording the pattern name and size. Every command output
// directory also receives run_config.json.

#ifndef PCFA_DATASET_HPP
#define PCFA_DATASET_HPP

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pcfa/core.hpp"
#include "pcfa/png_io.hpp"
#include "pcfa/scene.hpp"

namespace pcfa {

namespace fs = std::filesystem;

inline constexpr const char* kSceneMetaFile = "scene.json";
inline constexpr const char* kRunConfigFile = "run_config.json";

inline std::string channel_file_name(ChannelId id) { return channel_name(id) + ".png"; }

inline std::string group_tag(const SceneSpec& s) {
  return s.polarized() ? "group2-polarized" : "group1-unpolarized";
}

inline nlohmann::ordered_json to_json(const SceneSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(s.kind);
  j["width"] = s.width;
  j["height"] = s.height;
  j["intensity"] = s.intensity;
  j["dolp"] = s.dolp;
  j["aop_deg"] = s.aop_deg;
  j["chroma"] = s.chroma;
  j["seed"] = s.seed;
  return j;
}

inline SceneSpec scene_spec_from_json(const nlohmann::ordered_json& j) {
  try {
    SceneSpec s;
    s.kind = scene_kind_from_string(j.at("kind").get<std::string>());
    s.width = j.at("width").get<int>();
    s.height = j.at("height").get<int>();
    s.intensity = j.at("intensity").get<double>();
    s.dolp = j.at("dolp").get<double>();
    s.aop_deg = j.at("aop_deg").get<double>();
    s.chroma = j.at("chroma").get<std::array<double, 3>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scene spec: ") + e.what());
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

inline nlohmann::ordered_json read_json(const fs::path& path) {
  try {
    return nlohmann::ordered_json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

/// Writes the twelve planes (and scene.json when a spec is given).
inline void write_scene(const fs::path& dir, const ImageStack& stack, const std::optional<SceneSpec>& spec = {}) {
  if (stack.kind() != StackKind::chromatic) throw ValidationError("scene directories hold 12-channel stacks");
  stack.validate();
  fs::create_directories(dir);
  for (const auto id : all_channels()) write_png16((dir / channel_file_name(id)).string(), stack[id]);
  if (spec) {
    nlohmann::ordered_json j;
    j["group"] = group_tag(*spec);
    j["spec"] = to_json(*spec);
    write_json(dir / kSceneMetaFile, j);
  }
}

/// Throws unless `dir` holds all twelve channel files with equal sizes that
/// are whole superpixels.
inline ImageStack read_scene(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ValidationError(dir.string() + " is not a directory");
  std::vector<std::string> missing;
  for (const auto id : all_channels()) {
    if (!fs::is_regular_file(dir / channel_file_name(id))) missing.push_back(channel_file_name(id));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ValidationError(dir.string() + " is missing channel files: " + list);
  }
  ImageStack out;
  for (const auto id : all_channels()) {
    Plane p = read_png((dir / channel_file_name(id)).string());
    if (out.empty()) {
      require_superpixel_dims(static_cast<int>(p.cols()), static_cast<int>(p.rows()));
      out = ImageStack::chromatic(static_cast<int>(p.cols()), static_cast<int>(p.rows()));
    } else if (p.rows() != out.height() || p.cols() != out.width()) {
      throw ValidationError(dir.string() + ": " + channel_file_name(id) + " differs in size");
    }
    out[id] = std::move(p);
  }
  return out;
}

/// Group tag from scene.json, if present.
inline std::optional<std::string> read_scene_group(const fs::path& dir) {
  if (!fs::is_regular_file(dir / kSceneMetaFile)) return std::nullopt;
  const auto j = read_json(dir / kSceneMetaFile);
  if (!j.contains("group")) return std::nullopt;
  return j.at("group").get<std::string>();
}

inline PcfaPattern pattern_by_name(const std::string& name) {
  const auto p = default_pattern();
  if (name == p.name()) return p;
  throw ValidationError("unknown pattern '" + name + "'");
}

inline fs::path sidecar_path(const fs::path& mosaic_png) { return fs::path(mosaic_png.string() + ".json"); }

inline void write_mosaic(const fs::path& path, const MosaicImage& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_png16(path.string(), m.data());
  nlohmann::ordered_json j;
  j["pattern"] = m.pattern().name();
  j["width"] = m.width();
  j["height"] = m.height();
  j["bit_depth"] = 16;
  write_json(sidecar_path(path), j);
}

/// Reads a mosaic and its sidecar; without a sidecar the default pattern is
/// assumed.
inline MosaicImage read_mosaic(const fs::path& path) {
  Plane data = read_png(path.string());
  std::string pattern = default_pattern().name();
  if (fs::is_regular_file(sidecar_path(path))) {
    const auto j = read_json(sidecar_path(path));
    try {
      pattern = j.at("pattern").get<std::string>();
      if (j.at("width").get<long>() != data.cols() || j.at("height").get<long>() != data.rows()) {
        throw ValidationError(path.string() + ": sidecar size does not match the image");
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(sidecar_path(path).string() + ": " + e.what());
    }
  }
  return MosaicImage(std::move(data), pattern_by_name(pattern));
}

/// Resolved configuration of one command invocation.
struct RunConfig {
  std::string command;
  std::string method;
  std::uint64_t seed = 0;
  nlohmann::ordered_json paths = nlohmann::ordered_json::object();
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::string output_dir;
};

inline nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["command"] = c.command;
  if (!c.method.empty()) j["method"] = c.method;
  j["seed"] = c.seed;
  j["paths"] = c.paths;
  j["parameters"] = c.parameters;
  j["output_dir"] = c.output_dir;
  return j;
}

inline void write_run_config(const fs::path& dir, const RunConfig& c) {
  fs::create_directories(dir);
  write_json(dir / kRunConfigFile, to_json(c));
}

}  // namespace pcfa

#endif  // PCFA_DATASET_HPP
