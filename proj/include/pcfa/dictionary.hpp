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

// Learned dictionaries and their binary file format.
//
// File layout (all integers little-endian):
//
//   offset  size        field
//   0       4           magic "PCDM"
//   4       2           format version (u16, currently 1)
//   6       1           kind tag (u8: 0 pol, 1 rgb, 2 channel)
//   7       4           rows (u32)
//   11      4           cols (u32)
//   15      8*rows*cols atoms, row-major IEEE-754 binary64
//   ...     4           metadata length in bytes (u32)
//   ...     n           metadata, UTF-8 JSON
//
// Nothing may follow the metadata block.

#ifndef PCFA_DICTIONARY_HPP
#define PCFA_DICTIONARY_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "pcfa/core.hpp"
#include "pcfa/signals.hpp"

namespace pcfa {

inline constexpr std::uint16_t kDictionaryFormatVersion = 1;
inline constexpr double kAtomNormTolerance = 1e-9;

struct DictionaryMetadata {
  std::string training_hash;
  std::uint64_t seed = 0;
  int sweeps = 0;
  double lambda = 1e-4;
  int sparsity = 0;
  bool mean_removed = true;
  std::optional<ChannelId> channel;  // per-channel dictionaries only

  friend bool operator==(const DictionaryMetadata&, const DictionaryMetadata&) = default;
};

struct Dictionary {
  SignalKind kind = SignalKind::rgb;
  Eigen::MatrixXd atoms;  // rows x atom count, unit-norm columns
  DictionaryMetadata meta;

  long rows() const { return atoms.rows(); }
  long size() const { return atoms.cols(); }
  int patch() const { return patch_for_rows(kind, atoms.rows()); }

  void validate() const {
    if (atoms.size() == 0) throw ValidationError("dictionary is empty");
    if (patch() == 0) {
      throw ValidationError("dictionary with " + std::to_string(rows()) + " rows does not match kind " +
                            to_string(kind));
    }
    if (!atoms.allFinite()) throw ValidationError("dictionary contains non-finite values");
    for (long j = 0; j < atoms.cols(); ++j) {
      if (std::abs(atoms.col(j).norm() - 1.0) > kAtomNormTolerance) {
        throw ValidationError("dictionary atom " + std::to_string(j) + " is not unit norm");
      }
    }
  }

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.kind == b.kind && a.atoms.rows() == b.atoms.rows() && a.atoms.cols() == b.atoms.cols() &&
           a.atoms == b.atoms && a.meta == b.meta;
  }
};

/// 64-bit FNV-1a, used to fingerprint training data.
inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

inline std::string fingerprint(const Eigen::MatrixXd& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  std::uint64_t h = fnv1a64(dims, sizeof dims);
  h = fnv1a64(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
  return hex64(h);
}

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}
  std::uint64_t uint(int width) {
    need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += width;
    return v;
  }
  double f64() { return std::bit_cast<double>(uint(8)); }
  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("dictionary file is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

inline nlohmann::json metadata_to_json(const DictionaryMetadata& m) {
  nlohmann::json j;
  j["training_hash"] = m.training_hash;
  j["seed"] = m.seed;
  j["sweeps"] = m.sweeps;
  j["lambda"] = m.lambda;
  j["sparsity"] = m.sparsity;
  j["mean_removed"] = m.mean_removed;
  j["channel"] = m.channel ? nlohmann::json(channel_name(*m.channel)) : nlohmann::json(nullptr);
  return j;
}

inline std::optional<ChannelId> channel_from_name(const std::string& name) {
  for (const auto id : all_channels()) {
    if (channel_name(id) == name) return id;
  }
  return std::nullopt;
}

inline DictionaryMetadata metadata_from_json(const nlohmann::json& j) {
  DictionaryMetadata m;
  m.training_hash = j.at("training_hash").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.sweeps = j.at("sweeps").get<int>();
  m.lambda = j.at("lambda").get<double>();
  m.sparsity = j.at("sparsity").get<int>();
  m.mean_removed = j.at("mean_removed").get<bool>();
  if (!j.at("channel").is_null()) {
    m.channel = channel_from_name(j.at("channel").get<std::string>());
    if (!m.channel) throw FormatError("unknown channel in dictionary metadata");
  }
  return m;
}

}  // namespace detail

inline std::string encode_dictionary(const Dictionary& d) {
  d.validate();
  std::string out = "PCDM";
  detail::put_u16(out, kDictionaryFormatVersion);
  out.push_back(static_cast<char>(d.kind));
  detail::put_u32(out, static_cast<std::uint32_t>(d.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(d.size()));
  for (long r = 0; r < d.rows(); ++r) {
    for (long c = 0; c < d.size(); ++c) detail::put_f64(out, d.atoms(r, c));
  }
  const std::string meta = detail::metadata_to_json(d.meta).dump();
  detail::put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out += meta;
  return out;
}

inline Dictionary decode_dictionary(const std::string& bytes) {
  detail::ByteReader in(bytes);
  if (in.take(4) != "PCDM") throw FormatError("not a dictionary file (bad magic)");
  const auto version = in.uint(2);
  if (version != kDictionaryFormatVersion) {
    throw FormatError("unsupported dictionary format version " + std::to_string(version));
  }
  const auto tag = in.uint(1);
  if (tag > 2) throw FormatError("unknown dictionary kind tag " + std::to_string(tag));
  Dictionary d;
  d.kind = static_cast<SignalKind>(tag);
  const auto rows = in.uint(4);
  const auto cols = in.uint(4);
  if (rows == 0 || cols == 0) throw FormatError("dictionary has zero size");
  if (patch_for_rows(d.kind, static_cast<long>(rows)) == 0) {
    throw FormatError("dictionary rows " + std::to_string(rows) + " do not match kind " + to_string(d.kind));
  }
  if (in.remaining() < rows * cols * 8) throw FormatError("dictionary file is truncated");
  d.atoms.resize(static_cast<long>(rows), static_cast<long>(cols));
  for (std::uint64_t r = 0; r < rows; ++r) {
    for (std::uint64_t c = 0; c < cols; ++c) d.atoms(static_cast<long>(r), static_cast<long>(c)) = in.f64();
  }
  const auto meta_len = in.uint(4);
  const std::string meta = in.take(meta_len);
  if (in.remaining() != 0) throw FormatError("trailing bytes after dictionary metadata");
  try {
    d.meta = detail::metadata_from_json(nlohmann::json::parse(meta));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed dictionary metadata: ") + e.what());
  }
  try {
    d.validate();
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  return d;
}

inline void save_dictionary(const Dictionary& d, const std::string& path) {
  const std::string bytes = encode_dictionary(d);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline Dictionary load_dictionary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_dictionary(bytes);
}

}  // namespace pcfa

#endif  // PCFA_DICTIONARY_HPP
