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

#include <cstdio>
#include <filesystem>

#include "pcfa/dictionary.hpp"
#include "pcfa/random.hpp"

namespace pcfa {
namespace {

Dictionary random_dictionary(SignalKind kind, int atoms, std::uint64_t seed) {
  Rng rng(seed);
  Dictionary d;
  d.kind = kind;
  d.atoms.resize(signal_rows(kind, 4), atoms);
  for (long j = 0; j < atoms; ++j) {
    for (long r = 0; r < d.atoms.rows(); ++r) d.atoms(r, j) = rng.normal();
    d.atoms.col(j).normalize();
  }
  d.meta.training_hash = "abc";
  d.meta.seed = seed;
  d.meta.sweeps = 3;
  d.meta.lambda = 1e-4;
  d.meta.sparsity = 8;
  return d;
}

TEST(Dictionary, EncodeDecodeIsBitExact) {
  auto d = random_dictionary(SignalKind::rgb, 16, 1);
  d.meta.lambda = 0.1 + 1e-17;
  const auto back = decode_dictionary(encode_dictionary(d));
  EXPECT_TRUE(back == d);
  auto c = random_dictionary(SignalKind::channel, 8, 2);
  c.meta.channel = ChannelId{Color::G, Angle::A135};
  EXPECT_TRUE(decode_dictionary(encode_dictionary(c)) == c);
}

TEST(Dictionary, HeaderLayout) {
  const auto d = random_dictionary(SignalKind::pol, 5, 3);
  const auto bytes = encode_dictionary(d);
  EXPECT_EQ(bytes.substr(0, 4), "PCDM");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[6]), 0);  // pol
  EXPECT_EQ(static_cast<unsigned char>(bytes[7]), 64);
  EXPECT_EQ(static_cast<unsigned char>(bytes[11]), 5);
}

TEST(Dictionary, FileRoundTrip) {
  const auto d = random_dictionary(SignalKind::pol, 12, 4);
  const auto path = (std::filesystem::temp_directory_path() / "pcfa_dict_roundtrip.pcdm").string();
  save_dictionary(d, path);
  EXPECT_TRUE(load_dictionary(path) == d);
  std::filesystem::remove(path);
}

TEST(Dictionary, CorruptMagicRejected) {
  auto bytes = encode_dictionary(random_dictionary(SignalKind::pol, 4, 5));
  bytes[0] = 'X';
  EXPECT_THROW(decode_dictionary(bytes), FormatError);
}

TEST(Dictionary, VersionAndTruncationRejected) {
  const auto bytes = encode_dictionary(random_dictionary(SignalKind::pol, 4, 6));
  auto wrong_version = bytes;
  wrong_version[4] = 2;
  EXPECT_THROW(decode_dictionary(wrong_version), FormatError);
  EXPECT_THROW(decode_dictionary(bytes.substr(0, bytes.size() - 3)), FormatError);
  EXPECT_THROW(decode_dictionary(bytes.substr(0, 40)), FormatError);
  EXPECT_THROW(decode_dictionary(bytes + "x"), FormatError);
}

TEST(Dictionary, RowKindMismatchRejected) {
  auto bytes = encode_dictionary(random_dictionary(SignalKind::pol, 4, 7));
  bytes[6] = 1;  // claim rgb with 64 rows
  EXPECT_THROW(decode_dictionary(bytes), FormatError);
}

TEST(Dictionary, NonUnitAtomsRejected) {
  auto d = random_dictionary(SignalKind::pol, 4, 8);
  EXPECT_NO_THROW(d.validate());
  d.atoms.col(2) *= 1.001;
  EXPECT_THROW(d.validate(), ValidationError);
  EXPECT_THROW(encode_dictionary(d), ValidationError);
}

TEST(Dictionary, MalformedMetadataRejected) {
  auto bytes = encode_dictionary(random_dictionary(SignalKind::pol, 4, 9));
  bytes[bytes.size() - 2] = '#';
  EXPECT_THROW(decode_dictionary(bytes), FormatError);
}

TEST(Dictionary, FingerprintDependsOnShapeAndContent) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 3);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 2);
  EXPECT_NE(fingerprint(a), fingerprint(b));
  Eigen::MatrixXd c = a;
  c(1, 1) = 1e-300;
  EXPECT_NE(fingerprint(a), fingerprint(c));
  EXPECT_EQ(fingerprint(a), fingerprint(Eigen::MatrixXd::Zero(2, 3)));
  EXPECT_EQ(fingerprint(a).size(), 16u);
}

}  // namespace
}  // namespace pcfa
