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

#include <set>

#include "pcfa/ksvd.hpp"
#include "pcfa/random.hpp"

namespace pcfa {
namespace {

struct Synthetic {
  Eigen::MatrixXd atoms;
  SignalMatrix signals;
};

Synthetic sparse_synthetic(std::uint64_t seed, long dims, long n_atoms, int sparsity, long n) {
  Rng rng(seed);
  Synthetic s;
  s.atoms.resize(dims, n_atoms);
  for (long j = 0; j < n_atoms; ++j) {
    for (long r = 0; r < dims; ++r) s.atoms(r, j) = rng.normal();
    s.atoms.col(j).normalize();
  }
  s.signals = SignalMatrix{SignalKind::pol, 4, Eigen::MatrixXd::Zero(dims, n)};
  for (long j = 0; j < n; ++j) {
    for (auto k : rng.sample_without_replacement(static_cast<std::size_t>(n_atoms), sparsity)) {
      const double mag = rng.uniform(0.5, 1.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      s.signals.data.col(j) += mag * s.atoms.col(static_cast<long>(k));
    }
  }
  return s;
}

SignalMatrix gaussian_signals(std::uint64_t seed, long n) {
  Rng rng(seed);
  SignalMatrix y{SignalKind::channel, 4, Eigen::MatrixXd(16, n)};
  for (long j = 0; j < n; ++j) {
    for (long r = 0; r < 16; ++r) y.data(r, j) = rng.normal();
  }
  return y;
}

TEST(Ksvd, ObjectiveNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = gaussian_signals(seed, 120);
    KsvdOptions opt;
    opt.atoms = 24;
    opt.sparsity = 3;
    opt.sweeps = 8;
    opt.lambda = seed % 2 == 0 ? 1e-4 : 0.05;
    opt.seed = seed;
    const auto r = ksvd_train(y, opt);
    ASSERT_EQ(r.trace.size(), 8u);
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      EXPECT_LE(r.trace[i].objective, r.trace[i - 1].objective * (1.0 + 1e-8)) << "seed " << seed;
    }
    EXPECT_NO_THROW(r.dictionary.validate());
  }
}

TEST(Ksvd, RecoversSyntheticAtoms) {
  const auto s = sparse_synthetic(42, 64, 20, 3, 2000);
  KsvdOptions opt;
  opt.atoms = 20;
  opt.sparsity = 3;
  opt.sweeps = 30;
  opt.seed = 1;
  const auto r = ksvd_train(s.signals, opt);
  int matched = 0;
  for (long j = 0; j < 20; ++j) {
    const double best = (r.dictionary.atoms.transpose() * s.atoms.col(j)).cwiseAbs().maxCoeff();
    matched += best > 0.99;
  }
  EXPECT_GE(matched, 16);
}

TEST(Ksvd, ConstantSignalsFitWithOneAtom) {
  SignalMatrix y{SignalKind::channel, 4, Eigen::MatrixXd::Constant(16, 50, 0.3)};
  KsvdOptions opt;
  opt.atoms = 8;
  opt.sweeps = 1;
  opt.lambda = 0.0;
  const auto r = ksvd_train(y, opt);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_LE(r.trace[0].objective, 1e-12);
  ASSERT_FALSE(r.warnings.empty());
  const auto code = omp_encode(y, r.dictionary, {.sparsity = 8});
  std::set<long> active;
  for (long j = 0; j < code.coefficients.outerSize(); ++j) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(code.coefficients, j); it; ++it) active.insert(it.row());
  }
  EXPECT_EQ(active.size(), 1u);
  const Eigen::VectorXd atom = r.dictionary.atoms.col(*active.begin());
  EXPECT_NEAR(atom.maxCoeff() - atom.minCoeff(), 0.0, 1e-12);
}

TEST(Ksvd, MeanRemovedTrainingOfConstantDataWarns) {
  SignalMatrix y{SignalKind::channel, 4, Eigen::MatrixXd::Constant(16, 30, 0.7)};
  KsvdOptions opt;
  opt.atoms = 8;
  opt.sweeps = 2;
  const auto r = train_dictionary(y, opt);
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_LE(r.trace.front().objective, 1e-12);
  EXPECT_TRUE(r.dictionary.meta.mean_removed);
  EXPECT_NO_THROW(r.dictionary.validate());
}

TEST(Ksvd, DeterministicAndThreadIndependent) {
  const auto y = gaussian_signals(3, 200);
  KsvdOptions opt;
  opt.atoms = 32;
  opt.sparsity = 4;
  opt.sweeps = 4;
  opt.seed = 5;
  const auto a = ksvd_train(y, opt);
  opt.threads = 3;
  const auto b = ksvd_train(y, opt);
  EXPECT_TRUE(a.dictionary == b.dictionary);
  EXPECT_EQ(encode_dictionary(a.dictionary), encode_dictionary(b.dictionary));
}

TEST(Ksvd, MetadataRecorded) {
  const auto y = gaussian_signals(4, 60);
  KsvdOptions opt;
  opt.atoms = 10;
  opt.sparsity = 2;
  opt.sweeps = 2;
  opt.lambda = 0.01;
  opt.seed = 77;
  const auto r = ksvd_train(y, opt);
  EXPECT_EQ(r.dictionary.meta.seed, 77u);
  EXPECT_EQ(r.dictionary.meta.sweeps, 2);
  EXPECT_EQ(r.dictionary.meta.sparsity, 2);
  EXPECT_DOUBLE_EQ(r.dictionary.meta.lambda, 0.01);
  EXPECT_EQ(r.dictionary.meta.training_hash, fingerprint(y.data));
}

TEST(Ksvd, RejectsTooManyAtoms) {
  const auto y = gaussian_signals(5, 10);
  KsvdOptions opt;
  opt.atoms = 11;
  EXPECT_THROW(ksvd_train(y, opt), ValidationError);
}

}  // namespace
}  // namespace pcfa
