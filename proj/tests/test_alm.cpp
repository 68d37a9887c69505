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

#include <Eigen/QR>
#include <Eigen/SVD>

#include "pcfa/alm.hpp"
#include "pcfa/random.hpp"

namespace pcfa {
namespace {

Eigen::MatrixXd tight_frame(Rng& rng, long dims, int bases) {
  Eigen::MatrixXd d(dims, dims * bases);
  for (int b = 0; b < bases; ++b) {
    Eigen::MatrixXd g(dims, dims);
    for (long i = 0; i < dims; ++i) {
      for (long j = 0; j < dims; ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    d.middleCols(b * dims, dims) = qr.householderQ() * Eigen::MatrixXd::Identity(dims, dims);
  }
  return d;
}

Eigen::MatrixXd rank_one(Rng& rng, long rows, long cols) {
  Eigen::VectorXd u(rows);
  Eigen::RowVectorXd v(cols);
  for (long i = 0; i < rows; ++i) u[i] = rng.normal();
  for (long j = 0; j < cols; ++j) v[j] = rng.normal();
  return u * v;
}

TEST(Alm, ZeroInputGivesZeroSolution) {
  Rng rng(1);
  const auto d = tight_frame(rng, 16, 2);
  const auto sol = alm_solve(Eigen::MatrixXd::Zero(16, 5), d, {});
  EXPECT_TRUE(sol.X.isZero(0.0));
  EXPECT_TRUE(sol.E.isZero(0.0));
  EXPECT_TRUE(sol.converged);
}

TEST(Alm, RankOneCleanRecovery) {
  Rng rng(2);
  const auto d = tight_frame(rng, 64, 4);
  const Eigen::MatrixXd y = d * rank_one(rng, 256, 40) * 0.05;
  AlmOptions opt;
  opt.lambda = 1.0;
  const auto sol = alm_solve(y, d, opt);
  ASSERT_TRUE(sol.converged);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sol.X);
  const auto& s = svd.singularValues();
  EXPECT_LT(s[1] / s[0], 1e-6);
  EXPECT_LT(sol.E.cwiseAbs().sum(), 1e-6);
  const double scale = std::max(1.0, y.norm());
  EXPECT_LE((y - d * sol.X - sol.E).norm() / scale, 1e-6);
  EXPECT_LE((sol.X - sol.J).norm() / scale, 1e-6);
}

TEST(Alm, SpikeSupportRecovery) {
  Rng rng(3);
  const auto d = tight_frame(rng, 64, 4);
  const long n = 100;
  const Eigen::MatrixXd clean = d * rank_one(rng, 256, n) * 0.02;
  const double scale = clean.cwiseAbs().mean();
  Eigen::MatrixXd spikes = Eigen::MatrixXd::Zero(64, n);
  const auto picks = rng.sample_without_replacement(64 * n, 64 * n / 100);
  for (auto p : picks) spikes(static_cast<long>(p % 64), static_cast<long>(p / 64)) = 10.0 * scale;
  AlmOptions opt;
  opt.lambda = 0.035;
  const auto sol = alm_solve(clean + spikes, d, opt);
  EXPECT_TRUE(sol.converged);
  int hit = 0;
  for (auto p : picks) hit += sol.E(static_cast<long>(p % 64), static_cast<long>(p / 64)) > 0.5 * 10.0 * scale;
  EXPECT_GE(hit, static_cast<int>(0.95 * picks.size()));
  EXPECT_GE(sol.E.minCoeff(), 0.0);
}

TEST(Alm, NoiseIsNonNegativeAndFeasible) {
  Rng rng(4);
  const auto d = tight_frame(rng, 16, 2);
  Eigen::MatrixXd y(16, 30);
  for (long i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  AlmOptions opt;
  opt.lambda = 0.2;
  const auto sol = alm_solve(y, d, opt);
  ASSERT_TRUE(sol.converged);
  EXPECT_GE(sol.E.minCoeff(), 0.0);
  const double scale = std::max(1.0, y.norm());
  EXPECT_LE((y - d * sol.X - sol.E).norm() / scale, 1e-6);
  EXPECT_LE((sol.X - sol.J).norm() / scale, 1e-6);
}

TEST(Alm, PenaltyScheduleGrowsGeometricallyToCap) {
  Rng rng(5);
  const auto d = tight_frame(rng, 16, 2);
  const Eigen::MatrixXd y = d * rank_one(rng, 32, 10);
  AlmOptions opt;
  opt.mu_max = 1.0;
  const auto sol = alm_solve(y, d, opt);
  ASSERT_GE(sol.mu_trace.size(), 2u);
  EXPECT_NEAR(sol.mu_trace[0], 1.25 / Eigen::BDCSVD<Eigen::MatrixXd>(y).singularValues()[0], 1e-12);
  for (std::size_t i = 1; i < sol.mu_trace.size(); ++i) {
    EXPECT_DOUBLE_EQ(sol.mu_trace[i], std::min(1.0, 1.1 * sol.mu_trace[i - 1]));
  }
}

TEST(Alm, IterationCapReportsNonConvergence) {
  Rng rng(6);
  const auto d = tight_frame(rng, 16, 2);
  const Eigen::MatrixXd y = d * rank_one(rng, 32, 10);
  AlmOptions opt;
  opt.max_iter = 3;
  const auto sol = alm_solve(y, d, opt);
  EXPECT_FALSE(sol.converged);
  EXPECT_EQ(sol.iterations, 3);
  EXPECT_TRUE(sol.X.allFinite());
}

TEST(Alm, EncodeWithMeansReconstructsConstants) {
  Rng rng(7);
  Dictionary dict;
  dict.kind = SignalKind::channel;
  dict.atoms = tight_frame(rng, 16, 2);
  const SignalMatrix y{SignalKind::channel, 4, Eigen::MatrixXd::Constant(16, 4, 0.6)};
  const auto sol = alm_encode(y, dict, {}, true);
  EXPECT_TRUE(reconstruct(dict, sol).data == y.data);
}

TEST(Alm, Errors) {
  Rng rng(8);
  const auto d = tight_frame(rng, 16, 2);
  EXPECT_THROW(alm_solve(Eigen::MatrixXd::Zero(8, 2), d, {}), ValidationError);
  AlmOptions bad;
  bad.lambda = 0.0;
  EXPECT_THROW(alm_solve(Eigen::MatrixXd::Ones(16, 2), d, bad), ValidationError);
}

}  // namespace
}  // namespace pcfa
