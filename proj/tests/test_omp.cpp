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
#include <limits>
#include <vector>

#include "pcfa/omp.hpp"
#include "pcfa/random.hpp"

namespace pcfa {
namespace {

Eigen::MatrixXd random_unit_columns(Rng& rng, long rows, long cols) {
  Eigen::MatrixXd d(rows, cols);
  for (long j = 0; j < cols; ++j) {
    for (long r = 0; r < rows; ++r) d(r, j) = rng.normal();
    d.col(j).normalize();
  }
  return d;
}

Eigen::MatrixXd random_orthonormal(Rng& rng, long n) {
  Eigen::MatrixXd g(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

/// Channel-kind dictionary of 16 rows from arbitrary atoms.
Dictionary as_dictionary(const Eigen::MatrixXd& atoms) {
  Dictionary d;
  d.kind = SignalKind::channel;
  d.atoms = atoms;
  return d;
}

SignalMatrix as_signals(const Eigen::MatrixXd& y) { return SignalMatrix{SignalKind::channel, 4, y}; }

double ls_residual(const Eigen::MatrixXd& d, const std::vector<int>& support, const Eigen::VectorXd& y) {
  Eigen::MatrixXd sub(d.rows(), static_cast<long>(support.size()));
  for (std::size_t a = 0; a < support.size(); ++a) sub.col(static_cast<long>(a)) = d.col(support[a]);
  const Eigen::VectorXd x = sub.colPivHouseholderQr().solve(y);
  return (y - sub * x).norm();
}

/// Straightforward greedy pursuit: explicit residual correlations and a QR
/// least-squares solve at every step.
std::vector<int> naive_omp_support(const Eigen::MatrixXd& d, const Eigen::VectorXd& y, int sparsity) {
  std::vector<int> support;
  Eigen::VectorXd r = y;
  for (int s = 0; s < sparsity; ++s) {
    int best = -1;
    double best_val = 0.0;
    for (long j = 0; j < d.cols(); ++j) {
      if (std::find(support.begin(), support.end(), j) != support.end()) continue;
      const double v = std::abs(d.col(j).dot(r));
      if (v > best_val) {
        best_val = v;
        best = static_cast<int>(j);
      }
    }
    if (best < 0) break;
    support.push_back(best);
    Eigen::MatrixXd sub(d.rows(), static_cast<long>(support.size()));
    for (std::size_t a = 0; a < support.size(); ++a) sub.col(static_cast<long>(a)) = d.col(support[a]);
    r = y - sub * sub.colPivHouseholderQr().solve(y);
  }
  return support;
}

TEST(Omp, SingleAtomSignal) {
  Rng rng(1);
  const auto atoms = random_unit_columns(rng, 16, 8);
  const auto code = omp_encode(as_signals(atoms.col(3)), as_dictionary(atoms), {.sparsity = 1});
  ASSERT_EQ(code.coefficients.nonZeros(), 1);
  EXPECT_NEAR(code.coefficients.coeff(3, 0), 1.0, 1e-12);
  const auto rec = reconstruct(as_dictionary(atoms), code);
  EXPECT_LT((rec.data - atoms.col(3)).norm(), 1e-12);
}

TEST(Omp, OrthonormalTwoSparse) {
  Rng rng(2);
  const auto q = random_orthonormal(rng, 16);
  const Eigen::MatrixXd atoms = q.leftCols(8);
  const Eigen::VectorXd y = 2.0 * atoms.col(1) + 3.0 * atoms.col(5);
  const auto code = omp_encode(as_signals(y), as_dictionary(atoms), {.sparsity = 2});
  EXPECT_EQ(code.coefficients.nonZeros(), 2);
  EXPECT_NEAR(code.coefficients.coeff(1, 0), 2.0, 1e-10);
  EXPECT_NEAR(code.coefficients.coeff(5, 0), 3.0, 1e-10);
}

TEST(Omp, ZeroSignal) {
  Rng rng(3);
  const auto atoms = random_unit_columns(rng, 16, 8);
  const OmpCoder coder(atoms);
  const Eigen::VectorXd y = Eigen::VectorXd::Zero(16);
  const auto col = coder.encode(y, atoms.transpose() * y, 4, 1e-6);
  EXPECT_TRUE(col.support.empty());
  EXPECT_EQ(col.iterations, 0);
  const auto code = omp_encode(as_signals(y), as_dictionary(atoms), {});
  EXPECT_EQ(code.coefficients.nonZeros(), 0);
  EXPECT_TRUE(reconstruct(as_dictionary(atoms), code).data.isZero(0.0));
}

TEST(Omp, TiesGoToLowestIndex) {
  Rng rng(4);
  Eigen::MatrixXd atoms = random_unit_columns(rng, 16, 6);
  atoms.col(4) = atoms.col(2);
  const auto code = omp_encode(as_signals(atoms.col(2)), as_dictionary(atoms), {.sparsity = 3});
  EXPECT_NE(code.coefficients.coeff(2, 0), 0.0);
  EXPECT_EQ(code.coefficients.coeff(4, 0), 0.0);
}

TEST(Omp, DimensionMismatch) {
  Rng rng(5);
  const auto atoms = random_unit_columns(rng, 16, 8);
  const SignalMatrix y{SignalKind::pol, 4, Eigen::MatrixXd::Zero(64, 2)};
  EXPECT_THROW(omp_encode(y, as_dictionary(atoms), {}), ValidationError);
  EXPECT_THROW(omp_encode(as_signals(Eigen::MatrixXd::Zero(16, 1)), as_dictionary(atoms), {.sparsity = 0}),
               ValidationError);
}

TEST(Omp, ExhaustiveOracleOnToyDictionaries) {
  Rng rng(6);
  int reachable = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const long dims = 4 + static_cast<long>(rng.below(13));
    const long n_atoms = 3 + static_cast<long>(rng.below(6));
    const auto atoms = random_unit_columns(rng, dims, n_atoms);
    Eigen::VectorXd y(dims);
    for (long r = 0; r < dims; ++r) y[r] = rng.normal();

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_support;
    for (int a = 0; a < n_atoms; ++a) {
      for (int b = a + 1; b < n_atoms; ++b) {
        const double r = ls_residual(atoms, {a, b}, y);
        if (r < best) {
          best = r;
          best_support = {a, b};
        }
      }
    }
    const OmpCoder coder(atoms);
    const auto col = coder.encode(y, atoms.transpose() * y, 2, 0.0);
    ASSERT_EQ(col.support, naive_omp_support(atoms, y, 2));
    EXPECT_NEAR(col.residual_norm, ls_residual(atoms, col.support, y), 1e-9);
    EXPECT_GE(col.residual_norm, best - 1e-12);
    auto sorted = col.support;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == best_support) {
      ++reachable;
      EXPECT_NEAR(col.residual_norm, best, 1e-9);
    }
  }
  EXPECT_GT(reachable, 50);
}

TEST(Omp, ExactRecoveryOnOrthonormalDictionaries) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto q = random_orthonormal(rng, 16);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(16);
    const auto idx = rng.sample_without_replacement(16, 1 + rng.below(8));
    for (auto i : idx) x[static_cast<long>(i)] = rng.uniform(0.5, 2.0) * (rng.uniform() < 0.5 ? -1 : 1);
    const Eigen::VectorXd y = q * x;
    const auto code = omp_encode(as_signals(y), as_dictionary(q), {.sparsity = 8, .residual_tol = 1e-12});
    EXPECT_LT((reconstruct(as_dictionary(q), code).data - y).norm(), 1e-9);
  }
}

TEST(Omp, ResidualStrictlyDecreasesPerStep) {
  Rng rng(8);
  const auto atoms = random_unit_columns(rng, 16, 40);
  const OmpCoder coder(atoms);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::VectorXd y(16);
    for (long r = 0; r < 16; ++r) y[r] = rng.normal();
    double prev = y.norm();
    for (int s = 1; s <= 10; ++s) {
      const auto col = coder.encode(y, atoms.transpose() * y, s, 0.0);
      if (static_cast<int>(col.support.size()) < s) break;
      EXPECT_LT(col.residual_norm, prev);
      EXPECT_LE(static_cast<int>(col.support.size()), s);
      prev = col.residual_norm;
    }
  }
}

TEST(Omp, SupportNeverExceedsSparsity) {
  Rng rng(9);
  const auto atoms = random_unit_columns(rng, 16, 32);
  Eigen::MatrixXd y(16, 100);
  for (long j = 0; j < 100; ++j) {
    for (long r = 0; r < 16; ++r) y(r, j) = rng.normal();
  }
  const auto code = omp_encode(as_signals(y), as_dictionary(atoms), {.sparsity = 3});
  for (long j = 0; j < 100; ++j) {
    EXPECT_LE(code.support_size[static_cast<std::size_t>(j)], 3);
    long nnz = 0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(code.coefficients, j); it; ++it) nnz += it.value() != 0.0;
    EXPECT_LE(nnz, 3);
  }
}

TEST(Omp, ReconstructionBeatsOrMatchesBestKTermOnReachableCases) {
  // ||Y - DX|| <= best k-term error among supports OMP could produce; on
  // orthonormal toy dictionaries greedy selection is optimal.
  Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd atoms = random_orthonormal(rng, 8);
    Eigen::VectorXd y(8);
    for (long r = 0; r < 8; ++r) y[r] = rng.normal();
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 8; ++a) {
      for (int b = a + 1; b < 8; ++b) best = std::min(best, ls_residual(atoms, {a, b}, y));
    }
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(16, 8);
    padded.topRows(8) = atoms;
    Eigen::VectorXd yp = Eigen::VectorXd::Zero(16);
    yp.head(8) = y;
    const auto code = omp_encode(as_signals(yp), as_dictionary(padded), {.sparsity = 2, .residual_tol = 0.0});
    EXPECT_LE((reconstruct(as_dictionary(padded), code).data - yp).norm(), best + 1e-12);
  }
}

TEST(Omp, MeanRemovalMakesConstantsExact) {
  Rng rng(11);
  const auto atoms = random_unit_columns(rng, 16, 20);
  const Eigen::MatrixXd y = Eigen::MatrixXd::Constant(16, 5, 0.4321);
  const auto code = omp_encode(as_signals(y), as_dictionary(atoms), {.remove_mean = true});
  EXPECT_EQ(code.coefficients.nonZeros(), 0);
  EXPECT_TRUE(reconstruct(as_dictionary(atoms), code).data == y);
}

TEST(Omp, L1RefitShrinksOrthonormalCoefficients) {
  Rng rng(12);
  const auto q = random_orthonormal(rng, 16);
  const Eigen::VectorXd y = 2.0 * q.col(0) - 0.01 * q.col(3);
  const auto code = omp_encode(as_signals(y), as_dictionary(q), {.sparsity = 2, .l1_weight = 0.1});
  EXPECT_NEAR(code.coefficients.coeff(0, 0), 2.0 - 0.05, 1e-10);
  EXPECT_EQ(code.coefficients.coeff(3, 0), 0.0);
  EXPECT_EQ(code.support_size[0], 1);
}

TEST(Omp, ThreadCountDoesNotChangeCodes) {
  Rng rng(13);
  const auto atoms = random_unit_columns(rng, 16, 32);
  Eigen::MatrixXd y(16, 257);
  for (long j = 0; j < y.cols(); ++j) {
    for (long r = 0; r < 16; ++r) y(r, j) = rng.normal();
  }
  const auto a = omp_encode(as_signals(y), as_dictionary(atoms), {.threads = 1});
  const auto b = omp_encode(as_signals(y), as_dictionary(atoms), {.threads = 4});
  EXPECT_TRUE(Eigen::MatrixXd(a.coefficients) == Eigen::MatrixXd(b.coefficients));
}

}  // namespace
}  // namespace pcfa
