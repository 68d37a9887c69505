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

// Orthogonal matching pursuit against a fixed dictionary.
//
// Per column: select the atom with the largest absolute correlation to the
// current residual (ties go to the lowest index), re-fit every active
// coefficient by least squares, and stop at the sparsity bound or once the
// residual norm drops to residual_tol. A step whose re-fit does not strictly
// shrink the residual is rejected and ends the column.
//
// Correlations are updated from the Gram matrix (alpha = D'y - G_S x_S),
// while residuals are formed explicitly so stopping decisions are exact.
//
// With l1_weight > 0 the least-squares coefficients on the chosen support
// are replaced by the minimizer of ||y - D_S x||^2 + l1_weight * ||x||_1
// over that support (cyclic coordinate descent).

#ifndef PCFA_OMP_HPP
#define PCFA_OMP_HPP

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "pcfa/dictionary.hpp"
#include "pcfa/parallel.hpp"
#include "pcfa/signals.hpp"

namespace pcfa {

struct OmpOptions {
  int sparsity = 8;
  double residual_tol = 1e-6;
  double l1_weight = 0.0;
  bool remove_mean = false;
  int threads = 1;
};

/// Coefficients for a batch of signals.
struct SparseCode {
  SignalKind kind = SignalKind::rgb;
  Eigen::SparseMatrix<double> coefficients;  // atoms x N
  std::vector<int> support_size;             // selected atoms per column
  Eigen::RowVectorXd means;                  // per-column means; empty unless removed

  long cols() const { return coefficients.cols(); }
  bool has_means() const { return means.size() > 0; }
};

/// Mean of a vector computed relative to its first element, so constant
/// vectors return their value exactly.
inline double stable_mean(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) return 0.0;
  const double ref = v[0];
  double acc = 0.0;
  for (long i = 0; i < v.size(); ++i) acc += v[i] - ref;
  return ref + acc / static_cast<double>(v.size());
}

/// Result of coding one column.
struct ColumnCode {
  std::vector<int> support;
  Eigen::VectorXd coef;
  double residual_norm = 0.0;
  int iterations = 0;
};

/// Sparse coder bound to one dictionary; holds its Gram matrix.
class OmpCoder {
 public:
  explicit OmpCoder(const Eigen::MatrixXd& atoms) : atoms_(atoms), gram_(atoms.transpose() * atoms) {}

  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::MatrixXd& gram() const { return gram_; }

  /// Codes y given its precomputed correlations alpha0 = D'y.
  ColumnCode encode(const Eigen::Ref<const Eigen::VectorXd>& y,
                    const Eigen::Ref<const Eigen::VectorXd>& alpha0, int sparsity, double residual_tol,
                    double l1_weight = 0.0) const {
    ColumnCode out;
    out.coef.resize(0);
    Eigen::VectorXd residual = y;
    double rnorm = residual.norm();
    out.residual_norm = rnorm;
    if (rnorm <= residual_tol) return out;

    const long n_atoms = atoms_.cols();
    std::vector<char> chosen(static_cast<std::size_t>(n_atoms), 0);
    Eigen::VectorXd alpha = alpha0;
    std::vector<int> support;
    Eigen::VectorXd coef;
    for (int step = 0; step < sparsity && step < n_atoms; ++step) {
      int best = -1;
      double best_val = 0.0;
      for (long j = 0; j < n_atoms; ++j) {
        if (chosen[j]) continue;
        const double v = std::abs(alpha[j]);
        if (v > best_val) {
          best_val = v;
          best = static_cast<int>(j);
        }
      }
      if (best < 0) break;

      support.push_back(best);
      const long k = static_cast<long>(support.size());
      Eigen::MatrixXd g_ss(k, k);
      Eigen::VectorXd rhs(k);
      for (long a = 0; a < k; ++a) {
        rhs[a] = alpha0[support[a]];
        for (long b = 0; b < k; ++b) g_ss(a, b) = gram_(support[a], support[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(g_ss);
      const bool degenerate =
          llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() < 1e-10;
      Eigen::VectorXd trial;
      Eigen::VectorXd trial_residual;
      double trial_norm = rnorm;
      if (!degenerate) {
        trial = llt.solve(rhs);
        trial_residual = y;
        for (long a = 0; a < k; ++a) trial_residual -= trial[a] * atoms_.col(support[a]);
        trial_norm = trial_residual.norm();
      }
      if (degenerate || !(trial_norm < rnorm)) {
        support.pop_back();
        break;
      }
      chosen[best] = 1;
      coef = trial;
      residual = trial_residual;
      rnorm = trial_norm;
      ++out.iterations;
      alpha = alpha0;
      for (long a = 0; a < k; ++a) alpha -= coef[a] * gram_.col(support[a]);
      if (rnorm <= residual_tol) break;
    }

    if (l1_weight > 0.0 && !support.empty()) {
      shrink_on_support(support, alpha0, l1_weight, coef);
      std::vector<int> kept_support;
      std::vector<double> kept;
      for (std::size_t a = 0; a < support.size(); ++a) {
        if (coef[static_cast<long>(a)] != 0.0) {
          kept_support.push_back(support[a]);
          kept.push_back(coef[static_cast<long>(a)]);
        }
      }
      support = std::move(kept_support);
      coef = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<long>(kept.size()));
      residual = y;
      for (std::size_t a = 0; a < support.size(); ++a) residual -= coef[static_cast<long>(a)] * atoms_.col(support[a]);
      rnorm = residual.norm();
    }
    out.support = std::move(support);
    out.coef = std::move(coef);
    out.residual_norm = rnorm;
    return out;
  }

  /// D_S x_S for a column code.
  void synthesize(const ColumnCode& code, Eigen::Ref<Eigen::VectorXd> out) const {
    out.setZero();
    for (std::size_t a = 0; a < code.support.size(); ++a) {
      out += code.coef[static_cast<long>(a)] * atoms_.col(code.support[a]);
    }
  }

 private:
  void shrink_on_support(const std::vector<int>& support, const Eigen::Ref<const Eigen::VectorXd>& alpha0,
                         double l1_weight, Eigen::VectorXd& coef) const {
    const long k = static_cast<long>(support.size());
    const double half = 0.5 * l1_weight;
    for (int sweep = 0; sweep < 200; ++sweep) {
      double max_change = 0.0;
      for (long a = 0; a < k; ++a) {
        double r = alpha0[support[a]];
        for (long b = 0; b < k; ++b) {
          if (b != a) r -= gram_(support[a], support[b]) * coef[b];
        }
        const double shrunk = r > half ? r - half : (r < -half ? r + half : 0.0);
        const double next = shrunk / gram_(support[a], support[a]);
        max_change = std::max(max_change, std::abs(next - coef[a]));
        coef[a] = next;
      }
      if (max_change < 1e-14) break;
    }
  }

  Eigen::MatrixXd atoms_;
  Eigen::MatrixXd gram_;
};

/// Subtracts per-column means in place and returns them.
inline Eigen::RowVectorXd remove_column_means(Eigen::MatrixXd& y) {
  Eigen::RowVectorXd means(y.cols());
  for (long j = 0; j < y.cols(); ++j) {
    means[j] = stable_mean(y.col(j));
    y.col(j).array() -= means[j];
  }
  return means;
}

inline SparseCode omp_encode(const SignalMatrix& signals, const Dictionary& dict, const OmpOptions& opt) {
  if (dict.rows() != signals.rows()) {
    throw ValidationError("dictionary has " + std::to_string(dict.rows()) + " rows, signals have " +
                          std::to_string(signals.rows()));
  }
  if (opt.sparsity < 1) throw ValidationError("sparsity must be at least 1");
  Eigen::MatrixXd y = signals.data;
  SparseCode code;
  code.kind = signals.kind;
  if (opt.remove_mean) code.means = remove_column_means(y);

  const OmpCoder coder(dict.atoms);
  const Eigen::MatrixXd alpha0 = dict.atoms.transpose() * y;
  const long n = y.cols();
  std::vector<ColumnCode> columns(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const long c = static_cast<long>(j);
      columns[j] = coder.encode(y.col(c), alpha0.col(c), opt.sparsity, opt.residual_tol, opt.l1_weight);
    }
  });

  std::vector<Eigen::Triplet<double>> triplets;
  code.support_size.resize(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    const auto& col = columns[static_cast<std::size_t>(j)];
    code.support_size[static_cast<std::size_t>(j)] = static_cast<int>(col.support.size());
    for (std::size_t a = 0; a < col.support.size(); ++a) {
      triplets.emplace_back(col.support[a], j, col.coef[static_cast<long>(a)]);
    }
  }
  code.coefficients.resize(dict.size(), n);
  code.coefficients.setFromTriplets(triplets.begin(), triplets.end());
  return code;
}

/// D * X, plus the stored column means when the code carries them.
inline SignalMatrix reconstruct(const Dictionary& dict, const SparseCode& code) {
  if (code.coefficients.rows() != dict.size()) {
    throw ValidationError("code has " + std::to_string(code.coefficients.rows()) + " atoms, dictionary " +
                          std::to_string(dict.size()));
  }
  SignalMatrix out{dict.kind, dict.patch(), dict.atoms * code.coefficients};
  if (code.has_means()) {
    for (long j = 0; j < out.data.cols(); ++j) out.data.col(j).array() += code.means[j];
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_OMP_HPP
