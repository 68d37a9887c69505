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

// K-SVD dictionary learning for the objective
//
//     ||Y - D X||_F^2 + lambda * ||X||_1,   unit-norm columns of D.
//
// One sweep:
//   1. code every signal with OMP (l1 refit on the support); a column keeps
//      its previous code when the new one has a higher penalized cost;
//   2. for each atom with users, fit the rank-1 pair (d, x) to the residual
//      restricted to those users (power iteration seeded with the old atom,
//      then soft-thresholded coefficients); the pair is accepted only if the
//      penalized cost of those columns does not rise;
//   3. atoms without users are replaced by the worst-represented signals.
// Steps 1-3 never increase the objective, so the per-sweep trace is
// non-increasing up to rounding.

#ifndef PCFA_KSVD_HPP
#define PCFA_KSVD_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pcfa/dictionary.hpp"
#include "pcfa/omp.hpp"
#include "pcfa/random.hpp"

namespace pcfa {

struct KsvdOptions {
  int atoms = 256;
  int sparsity = 8;
  int sweeps = 40;
  double lambda = 1e-4;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct KsvdTraceEntry {
  double fit = 0.0;        // ||Y - DX||_F^2
  double l1 = 0.0;         // ||X||_1
  double objective = 0.0;  // fit + lambda * l1
};

struct KsvdResult {
  Dictionary dictionary;
  std::vector<KsvdTraceEntry> trace;
  std::vector<std::string> warnings;
};

namespace detail {

struct SparseColumn {
  std::vector<int> index;
  std::vector<double> value;

  double l1() const {
    double s = 0.0;
    for (double v : value) s += std::abs(v);
    return s;
  }
};

inline bool columns_all_identical(const Eigen::MatrixXd& y) {
  for (long j = 1; j < y.cols(); ++j) {
    if (y.col(j) != y.col(0)) return false;
  }
  return true;
}

inline Eigen::MatrixXd initial_atoms(const Eigen::MatrixXd& y, int atoms, Rng& rng) {
  const long rows = y.rows();
  Eigen::MatrixXd d(rows, atoms);
  int filled = 0;
  const auto order = rng.sample_without_replacement(static_cast<std::size_t>(y.cols()),
                                                    static_cast<std::size_t>(y.cols()));
  for (std::size_t idx = 0; idx < order.size() && filled < atoms; ++idx) {
    const long j = static_cast<long>(order[idx]);
    const double n = y.col(j).norm();
    if (!(n > 1e-12)) continue;
    const Eigen::VectorXd cand = y.col(j) / n;
    bool duplicate = false;
    for (int a = 0; a < filled && !duplicate; ++a) duplicate = std::abs(d.col(a).dot(cand)) > 1.0 - 1e-10;
    if (duplicate) continue;
    d.col(filled++) = cand;
  }
  while (filled < atoms) {
    Eigen::VectorXd g(rows);
    for (long r = 0; r < rows; ++r) g[r] = rng.normal();
    d.col(filled++) = g / g.norm();
  }
  return d;
}

inline KsvdTraceEntry measure(const Eigen::MatrixXd& residual, const std::vector<SparseColumn>& codes,
                              double lambda) {
  KsvdTraceEntry t;
  t.fit = residual.squaredNorm();
  for (const auto& c : codes) t.l1 += c.l1();
  t.objective = t.fit + lambda * t.l1;
  return t;
}

inline void recompute_residual(const Eigen::MatrixXd& y, const Eigen::MatrixXd& d,
                               const std::vector<SparseColumn>& codes, Eigen::MatrixXd& residual) {
  residual = y;
  for (long j = 0; j < y.cols(); ++j) {
    const auto& c = codes[static_cast<std::size_t>(j)];
    for (std::size_t a = 0; a < c.index.size(); ++a) residual.col(j) -= c.value[a] * d.col(c.index[a]);
  }
}

inline double soft_threshold(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

/// Rank-1 update of atom k over its users. Returns true when accepted.
inline bool update_atom(int k, const std::vector<std::pair<long, std::size_t>>& users, double lambda,
                        Eigen::MatrixXd& d, std::vector<SparseColumn>& codes, Eigen::MatrixXd& residual) {
  const long rows = d.rows();
  const long n = static_cast<long>(users.size());
  Eigen::MatrixXd e(rows, n);
  Eigen::RowVectorXd x_old(n);
  for (long u = 0; u < n; ++u) {
    const auto [col, pos] = users[static_cast<std::size_t>(u)];
    x_old[u] = codes[static_cast<std::size_t>(col)].value[pos];
    e.col(u) = residual.col(col) + x_old[u] * d.col(k);
  }
  const double old_cost = (e - d.col(k) * x_old).squaredNorm() + lambda * x_old.cwiseAbs().sum();

  Eigen::VectorXd atom = d.col(k);
  for (int it = 0; it < 30; ++it) {
    const Eigen::RowVectorXd x = atom.transpose() * e;
    Eigen::VectorXd next = e * x.transpose();
    const double nn = next.norm();
    if (!(nn > 0.0)) break;
    next /= nn;
    const double change = (next - atom).norm();
    atom = next;
    if (change < 1e-12) break;
  }
  Eigen::RowVectorXd x_new = atom.transpose() * e;
  for (long u = 0; u < n; ++u) x_new[u] = soft_threshold(x_new[u], 0.5 * lambda);
  const double new_cost = (e - atom * x_new).squaredNorm() + lambda * x_new.cwiseAbs().sum();
  if (!(new_cost <= old_cost) || !atom.allFinite()) return false;

  d.col(k) = atom;
  for (long u = 0; u < n; ++u) {
    const auto [col, pos] = users[static_cast<std::size_t>(u)];
    codes[static_cast<std::size_t>(col)].value[pos] = x_new[u];
    residual.col(col) = e.col(u) - x_new[u] * atom;
  }
  return true;
}

}  // namespace detail

/// Trains a dictionary on `signals` as given (no mean handling).
inline KsvdResult ksvd_train(const SignalMatrix& signals, const KsvdOptions& opt) {
  signals.validate();
  if (opt.atoms < 1) throw ValidationError("atom count must be positive");
  if (opt.atoms > signals.cols()) {
    throw ValidationError("atom count " + std::to_string(opt.atoms) + " exceeds the " +
                          std::to_string(signals.cols()) + " training signals");
  }
  if (opt.sparsity < 1) throw ValidationError("sparsity must be at least 1");
  if (opt.sweeps < 0) throw ValidationError("sweep count must be non-negative");
  if (!(opt.lambda >= 0.0)) throw ValidationError("lambda must be non-negative");

  const Eigen::MatrixXd& y = signals.data;
  const long n = y.cols();
  KsvdResult result;
  if (detail::columns_all_identical(y)) {
    result.warnings.push_back("training signals are degenerate (all columns identical)");
  }

  Rng rng(opt.seed);
  Eigen::MatrixXd d = detail::initial_atoms(y, opt.atoms, rng);
  std::vector<detail::SparseColumn> codes(static_cast<std::size_t>(n));
  Eigen::MatrixXd residual = y;

  for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
    // Sparse coding with keep-better selection.
    const OmpCoder coder(d);
    const Eigen::MatrixXd alpha0 = d.transpose() * y;
    parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t begin, std::size_t end) {
      Eigen::VectorXd approx(y.rows());
      for (std::size_t j = begin; j < end; ++j) {
        const long c = static_cast<long>(j);
        ColumnCode fresh = coder.encode(y.col(c), alpha0.col(c), opt.sparsity, 0.0, opt.lambda);
        coder.synthesize(fresh, approx);
        double fresh_l1 = 0.0;
        for (long a = 0; a < fresh.coef.size(); ++a) fresh_l1 += std::abs(fresh.coef[a]);
        const double fresh_cost = (y.col(c) - approx).squaredNorm() + opt.lambda * fresh_l1;
        const double old_cost = residual.col(c).squaredNorm() + opt.lambda * codes[j].l1();
        if (fresh_cost <= old_cost) {
          codes[j].index = fresh.support;
          codes[j].value.assign(fresh.coef.data(), fresh.coef.data() + fresh.coef.size());
          residual.col(c) = y.col(c) - approx;
        }
      }
    });

    // Atom users.
    std::vector<std::vector<std::pair<long, std::size_t>>> users(static_cast<std::size_t>(opt.atoms));
    for (long j = 0; j < n; ++j) {
      const auto& c = codes[static_cast<std::size_t>(j)];
      for (std::size_t a = 0; a < c.index.size(); ++a) users[static_cast<std::size_t>(c.index[a])].push_back({j, a});
    }

    std::vector<int> dead;
    for (int k = 0; k < opt.atoms; ++k) {
      if (users[static_cast<std::size_t>(k)].empty()) {
        dead.push_back(k);
        continue;
      }
      detail::update_atom(k, users[static_cast<std::size_t>(k)], opt.lambda, d, codes, residual);
    }

    // Dead-atom replacement; these atoms carry no coefficients, so the
    // objective is unchanged.
    if (!dead.empty()) {
      std::vector<long> order(static_cast<std::size_t>(n));
      std::iota(order.begin(), order.end(), 0L);
      Eigen::VectorXd rnorm(n);
      for (long j = 0; j < n; ++j) rnorm[j] = residual.col(j).norm();
      std::stable_sort(order.begin(), order.end(), [&](long a, long b) { return rnorm[a] > rnorm[b]; });
      std::size_t next = 0;
      for (int k : dead) {
        while (next < order.size()) {
          const long j = order[next++];
          if (!(rnorm[j] > 1e-12)) {
            next = order.size();
            break;
          }
          const double yn = y.col(j).norm();
          const Eigen::VectorXd cand = y.col(j) / yn;
          bool duplicate = false;
          for (long a = 0; a < d.cols() && !duplicate; ++a) duplicate = std::abs(d.col(a).dot(cand)) > 1.0 - 1e-10;
          if (duplicate) continue;
          d.col(k) = cand;
          break;
        }
      }
    }

    detail::recompute_residual(y, d, codes, residual);
    result.trace.push_back(detail::measure(residual, codes, opt.lambda));
  }

  result.dictionary.kind = signals.kind;
  result.dictionary.atoms = std::move(d);
  result.dictionary.meta.training_hash = fingerprint(y);
  result.dictionary.meta.seed = opt.seed;
  result.dictionary.meta.sweeps = opt.sweeps;
  result.dictionary.meta.lambda = opt.lambda;
  result.dictionary.meta.sparsity = opt.sparsity;
  result.dictionary.meta.mean_removed = false;
  return result;
}

/// Removes per-column means, then trains. This is how every dictionary
/// used by the demosaicer is produced.
inline KsvdResult train_dictionary(const SignalMatrix& signals, const KsvdOptions& opt) {
  SignalMatrix centered = signals;
  remove_column_means(centered.data);
  KsvdResult r = ksvd_train(centered, opt);
  r.dictionary.meta.training_hash = fingerprint(signals.data);
  r.dictionary.meta.mean_removed = true;
  return r;
}

}  // namespace pcfa

#endif  // PCFA_KSVD_HPP
