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

// Low-rank coding with sparse non-negative noise, solved by inexact ALM:
//
//     min ||J||_* + lambda ||E||_1   s.t.  Y = D X + E,  X = J,  E >= 0.
//
// Augmented Lagrangian with multipliers Y1 (data) and Y2 (split); each
// iteration updates
//     J <- SVT_{1/mu}(X + Y2/mu)
//     X <- (I + D'D)^{-1} (D'(Y - E) + J + (D'Y1 - Y2)/mu)
//     E <- max(0, Y - D X + Y1/mu - lambda/mu)
//     Y1 += mu (Y - D X - E),  Y2 += mu (X - J),  mu <- min(mu_max, rho mu)

#ifndef PCFA_ALM_HPP
#define PCFA_ALM_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SVD>

#include "pcfa/dictionary.hpp"
#include "pcfa/omp.hpp"

namespace pcfa {

struct AlmOptions {
  double lambda = 0.1;
  double tolerance = 1e-7;
  int max_iter = 500;
  double rho = 1.1;
  double mu_max = 1e10;
  double mu_scale = 1.25;  // mu_0 = mu_scale / ||Y||_2
};

struct LowRankSolution {
  Eigen::MatrixXd J;
  Eigen::MatrixXd X;
  Eigen::MatrixXd E;
  std::vector<double> mu_trace;
  int iterations = 0;
  bool converged = false;
  Eigen::RowVectorXd means;  // per-column means removed before coding; may be empty
};

namespace detail {

/// Singular-value thresholding: U * max(S - tau, 0) * V'.
inline Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& a, double tau) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  long keep = 0;
  while (keep < s.size() && s[keep] > tau) ++keep;
  if (keep == 0) return Eigen::MatrixXd::Zero(a.rows(), a.cols());
  const Eigen::VectorXd shrunk = (s.head(keep).array() - tau).matrix();
  return svd.matrixU().leftCols(keep) * shrunk.asDiagonal() * svd.matrixV().leftCols(keep).transpose();
}

inline double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()[0];
}

}  // namespace detail

/// Solves the low-rank problem for Y against dictionary atoms D. `warm`
/// seeds X and J (for example with an OMP code); zero otherwise.
inline LowRankSolution alm_solve(const Eigen::MatrixXd& y, const Eigen::MatrixXd& d, const AlmOptions& opt,
                                 const std::optional<Eigen::MatrixXd>& warm = std::nullopt) {
  if (d.rows() != y.rows()) {
    throw ValidationError("dictionary has " + std::to_string(d.rows()) + " rows, signals have " +
                          std::to_string(y.rows()));
  }
  if (!(opt.lambda > 0.0)) throw ValidationError("ALM lambda must be positive");
  const long k = d.cols();
  const long n = y.cols();
  LowRankSolution sol;
  sol.X = Eigen::MatrixXd::Zero(k, n);
  sol.J = sol.X;
  sol.E = Eigen::MatrixXd::Zero(y.rows(), n);
  const double ynorm = detail::spectral_norm(y);
  if (!(ynorm > 0.0)) {
    sol.converged = true;
    return sol;
  }
  if (warm) {
    if (warm->rows() != k || warm->cols() != n) throw ValidationError("warm start has the wrong shape");
    sol.X = *warm;
    sol.J = *warm;
  }

  const Eigen::MatrixXd dt = d.transpose();
  const Eigen::LLT<Eigen::MatrixXd> normal(Eigen::MatrixXd::Identity(k, k) + dt * d);
  Eigen::MatrixXd y1 = Eigen::MatrixXd::Zero(y.rows(), n);
  Eigen::MatrixXd y2 = Eigen::MatrixXd::Zero(k, n);
  double mu = opt.mu_scale / ynorm;

  for (int it = 0; it < opt.max_iter; ++it) {
    sol.mu_trace.push_back(mu);
    sol.J = detail::singular_value_threshold(sol.X + y2 / mu, 1.0 / mu);
    sol.X = normal.solve(dt * (y - sol.E) + sol.J + (dt * y1 - y2) / mu);
    const Eigen::MatrixXd dx = d * sol.X;
    sol.E = (y - dx + y1 / mu).array() - opt.lambda / mu;
    sol.E = sol.E.cwiseMax(0.0);
    const Eigen::MatrixXd r1 = y - dx - sol.E;
    const Eigen::MatrixXd r2 = sol.X - sol.J;
    y1 += mu * r1;
    y2 += mu * r2;
    mu = std::min(opt.mu_max, opt.rho * mu);
    sol.iterations = it + 1;
    if (!sol.X.allFinite() || !sol.E.allFinite()) throw NumericalError("ALM iterate became non-finite");
    const double gap = std::max(r1.cwiseAbs().maxCoeff(), r2.cwiseAbs().maxCoeff());
    if (gap < opt.tolerance) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

/// Dictionary-level entry point; removes per-column means first when asked.
inline LowRankSolution alm_encode(const SignalMatrix& signals, const Dictionary& dict, const AlmOptions& opt,
                                  bool remove_mean = false,
                                  const std::optional<Eigen::MatrixXd>& warm = std::nullopt) {
  Eigen::MatrixXd y = signals.data;
  Eigen::RowVectorXd means;
  if (remove_mean) means = remove_column_means(y);
  LowRankSolution sol = alm_solve(y, dict.atoms, opt, warm);
  sol.means = std::move(means);
  return sol;
}

/// D * X (the noise term E is not part of the signal), plus stored means.
inline SignalMatrix reconstruct(const Dictionary& dict, const LowRankSolution& sol) {
  if (sol.X.rows() != dict.size()) {
    throw ValidationError("solution has " + std::to_string(sol.X.rows()) + " atoms, dictionary " +
                          std::to_string(dict.size()));
  }
  SignalMatrix out{dict.kind, dict.patch(), dict.atoms * sol.X};
  if (sol.means.size() > 0) {
    for (long j = 0; j < out.data.cols(); ++j) out.data.col(j).array() += sol.means[j];
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_ALM_HPP
