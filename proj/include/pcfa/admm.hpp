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

// Joint chromatic/polarimetric demosaicing by ADMM with dictionary priors.
//
// Unknowns: RC (12 chromatic planes) and RP (4 polarimetric planes, where
// RP(p, a) stands for the angle-a value of the color filtered at p), with
// auxiliary copies C, P and scaled multipliers y_rgb, y_pol. Each iteration:
//
//   1. prior step:  Z = R + y;  D X = patch-wise sparse approximation of Z;
//                   C (or P) = Z + 2 g (D X - Z) / (rho + 2 g)
//   2. data step:   minimize, with C, P, y fixed,
//        w/2 ||I - A_rgb RC||^2 + w/2 ||I - A_pol RP||^2
//        + k/2 sum_p sum_a (RP(p,a) - RC(p,(color(p),a)))^2
//        + rho_rgb/2 ||RC - (C - y_rgb)||^2 + rho_pol/2 ||RP - (P - y_pol)||^2
//      which separates into one 2x2 system per (pixel, angle);
//   3. multipliers: y += R - C (resp. R - P).
// The loop stops once ||dy_pol||_F + ||dy_rgb||_F < eps or after max_iter
// iterations. g is the prior weight, w the fidelity weight and k the
// polarimetric coupling weight.

#ifndef PCFA_ADMM_HPP
#define PCFA_ADMM_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pcfa/alm.hpp"
#include "pcfa/core.hpp"
#include "pcfa/dictionary.hpp"
#include "pcfa/mosaic.hpp"
#include "pcfa/omp.hpp"
#include "pcfa/parallel.hpp"
#include "pcfa/signals.hpp"

namespace pcfa {

enum class CoderKind : std::uint8_t { omp, omp_alm };
enum class DictionaryMode : std::uint8_t { joint_two_dics, single_dic, per_channel_12_dics };

inline std::string to_string(CoderKind c) { return c == CoderKind::omp ? "omp" : "omp+alm"; }

inline std::string to_string(DictionaryMode m) {
  switch (m) {
    case DictionaryMode::joint_two_dics: return "joint-two-dics";
    case DictionaryMode::single_dic: return "single-dic";
    case DictionaryMode::per_channel_12_dics: return "per-channel-12-dics";
  }
  return "unknown";
}

inline CoderKind coder_kind_from_string(const std::string& s) {
  if (s == "omp") return CoderKind::omp;
  if (s == "omp+alm") return CoderKind::omp_alm;
  throw ValidationError("unknown coder '" + s + "'");
}

inline DictionaryMode dictionary_mode_from_string(const std::string& s) {
  for (auto m : {DictionaryMode::joint_two_dics, DictionaryMode::single_dic, DictionaryMode::per_channel_12_dics}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown dictionary mode '" + s + "'");
}

struct AdmmConfig {
  double rho_pol = 1.05;
  double rho_rgb = 1.05;
  double lambda = 1e-4;  // l1 weight of the support refit in sparse coding
  int max_iter = 50;
  double eps = 1e-3;
  CoderKind coder = CoderKind::omp;
  int patch_stride = 2;
  DictionaryMode mode = DictionaryMode::joint_two_dics;
  int sparsity = 8;
  double residual_tol = 1e-6;
  double prior_weight = 1.0;
  double fidelity_weight = 50.0;
  double coupling_weight = 1.0;
  double alm_lambda = 0.1;
  int alm_block = 256;
  int threads = 1;

  void validate() const {
    if (!(rho_pol > 0.0) || !(rho_rgb > 0.0)) throw ValidationError("penalty parameters must be positive");
    if (!(eps > 0.0)) throw ValidationError("eps must be positive");
    if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (patch_stride != 1 && patch_stride != 2 && patch_stride != 4) {
      throw ValidationError("patch stride must be 1, 2 or 4");
    }
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be non-negative");
    if (sparsity < 1) throw ValidationError("sparsity must be at least 1");
    if (!(residual_tol >= 0.0)) throw ValidationError("residual tolerance must be non-negative");
    if (!(prior_weight >= 0.0)) throw ValidationError("prior weight must be non-negative");
    if (!(fidelity_weight > 0.0)) throw ValidationError("fidelity weight must be positive");
    if (!(coupling_weight >= 0.0)) throw ValidationError("coupling weight must be non-negative");
    if (!(alm_lambda > 0.0)) throw ValidationError("ALM lambda must be positive");
    if (alm_block < 1) throw ValidationError("ALM block size must be positive");
    if (threads < 1) throw ValidationError("thread count must be positive");
  }
};

inline nlohmann::ordered_json to_json(const AdmmConfig& c) {
  nlohmann::ordered_json j;
  j["rho_pol"] = c.rho_pol;
  j["rho_rgb"] = c.rho_rgb;
  j["lambda"] = c.lambda;
  j["max_iter"] = c.max_iter;
  j["eps"] = c.eps;
  j["coder"] = to_string(c.coder);
  j["patch_stride"] = c.patch_stride;
  j["dictionary_mode"] = to_string(c.mode);
  j["sparsity"] = c.sparsity;
  j["residual_tol"] = c.residual_tol;
  j["prior_weight"] = c.prior_weight;
  j["fidelity_weight"] = c.fidelity_weight;
  j["coupling_weight"] = c.coupling_weight;
  j["alm_lambda"] = c.alm_lambda;
  j["alm_block"] = c.alm_block;
  j["penalty_schedule"] = "constant";
  j["break_norm"] = "frobenius";
  return j;
}

/// Dictionaries for one of the modes: pol + rgb for joint-two-dics, rgb
/// alone for single-dic, twelve channel dictionaries (index order) for
/// per-channel-12-dics.
struct DictionarySet {
  std::optional<Dictionary> pol;
  std::optional<Dictionary> rgb;
  std::vector<Dictionary> channels;

  void validate_for(DictionaryMode mode) const {
    auto check = [](const std::optional<Dictionary>& d, SignalKind kind, const char* what) {
      if (!d) throw ValidationError(std::string("missing ") + what + " dictionary");
      if (d->kind != kind) throw ValidationError(std::string(what) + " dictionary has the wrong kind");
      d->validate();
    };
    switch (mode) {
      case DictionaryMode::joint_two_dics:
        check(pol, SignalKind::pol, "polarimetric");
        check(rgb, SignalKind::rgb, "chromatic");
        break;
      case DictionaryMode::single_dic:
        check(rgb, SignalKind::rgb, "chromatic");
        break;
      case DictionaryMode::per_channel_12_dics:
        if (channels.size() != kChannelCount) throw ValidationError("per-channel mode needs 12 dictionaries");
        for (std::size_t i = 0; i < channels.size(); ++i) {
          if (channels[i].kind != SignalKind::channel) {
            throw ValidationError("per-channel dictionary " + std::to_string(i) + " has the wrong kind");
          }
          if (channels[i].meta.channel && channels[i].meta.channel->index() != static_cast<int>(i)) {
            throw ValidationError("per-channel dictionary " + std::to_string(i) + " is for another channel");
          }
          channels[i].validate();
        }
        break;
    }
  }
};

struct TraceEntry {
  int iteration = 0;
  double ds_pol = 0.0;
  double ds_rgb = 0.0;
  double energy = 0.0;
};

struct AdmmState {
  ImageStack rp, rc, p, c;
  ImageStack y_pol, y_rgb;  // scaled multipliers
  ImageStack s_pol, s_rgb;  // unscaled multipliers, rho * y
  int iteration = 0;
  std::vector<TraceEntry> history;
};

struct DemosaicResult {
  ImageStack rc;  // clamped to [0, 1]
  ImageStack rp;  // clamped to [0, 1]
  bool converged = false;
  int iterations = 0;
  AdmmConfig config;
  std::vector<TraceEntry> trace;
};

namespace detail {

inline std::vector<int> patch_starts(int extent, int patch, int stride) {
  std::vector<int> out;
  for (int v = 0; v + patch <= extent; v += stride) out.push_back(v);
  if (!out.empty() && out.back() != extent - patch) out.push_back(extent - patch);
  return out;
}

inline void check_finite(const ImageStack& s, const char* what, int iteration) {
  for (int i = 0; i < s.channel_count(); ++i) {
    if (!s.plane(i).isFinite().all()) {
      throw NumericalError(std::string(what) + " became non-finite at iteration " + std::to_string(iteration) +
                           " (plane " + std::to_string(i) + ")");
    }
  }
}

/// Sparse code of mean-removed patch signals, reconstructed with means.
inline Eigen::MatrixXd code_and_reconstruct(const SignalMatrix& y, const Dictionary& dict, const AdmmConfig& cfg) {
  OmpOptions opt;
  opt.sparsity = cfg.sparsity;
  opt.residual_tol = cfg.residual_tol;
  opt.l1_weight = cfg.lambda;
  opt.remove_mean = true;
  opt.threads = cfg.threads;
  const SparseCode code = omp_encode(y, dict, opt);
  if (cfg.coder == CoderKind::omp) return reconstruct(dict, code).data;

  // Low-rank refinement, warm-started at the OMP code, block by block.
  Eigen::MatrixXd centered = y.data;
  for (long j = 0; j < centered.cols(); ++j) centered.col(j).array() -= code.means[j];
  const Eigen::MatrixXd x_omp(code.coefficients);
  Eigen::MatrixXd out(y.rows(), y.cols());
  AlmOptions alm;
  alm.lambda = cfg.alm_lambda;
  const long n = y.cols();
  const long blocks = (n + cfg.alm_block - 1) / cfg.alm_block;
  parallel_for(static_cast<std::size_t>(blocks), cfg.threads, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      const long start = static_cast<long>(b) * cfg.alm_block;
      const long len = std::min<long>(cfg.alm_block, n - start);
      const auto sol = alm_solve(centered.middleCols(start, len), dict.atoms, alm,
                                 Eigen::MatrixXd(x_omp.middleCols(start, len)));
      out.middleCols(start, len) = dict.atoms * sol.X;
    }
  });
  for (long j = 0; j < n; ++j) out.col(j).array() += code.means[j];
  return out;
}

/// Patch-wise dictionary approximation of `planes` (all planes coded
/// jointly), aggregated by uniform averaging of overlapping patches.
inline std::vector<Plane> prior_approximation(const std::vector<const Plane*>& planes, SignalKind kind,
                                              const Dictionary& dict, const AdmmConfig& cfg) {
  const int height = static_cast<int>(planes[0]->rows());
  const int width = static_cast<int>(planes[0]->cols());
  const int patch = dict.patch();
  if (patch < 1 || patch > height || patch > width) throw ValidationError("dictionary patch does not fit the image");
  if (signal_planes(kind) != static_cast<int>(planes.size())) throw ValidationError("plane count does not match kind");
  const auto rows = patch_starts(height, patch, cfg.patch_stride);
  const auto cols = patch_starts(width, patch, cfg.patch_stride);
  const long n = static_cast<long>(rows.size() * cols.size());

  SignalMatrix y{kind, patch, Eigen::MatrixXd(signal_rows(kind, patch), n)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      gather_patch(planes, rows[i], cols[j], patch, y.data.col(static_cast<long>(i * cols.size() + j)));
    }
  }
  const Eigen::MatrixXd approx = code_and_reconstruct(y, dict, cfg);

  // Averages are taken relative to the first contribution so that equal
  // contributions reproduce their value exactly.
  std::vector<Plane> ref(planes.size(), Plane::Zero(height, width));
  std::vector<Plane> acc(planes.size(), Plane::Zero(height, width));
  Eigen::ArrayXXi count = Eigen::ArrayXXi::Zero(height, width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const long col = static_cast<long>(i * cols.size() + j);
      for (int dy = 0; dy < patch; ++dy) {
        for (int dx = 0; dx < patch; ++dx) {
          const int r = rows[i] + dy;
          const int c = cols[j] + dx;
          const bool first = count(r, c) == 0;
          for (std::size_t k = 0; k < planes.size(); ++k) {
            const double v = approx(static_cast<long>(k) * patch * patch + dy * patch + dx, col);
            if (first) {
              ref[k](r, c) = v;
            } else {
              acc[k](r, c) += v - ref[k](r, c);
            }
          }
          ++count(r, c);
        }
      }
    }
  }
  for (std::size_t k = 0; k < planes.size(); ++k) {
    ref[k] += acc[k] / count.cast<double>();
  }
  return ref;
}

/// Z + 2g (DX - Z) / (rho + 2g), planewise.
inline void blend_prior(const ImageStack& z, const std::vector<Plane>& dx, double rho, double g, ImageStack& out) {
  const double t = 2.0 * g / (rho + 2.0 * g);
  out = z;
  for (int i = 0; i < z.channel_count(); ++i) out.plane(i) = z.plane(i) + t * (dx[static_cast<std::size_t>(i)] - z.plane(i));
}

inline ImageStack add(const ImageStack& a, const ImageStack& b) {
  ImageStack out = a;
  for (int i = 0; i < a.channel_count(); ++i) out.plane(i) += b.plane(i);
  return out;
}

inline double frobenius_diff(const ImageStack& a, const ImageStack& b) {
  double s = 0.0;
  for (int i = 0; i < a.channel_count(); ++i) s += (a.plane(i) - b.plane(i)).square().sum();
  return std::sqrt(s);
}

inline bool uses_pol(DictionaryMode m) { return m == DictionaryMode::joint_two_dics; }

}  // namespace detail

/// Initial state: RC from sparse-aware bicubic (clamped), RP its
/// polarimetric grouping, C = RC, P = RP, zero multipliers.
inline AdmmState admm_initialize(const MosaicImage& m) {
  AdmmState s;
  s.rc = initialize(m);
  s.rp = rearrange_polarimetric(s.rc, m.pattern());
  s.c = s.rc;
  s.p = s.rp;
  s.y_rgb = ImageStack::chromatic(m.width(), m.height());
  s.y_pol = ImageStack::polarimetric(m.width(), m.height());
  s.s_rgb = s.y_rgb;
  s.s_pol = s.y_pol;
  return s;
}

/// Step 1: update C (and P when the mode has a polarimetric prior).
inline void admm_prior_step(AdmmState& s, const DictionarySet& dicts, const AdmmConfig& cfg) {
  const ImageStack zc = detail::add(s.rc, s.y_rgb);
  if (cfg.mode == DictionaryMode::per_channel_12_dics) {
    std::vector<Plane> dx(kChannelCount);
    for (int i = 0; i < kChannelCount; ++i) {
      const std::vector<const Plane*> one{&zc.plane(i)};
      dx[static_cast<std::size_t>(i)] =
          detail::prior_approximation(one, SignalKind::channel, dicts.channels[static_cast<std::size_t>(i)], cfg)[0];
    }
    detail::blend_prior(zc, dx, cfg.rho_rgb, cfg.prior_weight, s.c);
  } else {
    std::vector<const Plane*> planes;
    for (int i = 0; i < kChannelCount; ++i) planes.push_back(&zc.plane(i));
    detail::blend_prior(zc, detail::prior_approximation(planes, SignalKind::rgb, *dicts.rgb, cfg), cfg.rho_rgb,
                        cfg.prior_weight, s.c);
  }
  if (detail::uses_pol(cfg.mode)) {
    const ImageStack zp = detail::add(s.rp, s.y_pol);
    std::vector<const Plane*> planes;
    for (int i = 0; i < kAngleCount; ++i) planes.push_back(&zp.plane(i));
    detail::blend_prior(zp, detail::prior_approximation(planes, SignalKind::pol, *dicts.pol, cfg), cfg.rho_pol,
                        cfg.prior_weight, s.p);
  }
}

/// Step 2: exact minimizer of the data-step quadratic with C, P, y fixed.
inline void admm_data_step(AdmmState& s, const MosaicImage& m, const AdmmConfig& cfg) {
  const int h = m.height();
  const int w = m.width();
  const double fw = cfg.fidelity_weight;
  const double rr = cfg.rho_rgb;
  const double rp = cfg.rho_pol;
  const double k = cfg.coupling_weight;
  const bool pol = detail::uses_pol(cfg.mode);
  parallel_for(static_cast<std::size_t>(h), cfg.threads, [&](std::size_t r0, std::size_t r1) {
    for (int r = static_cast<int>(r0); r < static_cast<int>(r1); ++r) {
      for (int c = 0; c < w; ++c) {
        const ChannelId seen = m.pattern().at(r, c);
        const double obs = m(r, c);
        for (const auto id : all_channels()) {
          const double tx = s.c[id](r, c) - s.y_rgb[id](r, c);
          if (id.color != seen.color) {
            s.rc[id](r, c) = tx;
            continue;
          }
          const double o = id.angle == seen.angle ? fw : 0.0;
          if (!pol) {
            s.rc[id](r, c) = tx + o * (obs - tx) / (o + rr);
            continue;
          }
          const double ty = s.p[id.angle](r, c) - s.y_pol[id.angle](r, c);
          const double a11 = o + rr + k;
          const double a22 = o + rp + k;
          const double b1 = o * (obs - tx) + k * (ty - tx);
          const double b2 = o * (obs - ty) + k * (tx - ty);
          const double det = a11 * a22 - k * k;
          s.rc[id](r, c) = tx + (a22 * b1 + k * b2) / det;
          s.rp[id.angle](r, c) = ty + (k * b1 + a11 * b2) / det;
        }
      }
    }
  });
}

/// Value of the data-step objective at the current state.
inline double admm_energy(const AdmmState& s, const MosaicImage& m, const AdmmConfig& cfg) {
  const bool pol = detail::uses_pol(cfg.mode);
  double e = 0.0;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const ChannelId seen = m.pattern().at(r, c);
      const double d_rgb = m(r, c) - s.rc[seen](r, c);
      e += 0.5 * cfg.fidelity_weight * d_rgb * d_rgb;
      if (pol) {
        const double d_pol = m(r, c) - s.rp[seen.angle](r, c);
        e += 0.5 * cfg.fidelity_weight * d_pol * d_pol;
        for (const auto a : kAngles) {
          const double d = s.rp[a](r, c) - s.rc[ChannelId{seen.color, a}](r, c);
          e += 0.5 * cfg.coupling_weight * d * d;
        }
      }
    }
  }
  for (int i = 0; i < kChannelCount; ++i) {
    e += 0.5 * cfg.rho_rgb * (s.rc.plane(i) - (s.c.plane(i) - s.y_rgb.plane(i))).square().sum();
  }
  if (pol) {
    for (int i = 0; i < kAngleCount; ++i) {
      e += 0.5 * cfg.rho_pol * (s.rp.plane(i) - (s.p.plane(i) - s.y_pol.plane(i))).square().sum();
    }
  }
  return e;
}

/// Step 3: multiplier ascent. Returns the pair of multiplier-change norms.
inline std::pair<double, double> admm_multiplier_step(AdmmState& s, const AdmmConfig& cfg) {
  const double ds_rgb = detail::frobenius_diff(s.rc, s.c);
  for (int i = 0; i < kChannelCount; ++i) {
    s.y_rgb.plane(i) += s.rc.plane(i) - s.c.plane(i);
    s.s_rgb.plane(i) = cfg.rho_rgb * s.y_rgb.plane(i);
  }
  double ds_pol = 0.0;
  if (detail::uses_pol(cfg.mode)) {
    ds_pol = detail::frobenius_diff(s.rp, s.p);
    for (int i = 0; i < kAngleCount; ++i) {
      s.y_pol.plane(i) += s.rp.plane(i) - s.p.plane(i);
      s.s_pol.plane(i) = cfg.rho_pol * s.y_pol.plane(i);
    }
  }
  return {ds_pol, ds_rgb};
}

inline DemosaicResult demosaic_variant(const MosaicImage& m, const DictionarySet& dicts, const AdmmConfig& cfg) {
  cfg.validate();
  dicts.validate_for(cfg.mode);
  AdmmState s = admm_initialize(m);
  DemosaicResult result;
  result.config = cfg;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    admm_prior_step(s, dicts, cfg);
    detail::check_finite(s.c, "C", k);
    detail::check_finite(s.p, "P", k);
    admm_data_step(s, m, cfg);
    detail::check_finite(s.rc, "RC", k);
    detail::check_finite(s.rp, "RP", k);
    const double energy = admm_energy(s, m, cfg);
    const auto [ds_pol, ds_rgb] = admm_multiplier_step(s, cfg);
    s.iteration = k;
    s.history.push_back({k, ds_pol, ds_rgb, energy});
    if (ds_pol + ds_rgb < cfg.eps) {
      result.converged = true;
      break;
    }
  }
  result.iterations = s.iteration;
  result.rc = s.rc.clamped();
  result.rp = s.rp.clamped();
  result.trace = s.history;
  return result;
}

/// The two-dictionary joint method.
inline DemosaicResult demosaic(const MosaicImage& m, const Dictionary& pol, const Dictionary& rgb, AdmmConfig cfg) {
  cfg.mode = DictionaryMode::joint_two_dics;
  DictionarySet set;
  set.pol = pol;
  set.rgb = rgb;
  return demosaic_variant(m, set, cfg);
}

inline std::vector<TraceEntry> residual_trace(const AdmmState& s) {
  if (s.history.empty()) throw ValidationError("no completed iterations to report");
  return s.history;
}

/// CSV with header "iteration,ds_pol,ds_rgb,energy".
inline std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::string out = "iteration,ds_pol,ds_rgb,energy\n";
  char buf[160];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.9e,%.9e,%.9e\n", t.iteration, t.ds_pol, t.ds_rgb, t.energy);
    out += buf;
  }
  return out;
}

}  // namespace pcfa

#endif  // PCFA_ADMM_HPP
