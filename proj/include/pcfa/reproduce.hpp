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

// End-to-end controlled experiment on a synthetic suite.
//
// A run trains dictionaries on generated training scenes, demosaics a fixed
// set of test scenes with the interpolation baselines and every solver
// variant, and writes:
//
//   table1.csv     bilinear, bicubic and joint (default lambda)
//   table2.csv     joint over the lambda sweep, then the dictionary ablations
//   scenes.csv     per-scene metrics for every row of both tables
//   checks.json    the ordering assertions and whether each held
//   timings.json   wall-clock seconds per stage (not byte-stable)
//   run_config.json
//   dictionaries/  every trained dictionary
//
// All CSV and dictionary outputs are byte-identical for equal suites and
// seeds.

#ifndef PCFA_REPRODUCE_HPP
#define PCFA_REPRODUCE_HPP

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pcfa/admm.hpp"
#include "pcfa/baselines.hpp"
#include "pcfa/dataset.hpp"
#include "pcfa/ksvd.hpp"
#include "pcfa/metrics.hpp"
#include "pcfa/mosaic.hpp"
#include "pcfa/scene.hpp"
#include "pcfa/signals.hpp"

namespace pcfa {

/// Minimum PSNR advantage of the joint solver over each interpolation
/// baseline, in dB.
inline constexpr double kJointMarginDb = 1.0;
/// The default lambda must score within this many dB of the best lambda.
inline constexpr double kLambdaToleranceDb = 0.2;

struct SuiteConfig {
  std::string name = "default";
  int train_scenes = 24;
  int train_size = 128;
  int test_scenes = 10;
  int test_size = 64;
  std::size_t samples = 60000;
  int sweeps = 40;
  int atoms = 256;
  /// Per-channel dictionaries model 16-dimensional signals; they are trained
  /// with their own, smaller budget.
  std::size_t channel_samples = 20000;
  int channel_sweeps = 20;
  int channel_atoms = 256;
  std::vector<double> lambdas{0.1, 0.01, 0.001, 0.0001, 0.0};
  AdmmConfig admm{};
  /// When false, failed checks are reported but do not fail the run.
  bool enforce_checks = true;
  int threads = 1;

  void validate() const {
    if (train_scenes < 1 || test_scenes < 2) throw ValidationError("suite needs >= 1 training and >= 2 test scenes");
    require_superpixel_dims(train_size, train_size);
    require_superpixel_dims(test_size, test_size);
    if (samples == 0 || channel_samples == 0 || sweeps < 1 || channel_sweeps < 1 || atoms < 1 || channel_atoms < 1) {
      throw ValidationError("training budget must be positive");
    }
    if (lambdas.empty()) throw ValidationError("lambda list is empty");
    bool has_default = false;
    for (double l : lambdas) {
      if (!(l >= 0.0)) throw ValidationError("lambda values must be non-negative");
      has_default = has_default || l == admm.lambda;
    }
    if (!has_default) throw ValidationError("the solver lambda must be one of the swept values");
    admm.validate();
  }
};

inline SuiteConfig default_suite() { return SuiteConfig{}; }

/// A few-second suite exercising every stage; orderings are not enforced.
inline SuiteConfig smoke_suite() {
  SuiteConfig s;
  s.name = "smoke";
  s.train_scenes = 4;
  s.train_size = 32;
  s.test_scenes = 4;
  s.test_size = 16;
  s.samples = 1500;
  s.sweeps = 3;
  s.atoms = 32;
  s.channel_samples = 800;
  s.channel_sweeps = 2;
  s.channel_atoms = 24;
  s.admm.max_iter = 8;
  s.enforce_checks = false;
  return s;
}

inline SuiteConfig suite_by_name(const std::string& name) {
  if (name == "default") return default_suite();
  if (name == "smoke") return smoke_suite();
  throw ValidationError("unknown suite '" + name + "' (expected default or smoke)");
}

/// Training scenes cycle noise / disc / noise / birefringent with varied
/// polarization and tint.
inline std::vector<SceneSpec> training_specs(const SuiteConfig& suite, std::uint64_t seed) {
  std::vector<SceneSpec> out;
  for (int s = 0; s < suite.train_scenes; ++s) {
    SceneSpec sp;
    const int k = s % 4;
    sp.kind = (k == 0 || k == 2) ? SceneKind::noise
              : k == 1           ? SceneKind::polarized_disc
                                 : SceneKind::birefringent_texture;
    sp.width = sp.height = suite.train_size;
    sp.dolp = sp.kind == SceneKind::noise ? 0.0 : 0.3 + 0.1 * (s % 6);
    sp.aop_deg = (37 * s) % 180;
    sp.seed = seed + 5000 + static_cast<std::uint64_t>(s);
    sp.chroma = {0.6 + 0.05 * (s % 8), 0.7 + 0.04 * (s % 7), 0.5 + 0.06 * (s % 9)};
    out.push_back(sp);
  }
  return out;
}

/// Test scenes: the first half unpolarized noise, the rest alternating
/// polarized disc and birefringent texture.
inline std::vector<SceneSpec> test_specs(const SuiteConfig& suite, std::uint64_t seed) {
  std::vector<SceneSpec> out;
  const int half = suite.test_scenes / 2;
  for (int s = 0; s < suite.test_scenes; ++s) {
    SceneSpec sp;
    sp.width = sp.height = suite.test_size;
    if (s < half) {
      sp.kind = SceneKind::noise;
      sp.dolp = 0.0;
    } else {
      sp.kind = (s - half) % 2 == 0 ? SceneKind::polarized_disc : SceneKind::birefringent_texture;
      sp.dolp = 0.4 + 0.1 * ((s - half) % 5);
    }
    sp.aop_deg = (25 + 31 * s) % 180;
    sp.seed = seed + static_cast<std::uint64_t>(s);
    sp.chroma = {0.7 + 0.03 * (s % 10), 0.9 - 0.02 * (s % 10), 0.6 + 0.04 * (s % 10)};
    out.push_back(sp);
  }
  return out;
}

/// Lambda as printed in tables and file names: 0.1, 0.01, 0.001, 0.0001, 0.
inline std::string format_lambda(double l) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", l);
  return buf;
}

struct MethodResult {
  std::string method;
  double lambda = 0.0;
  bool has_lambda = false;
  std::vector<MetricsReport> per_scene;
  MetricsReport mean;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReproductionResult {
  SuiteConfig suite;
  std::uint64_t seed = 0;
  std::vector<SceneSpec> tests;
  std::vector<MethodResult> table1;
  std::vector<MethodResult> table2;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> timings;
  Dictionary pol;  // default-lambda dictionaries
  Dictionary rgb;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
  double timing(const std::string& stage) const {
    for (const auto& [k, v] : timings) {
      if (k == stage) return v;
    }
    throw ValidationError("no timing for stage " + stage);
  }
  const MethodResult& row(const std::string& method, double lambda) const {
    for (const auto* t : {&table1, &table2}) {
      for (const auto& r : *t) {
        if (r.method == method && (!r.has_lambda || r.lambda == lambda)) return r;
      }
    }
    throw ValidationError("no result row for " + method + " at lambda " + format_lambda(lambda));
  }
};

namespace detail {

inline MetricsReport mean_report(const std::vector<MetricsReport>& reports) {
  MetricsReport m;
  const double n = static_cast<double>(reports.size());
  for (const auto& r : reports) {
    for (int i = 0; i < kAngleCount; ++i) {
      m.psnr_per_image[i] += r.psnr_per_image[i] / n;
      m.ssim_per_image[i] += r.ssim_per_image[i] / n;
      m.ca_per_image[i] += r.ca_per_image[i] / n;
    }
    m.psnr += r.psnr / n;
    m.ssim += r.ssim / n;
    m.ca_substitute += r.ca_substitute / n;
    m.s0_psnr += r.s0_psnr / n;
    m.dolp_psnr += r.dolp_psnr / n;
    m.aop_psnr += r.aop_psnr / n;
  }
  m.metadata["scenes"] = reports.size();
  return m;
}

inline std::string table_header() { return "method,lambda," + report_csv_header() + "\n"; }

inline std::string table_row(const MethodResult& r, const MetricsReport& rep) {
  return r.method + "," + (r.has_lambda ? format_lambda(r.lambda) : std::string("")) + "," + report_csv_row(rep) +
         "\n";
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline std::string dictionary_file(const std::string& stem, double lambda) {
  return stem + "_lambda_" + format_lambda(lambda) + ".dic";
}

}  // namespace detail

/// Tabulates a result as the CSV files described at the top of this header.
inline std::string table_csv(const std::vector<MethodResult>& rows) {
  std::string out = detail::table_header();
  for (const auto& r : rows) out += detail::table_row(r, r.mean);
  return out;
}

inline std::string scenes_csv(const ReproductionResult& res) {
  std::string out = "scene,kind,method,lambda," + report_csv_header() + "\n";
  for (const auto* t : {&res.table1, &res.table2}) {
    for (const auto& r : *t) {
      for (std::size_t s = 0; s < r.per_scene.size(); ++s) {
        char id[16];
        std::snprintf(id, sizeof id, "%03zu", s);
        out += std::string(id) + "," + to_string(res.tests[s].kind) + "," + detail::table_row(r, r.per_scene[s]);
      }
    }
  }
  return out;
}

/// The ordering assertions evaluated on a finished run.
inline std::vector<CheckResult> evaluate_checks(const ReproductionResult& res) {
  std::vector<CheckResult> checks;
  const double def = res.suite.admm.lambda;
  const auto& bil = res.row("bilinear", def).mean;
  const auto& bic = res.row("bicubic", def).mean;
  const auto& joint = res.row("joint", def).mean;
  const auto& single = res.row("joint-single-dic", def).mean;
  const auto& twelve = res.row("joint-12-dics", def).mean;
  auto add = [&](const std::string& name, bool ok, double lhs, double rhs) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6f vs %.6f", lhs, rhs);
    checks.push_back({name, ok, buf});
  };
  add("joint_psnr_exceeds_bicubic_by_margin", joint.psnr >= bic.psnr + kJointMarginDb, joint.psnr,
      bic.psnr + kJointMarginDb);
  add("joint_psnr_exceeds_bilinear_by_margin", joint.psnr >= bil.psnr + kJointMarginDb, joint.psnr,
      bil.psnr + kJointMarginDb);
  add("joint_s0_psnr_at_least_bicubic", joint.s0_psnr >= bic.s0_psnr, joint.s0_psnr, bic.s0_psnr);
  add("bicubic_psnr_at_least_bilinear", bic.psnr >= bil.psnr, bic.psnr, bil.psnr);
  add("joint_beats_single_dic", joint.psnr > single.psnr, joint.psnr, single.psnr);
  add("joint_beats_12_dics", joint.psnr > twelve.psnr, joint.psnr, twelve.psnr);
  add("12_dics_worst_dictionary_mode", twelve.psnr < single.psnr && twelve.psnr < joint.psnr, twelve.psnr,
      std::min(single.psnr, joint.psnr));
  double best = -kInf;
  for (const auto& r : res.table2) {
    if (r.method == "joint") best = std::max(best, r.mean.psnr);
  }
  add("default_lambda_within_tolerance_of_best", joint.psnr >= best - kLambdaToleranceDb, joint.psnr,
      best - kLambdaToleranceDb);
  return checks;
}

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the whole experiment; writes outputs under `out_dir` when it is
/// non-empty.
inline ReproductionResult run_reproduction(const SuiteConfig& suite, std::uint64_t seed, const fs::path& out_dir,
                                           const ProgressFn& progress = {}) {
  suite.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  ReproductionResult res;
  res.suite = suite;
  res.seed = seed;
  res.tests = test_specs(suite, seed);
  const fs::path dict_dir = out_dir.empty() ? fs::path() : out_dir / "dictionaries";
  if (!out_dir.empty()) fs::create_directories(dict_dir);

  detail::Stopwatch total;
  std::vector<ImageStack> train;
  for (const auto& sp : training_specs(suite, seed)) train.push_back(synthesize_scene(sp));
  std::vector<ImageStack> truth;
  std::vector<MosaicImage> mosaics;
  for (const auto& sp : res.tests) {
    truth.push_back(synthesize_scene(sp));
    mosaics.push_back(mosaic(truth.back(), default_pattern()));
  }
  const SignalMatrix rgb_signals = extract_signals(train, SignalKind::rgb, suite.samples, seed + 1);
  const SignalMatrix pol_signals = extract_signals(train, SignalKind::pol, suite.samples, seed + 2);
  res.timings.emplace_back("scenes", total.seconds());

  auto score = [&](MethodResult& r, const std::function<ImageStack(std::size_t)>& run) {
    for (std::size_t s = 0; s < mosaics.size(); ++s) r.per_scene.push_back(evaluate(truth[s], run(s)));
    r.mean = detail::mean_report(r.per_scene);
  };

  {
    detail::Stopwatch sw;
    MethodResult bil{"bilinear"};
    score(bil, [&](std::size_t s) { return bilinear_demosaic(mosaics[s]).clamped(); });
    MethodResult bic{"bicubic"};
    score(bic, [&](std::size_t s) { return bicubic_demosaic(mosaics[s]).clamped(); });
    res.table1.push_back(std::move(bil));
    res.table1.push_back(std::move(bic));
    res.timings.emplace_back("baselines", sw.seconds());
    say("baselines done");
  }

  KsvdOptions ko;
  ko.atoms = suite.atoms;
  ko.sparsity = suite.admm.sparsity;
  ko.sweeps = suite.sweeps;
  ko.seed = seed;
  ko.threads = suite.threads;
  AdmmConfig cfg = suite.admm;
  cfg.threads = suite.threads;

  // The default lambda runs first so the table1 stage can be timed on its own.
  std::vector<double> order{suite.admm.lambda};
  for (double l : suite.lambdas) {
    if (l != suite.admm.lambda) order.push_back(l);
  }
  std::vector<MethodResult> sweep;
  for (double lambda : order) {
    detail::Stopwatch train_sw;
    ko.lambda = lambda;
    Dictionary rgb = train_dictionary(rgb_signals, ko).dictionary;
    Dictionary pol = train_dictionary(pol_signals, ko).dictionary;
    const double train_s = train_sw.seconds();
    if (!out_dir.empty()) {
      save_dictionary(rgb, (dict_dir / detail::dictionary_file("rgb", lambda)).string());
      save_dictionary(pol, (dict_dir / detail::dictionary_file("pol", lambda)).string());
    }
    detail::Stopwatch run_sw;
    cfg.lambda = lambda;
    MethodResult r{"joint", lambda, true};
    score(r, [&](std::size_t s) { return demosaic(mosaics[s], pol, rgb, cfg).rc; });
    res.timings.emplace_back("train_lambda_" + format_lambda(lambda), train_s);
    res.timings.emplace_back("joint_lambda_" + format_lambda(lambda), run_sw.seconds());
    say("lambda " + format_lambda(lambda) + ": joint PSNR " + format_metric(r.mean.psnr) + " dB");
    if (lambda == suite.admm.lambda) {
      res.rgb = std::move(rgb);
      res.pol = std::move(pol);
      MethodResult t1 = r;
      t1.has_lambda = false;
      res.table1.push_back(std::move(t1));
    }
    sweep.push_back(std::move(r));
  }
  for (double lambda : suite.lambdas) {
    for (auto& r : sweep) {
      if (r.lambda == lambda) res.table2.push_back(r);
    }
  }

  cfg.lambda = suite.admm.lambda;
  {
    detail::Stopwatch sw;
    DictionarySet set;
    set.rgb = res.rgb;
    AdmmConfig c = cfg;
    c.mode = DictionaryMode::single_dic;
    MethodResult r{"joint-single-dic", cfg.lambda, true};
    score(r, [&](std::size_t s) { return demosaic_variant(mosaics[s], set, c).rc; });
    res.timings.emplace_back("single_dic", sw.seconds());
    say("single-dic: PSNR " + format_metric(r.mean.psnr) + " dB");
    res.table2.push_back(std::move(r));
  }
  {
    detail::Stopwatch sw;
    DictionarySet set;
    KsvdOptions kc = ko;
    kc.lambda = cfg.lambda;
    kc.atoms = suite.channel_atoms;
    kc.sweeps = suite.channel_sweeps;
    for (const auto id : all_channels()) {
      ExtractOptions eo;
      eo.channel = id;
      const auto sig = extract_signals(train, SignalKind::channel, suite.channel_samples,
                                       seed + 100 + static_cast<std::uint64_t>(id.index()), eo);
      Dictionary d = train_dictionary(sig, kc).dictionary;
      d.meta.channel = id;
      if (!out_dir.empty()) {
        save_dictionary(d, (dict_dir / detail::dictionary_file("channel_" + channel_name(id), cfg.lambda)).string());
      }
      set.channels.push_back(std::move(d));
    }
    const double train_s = sw.seconds();
    detail::Stopwatch run_sw;
    AdmmConfig c = cfg;
    c.mode = DictionaryMode::per_channel_12_dics;
    MethodResult r{"joint-12-dics", cfg.lambda, true};
    score(r, [&](std::size_t s) { return demosaic_variant(mosaics[s], set, c).rc; });
    res.timings.emplace_back("train_12_dics", train_s);
    res.timings.emplace_back("joint_12_dics", run_sw.seconds());
    say("12-dics: PSNR " + format_metric(r.mean.psnr) + " dB");
    res.table2.push_back(std::move(r));
  }
  res.timings.emplace_back("total", total.seconds());

  res.checks = evaluate_checks(res);

  if (!out_dir.empty()) {
    write_text(out_dir / "table1.csv", table_csv(res.table1));
    write_text(out_dir / "table2.csv", table_csv(res.table2));
    write_text(out_dir / "scenes.csv", scenes_csv(res));
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : res.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    write_json(out_dir / "checks.json", checks);
    nlohmann::ordered_json timings;
    for (const auto& [k, v] : res.timings) timings[k] = v;
    write_json(out_dir / "timings.json", timings);

    RunConfig rc;
    rc.command = "reproduce";
    rc.method = "all";
    rc.seed = seed;
    rc.output_dir = out_dir.string();
    rc.parameters["suite"] = suite.name;
    rc.parameters["train_scenes"] = suite.train_scenes;
    rc.parameters["train_size"] = suite.train_size;
    rc.parameters["test_scenes"] = suite.test_scenes;
    rc.parameters["test_size"] = suite.test_size;
    rc.parameters["samples"] = suite.samples;
    rc.parameters["sweeps"] = suite.sweeps;
    rc.parameters["atoms"] = suite.atoms;
    rc.parameters["channel_samples"] = suite.channel_samples;
    rc.parameters["channel_sweeps"] = suite.channel_sweeps;
    rc.parameters["channel_atoms"] = suite.channel_atoms;
    rc.parameters["lambdas"] = suite.lambdas;
    rc.parameters["enforce_checks"] = suite.enforce_checks;
    rc.parameters["threads"] = suite.threads;
    rc.parameters["admm"] = to_json(suite.admm);
    write_run_config(out_dir, rc);
  }
  return res;
}

}  // namespace pcfa

#endif  // PCFA_REPRODUCE_HPP
