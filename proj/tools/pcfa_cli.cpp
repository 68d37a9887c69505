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

// pcfa: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 reproduction check failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "pcfa/pcfa.hpp"

namespace {

using namespace pcfa;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthArgs {
  std::string scene = "polarized-disc";
  std::uint64_t seed = 0;
  std::string size = "128x128";
  double intensity = 0.8;
  double dolp = 0.5;
  double aop = 30.0;
  std::vector<double> chroma{0.8, 0.7, 0.6};
  std::string out;
};

struct MosaicArgs {
  std::string scene;
  std::string pattern = "imx250myr";
  std::string out;
};

struct TrainArgs {
  std::vector<std::string> data;
  int atoms = 256;
  int patch = 4;
  std::size_t samples = 60000;
  int sweeps = 40;
  int sparsity = 8;
  double lambda = 1e-4;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_pol;
  std::string out_rgb;
  std::string out_channels;
  std::size_t channel_samples = 20000;
  int channel_sweeps = 20;
};

struct DemosaicArgs {
  std::string mosaic;
  std::string method = "joint";
  std::string dict_pol;
  std::string dict_rgb;
  std::string dict_channels;
  std::string coder = "omp";
  AdmmConfig cfg;
  std::string out;
};

struct MetricsArgs {
  std::string ref;
  std::string test;
  std::string out;
  std::string csv;
};

struct ReproduceArgs {
  std::string suite = "default";
  std::string out = "reproduce_out";
  std::uint64_t seed = 0;
  int threads = 1;
};

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("--size expects WxH, got '" + s + "'");
  try {
    std::size_t used_w = 0;
    std::size_t used_h = 0;
    const int w = std::stoi(s.substr(0, x), &used_w);
    const int h = std::stoi(s.substr(x + 1), &used_h);
    if (used_w != x || used_h != s.size() - x - 1) throw UsageError("--size expects WxH, got '" + s + "'");
    return {w, h};
  } catch (const std::logic_error&) {
    throw UsageError("--size expects WxH, got '" + s + "'");
  }
}

std::string channel_dictionary_file(ChannelId id) { return "channel_" + channel_name(id) + ".dic"; }

fs::path output_dir_of(const fs::path& file) {
  return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

// Expands each --data argument into scene directories: a directory holding
// channel files is a scene; otherwise its immediate subdirectories are.
std::vector<fs::path> scene_dirs(const std::vector<std::string>& data) {
  std::vector<fs::path> out;
  for (const auto& d : data) {
    const fs::path p(d);
    if (!fs::is_directory(p)) throw ValidationError(d + " is not a directory");
    if (fs::exists(p / channel_file_name(all_channels()[0]))) {
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_directory()) subs.push_back(e.path());
    }
    std::sort(subs.begin(), subs.end());
    if (subs.empty()) throw ValidationError(d + " contains no scene directories");
    out.insert(out.end(), subs.begin(), subs.end());
  }
  return out;
}

int run_synth(const SynthArgs& a) {
  const auto [w, h] = parse_size(a.size);
  if (a.chroma.size() != 3) throw UsageError("--chroma expects three values");
  SceneSpec spec;
  spec.kind = scene_kind_from_string(a.scene);
  spec.width = w;
  spec.height = h;
  spec.intensity = a.intensity;
  spec.dolp = a.dolp;
  spec.aop_deg = a.aop;
  spec.chroma = {a.chroma[0], a.chroma[1], a.chroma[2]};
  spec.seed = a.seed;
  spec.validate();
  write_scene(a.out, synthesize_scene(spec), spec);
  RunConfig rc;
  rc.command = "synth";
  rc.seed = a.seed;
  rc.output_dir = a.out;
  rc.parameters["scene"] = to_json(spec);
  write_run_config(a.out, rc);
  std::cout << "wrote scene " << a.out << " (" << group_tag(spec) << ")\n";
  return kExitOk;
}

int run_mosaic(const MosaicArgs& a) {
  const auto pattern = pattern_by_name(a.pattern);
  const auto stack = read_scene(a.scene);
  write_mosaic(a.out, mosaic(stack, pattern));
  RunConfig rc;
  rc.command = "mosaic";
  rc.output_dir = output_dir_of(a.out).string();
  rc.paths["scene"] = a.scene;
  rc.paths["mosaic"] = a.out;
  rc.parameters["pattern"] = pattern.name();
  write_run_config(output_dir_of(a.out), rc);
  std::cout << "wrote mosaic " << a.out << "\n";
  return kExitOk;
}

void report_training(const std::string& label, const KsvdResult& r) {
  for (const auto& w : r.warnings) std::cerr << "warning: " << label << ": " << w << "\n";
  if (!r.trace.empty()) {
    std::printf("%s: final objective %.9e (fit %.9e, l1 %.9e)\n", label.c_str(), r.trace.back().objective,
                r.trace.back().fit, r.trace.back().l1);
  }
}

int run_train(const TrainArgs& a) {
  if (a.out_pol.empty() || a.out_rgb.empty()) throw UsageError("train needs --out-pol and --out-rgb");
  std::vector<ImageStack> stacks;
  for (const auto& d : scene_dirs(a.data)) stacks.push_back(read_scene(d));
  ExtractOptions eo;
  eo.patch = a.patch;
  KsvdOptions ko;
  ko.atoms = a.atoms;
  ko.sparsity = a.sparsity;
  ko.sweeps = a.sweeps;
  ko.lambda = a.lambda;
  ko.seed = a.seed;
  ko.threads = a.threads;

  const auto rgb = train_dictionary(extract_signals(stacks, SignalKind::rgb, a.samples, a.seed + 1, eo), ko);
  report_training("rgb", rgb);
  const auto pol = train_dictionary(extract_signals(stacks, SignalKind::pol, a.samples, a.seed + 2, eo), ko);
  report_training("pol", pol);
  for (const auto* p : {&a.out_rgb, &a.out_pol}) {
    if (fs::path(*p).has_parent_path()) fs::create_directories(fs::path(*p).parent_path());
  }
  save_dictionary(rgb.dictionary, a.out_rgb);
  save_dictionary(pol.dictionary, a.out_pol);
  std::printf("D_rgb: %ld x %ld -> %s\nD_pol: %ld x %ld -> %s\n", rgb.dictionary.rows(), rgb.dictionary.size(),
              a.out_rgb.c_str(), pol.dictionary.rows(), pol.dictionary.size(), a.out_pol.c_str());

  if (!a.out_channels.empty()) {
    fs::create_directories(a.out_channels);
    KsvdOptions kc = ko;
    kc.sweeps = a.channel_sweeps;
    for (const auto id : all_channels()) {
      ExtractOptions ec = eo;
      ec.channel = id;
      auto r = train_dictionary(extract_signals(stacks, SignalKind::channel, a.channel_samples,
                                                a.seed + 100 + static_cast<std::uint64_t>(id.index()), ec),
                                kc);
      r.dictionary.meta.channel = id;
      report_training(channel_name(id), r);
      save_dictionary(r.dictionary, (fs::path(a.out_channels) / channel_dictionary_file(id)).string());
    }
  }

  RunConfig rc;
  rc.command = "train";
  rc.seed = a.seed;
  rc.output_dir = output_dir_of(a.out_rgb).string();
  rc.paths["data"] = a.data;
  rc.paths["out_rgb"] = a.out_rgb;
  rc.paths["out_pol"] = a.out_pol;
  if (!a.out_channels.empty()) rc.paths["out_channels"] = a.out_channels;
  rc.parameters["atoms"] = a.atoms;
  rc.parameters["patch"] = a.patch;
  rc.parameters["samples"] = a.samples;
  rc.parameters["sweeps"] = a.sweeps;
  rc.parameters["sparsity"] = a.sparsity;
  rc.parameters["lambda"] = a.lambda;
  rc.parameters["threads"] = a.threads;
  if (!a.out_channels.empty()) {
    rc.parameters["channel_samples"] = a.channel_samples;
    rc.parameters["channel_sweeps"] = a.channel_sweeps;
  }
  write_run_config(output_dir_of(a.out_rgb), rc);
  return kExitOk;
}

int run_demosaic(DemosaicArgs a) {
  const auto m = read_mosaic(a.mosaic);
  RunConfig rc;
  rc.command = "demosaic";
  rc.method = a.method;
  rc.output_dir = a.out;
  rc.paths["mosaic"] = a.mosaic;

  ImageStack out;
  std::optional<DemosaicResult> result;
  if (a.method == "bilinear" || a.method == "bicubic") {
    out = (a.method == "bilinear" ? bilinear_demosaic(m) : bicubic_demosaic(m)).clamped();
  } else {
    DictionarySet set;
    if (a.method == "joint") {
      a.cfg.mode = DictionaryMode::joint_two_dics;
      if (a.dict_pol.empty() || a.dict_rgb.empty()) {
        throw UsageError("--method joint requires --dict-pol and --dict-rgb");
      }
      set.pol = load_dictionary(a.dict_pol);
      set.rgb = load_dictionary(a.dict_rgb);
      rc.paths["dict_pol"] = a.dict_pol;
      rc.paths["dict_rgb"] = a.dict_rgb;
    } else if (a.method == "joint-single-dic") {
      a.cfg.mode = DictionaryMode::single_dic;
      if (a.dict_rgb.empty()) throw UsageError("--method joint-single-dic requires --dict-rgb");
      set.rgb = load_dictionary(a.dict_rgb);
      rc.paths["dict_rgb"] = a.dict_rgb;
    } else if (a.method == "joint-12-dics") {
      a.cfg.mode = DictionaryMode::per_channel_12_dics;
      if (a.dict_channels.empty()) throw UsageError("--method joint-12-dics requires --dict-channels");
      for (const auto id : all_channels()) {
        set.channels.push_back(load_dictionary((fs::path(a.dict_channels) / channel_dictionary_file(id)).string()));
      }
      rc.paths["dict_channels"] = a.dict_channels;
    } else {
      throw UsageError("unknown method '" + a.method + "'");
    }
    a.cfg.coder = coder_kind_from_string(a.coder);
    a.cfg.validate();
    result = demosaic_variant(m, set, a.cfg);
    out = result->rc;
    rc.parameters = to_json(a.cfg);
  }

  write_scene(a.out, out);
  if (result) {
    write_text(fs::path(a.out) / "trace.csv", trace_csv(result->trace));
    rc.parameters["converged"] = result->converged;
    rc.parameters["iterations"] = result->iterations;
    std::printf("%s after %d iterations\n", result->converged ? "converged" : "stopped at the iteration cap",
                result->iterations);
  }
  write_run_config(a.out, rc);
  std::cout << "wrote " << a.out << "\n";
  return kExitOk;
}

int run_metrics(const MetricsArgs& a) {
  const auto ref = read_scene(a.ref);
  const auto test = read_scene(a.test);
  MetricsReport r = evaluate(ref, test);
  r.metadata["ref"] = a.ref;
  r.metadata["test"] = a.test;
  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_json(out, to_json(r));
  if (!a.csv.empty()) write_text(a.csv, report_csv_header() + "\n" + report_csv_row(r) + "\n");
  RunConfig rc;
  rc.command = "metrics";
  rc.output_dir = output_dir_of(out).string();
  rc.paths["ref"] = a.ref;
  rc.paths["test"] = a.test;
  rc.paths["report"] = a.out;
  if (!a.csv.empty()) rc.paths["csv"] = a.csv;
  write_run_config(output_dir_of(out), rc);
  std::cout << report_csv_header() << "\n" << report_csv_row(r) << "\n";
  return kExitOk;
}

int run_reproduce(const ReproduceArgs& a) {
  SuiteConfig suite = suite_by_name(a.suite);
  suite.threads = a.threads;
  const auto res = run_reproduction(suite, a.seed, a.out, [](const std::string& msg) { std::cerr << msg << "\n"; });
  std::cout << table_csv(res.table1) << "\n" << table_csv(res.table2) << "\n";
  for (const auto& c : res.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
  }
  if (!res.all_passed()) {
    if (suite.enforce_checks) {
      std::cerr << "reproduction checks failed\n";
      return kExitCheck;
    }
    std::cerr << "note: checks are not enforced for the " << suite.name << " suite\n";
  }
  return kExitOk;
}

void add_admm_flags(CLI::App* cmd, DemosaicArgs& a) {
  cmd->add_option("--max-iter", a.cfg.max_iter, "iteration cap")->capture_default_str();
  cmd->add_option("--eps", a.cfg.eps, "stopping threshold on multiplier change")->capture_default_str();
  cmd->add_option("--rho-pol", a.cfg.rho_pol, "polarimetric penalty")->capture_default_str();
  cmd->add_option("--rho-rgb", a.cfg.rho_rgb, "chromatic penalty")->capture_default_str();
  cmd->add_option("--lambda", a.cfg.lambda, "sparsity weight")->capture_default_str();
  cmd->add_option("--coder", a.coder, "omp or omp+alm")->capture_default_str();
  cmd->add_option("--alm-lambda", a.cfg.alm_lambda, "sparse-error weight of the low-rank coder")
      ->capture_default_str();
  cmd->add_option("--patch-stride", a.cfg.patch_stride, "patch grid stride")->capture_default_str();
  cmd->add_option("--sparsity", a.cfg.sparsity, "atoms per patch")->capture_default_str();
  cmd->add_option("--fidelity-weight", a.cfg.fidelity_weight, "weight of the sampled values")
      ->capture_default_str();
  cmd->add_option("--coupling-weight", a.cfg.coupling_weight, "polarimetric/chromatic coupling")
      ->capture_default_str();
  cmd->add_option("--prior-weight", a.cfg.prior_weight, "weight of the dictionary prior")->capture_default_str();
  cmd->add_option("--threads", a.cfg.threads, "worker threads")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint chromatic and polarimetric demosaicing"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic scene directory");
  s->add_option("--scene", synth.scene, "constant|gradient|polarized-disc|birefringent-texture|noise")
      ->capture_default_str();
  s->add_option("--seed", synth.seed)->capture_default_str();
  s->add_option("--size", synth.size, "WxH, multiples of 4")->capture_default_str();
  s->add_option("--intensity", synth.intensity)->capture_default_str();
  s->add_option("--dolp", synth.dolp)->capture_default_str();
  s->add_option("--aop", synth.aop, "degrees")->capture_default_str();
  s->add_option("--chroma", synth.chroma, "r,g,b")->delimiter(',')->expected(3);
  s->add_option("--out", synth.out)->required();

  MosaicArgs mos;
  auto* mo = app.add_subcommand("mosaic", "sample a scene through the filter array");
  mo->add_option("--scene", mos.scene)->required();
  mo->add_option("--pattern", mos.pattern)->capture_default_str();
  mo->add_option("--out", mos.out, "mosaic PNG path")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "learn the polarimetric and chromatic dictionaries");
  t->add_option("--data", train.data, "scene directories or directories of scenes")->required();
  t->add_option("--atoms", train.atoms)->capture_default_str();
  t->add_option("--patch", train.patch)->capture_default_str();
  t->add_option("--samples", train.samples)->capture_default_str();
  t->add_option("--sweeps", train.sweeps)->capture_default_str();
  t->add_option("--sparsity", train.sparsity)->capture_default_str();
  t->add_option("--lambda", train.lambda)->capture_default_str();
  t->add_option("--seed", train.seed)->capture_default_str();
  t->add_option("--threads", train.threads)->capture_default_str();
  t->add_option("--out-pol", train.out_pol)->required();
  t->add_option("--out-rgb", train.out_rgb)->required();
  t->add_option("--out-channels", train.out_channels, "also train 12 per-channel dictionaries into this directory");
  t->add_option("--channel-samples", train.channel_samples)->capture_default_str();
  t->add_option("--channel-sweeps", train.channel_sweeps)->capture_default_str();

  DemosaicArgs dem;
  auto* d = app.add_subcommand("demosaic", "reconstruct the 12 channels of a mosaic");
  d->add_option("--mosaic", dem.mosaic)->required();
  d->add_option("--method", dem.method, "bilinear|bicubic|joint|joint-single-dic|joint-12-dics")
      ->capture_default_str();
  d->add_option("--dict-pol", dem.dict_pol);
  d->add_option("--dict-rgb", dem.dict_rgb);
  d->add_option("--dict-channels", dem.dict_channels, "directory of per-channel dictionaries");
  d->add_option("--out", dem.out)->required();
  add_admm_flags(d, dem);

  MetricsArgs met;
  auto* me = app.add_subcommand("metrics", "compare a reconstruction with its reference");
  me->add_option("--ref", met.ref)->required();
  me->add_option("--test", met.test)->required();
  me->add_option("--out", met.out, "report JSON path")->required();
  me->add_option("--csv", met.csv, "optional CSV row path");

  ReproduceArgs rep;
  auto* r = app.add_subcommand("reproduce", "run the controlled experiments on a synthetic suite");
  r->add_option("--suite", rep.suite, "default|smoke")->capture_default_str();
  r->add_option("--out", rep.out)->capture_default_str();
  r->add_option("--seed", rep.seed)->capture_default_str();
  r->add_option("--threads", rep.threads)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*s) return run_synth(synth);
    if (*mo) return run_mosaic(mos);
    if (*t) return run_train(train);
    if (*d) return run_demosaic(dem);
    if (*me) return run_metrics(met);
    if (*r) return run_reproduce(rep);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
