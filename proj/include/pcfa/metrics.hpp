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

// Image-quality and polarimetric metrics.
//
// Full-stack metrics follow a per-image protocol: the 12 channels form four
// RGB images (one per polarizer angle), each image is scored separately and
// the four scores are averaged. Polarimetric maps are derived from the
// per-angle color average.

#ifndef PCFA_METRICS_HPP
#define PCFA_METRICS_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcfa/core.hpp"
#include "pcfa/mosaic.hpp"

namespace pcfa {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDivisionEpsilon = 1e-8;
/// Mean squared errors at or below this are reported as a perfect match.
inline constexpr double kZeroMse = 1e-24;

namespace detail {

inline void require_same_shape(const Plane& a, const Plane& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ValidationError("planes differ in shape");
  if (a.size() == 0) throw ValidationError("planes are empty");
}

inline void require_matched(const ImageStack& a, const ImageStack& b) {
  if (a.kind() != b.kind() || a.channel_count() != b.channel_count() || a.width() != b.width() ||
      a.height() != b.height()) {
    throw ValidationError("stacks differ in kind or shape");
  }
}

inline double psnr_from_mse(double mse, double peak) {
  if (mse <= 0.0) return kInf;
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace detail

/// 10 log10(peak^2 / MSE); identical planes give +infinity.
inline double psnr(const Plane& ref, const Plane& test, double peak = 1.0) {
  detail::require_same_shape(ref, test);
  return detail::psnr_from_mse((ref - test).square().mean(), peak);
}

/// PSNR pooled over several plane pairs (one MSE over all of them).
inline double psnr(const std::vector<const Plane*>& ref, const std::vector<const Plane*>& test,
                   double peak = 1.0) {
  if (ref.size() != test.size() || ref.empty()) throw ValidationError("plane lists differ");
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    detail::require_same_shape(*ref[i], *test[i]);
    sum += (*ref[i] - *test[i]).square().sum();
    count += static_cast<double>(ref[i]->size());
  }
  return detail::psnr_from_mse(sum / count, peak);
}

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::vector<double> gaussian_taps(int size, double sigma) {
  std::vector<double> taps(static_cast<std::size_t>(size));
  const double center = 0.5 * (size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    taps[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

namespace detail {

/// Separable "valid" filtering: output is (rows - n + 1) x (cols - n + 1).
inline Plane filter_valid(const Plane& in, const std::vector<double>& taps) {
  const long n = static_cast<long>(taps.size());
  const long rows = in.rows() - n + 1;
  const long cols = in.cols() - n + 1;
  Plane horizontal = Plane::Zero(in.rows(), cols);
  for (long k = 0; k < n; ++k) horizontal += taps[static_cast<std::size_t>(k)] * in.middleCols(k, cols);
  Plane out = Plane::Zero(rows, cols);
  for (long k = 0; k < n; ++k) out += taps[static_cast<std::size_t>(k)] * horizontal.middleRows(k, rows);
  return out;
}

}  // namespace detail

/// Mean of the local SSIM map over every fully contained window position.
inline double ssim(const Plane& ref, const Plane& test, const SsimOptions& opt = {}) {
  detail::require_same_shape(ref, test);
  if (ref.rows() < opt.window || ref.cols() < opt.window) {
    throw ValidationError("image smaller than the SSIM window");
  }
  const auto taps = gaussian_taps(opt.window, opt.sigma);
  const double c1 = std::pow(opt.k1 * opt.dynamic_range, 2);
  const double c2 = std::pow(opt.k2 * opt.dynamic_range, 2);
  const Plane mx = detail::filter_valid(ref, taps);
  const Plane my = detail::filter_valid(test, taps);
  const Plane sxx = detail::filter_valid(ref * ref, taps) - mx * mx;
  const Plane syy = detail::filter_valid(test * test, taps) - my * my;
  const Plane sxy = detail::filter_valid(ref * test, taps) - mx * my;
  const Plane map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
  return map.mean();
}

// --- Polarimetric maps -------------------------------------------------------

struct StokesMap {
  Plane s0, s1, s2;
  std::string convention = "S0=(I0+I45+I90+I135)/2, S1=I0-I90, S2=I45-I135";
};

inline StokesMap stokes(const ImageStack& angles) {
  if (angles.kind() != StackKind::polarimetric || angles.channel_count() != kAngleCount) {
    throw ValidationError("Stokes parameters need the four angle planes");
  }
  const Plane& i0 = angles[Angle::A0];
  const Plane& i45 = angles[Angle::A45];
  const Plane& i90 = angles[Angle::A90];
  const Plane& i135 = angles[Angle::A135];
  StokesMap s;
  s.s0 = 0.5 * (i0 + i45 + i90 + i135);
  s.s1 = i0 - i90;
  s.s2 = i45 - i135;
  return s;
}

/// Stokes maps of a 12-channel stack via the per-angle color average.
inline StokesMap stokes_of(const ImageStack& chromatic) { return stokes(angle_average(chromatic)); }

inline Plane dolp(const StokesMap& s) {
  const Plane mag = (s.s1.square() + s.s2.square()).sqrt();
  return (mag / s.s0.max(kDivisionEpsilon)).min(1.0).max(0.0);
}

struct AopMap {
  Plane degrees;           // in [0, 180)
  MaskPlane degenerate;    // 1 where the polarized part vanishes; degrees is 0 there
};

inline double aop_degrees(double s1, double s2) {
  double a = 0.5 * std::atan2(s2, s1) * 180.0 / std::numbers::pi;
  if (a < 0.0) a += 180.0;
  if (a >= 180.0) a -= 180.0;
  return a + 0.0;  // folds -0 into +0
}

inline AopMap aop(const StokesMap& s) {
  AopMap out{Plane::Zero(s.s1.rows(), s.s1.cols()), MaskPlane::Zero(s.s1.rows(), s.s1.cols())};
  for (long r = 0; r < s.s1.rows(); ++r) {
    for (long c = 0; c < s.s1.cols(); ++c) {
      if (std::hypot(s.s1(r, c), s.s2(r, c)) <= kDivisionEpsilon) {
        out.degenerate(r, c) = 1;
      } else {
        out.degrees(r, c) = aop_degrees(s.s1(r, c), s.s2(r, c));
      }
    }
  }
  return out;
}

/// Difference of two angles of polarization folded into [-90, 90].
inline double wrapped_aop_difference(double a, double b) {
  double d = std::fmod(a - b, 180.0);
  if (d > 90.0) d -= 180.0;
  if (d < -90.0) d += 180.0;
  return d;
}

inline double aop_psnr(const Plane& ref_deg, const Plane& test_deg) {
  detail::require_same_shape(ref_deg, test_deg);
  double sum = 0.0;
  for (long i = 0; i < ref_deg.size(); ++i) {
    const double d = wrapped_aop_difference(ref_deg.data()[i], test_deg.data()[i]);
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(ref_deg.size());
  return mse <= kZeroMse ? kInf : detail::psnr_from_mse(mse, 180.0);
}

// --- Color accuracy substitute ---------------------------------------------

/// (r, g) chromaticity of one angle image; neutral (1/3, 1/3) where the
/// channel sum is below the division guard.
inline std::array<Plane, 2> chromaticity(const ImageStack& stack, Angle a) {
  const Plane& r = stack[ChannelId{Color::R, a}];
  const Plane& g = stack[ChannelId{Color::G, a}];
  const Plane& b = stack[ChannelId{Color::B, a}];
  const Plane sum = r + g + b;
  const auto dark = sum < kDivisionEpsilon;
  const Plane safe = dark.select(Plane::Ones(sum.rows(), sum.cols()), sum);
  const Plane third = Plane::Constant(sum.rows(), sum.cols(), 1.0 / 3.0);
  return {dark.select(third, r / safe), dark.select(third, g / safe)};
}

/// Chromaticity PSNR (peak 1) averaged over the four angle images, labeled
/// "CA-substitute" in reports.
inline double ca_substitute(const ImageStack& ref, const ImageStack& test) {
  detail::require_matched(ref, test);
  if (ref.kind() != StackKind::chromatic) throw ValidationError("CA-substitute needs 12-channel stacks");
  double total = 0.0;
  for (const auto a : kAngles) {
    const auto cr = chromaticity(ref, a);
    const auto ct = chromaticity(test, a);
    const double mse = 0.5 * ((cr[0] - ct[0]).square().mean() + (cr[1] - ct[1]).square().mean());
    total += mse <= kZeroMse ? kInf : detail::psnr_from_mse(mse, 1.0);
  }
  return total / kAngleCount;
}

// --- Report -------------------------------------------------------------------

struct MetricsReport {
  std::array<double, kAngleCount> psnr_per_image{};
  std::array<double, kAngleCount> ssim_per_image{};
  std::array<double, kAngleCount> ca_per_image{};
  double psnr = 0.0;
  double ssim = 0.0;
  double ca_substitute = 0.0;
  double s0_psnr = 0.0;
  double dolp_psnr = 0.0;
  double aop_psnr = 0.0;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  friend bool operator==(const MetricsReport& a, const MetricsReport& b) {
    auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    for (int i = 0; i < kAngleCount; ++i) {
      if (!same(a.psnr_per_image[i], b.psnr_per_image[i]) || !same(a.ssim_per_image[i], b.ssim_per_image[i]) ||
          !same(a.ca_per_image[i], b.ca_per_image[i])) {
        return false;
      }
    }
    return same(a.psnr, b.psnr) && same(a.ssim, b.ssim) && same(a.ca_substitute, b.ca_substitute) &&
           same(a.s0_psnr, b.s0_psnr) && same(a.dolp_psnr, b.dolp_psnr) && same(a.aop_psnr, b.aop_psnr) &&
           a.metadata == b.metadata;
  }
};

inline MetricsReport evaluate(const ImageStack& ref, const ImageStack& test, const SsimOptions& ssim_opt = {}) {
  detail::require_matched(ref, test);
  if (ref.kind() != StackKind::chromatic) throw ValidationError("evaluation needs 12-channel stacks");
  MetricsReport rep;
  for (const auto a : kAngles) {
    const int i = static_cast<int>(a);
    std::vector<const Plane*> pr, pt;
    double s = 0.0;
    for (const auto c : kColors) {
      pr.push_back(&ref[ChannelId{c, a}]);
      pt.push_back(&test[ChannelId{c, a}]);
      s += ssim(ref[ChannelId{c, a}], test[ChannelId{c, a}], ssim_opt);
    }
    rep.psnr_per_image[i] = psnr(pr, pt);
    rep.ssim_per_image[i] = s / kColorCount;
    const auto cr = chromaticity(ref, a);
    const auto ct = chromaticity(test, a);
    const double mse = 0.5 * ((cr[0] - ct[0]).square().mean() + (cr[1] - ct[1]).square().mean());
    rep.ca_per_image[i] = mse <= kZeroMse ? kInf : detail::psnr_from_mse(mse, 1.0);
  }
  auto mean = [](const std::array<double, kAngleCount>& v) {
    double t = 0.0;
    for (double x : v) t += x;
    return t / kAngleCount;
  };
  rep.psnr = mean(rep.psnr_per_image);
  rep.ssim = mean(rep.ssim_per_image);
  rep.ca_substitute = mean(rep.ca_per_image);

  const StokesMap sr = stokes_of(ref);
  const StokesMap st = stokes_of(test);
  rep.s0_psnr = psnr(sr.s0, st.s0, 2.0);
  rep.dolp_psnr = psnr(dolp(sr), dolp(st), 1.0);
  rep.aop_psnr = aop_psnr(aop(sr).degrees, aop(st).degrees);
  rep.metadata["stokes_convention"] = sr.convention;
  rep.metadata["color_accuracy"] = "CA-substitute: (r,g) chromaticity PSNR";
  return rep;
}

namespace detail {

inline nlohmann::ordered_json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

inline double number_from_json(const nlohmann::ordered_json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw FormatError("unexpected metric value '" + s + "'");
  }
  if (!j.is_number()) throw FormatError("metric value is not a number");
  return j.get<double>();
}

inline nlohmann::ordered_json family_json(double mean, const std::array<double, kAngleCount>& per) {
  nlohmann::ordered_json j;
  j["mean"] = number_json(mean);
  nlohmann::ordered_json images = nlohmann::ordered_json::object();
  for (const auto a : kAngles) images[angle_tag(a)] = number_json(per[static_cast<int>(a)]);
  j["per_image"] = images;
  return j;
}

inline void family_from_json(const nlohmann::ordered_json& j, double& mean, std::array<double, kAngleCount>& per) {
  mean = number_from_json(j.at("mean"));
  for (const auto a : kAngles) per[static_cast<int>(a)] = number_from_json(j.at("per_image").at(angle_tag(a)));
}

}  // namespace detail

/// JSON with keys psnr, ssim, ca_substitute, s0_psnr, dolp_psnr, aop_psnr
/// and metadata. Infinite values are written as the string "inf".
inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["psnr"] = detail::family_json(r.psnr, r.psnr_per_image);
  j["ssim"] = detail::family_json(r.ssim, r.ssim_per_image);
  j["ca_substitute"] = detail::family_json(r.ca_substitute, r.ca_per_image);
  j["s0_psnr"] = detail::number_json(r.s0_psnr);
  j["dolp_psnr"] = detail::number_json(r.dolp_psnr);
  j["aop_psnr"] = detail::number_json(r.aop_psnr);
  j["metadata"] = r.metadata;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::ordered_json& j) {
  try {
    MetricsReport r;
    detail::family_from_json(j.at("psnr"), r.psnr, r.psnr_per_image);
    detail::family_from_json(j.at("ssim"), r.ssim, r.ssim_per_image);
    detail::family_from_json(j.at("ca_substitute"), r.ca_substitute, r.ca_per_image);
    r.s0_psnr = detail::number_from_json(j.at("s0_psnr"));
    r.dolp_psnr = detail::number_from_json(j.at("dolp_psnr"));
    r.aop_psnr = detail::number_from_json(j.at("aop_psnr"));
    r.metadata = j.at("metadata");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metrics report: ") + e.what());
  }
}

inline std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string report_csv_header() { return "psnr,ssim,ca_substitute,s0_psnr,dolp_psnr,aop_psnr"; }

inline std::string report_csv_row(const MetricsReport& r) {
  return format_metric(r.psnr) + "," + format_metric(r.ssim) + "," + format_metric(r.ca_substitute) + "," +
         format_metric(r.s0_psnr) + "," + format_metric(r.dolp_psnr) + "," + format_metric(r.aop_psnr);
}

}  // namespace pcfa

#endif  // PCFA_METRICS_HPP
