// Copyright 2026 The Dualrail Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/fft.hpp"
#include "dualrail/rng.hpp"
#include "dualrail/trace.hpp"

namespace dualrail {

/// One discretized recursive section, denominator normalized to a0 = 1.
/// First-order sections store b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> response(double theta) const {
    const std::complex<double> z1 = std::polar(1.0, -theta);
    const std::complex<double> z2 = z1 * z1;
    return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
  }

  bool is_stable() const {
    // Stability triangle for a0 = 1.
    return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
  }
};

/// Analog rational section kept for the record: (b2 s^2 + b1 s + b0) /
/// (a2 s^2 + a1 s + a0), plus the pre-warp anchor used to discretize it.
struct AnalogSection {
  double b2 = 0.0, b1 = 0.0, b0 = 1.0;
  double a2 = 0.0, a1 = 0.0, a0 = 1.0;
  double prewarp_hz = 0.0;
};

struct FilterSection {
  AnalogSection analog;
  Biquad digital;
  std::string label;
};

/// Cascade of recursive sections representing the detection electronics.
struct FilterChain {
  std::vector<FilterSection> sections;
  double sample_rate_hz = 0.0;

  bool empty() const { return sections.empty(); }

  std::complex<double> response_at(double f_hz) const {
    const double theta = 2.0 * M_PI * f_hz / sample_rate_hz;
    std::complex<double> h(1.0, 0.0);
    for (const auto& s : sections) h *= s.digital.response(theta);
    return h;
  }

  double power_gain(double f_hz) const { return std::norm(response_at(f_hz)); }

  double gain_db(double f_hz) const {
    const double g = std::abs(response_at(f_hz));
    return 20.0 * std::log10(g);
  }
};

enum class HighpassFamily : unsigned char { inv_chebyshev, chebyshev1, butterworth };

/// Design parameters of the three-filter cascade. The cutoff frequencies are
/// the -3 dB points for every family.
///
/// The high-pass defaults to an inverse Chebyshev (type II): its passband is
/// flat, so the impulse-response tail stays short enough to keep neighboring
/// temporal modes orthogonal, while the equiripple stopband holds both probe
/// tones at >= highpass_stopband_db rejection. A maximally-flat high-pass of
/// the same order leaves the 326 kHz tone ~14 dB short; a type I equiripple
/// one rejects it but its tail roughly doubles the inter-mode correlation.
struct FilterDesign {
  double highpass_cutoff_hz = 1.5e6;
  int highpass_order = 5;
  HighpassFamily highpass_family = HighpassFamily::inv_chebyshev;
  double highpass_ripple_db = 0.5;     // chebyshev1 only
  double highpass_stopband_db = 80.0;  // inv_chebyshev only
  double notch_hz = 32.0e6;
  double notch_stopband_db = 40.0;
  double lowpass_cutoff_hz = 40.0e6;
  int lowpass_order = 3;
};

namespace detail {

inline double prewarp_constant(double f_hz, double fs) {
  const double w = 2.0 * M_PI * f_hz;
  return w / std::tan(w / (2.0 * fs));
}

// Denominator of the bilinear image of (a2 s^2 + a1 s + a0).
struct DigitalDen {
  double a0d, a1d, a2d;
};

inline DigitalDen bilinear_den(double c1, double c0, double K) {
  return {K * K + c1 * K + c0, 2.0 * c0 - 2.0 * K * K, K * K - c1 * K + c0};
}

// High-pass pair s^2 / (s^2 + c1 s + c0). The numerator pattern g*(1,-2,1)
// keeps the DC zero exact in floating point.
inline FilterSection highpass_pair(double c1, double c0, double prewarp_hz, double fs) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const DigitalDen d = bilinear_den(c1, c0, K);
  const double g = K * K / d.a0d;
  FilterSection s;
  s.analog = {1.0, 0.0, 0.0, 1.0, c1, c0, prewarp_hz};
  s.digital = {g, -2.0 * g, g, d.a1d / d.a0d, d.a2d / d.a0d};
  s.label = "highpass";
  return s;
}

// High-pass single s / (s + c0).
inline FilterSection highpass_single(double c0, double prewarp_hz, double fs) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const double a0d = K + c0;
  const double g = K / a0d;
  FilterSection s;
  s.analog = {0.0, 1.0, 0.0, 0.0, 1.0, c0, prewarp_hz};
  s.digital = {g, -g, 0.0, (c0 - K) / a0d, 0.0};
  s.label = "highpass";
  return s;
}

// Low-pass pair c0 / (s^2 + c1 s + c0).
inline FilterSection lowpass_pair(double c1, double c0, double prewarp_hz, double fs,
                                  const char* label) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const DigitalDen d = bilinear_den(c1, c0, K);
  const double g = c0 / d.a0d;
  FilterSection s;
  s.analog = {0.0, 0.0, c0, 1.0, c1, c0, prewarp_hz};
  s.digital = {g, 2.0 * g, g, d.a1d / d.a0d, d.a2d / d.a0d};
  s.label = label;
  return s;
}

// Low-pass single c0 / (s + c0).
inline FilterSection lowpass_single(double c0, double prewarp_hz, double fs,
                                    const char* label) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const double a0d = K + c0;
  const double g = c0 / a0d;
  FilterSection s;
  s.analog = {0.0, 0.0, c0, 0.0, 1.0, c0, prewarp_hz};
  s.digital = {g, g, 0.0, (c0 - K) / a0d, 0.0};
  s.label = label;
  return s;
}

// High-pass biquad with a finite stopband zero:
// (s^2 + wz^2) / (s^2 + c1 s + c0) with unit gain at infinity; the bilinear
// image automatically has unit gain at Nyquist.
inline FilterSection highpass_notch_pair(double wz, double c1, double c0,
                                         double prewarp_hz, double fs) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const DigitalDen d = bilinear_den(c1, c0, K);
  const double b0 = (K * K + wz * wz) / d.a0d;
  const double b1 = (2.0 * wz * wz - 2.0 * K * K) / d.a0d;
  FilterSection s;
  s.analog = {1.0, 0.0, wz * wz, 1.0, c1, c0, prewarp_hz};
  s.digital = {b0, b1, b0, d.a1d / d.a0d, d.a2d / d.a0d};
  s.label = "highpass";
  return s;
}

// Notch pair (s^2 + wz^2) / (s^2 + c1 s + c0), normalized to unit DC gain.
inline FilterSection notch_pair(double wz, double c1, double c0, double prewarp_hz,
                                double fs) {
  const double K = prewarp_constant(prewarp_hz, fs);
  const DigitalDen d = bilinear_den(c1, c0, K);
  double b0 = (K * K + wz * wz) / d.a0d;
  double b1 = (2.0 * wz * wz - 2.0 * K * K) / d.a0d;
  const double a1 = d.a1d / d.a0d;
  const double a2 = d.a2d / d.a0d;
  const double dc = (2.0 * b0 + b1) / (1.0 + a1 + a2);
  b0 /= dc;
  b1 /= dc;
  FilterSection s;
  s.analog = {1.0, 0.0, wz * wz, 1.0, c1, c0, prewarp_hz};
  s.digital = {b0, b1, b0, a1, a2};
  s.label = "notch";
  return s;
}

// Butterworth prototype pair coefficients: s^2 + a1 s + 1 with
// a1 = -2 cos(pi (2m + n - 1) / (2n)), m = 1 .. n/2.
inline std::vector<double> butterworth_pair_coeffs(int order) {
  std::vector<double> a1;
  for (int m = 1; m <= order / 2; ++m) {
    a1.push_back(-2.0 * std::cos(M_PI * (2.0 * m + order - 1.0) / (2.0 * order)));
  }
  return a1;
}

// Low-pass prototype as second-order denominators (s^2 + c1 s + c0) plus an
// optional real pole for odd order, normalized so the -3 dB point is at
// w = 1.
struct LowpassPrototype {
  std::vector<std::pair<double, double>> pairs;  // (c1, c0)
  double real_pole = 0.0;                        // 0 when order is even
};

inline LowpassPrototype lowpass_prototype(int order, HighpassFamily family,
                                          double ripple_db) {
  LowpassPrototype proto;
  if (family == HighpassFamily::butterworth) {
    for (double a1 : butterworth_pair_coeffs(order)) proto.pairs.push_back({a1, 1.0});
    if (order % 2 == 1) proto.real_pole = 1.0;
    return proto;
  }
  // Chebyshev type I: poles on an ellipse; ripple edge at w = 1, then the
  // whole prototype is rescaled so the -3 dB point lands at w = 1.
  if (!(ripple_db > 0.0)) throw ConfigError("filter design: ripple must be > 0 dB");
  const double eps = std::sqrt(std::pow(10.0, ripple_db / 10.0) - 1.0);
  const double mu = std::asinh(1.0 / eps) / order;
  const double sh = std::sinh(mu), ch = std::cosh(mu);
  const double w3 = std::cosh(std::acosh(1.0 / eps) / order);  // -3 dB/ripple edge
  for (int m = 1; m <= order / 2; ++m) {
    const double theta = M_PI * (2.0 * m - 1.0) / (2.0 * order);
    const double re = -sh * std::sin(theta);
    const double im = ch * std::cos(theta);
    const double c1 = -2.0 * re / w3;
    const double c0 = (re * re + im * im) / (w3 * w3);
    proto.pairs.push_back({c1, c0});
  }
  if (order % 2 == 1) proto.real_pole = sh / w3;
  return proto;
}

}  // namespace detail

/// Designs the detection cascade discretized at sample_rate_hz:
/// an n-th order Butterworth high-pass, a 3rd-order inverse Chebyshev
/// low-pass with its transmission zero at notch_hz, and an n-th order
/// Butterworth anti-aliasing low-pass. Each filter is pre-warped at its own
/// corner so the corners land exactly on the digital grid.
inline FilterChain design_filter_chain(double sample_rate_hz,
                                       const FilterDesign& design = {}) {
  if (sample_rate_hz < 100.0e6) {
    throw ConfigError(
        "filter design: sample rate below 100 MHz cannot carry the " +
        std::to_string(design.lowpass_cutoff_hz / 1e6) + " MHz anti-aliasing corner");
  }
  if (design.highpass_order < 1 || design.lowpass_order < 1) {
    throw ConfigError("filter design: orders must be >= 1");
  }
  FilterChain chain;
  chain.sample_rate_hz = sample_rate_hz;

  // High-pass: LP prototype mapped by s -> wc/s. A prototype pole pair
  // (s^2 + c1 s + c0) becomes s^2 + (c1/c0) wc s + wc^2/c0; a real pole
  // p/(s + p) becomes s/(s + wc/p); a stopband zero at jz maps to j wc/z.
  if (design.highpass_family == HighpassFamily::inv_chebyshev) {
    const int n = design.highpass_order;
    const double rs = design.highpass_stopband_db;
    const double big_l = std::sqrt(std::pow(10.0, rs / 10.0) - 1.0);
    const double mu = std::asinh(big_l) / n;
    const double sh = std::sinh(mu), ch = std::cosh(mu);
    // -3 dB sits a factor cosh(acosh(L)/n) above the stopband edge.
    const double x3 = std::cosh(std::acosh(big_l) / n);
    const double ws = 2.0 * M_PI * design.highpass_cutoff_hz / x3;
    for (int j = 1; j <= n / 2; ++j) {
      const double phi = (n % 2 == 1) ? (M_PI * j / n) : (M_PI * (2.0 * j - 1.0) / (2.0 * n));
      // LP pole = 1 / (-sh cos(phi) - i ch sin(phi)); LP zero at j / sin(phi).
      const std::complex<double> inv_pole(-sh * std::cos(phi), -ch * std::sin(phi));
      const std::complex<double> pole = 1.0 / inv_pole;
      const double c1_lp = -2.0 * pole.real();
      const double c0_lp = std::norm(pole);
      const double wz_hp = ws * std::sin(phi);  // = ws / z_lp, z_lp = 1/sin(phi)
      chain.sections.push_back(detail::highpass_notch_pair(
          wz_hp, c1_lp * ws / c0_lp, ws * ws / c0_lp, design.highpass_cutoff_hz,
          sample_rate_hz));
    }
    if (n % 2 == 1) {
      chain.sections.push_back(detail::highpass_single(ws * sh, design.highpass_cutoff_hz,
                                                       sample_rate_hz));
    }
  } else {
    const double wc = 2.0 * M_PI * design.highpass_cutoff_hz;
    const detail::LowpassPrototype proto = detail::lowpass_prototype(
        design.highpass_order, design.highpass_family, design.highpass_ripple_db);
    for (const auto& [c1, c0] : proto.pairs) {
      chain.sections.push_back(detail::highpass_pair(
          c1 * wc / c0, wc * wc / c0, design.highpass_cutoff_hz, sample_rate_hz));
    }
    if (proto.real_pole != 0.0) {
      chain.sections.push_back(detail::highpass_single(
          wc / proto.real_pole, design.highpass_cutoff_hz, sample_rate_hz));
    }
  }

  // Inverse Chebyshev (type II) low-pass, 3rd order: one zero pair at the
  // notch plus a real pole. Prototype has its stopband edge at w = 1 and its
  // transmission zero at 1/sin(pi/3); scale so the zero lands on notch_hz.
  {
    const double rs = design.notch_stopband_db;
    const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * rs) - 1.0);
    const double mu = std::asinh(1.0 / de) / 3.0;
    const double sh = std::sinh(mu), ch = std::cosh(mu);
    const double wz_proto = 1.0 / std::sin(M_PI / 3.0);
    // Pole pair: 1 / (-sh cos(pi/3) +- i ch sin(pi/3)); real pole: -1/sh.
    const std::complex<double> inv_pole(-sh * std::cos(M_PI / 3.0),
                                        ch * std::sin(M_PI / 3.0));
    const std::complex<double> pole = 1.0 / inv_pole;
    const double scale = 2.0 * M_PI * design.notch_hz / wz_proto;
    const double wz = wz_proto * scale;  // = 2 pi notch_hz
    const double c1 = -2.0 * pole.real() * scale;
    const double c0 = std::norm(pole) * scale * scale;
    chain.sections.push_back(
        detail::notch_pair(wz, c1, c0, design.notch_hz, sample_rate_hz));
    chain.sections.push_back(detail::lowpass_single((1.0 / sh) * scale, design.notch_hz,
                                                    sample_rate_hz, "notch"));
  }

  // Anti-aliasing low-pass.
  {
    const double wc = 2.0 * M_PI * design.lowpass_cutoff_hz;
    for (double a1 : detail::butterworth_pair_coeffs(design.lowpass_order)) {
      chain.sections.push_back(detail::lowpass_pair(
          a1 * wc, wc * wc, design.lowpass_cutoff_hz, sample_rate_hz, "antialias"));
    }
    if (design.lowpass_order % 2 == 1) {
      chain.sections.push_back(detail::lowpass_single(wc, design.lowpass_cutoff_hz,
                                                      sample_rate_hz, "antialias"));
    }
  }

  for (const auto& s : chain.sections) {
    if (!s.digital.is_stable()) {
      throw ConfigError("filter design: unstable section '" + s.label + "'");
    }
  }
  return chain;
}

/// Causal recursive filtering (transposed direct form II), zero initial
/// state, output length equals input length. State is local to the call, so
/// one chain can filter many traces concurrently.
inline QuadratureTrace apply_filter(const FilterChain& chain,
                                    const QuadratureTrace& trace) {
  trace.validate();
  if (chain.sample_rate_hz != trace.sample_rate_hz) {
    throw ConfigError("apply_filter: chain discretized at different sample rate");
  }
  QuadratureTrace out = trace;
  for (const auto& section : chain.sections) {
    const Biquad& q = section.digital;
    double w1 = 0.0, w2 = 0.0;
    for (double& v : out.samples) {
      const double x = v;
      const double y = q.b0 * x + w1;
      w1 = q.b1 * x - q.a1 * y + w2;
      w2 = q.b2 * x - q.a2 * y;
      v = y;
    }
  }
  return out;
}

/// First n samples of the chain's impulse response.
inline std::vector<double> impulse_response(const FilterChain& chain, std::size_t n) {
  QuadratureTrace delta;
  delta.sample_rate_hz = chain.sample_rate_hz;
  delta.samples.assign(n, 0.0);
  delta.samples[0] = 1.0;
  return apply_filter(chain, delta).samples;
}

/// Uniform mid-tread quantizer clipping at +-full_scale.
inline QuadratureTrace quantize(const QuadratureTrace& trace, int bits,
                                double full_scale, std::size_t* clip_count = nullptr) {
  if (bits < 2) throw DomainError("quantize: bits must be >= 2");
  if (!(full_scale > 0.0)) throw DomainError("quantize: full_scale must be > 0");
  const double levels_half = std::pow(2.0, bits - 1);
  const double step = full_scale / levels_half;
  QuadratureTrace out = trace;
  std::size_t clips = 0;
  for (double& v : out.samples) {
    double q = std::nearbyint(v / step);
    if (q > levels_half - 1.0) {
      q = levels_half - 1.0;
      ++clips;
    } else if (q < -levels_half) {
      q = -levels_half;
      ++clips;
    }
    v = q * step;
  }
  if (clip_count != nullptr) *clip_count = clips;
  return out;
}

/// Adds white Gaussian detector noise at level_db relative to shot noise.
inline QuadratureTrace add_dark_noise(const QuadratureTrace& trace, double level_db,
                                      std::uint64_t seed) {
  GaussianRng rng(seed);
  const double sigma = std::sqrt(kVacuumVariance * std::pow(10.0, level_db / 10.0));
  QuadratureTrace out = trace;
  for (double& v : out.samples) v += sigma * rng.gaussian();
  return out;
}

/// Averaged periodogram over non-overlapping rectangular-window segments.
struct SpectrumEstimate {
  std::vector<double> frequency_hz;  // 0 .. fs/2
  std::vector<double> power;         // linear; white noise of variance s^2 -> s^2
  int n_fft = 0;
  int n_averages = 0;
};

inline SpectrumEstimate power_spectrum(const QuadratureTrace& trace, int n_fft = 2048,
                                       int n_averages = 0) {
  trace.validate();
  if (n_fft < 2 || !is_power_of_two(static_cast<std::size_t>(n_fft))) {
    throw ConfigError("power_spectrum: n_fft must be a power of two >= 2");
  }
  const int max_averages = static_cast<int>(trace.samples.size() / n_fft);
  if (n_averages == 0) n_averages = max_averages;
  if (n_averages < 1 || n_averages > max_averages) {
    throw SizeError("power_spectrum: trace holds " + std::to_string(max_averages) +
                    " segments, requested " + std::to_string(n_averages));
  }
  SpectrumEstimate est;
  est.n_fft = n_fft;
  est.n_averages = n_averages;
  est.power.assign(n_fft / 2 + 1, 0.0);
  std::vector<std::complex<double>> buf(n_fft);
  for (int seg = 0; seg < n_averages; ++seg) {
    const double* src = trace.samples.data() + static_cast<std::size_t>(seg) * n_fft;
    for (int i = 0; i < n_fft; ++i) buf[i] = src[i];
    fft_in_place(buf, /*inverse=*/false);
    for (int j = 0; j <= n_fft / 2; ++j) {
      est.power[j] += std::norm(buf[j]) / n_fft;
    }
  }
  const double inv = 1.0 / n_averages;
  for (double& pwr : est.power) pwr *= inv;
  est.frequency_hz.resize(n_fft / 2 + 1);
  for (int j = 0; j <= n_fft / 2; ++j) {
    est.frequency_hz[j] = trace.sample_rate_hz * j / n_fft;
  }
  return est;
}

/// Mean linear power over [f_lo, f_hi]; the usual shot-noise reference band.
inline double band_mean(const SpectrumEstimate& est, double f_lo, double f_hi) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < est.frequency_hz.size(); ++j) {
    if (est.frequency_hz[j] >= f_lo && est.frequency_hz[j] <= f_hi) {
      sum += est.power[j];
      ++count;
    }
  }
  if (count == 0) throw SizeError("band_mean: no bins in requested band");
  return sum / static_cast<double>(count);
}

inline std::vector<double> to_db(const SpectrumEstimate& est, double reference = 1.0) {
  if (!(reference > 0.0)) throw DomainError("to_db: reference must be > 0");
  std::vector<double> db(est.power.size());
  for (std::size_t j = 0; j < db.size(); ++j) {
    db[j] = 10.0 * std::log10(est.power[j] / reference);
  }
  return db;
}

}  // namespace dualrail
