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

#include "dualrail/detection.hpp"

#include <cmath>

#include "dualrail/source.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace dualrail {
namespace {

constexpr double kFs = 100e6;

FilterChain highpass_only(const FilterChain& chain) {
  FilterChain hp;
  hp.sample_rate_hz = chain.sample_rate_hz;
  for (const auto& s : chain.sections) {
    if (s.label == "highpass") hp.sections.push_back(s);
  }
  return hp;
}

TEST(FilterDesign, MeetsResponseTargets) {
  const FilterChain chain = design_filter_chain(kFs);
  // DC gain is an exact zero by construction of the high-pass numerators.
  EXPECT_EQ(std::abs(chain.response_at(0.0)), 0.0);
  // High-pass section alone: -3 dB at the 1.5 MHz corner.
  const FilterChain hp = highpass_only(chain);
  EXPECT_NEAR(hp.gain_db(1.5e6), -3.0, 1.0);
  // Full chain: notch at 32 MHz at least 40 dB deep, probe tones at least
  // 70 dB down.
  EXPECT_LE(chain.gain_db(32e6), -40.0);
  EXPECT_LE(chain.gain_db(231e3), -70.0);
  EXPECT_LE(chain.gain_db(326e3), -70.0);
  // Passband reasonably flat.
  EXPECT_GT(chain.gain_db(5e6), -1.0);
  EXPECT_GT(chain.gain_db(10e6), -1.5);
}

TEST(FilterDesign, AlternateFamilyCornersAreExact) {
  FilterDesign design;
  design.highpass_family = HighpassFamily::butterworth;
  const FilterChain chain = design_filter_chain(kFs, design);
  const FilterChain hp = highpass_only(chain);
  EXPECT_NEAR(hp.gain_db(1.5e6), -3.0103, 1e-3);
  EXPECT_EQ(std::abs(chain.response_at(0.0)), 0.0);
  FilterDesign cheb = design;
  cheb.highpass_family = HighpassFamily::chebyshev1;
  const FilterChain hp2 = highpass_only(design_filter_chain(kFs, cheb));
  EXPECT_NEAR(hp2.gain_db(1.5e6), -3.0103, 1e-3);
}

TEST(FilterDesign, RejectsLowSampleRate) {
  EXPECT_THROW(design_filter_chain(50e6), ConfigError);
  EXPECT_THROW(design_filter_chain(99e6), ConfigError);
  EXPECT_NO_THROW(design_filter_chain(100e6));
}

TEST(FilterDesign, StableAndDecaying) {
  const FilterChain chain = design_filter_chain(kFs);
  for (const auto& s : chain.sections) {
    EXPECT_TRUE(s.digital.is_stable());
  }
  const std::vector<double> h = impulse_response(chain, 32768);
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  double tail = 0.0;
  for (std::size_t i = 4096; i < h.size(); ++i) tail = std::max(tail, std::abs(h[i]));
  EXPECT_LT(tail, 1e-9 * peak);
}

TEST(ApplyFilter, ZeroInZeroOut) {
  const FilterChain chain = design_filter_chain(kFs);
  QuadratureTrace zero;
  zero.sample_rate_hz = kFs;
  zero.samples.assign(4096, 0.0);
  const QuadratureTrace out = apply_filter(chain, zero);
  for (double v : out.samples) EXPECT_EQ(v, 0.0);
}

TEST(ApplyFilter, RateMismatchThrows) {
  const FilterChain chain = design_filter_chain(kFs);
  QuadratureTrace t;
  t.sample_rate_hz = 2 * kFs;
  t.samples.assign(16, 1.0);
  EXPECT_THROW(apply_filter(chain, t), ConfigError);
}

TEST(ApplyFilter, LinearAndTimeInvariant) {
  const FilterChain chain = design_filter_chain(kFs);
  GaussianRng rng(3);
  QuadratureTrace a, b;
  a.sample_rate_hz = b.sample_rate_hz = kFs;
  a.samples.resize(8192);
  b.samples.resize(8192);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    a.samples[i] = rng.gaussian();
    b.samples[i] = rng.gaussian();
  }
  // Linearity: f(2a - 3b) = 2 f(a) - 3 f(b).
  QuadratureTrace combo = a;
  for (std::size_t i = 0; i < combo.samples.size(); ++i) {
    combo.samples[i] = 2.0 * a.samples[i] - 3.0 * b.samples[i];
  }
  const auto fa = apply_filter(chain, a);
  const auto fb = apply_filter(chain, b);
  const auto fc = apply_filter(chain, combo);
  for (std::size_t i = 0; i < fc.samples.size(); ++i) {
    ASSERT_NEAR(fc.samples[i], 2.0 * fa.samples[i] - 3.0 * fb.samples[i], 1e-10);
  }
  // Time invariance: shifting the input shifts the output.
  const std::size_t shift = 257;
  QuadratureTrace shifted = a;
  shifted.samples.assign(a.samples.size(), 0.0);
  for (std::size_t i = shift; i < a.samples.size(); ++i) {
    shifted.samples[i] = a.samples[i - shift];
  }
  const auto fshift = apply_filter(chain, shifted);
  for (std::size_t i = shift + 4096; i < a.samples.size(); ++i) {
    ASSERT_NEAR(fshift.samples[i], fa.samples[i - shift], 1e-9);
  }
}

TEST(ApplyFilter, WhiteNoiseSpectrumMatchesResponse) {
  const FilterChain chain = design_filter_chain(kFs);
  const int n_fft = 2048;
  QuadratureTrace noise = generate_vacuum_stream(1u << 21, kFs, 6021);
  const QuadratureTrace filtered = apply_filter(chain, noise);
  const SpectrumEstimate est = power_spectrum(filtered, n_fft);

  // Exact finite-window expectation; valid even inside the notches.
  const std::vector<double> expect =
      testing_oracles::expected_filtered_periodogram(chain, n_fft, kVacuumVariance);
  const double rel_sigma = 1.0 / std::sqrt(static_cast<double>(est.n_averages));
  int outliers3 = 0;
  for (std::size_t j = 1; j + 1 < est.power.size(); ++j) {
    const double z = (est.power[j] / expect[j] - 1.0) / rel_sigma;
    ASSERT_LT(std::abs(z), 5.0) << "bin " << j;
    if (std::abs(z) > 3.0) ++outliers3;
  }
  EXPECT_LT(outliers3, static_cast<int>(est.power.size() / 100));
}

TEST(ApplyFilter, SuppressesProbeTone) {
  // 231 kHz tone at +40 dB over the shot floor (periodogram peak terms)
  // must come out at least 30 dB below it.
  const FilterChain chain = design_filter_chain(kFs);
  const int n_fft = 2048;
  const double amp = std::sqrt(4.0 * 1e4 * kVacuumVariance / n_fft);
  QuadratureTrace tone;
  tone.sample_rate_hz = kFs;
  tone.samples.resize(1u << 19);
  for (std::size_t i = 0; i < tone.samples.size(); ++i) {
    tone.samples[i] =
        amp * std::sin(2.0 * M_PI * 231e3 * static_cast<double>(i) / kFs);
  }
  const QuadratureTrace out = apply_filter(chain, tone);
  // Skip the filter transient, then measure the residual peak.
  QuadratureTrace tail;
  tail.sample_rate_hz = kFs;
  tail.samples.assign(out.samples.begin() + 8192, out.samples.end());
  const SpectrumEstimate est = power_spectrum(tail, n_fft);
  double peak = 0.0;
  for (std::size_t j = 0; j < est.power.size(); ++j) {
    if (est.frequency_hz[j] < 500e3) peak = std::max(peak, est.power[j]);
  }
  EXPECT_LT(10.0 * std::log10(peak / kVacuumVariance), -30.0);
}

TEST(Quantize, StepClipAndErrors) {
  QuadratureTrace t;
  t.sample_rate_hz = kFs;
  t.samples = {0.0, 0.3, -0.29, 0.5, -0.77, 2.5, -3.0};
  std::size_t clips = 0;
  const QuadratureTrace q = quantize(t, 8, 1.0, &clips);
  const double step = 1.0 / 128.0;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_LE(std::abs(q.samples[i] - t.samples[i]), step) << i;
  }
  EXPECT_EQ(clips, 2u);  // 2.5 and -3.0 clip
  EXPECT_EQ(q.samples[5], (128.0 - 1.0) * step);
  EXPECT_EQ(q.samples[6], -1.0);
  EXPECT_THROW(quantize(t, 1, 1.0), DomainError);
  EXPECT_THROW(quantize(t, 8, 0.0), DomainError);
}

TEST(PowerSpectrum, WhiteNoiseIsFlat) {
  const QuadratureTrace noise = generate_vacuum_stream(1u << 21, kFs, 99);
  const SpectrumEstimate est = power_spectrum(noise, 2048);
  EXPECT_EQ(est.n_averages, 1024);
  EXPECT_EQ(est.frequency_hz.front(), 0.0);
  EXPECT_DOUBLE_EQ(est.frequency_hz.back(), kFs / 2);
  double mean = 0.0, var = 0.0;
  // Interior bins: exponential per segment, so std/mean ~ 1/sqrt(n_avg).
  for (std::size_t j = 1; j + 1 < est.power.size(); ++j) mean += est.power[j];
  mean /= static_cast<double>(est.power.size() - 2);
  for (std::size_t j = 1; j + 1 < est.power.size(); ++j) {
    var += (est.power[j] - mean) * (est.power[j] - mean);
  }
  var /= static_cast<double>(est.power.size() - 3);
  EXPECT_NEAR(mean, kVacuumVariance,
              5.0 * kVacuumVariance / std::sqrt(1024.0 * 1024.0));
  EXPECT_NEAR(std::sqrt(var) / mean, 1.0 / std::sqrt(1024.0), 0.3 / std::sqrt(1024.0));
}

TEST(PowerSpectrum, SizeAndArgumentErrors) {
  QuadratureTrace t;
  t.sample_rate_hz = kFs;
  t.samples.assign(4096, 1.0);
  EXPECT_THROW(power_spectrum(t, 2048, 3), SizeError);
  EXPECT_THROW(power_spectrum(t, 1000), ConfigError);
  EXPECT_NO_THROW(power_spectrum(t, 2048, 2));
}

TEST(PowerSpectrum, BandMeanAndDb) {
  SpectrumEstimate est;
  est.frequency_hz = {0.0, 1.0, 2.0, 3.0};
  est.power = {1.0, 2.0, 4.0, 8.0};
  EXPECT_DOUBLE_EQ(band_mean(est, 1.0, 2.0), 3.0);
  EXPECT_THROW(band_mean(est, 10.0, 20.0), SizeError);
  const auto db = to_db(est, 2.0);
  EXPECT_NEAR(db[1], 0.0, 1e-12);
  EXPECT_NEAR(db[3], 10.0 * std::log10(4.0), 1e-12);
  EXPECT_THROW(to_db(est, 0.0), DomainError);
}

TEST(DarkNoise, LevelIsCalibrated) {
  QuadratureTrace silence;
  silence.sample_rate_hz = kFs;
  silence.samples.assign(1u << 20, 0.0);
  const QuadratureTrace noisy = add_dark_noise(silence, -15.0, 5150);
  const double var = sample_mean_square(noisy.samples);
  const double target = kVacuumVariance * std::pow(10.0, -1.5);
  EXPECT_NEAR(var, target, 5.0 * target * std::sqrt(2.0 / (1 << 20)));
}

}  // namespace
}  // namespace dualrail
