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

#include "dualrail/network.hpp"

#include <cmath>

#include "dualrail/detection.hpp"
#include "gtest/gtest.h"
#include "oracles.hpp"

namespace dualrail {
namespace {

constexpr double kFs = 100e6;

QuadratureTrace make_trace(std::vector<double> samples) {
  QuadratureTrace t;
  t.sample_rate_hz = kFs;
  t.samples = std::move(samples);
  return t;
}

TEST(BalancedBeamsplitter, InterferenceIdentities) {
  const QuadratureTrace a = generate_vacuum_stream(1024, kFs, 1);
  // Identical inputs: destructive port exactly zero, constructive sqrt2 a.
  auto [out1, out2] = balanced_beamsplitter(a, a);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_EQ(out1.samples[i], 0.0);
    ASSERT_NEAR(out2.samples[i], std::sqrt(2.0) * a.samples[i], 1e-15);
  }
}

TEST(BalancedBeamsplitter, TwiceIsNinetyDegreeRotation) {
  const QuadratureTrace a = generate_vacuum_stream(512, kFs, 2);
  const QuadratureTrace b = generate_vacuum_stream(512, kFs, 3);
  auto [m1, m2] = balanced_beamsplitter(a, b);
  auto [r1, r2] = balanced_beamsplitter(m1, m2);
  // M^2 = [[0, -1], [1, 0]]: (a, b) -> (-b, a).
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_NEAR(r1.samples[i], -b.samples[i], 1e-12);
    ASSERT_NEAR(r2.samples[i], a.samples[i], 1e-12);
  }
}

TEST(BalancedBeamsplitter, EnergyConservedSampleWise) {
  const QuadratureTrace a = generate_vacuum_stream(512, kFs, 4);
  const QuadratureTrace b = generate_vacuum_stream(512, kFs, 5);
  auto [o1, o2] = balanced_beamsplitter(a, b);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double in = a.samples[i] * a.samples[i] + b.samples[i] * b.samples[i];
    const double out = o1.samples[i] * o1.samples[i] + o2.samples[i] * o2.samples[i];
    ASSERT_NEAR(out, in, 1e-12);
  }
}

TEST(BalancedBeamsplitter, InverseUndoesForward) {
  const QuadratureTrace a = generate_vacuum_stream(512, kFs, 6);
  const QuadratureTrace b = generate_vacuum_stream(512, kFs, 7);
  auto [m1, m2] = balanced_beamsplitter(a, b, BsConvention::forward);
  auto [r1, r2] = balanced_beamsplitter(m1, m2, BsConvention::inverse);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    ASSERT_NEAR(r1.samples[i], a.samples[i], 1e-12);
    ASSERT_NEAR(r2.samples[i], b.samples[i], 1e-12);
  }
}

TEST(BalancedBeamsplitter, ShapeMismatchThrows) {
  const QuadratureTrace a = generate_vacuum_stream(512, kFs, 8);
  const QuadratureTrace b = generate_vacuum_stream(256, kFs, 9);
  EXPECT_THROW(balanced_beamsplitter(a, b), ShapeError);
  QuadratureTrace c = generate_vacuum_stream(512, 2 * kFs, 9);
  EXPECT_THROW(balanced_beamsplitter(a, c), ShapeError);
}

TEST(DelayLine, LosslessIsAPureShift) {
  NetworkConfig cfg;
  cfg.fiber_loss = 0.0;
  BeamTraces beam{generate_vacuum_stream(2048, kFs, 10),
                  generate_vacuum_stream(2048, kFs, 11)};
  const BeamTraces out = delay_line(beam, cfg, 99);
  const long n = 16;  // 160 ns at 100 MHz
  for (std::size_t i = n; i < beam.x.samples.size(); ++i) {
    ASSERT_EQ(out.x.samples[i], beam.x.samples[i - n]);
    ASSERT_EQ(out.p.samples[i], beam.p.samples[i - n]);
  }
  // Leading gap is vacuum, not zeros.
  double gap_ms = 0.0;
  for (long i = 0; i < n; ++i) gap_ms += out.x.samples[i] * out.x.samples[i];
  EXPECT_GT(gap_ms, 0.0);
}

TEST(DelayLine, TotalLossYieldsVacuum) {
  NetworkConfig cfg;
  cfg.fiber_loss = 1.0;
  const std::size_t n = 1u << 18;
  BeamTraces beam{make_trace(std::vector<double>(n, 5.0)),
                  make_trace(std::vector<double>(n, -5.0))};
  const BeamTraces out = delay_line(beam, cfg, 123);
  const double ms = sample_mean_square(out.x.samples);
  const double se = kVacuumVariance * std::sqrt(2.0 / static_cast<double>(n));
  EXPECT_NEAR(ms, kVacuumVariance, 5.0 * se);
  EXPECT_NEAR(sample_mean(out.x.samples), 0.0,
              5.0 * std::sqrt(kVacuumVariance / static_cast<double>(n)));
}

TEST(DelayLine, LossMixesTowardVacuum) {
  // White input with variance 0.2 valued against 0.89 * 0.2 + 0.11 * 0.5.
  NetworkConfig cfg;  // fiber_loss = 0.11
  const std::size_t n = 1u << 20;
  QuadratureTrace in = generate_vacuum_stream(n, kFs, 21);
  for (double& v : in.samples) v *= std::sqrt(0.2 / kVacuumVariance);
  BeamTraces beam{in, in};
  const BeamTraces out = delay_line(beam, cfg, 31);
  const double expected = 0.89 * 0.2 + 0.11 * kVacuumVariance;
  const double se = expected * std::sqrt(2.0 / static_cast<double>(n));
  EXPECT_NEAR(sample_mean_square(out.x.samples), expected, 5.0 * se);
}

TEST(DelayLine, NonIntegralDelayThrows) {
  NetworkConfig cfg;
  cfg.delay_time_s = 165e-9;  // 16.5 samples
  BeamTraces beam{generate_vacuum_stream(256, kFs, 1),
                  generate_vacuum_stream(256, kFs, 2)};
  EXPECT_THROW(delay_line(beam, cfg, 3), ConfigError);
}

TEST(ApplyEfficiency, IdentityVacuumAndArithmetic) {
  BeamTraces beam{generate_vacuum_stream(1u << 18, kFs, 41),
                  generate_vacuum_stream(1u << 18, kFs, 42)};
  // eta = 1: bit-identical pass-through.
  const BeamTraces same = apply_efficiency(beam, 1.0, 7);
  EXPECT_EQ(same.x.samples, beam.x.samples);
  // eta = 0: pure vacuum, uncorrelated with the input.
  const BeamTraces vac = apply_efficiency(beam, 0.0, 7);
  double cross = 0.0;
  for (std::size_t i = 0; i < beam.x.samples.size(); ++i) {
    cross += vac.x.samples[i] * beam.x.samples[i];
  }
  cross /= static_cast<double>(beam.x.samples.size());
  EXPECT_NEAR(cross, 0.0, 5.0 * kVacuumVariance / std::sqrt(1 << 18));
  // eta = 0.97^2 on variance-0.1 input: 0.9409 * 0.1 + 0.0591 * 0.5.
  QuadratureTrace in = generate_vacuum_stream(1u << 20, kFs, 43);
  for (double& v : in.samples) v *= std::sqrt(0.1 / kVacuumVariance);
  const BeamTraces mixed = apply_efficiency({in, in}, 0.9409, 8);
  const double expected = 0.9409 * 0.1 + 0.0591 * kVacuumVariance;
  EXPECT_NEAR(sample_mean_square(mixed.x.samples), expected,
              5.0 * expected * std::sqrt(2.0 / (1 << 20)));
  EXPECT_THROW(apply_efficiency(beam, 1.5, 9), DomainError);
}

TEST(ProbeTones, InjectionSpectra) {
  const std::size_t n = 1u << 17;
  QuadratureTrace zero = make_trace(std::vector<double>(n, 0.0));
  // Empty list: identity.
  EXPECT_EQ(inject_probe_tones(zero, {}).samples, zero.samples);

  // Single bin-aligned tone: periodogram peak A^2 N / 4 at the tone bin.
  const int n_fft = 2048;
  const double f0 = 100.0 * kFs / n_fft;  // exactly bin 100
  const double amp = 0.7;
  const QuadratureTrace one = inject_probe_tones(zero, {{f0, amp, 0.0}});
  const SpectrumEstimate est = power_spectrum(one, n_fft);
  EXPECT_NEAR(est.power[100], amp * amp * n_fft / 4.0,
              1e-6 * amp * amp * n_fft / 4.0);

  // Two tones: two distinct peaks and nothing at the difference frequency.
  // A long transform separates the bins so window leakage from the tones
  // stays far from the 95 kHz beat bin.
  const int n_big = 65536;
  const double f1 = 231e3, f2 = 326e3;
  const QuadratureTrace two =
      inject_probe_tones(zero, {{f1, amp, 0.0}, {f2, amp, 0.3}});
  const SpectrumEstimate est2 = power_spectrum(two, n_big);
  auto level_near = [&](double f) {
    double peak = 0.0;
    for (std::size_t j = 0; j < est2.power.size(); ++j) {
      if (std::abs(est2.frequency_hz[j] - f) <= 2.0 * kFs / n_big) {
        peak = std::max(peak, est2.power[j]);
      }
    }
    return peak;
  };
  const double p1 = level_near(f1), p2 = level_near(f2);
  EXPECT_GT(p1, 1.0);
  EXPECT_GT(p2, 1.0);
  // The optical beat at 95 kHz is absent in a single additive channel.
  EXPECT_LT(level_near(f2 - f1), 1e-3 * std::min(p1, p2));

  // Super-Nyquist tone rejected.
  EXPECT_THROW(inject_probe_tones(zero, {{51e6, 1.0, 0.0}}), ConfigError);
}

TEST(EffectiveReflectivity, CosineOfDelayPhase) {
  const double T = 160e-9;
  EXPECT_DOUBLE_EQ(effective_reflectivity(0.0, T), 1.0);
  EXPECT_NEAR(effective_reflectivity(1.0 / (4.0 * T), T), 0.0, 1e-12);
  EXPECT_NEAR(effective_reflectivity(1.0 / T, T), 1.0, 1e-12);
  EXPECT_NEAR(effective_reflectivity(1.0 / (2.0 * T), T), -1.0, 1e-12);
}

TEST(BuildExepr, VacuumInVacuumOut) {
  SqueezerSpec a{0.0, 17e6, SqueezeOrientation::squeeze_x};
  SqueezerSpec b{0.0, 17e6, SqueezeOrientation::squeeze_p};
  NetworkConfig cfg;
  cfg.probe_tones.clear();
  const std::size_t n = 1u << 18;
  const ExeprStreams out = build_exepr_streams(a, b, cfg, n, kFs, 2026);
  const double se = kVacuumVariance * std::sqrt(2.0 / static_cast<double>(n));
  for (const QuadratureTrace* t :
       {&out.rail_a.x, &out.rail_a.p, &out.rail_b.x, &out.rail_b.p}) {
    EXPECT_NEAR(sample_mean_square(t->samples), kVacuumVariance, 5.0 * se);
  }
  EXPECT_EQ(out.rail_a.x.rail, Rail::a);
  EXPECT_EQ(out.rail_b.p.rail, Rail::b);
}

// The interferometer acts per sideband as an effective beamsplitter between
// the rails: the port spectra mix the two source spectra with weights
// (1 +- R)/2, R = cos(2 pi f T), here checked against simulated data.
TEST(BuildExepr, PortSpectraFollowEffectiveBeamsplitter) {
  SqueezerSpec a{0.5, 17e6, SqueezeOrientation::squeeze_x};
  SqueezerSpec b{0.5, 17e6, SqueezeOrientation::squeeze_p};
  NetworkConfig cfg;  // loss 0.11, vis 0.97, qe 0.99
  cfg.probe_tones.clear();
  const std::size_t n = 1u << 21;
  const ExeprStreams out = build_exepr_streams(a, b, cfg, n, kFs, 515);
  const int n_fft = 2048;
  const SpectrumEstimate sa = power_spectrum(out.rail_a.x, n_fft);
  const SpectrumEstimate sb = power_spectrum(out.rail_b.x, n_fft);
  const double rel_sigma = 1.0 / std::sqrt(static_cast<double>(sa.n_averages));
  int outliers = 0;
  for (std::size_t j = 8; j + 8 < sa.power.size(); j += 3) {
    const double f = sa.frequency_hz[j];
    const double s_same = squeezing_spectrum(f, a).squeezed;
    const double s_other = squeezing_spectrum(f, b).antisqueezed;
    for (bool rail_is_a : {true, false}) {
      const double predicted =
          kVacuumVariance *
          testing_oracles::expected_rail_spectrum(
              f, s_same, s_other, rail_is_a, cfg.delay_time_s, cfg.fiber_loss,
              cfg.port_efficiency());
      const double measured = rail_is_a ? sa.power[j] : sb.power[j];
      const double z = (measured / predicted - 1.0) / rel_sigma;
      ASSERT_LT(std::abs(z), 6.0) << "f=" << f << " railA=" << rail_is_a;
      if (std::abs(z) > 3.0) ++outliers;
    }
  }
  EXPECT_LT(outliers, 16);
}

}  // namespace
}  // namespace dualrail
