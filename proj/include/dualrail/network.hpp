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
#include <cstdint>
#include <utility>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/rng.hpp"
#include "dualrail/source.hpp"
#include "dualrail/trace.hpp"

namespace dualrail {

/// Classical phase-probe sideband riding on a detected channel.
struct ProbeTone {
  double frequency_hz = 0.0;
  double amplitude = 0.0;  // peak amplitude, shot-noise units
  double phase_rad = 0.0;
};

/// Optical parameters of the asymmetric Mach-Zehnder network.
struct NetworkConfig {
  double delay_time_s = 160e-9;
  double fiber_loss = 0.11;
  double visibility = 0.97;
  double quantum_efficiency = 0.99;
  std::vector<ProbeTone> probe_tones;

  /// Mode mismatch enters as an efficiency V^2 on each homodyne path.
  double port_efficiency() const {
    return quantum_efficiency * visibility * visibility;
  }

  void validate() const {
    auto fraction = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError(std::string("network: ") + name + " must be in [0, 1]");
      }
    };
    fraction(fiber_loss, "fiber_loss");
    fraction(visibility, "visibility");
    fraction(quantum_efficiency, "quantum_efficiency");
    if (!(delay_time_s > 0.0)) throw DomainError("network: delay_time must be > 0");
  }
};

/// Both quadrature records of one beam.
struct BeamTraces {
  QuadratureTrace x, p;
};

inline void set_rail(BeamTraces& beam, Rail rail) {
  beam.x.rail = rail;
  beam.p.rail = rail;
}

enum class BsConvention { forward, inverse };

/// Balanced beamsplitter acting sample-wise and identically on x and p:
///   forward: out1 = (a - b)/sqrt2, out2 = (a + b)/sqrt2
///   inverse: out1 = (a + b)/sqrt2, out2 = (-a + b)/sqrt2
inline std::pair<QuadratureTrace, QuadratureTrace> balanced_beamsplitter(
    const QuadratureTrace& a, const QuadratureTrace& b,
    BsConvention conv = BsConvention::forward) {
  require_compatible(a, b, "beamsplitter");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  QuadratureTrace out1 = a, out2 = b;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double va = a.samples[i], vb = b.samples[i];
    if (conv == BsConvention::forward) {
      out1.samples[i] = (va - vb) * inv_sqrt2;
      out2.samples[i] = (va + vb) * inv_sqrt2;
    } else {
      out1.samples[i] = (va + vb) * inv_sqrt2;
      out2.samples[i] = (-va + vb) * inv_sqrt2;
    }
  }
  return {std::move(out1), std::move(out2)};
}

inline std::pair<BeamTraces, BeamTraces> balanced_beamsplitter(
    const BeamTraces& a, const BeamTraces& b, BsConvention conv = BsConvention::forward) {
  auto [x1, x2] = balanced_beamsplitter(a.x, b.x, conv);
  auto [p1, p2] = balanced_beamsplitter(a.p, b.p, conv);
  return {BeamTraces{std::move(x1), std::move(p1)},
          BeamTraces{std::move(x2), std::move(p2)}};
}

namespace detail {

inline long integral_delay_samples(double delay_s, double sample_rate_hz) {
  const double n = delay_s * sample_rate_hz;
  if (std::abs(n - std::round(n)) > 1e-6) {
    throw ConfigError("delay: delay_time must be an integer number of samples, got " +
                      std::to_string(n));
  }
  return static_cast<long>(std::round(n));
}

// a' = sqrt(1-L) a(t - delay) + sqrt(L) v with fresh vacuum v; the leading
// gap (no delayed signal yet) is pure vacuum.
inline QuadratureTrace delay_one(const QuadratureTrace& in, long n_delay, double loss,
                                 GaussianRng& rng) {
  QuadratureTrace out = in;
  const double keep = std::sqrt(1.0 - loss);
  const double mix = std::sqrt(loss);
  const double sigma = std::sqrt(kVacuumVariance);
  const long n = static_cast<long>(in.samples.size());
  for (long i = 0; i < n; ++i) {
    const double v = sigma * rng.gaussian();
    out.samples[i] =
        i < n_delay ? v : keep * in.samples[i - n_delay] + mix * v;
  }
  return out;
}

inline QuadratureTrace attenuate_one(const QuadratureTrace& in, double eta,
                                     GaussianRng& rng) {
  QuadratureTrace out = in;
  const double keep = std::sqrt(eta);
  const double mix = std::sqrt(1.0 - eta);
  const double sigma = std::sqrt(kVacuumVariance);
  for (double& v : out.samples) {
    v = keep * v + mix * sigma * rng.gaussian();
  }
  return out;
}

}  // namespace detail

/// The T-delay fiber: shifts by delay_time * sample_rate samples and applies
/// the fiber loss as a vacuum admixture.
inline BeamTraces delay_line(const BeamTraces& beam, const NetworkConfig& config,
                             std::uint64_t vacuum_seed) {
  config.validate();
  require_compatible(beam.x, beam.p, "delay_line");
  const long n_delay =
      detail::integral_delay_samples(config.delay_time_s, beam.x.sample_rate_hz);
  GaussianRng rng_x(derive_seed(vacuum_seed, 0, 0xD1));
  GaussianRng rng_p(derive_seed(vacuum_seed, 0, 0xD2));
  BeamTraces out;
  out.x = detail::delay_one(beam.x, n_delay, config.fiber_loss, rng_x);
  out.p = detail::delay_one(beam.p, n_delay, config.fiber_loss, rng_p);
  return out;
}

/// Efficiency eta as a vacuum admixture: a' = sqrt(eta) a + sqrt(1-eta) v.
inline BeamTraces apply_efficiency(const BeamTraces& beam, double eta,
                                   std::uint64_t vacuum_seed) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("efficiency: eta must be in [0, 1]");
  require_compatible(beam.x, beam.p, "apply_efficiency");
  if (eta == 1.0) return beam;
  GaussianRng rng_x(derive_seed(vacuum_seed, 0, 0xE1));
  GaussianRng rng_p(derive_seed(vacuum_seed, 0, 0xE2));
  BeamTraces out;
  out.x = detail::attenuate_one(beam.x, eta, rng_x);
  out.p = detail::attenuate_one(beam.p, eta, rng_p);
  return out;
}

/// Adds the classical probe sidebands sum_i A_i sin(2 pi f_i t + phi_i).
/// Time is referenced to frame_start_time at the first sample.
inline QuadratureTrace inject_probe_tones(const QuadratureTrace& trace,
                                          const std::vector<ProbeTone>& tones,
                                          double frame_start_time_s = 0.0) {
  trace.validate();
  for (const auto& tone : tones) {
    if (tone.frequency_hz >= 0.5 * trace.sample_rate_hz) {
      throw ConfigError("probe tone at " + std::to_string(tone.frequency_hz) +
                        " Hz is above Nyquist");
    }
  }
  QuadratureTrace out = trace;
  const double dt = 1.0 / trace.sample_rate_hz;
  for (const auto& tone : tones) {
    const double w = 2.0 * M_PI * tone.frequency_hz;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      const double t = frame_start_time_s + static_cast<double>(i) * dt;
      out.samples[i] += tone.amplitude * std::sin(w * t + tone.phase_rad);
    }
  }
  return out;
}

/// Signed effective-beamsplitter parameter of the asymmetric interferometer
/// at sideband frequency f: R = cos(2 pi f T). R = 1 sends each squeezed
/// beam straight to one port, R = -1 swaps them, and intermediate values mix
/// the ports; the port power split is (1 +- R)/2.
inline double effective_reflectivity(double f_hz, double delay_time_s) {
  return std::cos(2.0 * M_PI * f_hz * delay_time_s);
}

/// Rails A and B of the extended-EPR source plus the undetected conjugate
/// quadratures: squeezers -> beamsplitter -> delayed arm -> conjugate
/// beamsplitter -> per-port efficiency.
struct ExeprStreams {
  BeamTraces rail_a, rail_b;
};

inline ExeprStreams build_exepr_streams(const SqueezerSpec& spec_a,
                                        const SqueezerSpec& spec_b,
                                        const NetworkConfig& config,
                                        std::size_t n_samples, double sample_rate_hz,
                                        std::uint64_t seed) {
  config.validate();
  BeamTraces beam_a, beam_b;
  {
    auto [x, p] = generate_squeezed_stream(spec_a, n_samples, sample_rate_hz,
                                           derive_seed(seed, 0, 0xA0));
    beam_a = {std::move(x), std::move(p)};
  }
  {
    auto [x, p] = generate_squeezed_stream(spec_b, n_samples, sample_rate_hz,
                                           derive_seed(seed, 0, 0xB0));
    beam_b = {std::move(x), std::move(p)};
  }

  auto [arm1, arm2] = balanced_beamsplitter(beam_a, beam_b, BsConvention::forward);
  BeamTraces delayed = delay_line(arm1, config, derive_seed(seed, 0, 0xF0));
  auto [rail_a, rail_b] =
      balanced_beamsplitter(delayed, arm2, BsConvention::inverse);

  const double eta = config.port_efficiency();
  ExeprStreams out;
  out.rail_a = apply_efficiency(rail_a, eta, derive_seed(seed, 0, 0xC1));
  out.rail_b = apply_efficiency(rail_b, eta, derive_seed(seed, 0, 0xC2));
  set_rail(out.rail_a, Rail::a);
  set_rail(out.rail_b, Rail::b);
  return out;
}

}  // namespace dualrail
