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
#include <functional>
#include <utility>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/fft.hpp"
#include "dualrail/rng.hpp"
#include "dualrail/trace.hpp"

namespace dualrail {

enum class SqueezeOrientation : unsigned char { squeeze_x, squeeze_p };

/// Below-threshold OPO described by its pump parameter and cavity linewidth.
struct SqueezerSpec {
  double pump_parameter = 0.0;       // dimensionless, in [0, 1)
  double cavity_hwhm_hz = 17.0e6;    // half width at half maximum
  SqueezeOrientation orientation = SqueezeOrientation::squeeze_x;

  void validate() const {
    if (!(pump_parameter >= 0.0 && pump_parameter < 1.0)) {
      throw DomainError("squeezer: pump_parameter must be in [0, 1), got " +
                        std::to_string(pump_parameter));
    }
    if (!(cavity_hwhm_hz > 0.0)) {
      throw DomainError("squeezer: cavity_hwhm must be > 0");
    }
  }
};

struct SqueezingSpectrum {
  double squeezed;      // S_-(f), <= 1
  double antisqueezed;  // S_+(f), >= 1
};

/// Vacuum-normalized noise spectra of an ideal below-threshold OPO:
///   S_-+(f) = 1 -+ 4x / [(1 +- x)^2 + (f/g)^2]
/// with x the pump parameter and g the cavity HWHM. The product
/// S_- * S_+ is exactly 1 (pure-state model).
inline SqueezingSpectrum squeezing_spectrum(double f_hz, const SqueezerSpec& spec) {
  spec.validate();
  const double x = spec.pump_parameter;
  const double phi2 = (f_hz / spec.cavity_hwhm_hz) * (f_hz / spec.cavity_hwhm_hz);
  const double sq = 1.0 - 4.0 * x / ((1.0 + x) * (1.0 + x) + phi2);
  const double anti = 1.0 + 4.0 * x / ((1.0 - x) * (1.0 - x) + phi2);
  return {sq, anti};
}

namespace detail {

/// Synthesizes n samples of a zero-mean real Gaussian process whose
/// per-sample power spectrum is kVacuumVariance * spectrum_rel(f).
///
/// Frequency-domain synthesis: draw a Hermitian-symmetric complex Gaussian
/// spectrum with the target amplitude on a power-of-two grid covering the
/// request, inverse transform, and truncate. The grid is circularly
/// stationary, so any contiguous window carries the configured spectrum.
inline std::vector<double> synthesize_colored(
    const std::function<double(double)>& spectrum_rel, std::size_t n,
    double sample_rate_hz, GaussianRng& rng) {
  const std::size_t nfft = next_power_of_two(n < 2 ? 2 : n);
  const double bin_hz = sample_rate_hz / static_cast<double>(nfft);
  std::vector<std::complex<double>> spec(nfft);

  auto target = [&](std::size_t j) {
    // E|c_j|^2 such that the per-bin periodogram |X_j|^2/N averages to
    // kVacuumVariance * S(f_j).
    return kVacuumVariance * spectrum_rel(static_cast<double>(j) * bin_hz) *
           static_cast<double>(nfft);
  };

  spec[0] = std::sqrt(target(0)) * rng.gaussian();
  spec[nfft / 2] = std::sqrt(target(nfft / 2)) * rng.gaussian();
  for (std::size_t j = 1; j < nfft / 2; ++j) {
    const double sigma = std::sqrt(0.5 * target(j));
    const std::complex<double> c(sigma * rng.gaussian(), sigma * rng.gaussian());
    spec[j] = c;
    spec[nfft - j] = std::conj(c);
  }
  fft_in_place(spec, /*inverse=*/true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = spec[i].real();
  return out;
}

}  // namespace detail

/// White Gaussian stream at the vacuum level (the shot-noise reference).
inline QuadratureTrace generate_vacuum_stream(std::size_t n_samples,
                                              double sample_rate_hz,
                                              std::uint64_t seed) {
  if (n_samples < 1) throw SizeError("vacuum stream: n_samples must be >= 1");
  if (sample_rate_hz <= 0.0) throw DomainError("vacuum stream: sample_rate must be > 0");
  GaussianRng rng(seed);
  QuadratureTrace t;
  t.sample_rate_hz = sample_rate_hz;
  t.kind = TraceKind::shot_noise;
  t.samples.resize(n_samples);
  const double sigma = std::sqrt(kVacuumVariance);
  for (double& s : t.samples) s = sigma * rng.gaussian();
  return t;
}

/// Independent x and p streams of one squeezed beam. The squeezed
/// orientation carries spectrum S_-, the conjugate S_+. Output is a pure
/// function of (spec, n_samples, sample_rate, seed).
inline std::pair<QuadratureTrace, QuadratureTrace> generate_squeezed_stream(
    const SqueezerSpec& spec, std::size_t n_samples, double sample_rate_hz,
    std::uint64_t seed) {
  spec.validate();
  if (n_samples < 2) throw SizeError("squeezed stream: n_samples must be >= 2");
  if (sample_rate_hz <= 0.0) throw DomainError("squeezed stream: sample_rate must be > 0");

  GaussianRng rng_sq(derive_seed(seed, 0, 0x51));
  GaussianRng rng_anti(derive_seed(seed, 0, 0x52));
  auto s_sq = [&spec](double f) { return squeezing_spectrum(f, spec).squeezed; };
  auto s_anti = [&spec](double f) { return squeezing_spectrum(f, spec).antisqueezed; };

  QuadratureTrace x, p;
  x.sample_rate_hz = p.sample_rate_hz = sample_rate_hz;
  x.quadrature = Quadrature::x;
  p.quadrature = Quadrature::p;
  if (spec.orientation == SqueezeOrientation::squeeze_x) {
    x.samples = detail::synthesize_colored(s_sq, n_samples, sample_rate_hz, rng_sq);
    p.samples = detail::synthesize_colored(s_anti, n_samples, sample_rate_hz, rng_anti);
  } else {
    x.samples = detail::synthesize_colored(s_anti, n_samples, sample_rate_hz, rng_anti);
    p.samples = detail::synthesize_colored(s_sq, n_samples, sample_rate_hz, rng_sq);
  }
  return {std::move(x), std::move(p)};
}

}  // namespace dualrail
