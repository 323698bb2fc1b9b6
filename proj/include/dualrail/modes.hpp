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
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/detection.hpp"
#include "dualrail/fft.hpp"
#include "dualrail/trace.hpp"

namespace dualrail {

/// Parameters of the temporal-mode weight function
///   g(t) = exp[-gamma^2 (t - t_k)^2] * (t - t_k + t_c)   for 2|t - t_k| <= T_w
/// with centers t_k = t_0 + k T, discretized on the acquisition grid.
struct WeightFunctionParams {
  double window_width_s = 120e-9;   // T_w
  double fall_time_s = 40e-9;       // 1/gamma
  double balance_offset_s = 2e-9;   // t_c
  double center_offset_s = 95e-9;   // t_0
  double slot_period_s = 160e-9;    // T
  double grid_step_s = 10e-9;
};

/// Discretized weight function for slot 0; every other slot is the same
/// sample pattern shifted by k * slot_period_samples.
struct WeightFunction {
  WeightFunctionParams params;
  std::vector<double> samples;   // values at grid points inside the window
  long first_sample_index = 0;   // grid index of samples[0] for slot 0
  long slot_period_samples = 0;  // T / grid_step
  bool positive_only = false;

  /// Continuous g evaluated at dt = t - t_k (seconds).
  double value(double dt) const {
    if (2.0 * std::abs(dt) > params.window_width_s * (1.0 + 1e-12)) return 0.0;
    const double gamma = 1.0 / params.fall_time_s;
    const double g = std::exp(-gamma * gamma * dt * dt) * (dt + params.balance_offset_s);
    return positive_only ? std::max(g, 0.0) : g;
  }
};

inline WeightFunction weight_function(const WeightFunctionParams& params) {
  if (params.window_width_s > params.slot_period_s) {
    throw ConfigError("weight function: window width exceeds slot period");
  }
  if (!(params.grid_step_s > 0.0) || !(params.fall_time_s > 0.0)) {
    throw ConfigError("weight function: grid step and fall time must be > 0");
  }
  const double slots = params.slot_period_s / params.grid_step_s;
  if (std::abs(slots - std::round(slots)) > 1e-9) {
    throw ConfigError("weight function: slot period must be a multiple of the grid step");
  }
  if (params.center_offset_s < 0.5 * params.window_width_s) {
    throw ConfigError("weight function: center offset must be >= half the window");
  }
  WeightFunction w;
  w.params = params;
  w.slot_period_samples = static_cast<long>(std::round(slots));
  const double half = 0.5 * params.window_width_s;
  const double eps = 1e-9;  // grid units, absorbs representation error
  const long j_lo = static_cast<long>(
      std::ceil((params.center_offset_s - half) / params.grid_step_s - eps));
  const long j_hi = static_cast<long>(
      std::floor((params.center_offset_s + half) / params.grid_step_s + eps));
  w.first_sample_index = j_lo;
  w.samples.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
  for (long j = j_lo; j <= j_hi; ++j) {
    const double dt = static_cast<double>(j) * params.grid_step_s - params.center_offset_s;
    w.samples.push_back(w.value(dt));
  }
  return w;
}

/// Clamps the weight samples at zero from below.
inline WeightFunction positive_part(const WeightFunction& w) {
  WeightFunction out = w;
  out.positive_only = true;
  for (double& s : out.samples) s = std::max(s, 0.0);
  return out;
}

/// Number of whole slots that fit in the given duration:
/// floor((duration - t_0 - T_w/2) / T).
inline long qumode_capacity(double duration_s, const WeightFunction& w) {
  const double usable =
      duration_s - w.params.center_offset_s - 0.5 * w.params.window_width_s;
  if (usable < 0.0) return 0;
  return static_cast<long>(std::floor(usable / w.params.slot_period_s + 1e-9));
}

inline long qumode_capacity(const QuadratureTrace& trace, const WeightFunction& w) {
  return qumode_capacity(trace.duration_s(), w);
}

namespace detail {

inline void require_grid_match(const QuadratureTrace& trace, const WeightFunction& w) {
  if (std::abs(trace.sample_rate_hz * w.params.grid_step_s - 1.0) > 1e-9) {
    throw ConfigError("extract: weight grid step must equal the trace sample period");
  }
}

}  // namespace detail

/// Weighted Riemann sum over slot k: sum_j g_k(t_j) x(t_j) * grid_step.
inline double extract_qumode(const QuadratureTrace& trace, const WeightFunction& w,
                             long k) {
  detail::require_grid_match(trace, w);
  const long base = w.first_sample_index + k * w.slot_period_samples;
  if (k < 0 || base < 0 ||
      base + static_cast<long>(w.samples.size()) > static_cast<long>(trace.size())) {
    throw IndexError("extract: slot " + std::to_string(k) + " not inside the trace");
  }
  double acc = 0.0;
  const double* x = trace.samples.data() + base;
  for (std::size_t i = 0; i < w.samples.size(); ++i) acc += w.samples[i] * x[i];
  return acc * w.params.grid_step_s;
}

/// Extracts slots 0 .. qumode_capacity-1.
inline std::vector<double> extract_all_qumodes(const QuadratureTrace& trace,
                                               const WeightFunction& w) {
  const long n = qumode_capacity(trace, w);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long k = 0; k < n; ++k) out.push_back(extract_qumode(trace, w, k));
  return out;
}

/// Divides each value by sqrt(2 * mean(shot^2)) so a vacuum qumode has
/// quadrature variance 1/2.
inline std::vector<double> normalize_by_shot_noise(const std::vector<double>& values,
                                                   const std::vector<double>& shot_values) {
  if (shot_values.empty()) throw SizeError("normalize: shot reference is empty");
  const double ms = sample_mean_square(shot_values);
  if (!(ms > 0.0) || !std::isfinite(ms)) {
    throw DataError("normalize: degenerate shot-noise variance");
  }
  const double inv = 1.0 / std::sqrt(2.0 * ms);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * inv;
  return out;
}

/// Normalized lag correlation C(m) = <v_k v_{k+m}> / <v_k^2> over one
/// contiguous series of qumode values.
inline double autocorrelation(const std::vector<double>& values, long m) {
  const long n = static_cast<long>(values.size());
  const long lag = std::abs(m);
  if (n < 2 || lag > n - 1) {
    throw SizeError("autocorrelation: need more than |m| values");
  }
  double num = 0.0;
  for (long k = 0; k + lag < n; ++k) num += values[k] * values[k + lag];
  num /= static_cast<double>(n - lag);
  const double den = sample_mean_square(values);
  if (!(den > 0.0)) throw DataError("autocorrelation: zero-variance input");
  return num / den;
}

/// Overlap of the deconvolved optical mode functions,
/// int f_k f_{k+m} / int f_k^2, where f is obtained by removing the
/// detection impulse response from the weight function by regularized
/// spectral division. The high-pass DC zero makes naive inversion singular,
/// so bins where |H| falls below floor_rel of its peak are excluded from the
/// inversion rather than amplified by up to 1/floor_rel.
inline double effective_mode_overlap(const WeightFunction& w, const FilterChain& chain,
                                     long m, double floor_rel = 1e-3) {
  if (m == 0) return 1.0;
  const std::size_t n = 8192;
  std::vector<std::complex<double>> g(n, 0.0);
  const std::size_t center = n / 2;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    g[center + i] = w.samples[i];
  }
  fft_in_place(g, /*inverse=*/false);

  if (!chain.empty()) {
    std::vector<double> e = impulse_response(chain, n);
    std::vector<std::complex<double>> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = e[i];
    fft_in_place(h, /*inverse=*/false);
    double peak = 0.0;
    for (const auto& c : h) peak = std::max(peak, std::abs(c));
    const double floor_abs = floor_rel * peak;
    double excluded_energy = 0.0, total_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double gg = std::norm(g[i]);
      total_energy += gg;
      if (std::abs(h[i]) < floor_abs) {
        excluded_energy += gg;
        g[i] = 0.0;
      } else {
        g[i] /= h[i];
      }
    }
    if (excluded_energy > 0.5 * total_energy) {
      throw DataError("mode overlap: deconvolution ill-conditioned, most of the "
                      "weight spectrum sits below the regularization floor");
    }
  }
  fft_in_place(g, /*inverse=*/true);

  const long lag = std::abs(m) * w.slot_period_samples;
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double ft = g[t].real();
    den += ft * ft;
    if (t + lag < n) num += ft * g[t + lag].real();
  }
  return num / den;
}

}  // namespace dualrail
