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

#include <string>
#include <vector>

#include "dualrail/common.hpp"

namespace dualrail {

enum class Quadrature : unsigned char { x, p };
enum class Rail : unsigned char { a, b, none };
enum class TraceKind : unsigned char { signal, shot_noise, dark_noise };

inline char to_char(Quadrature q) { return q == Quadrature::x ? 'x' : 'p'; }
inline char to_char(Rail r) { return r == Rail::a ? 'A' : (r == Rail::b ? 'B' : '-'); }

/// Vacuum quadrature variance per sample before any electronic filtering.
/// Convention: hbar = 1, so a vacuum mode has <x^2> = <p^2> = 1/2. Every
/// reported result is a ratio to measured shot noise, so this constant only
/// fixes the internal scale.
inline constexpr double kVacuumVariance = 0.5;

/// A uniformly sampled record of one homodyne quadrature channel.
struct QuadratureTrace {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
  Quadrature quadrature = Quadrature::x;
  Rail rail = Rail::none;
  TraceKind kind = TraceKind::signal;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }

  void validate() const {
    if (sample_rate_hz <= 0.0) throw DomainError("trace: sample_rate must be > 0");
    if (samples.empty()) throw SizeError("trace: needs at least one sample");
  }
};

inline void require_compatible(const QuadratureTrace& a, const QuadratureTrace& b,
                               const char* what) {
  if (a.samples.size() != b.samples.size() || a.sample_rate_hz != b.sample_rate_hz) {
    throw ShapeError(std::string(what) + ": traces must share length and sample rate");
  }
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double sample_mean_square(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace dualrail
