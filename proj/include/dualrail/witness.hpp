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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/detection.hpp"
#include "dualrail/modes.hpp"
#include "dualrail/network.hpp"
#include "dualrail/nullifiers.hpp"
#include "dualrail/source.hpp"

namespace dualrail {

enum class NullifierType : unsigned char { X, P };

inline char to_char(NullifierType t) { return t == NullifierType::X ? 'X' : 'P'; }

/// Mean-square statistics of one nullifier over frames.
struct VarianceStat {
  double mean_square = 0.0;
  double std_error = 0.0;
  double mean = 0.0;
  long n = 0;
  bool nonzero_mean = false;  // diagnostic: |mean| > 5 SE(mean)
};

/// Mean of squares with its standard error (via the variance of the
/// squares). Nullifiers are zero-mean by construction; a significant mean
/// is flagged rather than subtracted.
inline VarianceStat nullifier_variance(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw SizeError("nullifier_variance: need at least two values");
  }
  const long n = static_cast<long>(values.size());
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (double v : values) {
    const double q = v * v;
    sum += v;
    sum2 += q;
    sum4 += q * q;
  }
  VarianceStat s;
  s.n = n;
  s.mean = sum / n;
  s.mean_square = sum2 / n;
  const double var_of_sq = std::max(0.0, (sum4 / n - s.mean_square * s.mean_square) *
                                             n / (n - 1.0));
  s.std_error = std::sqrt(var_of_sq / n);
  const double se_mean = std::sqrt(std::max(s.mean_square, 0.0) / n);
  s.nonzero_mean = se_mean > 0.0 && std::abs(s.mean) > 5.0 * se_mean;
  return s;
}

/// 10 log10(variance / reference); reference is 2 hbar for nullifiers.
inline double squeezing_db(double variance, double reference) {
  if (!(reference > 0.0)) throw DomainError("squeezing_db: reference must be > 0");
  if (!(variance > 0.0)) throw DomainError("squeezing_db: variance must be > 0");
  return 10.0 * std::log10(variance / reference);
}

/// Per-k statistics for both nullifier types, k = 0 .. size-1.
struct VarianceReport {
  std::vector<VarianceStat> x_stats;
  std::vector<VarianceStat> p_stats;

  long k_count() const {
    return static_cast<long>(std::min(x_stats.size(), p_stats.size()));
  }
};

struct AggregateStats {
  double mean_db = 0.0;
  double std_db = 0.0;
  double worst_db = 0.0;
  long worst_k = -1;
};

inline AggregateStats aggregate_squeezing(const std::vector<VarianceStat>& stats,
                                          double reference = 2.0) {
  if (stats.empty()) throw SizeError("aggregate: empty report");
  AggregateStats agg;
  double sum = 0.0, sum2 = 0.0;
  agg.worst_db = -1e300;
  for (std::size_t k = 0; k < stats.size(); ++k) {
    const double db = squeezing_db(stats[k].mean_square, reference);
    sum += db;
    sum2 += db * db;
    if (db > agg.worst_db) {
      agg.worst_db = db;
      agg.worst_k = static_cast<long>(k);
    }
  }
  const double n = static_cast<double>(stats.size());
  agg.mean_db = sum / n;
  agg.std_db = std::sqrt(std::max(0.0, sum2 / n - agg.mean_db * agg.mean_db));
  return agg;
}

// ---- bipartition bounds (Appendix-B style uncertainty limits) --------------

struct ModeId {
  Rail rail = Rail::a;
  std::uint32_t k = 0;
  friend bool operator<(const ModeId& l, const ModeId& r) {
    if (l.k != r.k) return l.k < r.k;
    return l.rail < r.rail;
  }
  friend bool operator==(const ModeId& l, const ModeId& r) {
    return l.rail == r.rail && l.k == r.k;
  }
};

struct Bipartition {
  std::vector<ModeId> alpha;
  std::vector<ModeId> beta;

  void validate() const {
    if (alpha.empty() || beta.empty()) {
      throw DomainError("bipartition: both subsets must be nonempty");
    }
    for (const auto& m : alpha) {
      if (std::find(beta.begin(), beta.end(), m) != beta.end()) {
        throw DomainError("bipartition: subsets must be disjoint");
      }
    }
  }
};

using ModeCoefficients = std::map<ModeId, SqrtTwoCoeff>;

/// Extracts the coefficients of one quadrature from a nullifier vector over
/// the given modes, with explicit zeros for absent modes.
inline ModeCoefficients mode_coefficients(const NullifierVector& n, Quadrature quad,
                                          const std::vector<ModeId>& modes) {
  ModeCoefficients out;
  for (const auto& m : modes) {
    out[m] = n.coefficient(BasisLabel{m.rail, m.k, quad});
  }
  return out;
}

/// Separability bound hbar (|sum_alpha c_j d_j| + |sum_beta c_j d_j|) for an
/// x-combination with coefficients c and a p-combination with coefficients
/// d. Exact arithmetic; the result is in units of hbar.
inline SqrtTwoCoeff bipartition_bound(const Bipartition& b, const ModeCoefficients& cx,
                                      const ModeCoefficients& dp) {
  b.validate();
  auto subset_sum = [&](const std::vector<ModeId>& subset) {
    SqrtTwoCoeff total;
    for (const auto& m : subset) {
      const auto ic = cx.find(m);
      const auto id = dp.find(m);
      if (ic == cx.end() || id == dp.end()) {
        throw DataError("bipartition_bound: coefficient maps do not cover the block");
      }
      total = total + ic->second * id->second;
    }
    return total;
  };
  return abs(subset_sum(b.alpha)) + abs(subset_sum(b.beta));
}

/// One of the seven ways to split the four-mode block
/// {(A,k),(B,k),(A,k+1),(B,k+1)}, with its designated witness pair.
struct BipartitionPattern {
  char label = 'a';                 // 'a' .. 'g'
  Bipartition split;
  bool uses_next_p = false;         // patterns f, g pair X_k with P_{k+1}
};

/// The seven bipartitions of the block S_k, in the conventional order:
/// (a)-(d) single mode vs rest, (e) time split, (f) rail split,
/// (g) diagonal split. (a)-(e) are witnessed by (X_k, P_k); (f) and (g) by
/// (X_k, P_{k+1}).
inline std::vector<BipartitionPattern> enumerate_block_bipartitions(
    std::uint32_t k = 0) {
  const ModeId ak{Rail::a, k}, bk{Rail::b, k};
  const ModeId ak1{Rail::a, k + 1}, bk1{Rail::b, k + 1};
  std::vector<BipartitionPattern> out;
  out.push_back({'a', {{ak}, {bk, ak1, bk1}}, false});
  out.push_back({'b', {{bk}, {ak, ak1, bk1}}, false});
  out.push_back({'c', {{ak1}, {ak, bk, bk1}}, false});
  out.push_back({'d', {{bk1}, {ak, bk, ak1}}, false});
  out.push_back({'e', {{ak, bk}, {ak1, bk1}}, false});
  out.push_back({'f', {{ak, ak1}, {bk, bk1}}, true});
  out.push_back({'g', {{ak, bk1}, {bk, ak1}}, true});
  return out;
}

/// Bound for one pattern evaluated with the extended-EPR nullifier
/// coefficients at slot k.
inline SqrtTwoCoeff pattern_bound(const BipartitionPattern& pattern, std::uint32_t k) {
  const std::vector<ModeId> block = {{Rail::a, k},
                                     {Rail::b, k},
                                     {Rail::a, k + 1},
                                     {Rail::b, k + 1}};
  const NullifierVector xk = exepr_nullifier(k).x_type;
  const NullifierVector p =
      pattern.uses_next_p ? exepr_nullifier(k + 1).p_type : exepr_nullifier(k).p_type;
  return bipartition_bound(pattern.split, mode_coefficients(xk, Quadrature::x, block),
                           mode_coefficients(p, Quadrature::p, block));
}

// ---- full-inseparability verdict -------------------------------------------

struct BlockCheck {
  char pattern = 'a';
  double bound = 0.0;      // hbar units
  double lhs = 0.0;        // <X_k^2> + <P_k^2> (or P_{k+1})
  bool violated = false;   // lhs < bound, i.e. separability excluded
  bool evaluated = true;   // false when P_{k+1} is unavailable at the boundary
};

struct KVerdict {
  std::uint32_t k = 0;
  double var_x = 0.0, var_p = 0.0;
  double margin_db_x = 0.0, margin_db_p = 0.0;  // dB distance to the hbar bound
  bool pass = false;
  bool partial_block = false;  // (f)/(g) checks skipped at the boundary
  std::vector<BlockCheck> blocks;
};

struct InseparabilityReport {
  std::vector<KVerdict> per_k;
  bool overall_pass = false;
  AggregateStats aggregate_x, aggregate_p;
};

/// Van Loock-Furusawa verdict: slot k passes iff <X_k^2> < hbar and
/// <P_k^2> < hbar strictly (point estimates). The seven block bounds are
/// also evaluated; Eq.-style passing implies every one of them is violated.
inline InseparabilityReport full_inseparability_test(const VarianceReport& report,
                                                     long k_max) {
  if (k_max < 0 || report.k_count() <= k_max) {
    throw DataError("full_inseparability_test: report does not cover k = 0.." +
                    std::to_string(k_max));
  }
  InseparabilityReport out;
  out.overall_pass = true;
  for (long k = 0; k <= k_max; ++k) {
    const auto patterns = enumerate_block_bipartitions(static_cast<std::uint32_t>(k));
    KVerdict v;
    v.k = static_cast<std::uint32_t>(k);
    v.var_x = report.x_stats[k].mean_square;
    v.var_p = report.p_stats[k].mean_square;
    v.margin_db_x = 10.0 * std::log10(v.var_x / 1.0);
    v.margin_db_p = 10.0 * std::log10(v.var_p / 1.0);
    v.pass = v.var_x < 1.0 && v.var_p < 1.0;
    const bool have_next_p = k + 1 < report.k_count();
    for (const auto& pattern : patterns) {
      BlockCheck c;
      c.pattern = pattern.label;
      c.bound = pattern_bound(pattern, v.k).to_double();
      if (pattern.uses_next_p && !have_next_p) {
        c.evaluated = false;
        v.partial_block = true;
      } else {
        const double vp =
            pattern.uses_next_p ? report.p_stats[k + 1].mean_square : v.var_p;
        c.lhs = v.var_x + vp;
        c.violated = c.lhs < c.bound;
      }
      v.blocks.push_back(c);
    }
    out.overall_pass = out.overall_pass && v.pass;
    out.per_k.push_back(std::move(v));
  }
  std::vector<VarianceStat> xs(report.x_stats.begin(), report.x_stats.begin() + k_max + 1);
  std::vector<VarianceStat> ps(report.p_stats.begin(), report.p_stats.begin() + k_max + 1);
  out.aggregate_x = aggregate_squeezing(xs);
  out.aggregate_p = aggregate_squeezing(ps);
  return out;
}

// ---- analytic variance oracle ----------------------------------------------

/// Exact Gaussian-model prediction of the shot-normalized nullifier
/// variance.
///
/// Because the analysis slot period equals the optical delay, the nullifier
/// functional recombines the two rails so that all delay phases cancel; what
/// remains is a frequency average of the source spectra over the measure
/// |W(f)|^2 |H(f)|^2 set by the weight function and the detection filter:
///
///   <N^2> = 2 int mu(f) [ eta ((1+b)^2 S_main + (1-b)^2 S_other)/4
///                         + eta L/2 + (1 - eta) ] df / int mu(f) df
///
/// with b = sqrt(1-L). For X the "main" spectrum is source A's x quadrature;
/// for P it is source B's p quadrature. Probe tones and quantization are not
/// part of the Gaussian model.
inline double analytic_variance_oracle(const SqueezerSpec& spec_a,
                                       const SqueezerSpec& spec_b,
                                       const NetworkConfig& config,
                                       const FilterChain* chain,
                                       const WeightFunction& w, NullifierType type,
                                       double sample_rate_hz) {
  spec_a.validate();
  spec_b.validate();
  config.validate();
  if (chain != nullptr && !chain->empty() &&
      chain->sample_rate_hz != sample_rate_hz) {
    throw ConfigError("oracle: filter chain at a different sample rate");
  }
  const double loss = config.fiber_loss;
  const double eta = config.port_efficiency();
  const double b = std::sqrt(1.0 - loss);
  const double w_plus = (1.0 + b) * (1.0 + b) / 4.0;
  const double w_minus = (1.0 - b) * (1.0 - b) / 4.0;

  auto spectrum_of = [](const SqueezerSpec& s, Quadrature q, double f) {
    const SqueezingSpectrum sp = squeezing_spectrum(f, s);
    const bool squeezed = (q == Quadrature::x) ==
                          (s.orientation == SqueezeOrientation::squeeze_x);
    return squeezed ? sp.squeezed : sp.antisqueezed;
  };

  const int m = 1 << 15;  // Simpson panels over [0, pi]
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double omega = M_PI * i / m;
    const double f = omega * sample_rate_hz / (2.0 * M_PI);
    std::complex<double> wsum(0.0, 0.0);
    for (std::size_t j = 0; j < w.samples.size(); ++j) {
      wsum += w.samples[j] * std::polar(1.0, -omega * static_cast<double>(j));
    }
    double mu = std::norm(wsum);
    if (chain != nullptr && !chain->empty()) mu *= chain->power_gain(f);
    double s_main, s_other;
    if (type == NullifierType::X) {
      s_main = spectrum_of(spec_a, Quadrature::x, f);
      s_other = spectrum_of(spec_b, Quadrature::x, f);
    } else {
      s_main = spectrum_of(spec_b, Quadrature::p, f);
      s_other = spectrum_of(spec_a, Quadrature::p, f);
    }
    const double bracket =
        eta * (w_plus * s_main + w_minus * s_other) + eta * loss / 2.0 + (1.0 - eta);
    const double simpson = (i == 0 || i == m) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    num += simpson * mu * bracket;
    den += simpson * mu;
  }
  if (!(den > 0.0)) throw DataError("oracle: weight/filter measure is degenerate");
  return 2.0 * num / den;
}

/// Finds the pump parameter (applied to both squeezers) at which the oracle
/// predicts the target X-nullifier squeezing. Bisection; the oracle is
/// monotone in the pump.
inline double calibrate_pump(double target_db, const SqueezerSpec& proto_a,
                             const SqueezerSpec& proto_b, const NetworkConfig& config,
                             const FilterChain* chain, const WeightFunction& w,
                             double sample_rate_hz) {
  const double target_var = 2.0 * std::pow(10.0, target_db / 10.0);
  auto predict = [&](double pump) {
    SqueezerSpec a = proto_a, b = proto_b;
    a.pump_parameter = pump;
    b.pump_parameter = pump;
    return analytic_variance_oracle(a, b, config, chain, w, NullifierType::X,
                                    sample_rate_hz);
  };
  double lo = 0.0, hi = 0.985;
  if (predict(hi) > target_var) {
    throw DomainError("calibrate_pump: target " + std::to_string(target_db) +
                      " dB unreachable with these losses");
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (predict(mid) > target_var ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dualrail
