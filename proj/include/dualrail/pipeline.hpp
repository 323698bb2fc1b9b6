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

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dualrail/config.hpp"
#include "dualrail/detection.hpp"
#include "dualrail/io.hpp"
#include "dualrail/modes.hpp"
#include "dualrail/network.hpp"
#include "dualrail/nullifiers.hpp"
#include "dualrail/source.hpp"
#include "dualrail/trace.hpp"
#include "dualrail/witness.hpp"

namespace dualrail {

inline constexpr int kNumChannels = 4;

inline int channel_index(Rail rail, Quadrature quad) {
  return (rail == Rail::a ? 0 : 2) + (quad == Quadrature::x ? 0 : 1);
}

inline Rail channel_rail(int ch) { return ch < 2 ? Rail::a : Rail::b; }
inline Quadrature channel_quad(int ch) {
  return ch % 2 == 0 ? Quadrature::x : Quadrature::p;
}

inline std::string channel_name(int ch) {
  std::string s = "rail";
  s += to_char(channel_rail(ch));
  s += '_';
  s += to_char(channel_quad(ch));
  return s;
}

// Seed roles, one per independent physical noise source within a frame.
namespace seed_role {
inline constexpr std::uint64_t signal = 0x01;
inline constexpr std::uint64_t shot_base = 0x10;         // + channel
inline constexpr std::uint64_t dark_signal_base = 0x20;  // + channel
inline constexpr std::uint64_t dark_shot_base = 0x30;    // + channel
inline constexpr std::uint64_t dark_reference = 0x40;
}  // namespace seed_role

/// Mergeable accumulator for mean-square statistics.
struct VarianceAccumulator {
  double sum_v = 0.0, sum_sq = 0.0, sum_quad = 0.0;
  long n = 0;

  void add(double v) {
    const double q = v * v;
    sum_v += v;
    sum_sq += q;
    sum_quad += q * q;
    ++n;
  }
  void merge(const VarianceAccumulator& o) {
    sum_v += o.sum_v;
    sum_sq += o.sum_sq;
    sum_quad += o.sum_quad;
    n += o.n;
  }
  VarianceStat stat() const {
    if (n < 2) throw SizeError("variance accumulator: need at least two values");
    VarianceStat s;
    s.n = n;
    s.mean = sum_v / n;
    s.mean_square = sum_sq / n;
    const double var_of_sq =
        std::max(0.0, (sum_quad / n - s.mean_square * s.mean_square) * n / (n - 1.0));
    s.std_error = std::sqrt(var_of_sq / n);
    const double se_mean = std::sqrt(std::max(s.mean_square, 0.0) / n);
    s.nonzero_mean = se_mean > 0.0 && std::abs(s.mean) > 5.0 * se_mean;
    return s;
  }
};

/// Mergeable lag-correlation accumulator; lag products never cross frames.
struct CorrelationAccumulator {
  std::vector<double> lag_sum;  // index m
  std::vector<long> lag_count;
  double sq_sum = 0.0;
  long sq_count = 0;

  explicit CorrelationAccumulator(long max_lag = 5)
      : lag_sum(max_lag + 1, 0.0), lag_count(max_lag + 1, 0) {}

  void add_series(const std::vector<double>& v) {
    const long n = static_cast<long>(v.size());
    for (long m = 0; m < static_cast<long>(lag_sum.size()); ++m) {
      for (long k = 0; k + m < n; ++k) lag_sum[m] += v[k] * v[k + m];
      lag_count[m] += std::max<long>(0, n - m);
    }
    for (double x : v) sq_sum += x * x;
    sq_count += n;
  }
  void merge(const CorrelationAccumulator& o) {
    for (std::size_t m = 0; m < lag_sum.size(); ++m) {
      lag_sum[m] += o.lag_sum[m];
      lag_count[m] += o.lag_count[m];
    }
    sq_sum += o.sq_sum;
    sq_count += o.sq_count;
  }
  std::vector<double> correlations() const {
    if (sq_count == 0 || !(sq_sum > 0.0)) {
      throw DataError("correlation accumulator: no data");
    }
    const double den = sq_sum / static_cast<double>(sq_count);
    std::vector<double> c(lag_sum.size());
    for (std::size_t m = 0; m < c.size(); ++m) {
      c[m] = lag_count[m] > 0 ? (lag_sum[m] / lag_count[m]) / den : 0.0;
    }
    return c;
  }
  /// Standard error of C(m) under the null (independent values).
  double null_std_error(long m) const {
    return lag_count[m] > 0 ? 1.0 / std::sqrt(static_cast<double>(lag_count[m])) : 0.0;
  }
};

/// Averaged-periodogram accumulator over frames.
struct SpectrumAccumulator {
  std::vector<double> power_sum;
  long n_segments = 0;
  int n_fft = 0;
  double sample_rate_hz = 0.0;

  void add_trace(const QuadratureTrace& trace, int fft_size) {
    if (trace.samples.size() < static_cast<std::size_t>(fft_size)) return;
    const SpectrumEstimate est = power_spectrum(trace, fft_size);
    if (power_sum.empty()) {
      power_sum.assign(est.power.size(), 0.0);
      n_fft = fft_size;
      sample_rate_hz = trace.sample_rate_hz;
    }
    for (std::size_t j = 0; j < power_sum.size(); ++j) {
      power_sum[j] += est.power[j] * est.n_averages;
    }
    n_segments += est.n_averages;
  }
  void merge(const SpectrumAccumulator& o) {
    if (o.power_sum.empty()) return;
    if (power_sum.empty()) {
      *this = o;
      return;
    }
    for (std::size_t j = 0; j < power_sum.size(); ++j) power_sum[j] += o.power_sum[j];
    n_segments += o.n_segments;
  }
  SpectrumEstimate estimate() const {
    if (n_segments == 0) throw DataError("spectrum accumulator: no segments");
    SpectrumEstimate est;
    est.n_fft = n_fft;
    est.n_averages = static_cast<int>(n_segments);
    est.power.resize(power_sum.size());
    est.frequency_hz.resize(power_sum.size());
    for (std::size_t j = 0; j < power_sum.size(); ++j) {
      est.power[j] = power_sum[j] / static_cast<double>(n_segments);
      est.frequency_hz[j] = sample_rate_hz * static_cast<double>(j) / n_fft;
    }
    return est;
  }
};

struct PipelineResult {
  std::string config_hash;
  long qumodes_per_frame = 0;
  long nullifier_count = 0;  // per-frame temporal indices carrying X_k, P_k
  std::array<double, kNumChannels> shot_mean_square{};
  std::array<double, kNumChannels> normalization{};
  VarianceReport report;
  InseparabilityReport verdict;
  AutocorrResult autocorr;
  std::map<std::string, SpectrumEstimate> spectra;
};

namespace detail {

inline QuadratureTrace trim_front(QuadratureTrace t, long n) {
  t.samples.erase(t.samples.begin(), t.samples.begin() + n);
  return t;
}

struct FrameArtifacts {
  // Populated only when the corresponding output toggle is on.
  std::vector<QuadratureTrace> traces;  // detected channels, trimmed
  std::string trace_file;               // file name relative to out dir
};

struct ShotFrame {
  std::array<std::vector<double>, kNumChannels> qumodes;
  std::array<std::vector<double>, 2> qumodes_pos;  // positive-part weights, x per rail
  std::map<std::string, SpectrumAccumulator> spectra;
  FrameArtifacts artifacts;
};

struct SignalFrame {
  std::vector<double> x_values, p_values;  // normalized nullifier values per k
  std::array<std::vector<double>, kNumChannels> qumodes_normalized;
  std::map<std::string, SpectrumAccumulator> spectra;
  FrameArtifacts artifacts;
};

/// Shared per-run machinery: designed filter, weights, derived sizes.
struct PipelinePlan {
  RunConfig cfg;
  FilterChain chain;  // empty when the filter is disabled
  WeightFunction weight, weight_pos;
  long n_frame = 0, n_settle = 0;
  long capacity = 0, n_nullifiers = 0;
  int workers = 1;

  explicit PipelinePlan(const RunConfig& config) : cfg(config) {
    cfg.validate();
    if (cfg.filter_enabled) {
      chain = design_filter_chain(cfg.sample_rate_hz, cfg.filter);
    } else {
      chain.sample_rate_hz = cfg.sample_rate_hz;
    }
    weight = weight_function(cfg.weight);
    weight_pos = positive_part(weight);
    n_frame = cfg.frame_samples();
    n_settle = cfg.settle_samples;
    capacity = qumode_capacity(cfg.frame_duration_s, weight);
    if (capacity < 2) {
      throw ConfigError("pipeline: frame too short for even one nullifier");
    }
    n_nullifiers = capacity - 1;
    workers = cfg.workers > 0
                  ? cfg.workers
                  : std::max(1, std::min(8, static_cast<int>(
                                                std::thread::hardware_concurrency())));
  }

  QuadratureTrace detect(QuadratureTrace raw, bool with_tones, double frame_start_s,
                         QuadratureTrace* keep_unfiltered) const {
    if (with_tones && !cfg.network.probe_tones.empty()) {
      raw = inject_probe_tones(raw, cfg.network.probe_tones, frame_start_s);
    }
    if (keep_unfiltered != nullptr) {
      *keep_unfiltered = trim_front(raw, n_settle);
    }
    if (!chain.empty()) raw = apply_filter(chain, raw);
    QuadratureTrace out = trim_front(std::move(raw), n_settle);
    if (cfg.quantizer_enabled) {
      out = quantize(out, cfg.quantizer_bits, cfg.quantizer_full_scale);
    }
    return out;
  }

  ShotFrame run_shot_frame(long frame, bool want_spectra, bool want_traces) const {
    ShotFrame result;
    const long n_total = n_settle + n_frame;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      QuadratureTrace vac = generate_vacuum_stream(
          n_total, cfg.sample_rate_hz,
          derive_seed(cfg.master_seed, frame, seed_role::shot_base + ch));
      vac.rail = channel_rail(ch);
      vac.quadrature = channel_quad(ch);
      if (cfg.dark_noise_enabled) {
        vac = add_dark_noise(
            vac, cfg.dark_noise_db,
            derive_seed(cfg.master_seed, frame, seed_role::dark_shot_base + ch));
      }
      QuadratureTrace unfiltered;
      QuadratureTrace det = detect(std::move(vac), /*with_tones=*/false, 0.0,
                                   want_spectra ? &unfiltered : nullptr);
      if (want_spectra) {
        result.spectra["shot_" + channel_name(ch)].add_trace(det, cfg.spectrum_n_fft);
        if (!chain.empty()) {
          result.spectra["shot_unfiltered_" + channel_name(ch)].add_trace(
              unfiltered, cfg.spectrum_n_fft);
        }
      }
      result.qumodes[ch] = extract_all_qumodes(det, weight);
      if (channel_quad(ch) == Quadrature::x) {
        result.qumodes_pos[channel_rail(ch) == Rail::a ? 0 : 1] =
            extract_all_qumodes(det, weight_pos);
      }
      if (want_traces) result.artifacts.traces.push_back(std::move(det));
    }
    if (want_spectra && cfg.dark_noise_enabled) {
      QuadratureTrace dark;
      dark.sample_rate_hz = cfg.sample_rate_hz;
      dark.kind = TraceKind::dark_noise;
      dark.samples.assign(n_total, 0.0);
      dark = add_dark_noise(dark, cfg.dark_noise_db,
                            derive_seed(cfg.master_seed, frame, seed_role::dark_reference));
      QuadratureTrace unfiltered;
      QuadratureTrace det =
          detect(std::move(dark), /*with_tones=*/false, 0.0, &unfiltered);
      result.spectra["dark"].add_trace(det, cfg.spectrum_n_fft);
      if (!chain.empty()) {
        result.spectra["dark_unfiltered"].add_trace(unfiltered, cfg.spectrum_n_fft);
      }
    }
    if (want_traces) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "shot_frame%06ld.dr", frame);
      result.artifacts.trace_file = buf;
    }
    return result;
  }

  SignalFrame run_signal_frame(long frame,
                               const std::array<double, kNumChannels>& normalization,
                               bool want_spectra, bool want_traces,
                               bool want_qumodes) const {
    SignalFrame result;
    const long n_total = n_settle + n_frame;
    ExeprStreams streams = build_exepr_streams(
        cfg.squeezer_a, cfg.squeezer_b, cfg.network, n_total, cfg.sample_rate_hz,
        derive_seed(cfg.master_seed, frame, seed_role::signal));
    const double dt = 1.0 / cfg.sample_rate_hz;
    const double frame_start =
        static_cast<double>(frame) * cfg.frame_duration_s - n_settle * dt;

    QumodeTable table;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      QuadratureTrace* src = nullptr;
      if (ch == 0) src = &streams.rail_a.x;
      if (ch == 1) src = &streams.rail_a.p;
      if (ch == 2) src = &streams.rail_b.x;
      if (ch == 3) src = &streams.rail_b.p;
      QuadratureTrace raw = std::move(*src);
      if (cfg.dark_noise_enabled) {
        raw = add_dark_noise(
            raw, cfg.dark_noise_db,
            derive_seed(cfg.master_seed, frame, seed_role::dark_signal_base + ch));
      }
      QuadratureTrace det =
          detect(std::move(raw), /*with_tones=*/true, frame_start, nullptr);
      if (want_spectra) {
        result.spectra["signal_" + channel_name(ch)].add_trace(det, cfg.spectrum_n_fft);
      }
      std::vector<double> values = extract_all_qumodes(det, weight);
      const double inv = 1.0 / normalization[ch];
      for (double& v : values) v *= inv;
      if (want_qumodes) result.qumodes_normalized[ch] = values;
      table.set_channel(channel_rail(ch), channel_quad(ch), std::move(values));
      if (want_traces) result.artifacts.traces.push_back(std::move(det));
    }

    result.x_values.reserve(n_nullifiers);
    result.p_values.reserve(n_nullifiers);
    for (long k = 0; k < n_nullifiers; ++k) {
      const NullifierPair pair = exepr_nullifier(static_cast<std::uint32_t>(k));
      result.x_values.push_back(evaluate(pair.x_type, table));
      result.p_values.push_back(evaluate(pair.p_type, table));
    }
    if (want_traces) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "frame%06ld.dr", frame);
      result.artifacts.trace_file = buf;
    }
    return result;
  }
};

/// Runs produce(frame) for all frames, up to `workers` concurrently, and
/// feeds the results to merge in frame order. Determinism does not depend
/// on the worker count.
template <typename Result, typename Produce, typename Merge>
void for_each_frame_ordered(long n_frames, int workers, Produce produce, Merge merge) {
  if (workers <= 1) {
    for (long f = 0; f < n_frames; ++f) merge(f, produce(f));
    return;
  }
  for (long start = 0; start < n_frames; start += workers) {
    const long end = std::min(n_frames, start + workers);
    std::vector<std::future<Result>> futures;
    futures.reserve(end - start);
    for (long f = start; f < end; ++f) {
      futures.push_back(std::async(std::launch::async, produce, f));
    }
    for (long f = start; f < end; ++f) merge(f, futures[f - start].get());
  }
}

}  // namespace detail

/// Optional artifact sink; methods are called in deterministic frame order.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(const RunConfig& cfg)
      : cfg_(cfg), hash_(config_hash(cfg)),
        preamble_(csv_preamble(hash_, cfg.master_seed)) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    if (cfg.write_traces) fs::create_directories(fs::path(cfg.out_dir) / "traces");
    if (cfg.write_qumodes) {
      qumodes_.open(fs::path(cfg.out_dir) / "qumodes.csv", std::ios::trunc);
      write_qumode_csv_header(qumodes_, preamble_);
    }
  }

  void frame_traces(const detail::FrameArtifacts& artifacts) {
    if (!cfg_.write_traces || artifacts.traces.empty()) return;
    std::vector<const QuadratureTrace*> ptrs;
    for (const auto& t : artifacts.traces) ptrs.push_back(&t);
    const auto path =
        std::filesystem::path(cfg_.out_dir) / "traces" / artifacts.trace_file;
    write_trace_file(path.string(), ptrs);
  }

  void frame_qumodes(const std::array<std::vector<double>, kNumChannels>& qumodes) {
    if (!cfg_.write_qumodes || !qumodes_.is_open()) return;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      append_qumode_rows(qumodes_, channel_rail(ch), channel_quad(ch), qumodes[ch]);
    }
  }

  void finalize(const PipelineResult& result) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg_.out_dir);
    write_text_file((dir / "manifest.txt").string(),
                    "dualrail run manifest\nconfig_hash = " + hash_ +
                        "\nmaster_seed = " + std::to_string(cfg_.master_seed) +
                        "\n\n" + canonical_config_text(cfg_));
    if (cfg_.write_variance) {
      write_variance_csv((dir / "variance_report.csv").string(), result.report,
                         preamble_);
    }
    if (cfg_.write_autocorr) {
      write_autocorr_csv((dir / "autocorrelation.csv").string(), result.autocorr,
                         preamble_);
    }
    if (cfg_.write_spectra) {
      for (const auto& [name, est] : result.spectra) {
        write_spectrum_csv((dir / ("spectrum_" + name + ".csv")).string(), est,
                           /*reference=*/1.0, preamble_);
      }
    }
    if (cfg_.write_verdict) {
      write_text_file((dir / "verdict.txt").string(), render_verdict(result));
    }
  }

  static std::string render_verdict(const PipelineResult& r) {
    std::ostringstream os;
    os << "full inseparability: " << (r.verdict.overall_pass ? "PASS" : "FAIL")
       << " (criterion: <X_k^2> < hbar and <P_k^2> < hbar for all k)\n";
    os << "temporal indices tested per rail: " << r.verdict.per_k.size() << "\n";
    auto agg = [&os](const char* name, const AggregateStats& a) {
      os << name << ": mean " << a.mean_db << " dB, std " << a.std_db
         << " dB, worst " << a.worst_db << " dB at k=" << a.worst_k << "\n";
    };
    agg("X squeezing", r.verdict.aggregate_x);
    agg("P squeezing", r.verdict.aggregate_p);
    os << "bound: -3.0103 dB (variance = hbar)\n";
    bool all_blocks = true;
    for (const auto& v : r.verdict.per_k) {
      for (const auto& b : v.blocks) {
        if (b.evaluated && !b.violated) all_blocks = false;
      }
    }
    os << "seven four-mode block inequalities violated everywhere: "
       << (all_blocks ? "yes" : "no") << "\n";
    return os.str();
  }

  const std::string& hash() const { return hash_; }
  const std::string& preamble() const { return preamble_; }

 private:
  RunConfig cfg_;
  std::string hash_;
  std::string preamble_;
  std::ofstream qumodes_;
};

/// End-to-end run: shot pass (normalization, autocorrelation, shot spectra),
/// then signal pass (nullifier statistics, verdict, signal spectra).
/// In shot-noise-only mode the signal pass re-analyzes vacuum frames through
/// the identical chain instead.
inline PipelineResult run_pipeline(const RunConfig& cfg, ArtifactWriter* writer = nullptr) {
  const detail::PipelinePlan plan(cfg);
  PipelineResult result;
  result.config_hash = config_hash(cfg);
  result.qumodes_per_frame = plan.capacity;
  result.nullifier_count = plan.n_nullifiers;

  const bool want_spectra = cfg.write_spectra;
  const bool want_traces = writer != nullptr && cfg.write_traces;
  const bool want_qumodes = writer != nullptr && cfg.write_qumodes;

  // Pass 1: shot-noise references through the identical detection chain.
  std::array<double, kNumChannels> shot_sum{};
  std::array<long, kNumChannels> shot_count{};
  CorrelationAccumulator corr_full_a(cfg.autocorr_max_lag), corr_full_b(cfg.autocorr_max_lag);
  CorrelationAccumulator corr_pos_a(cfg.autocorr_max_lag), corr_pos_b(cfg.autocorr_max_lag);
  std::map<std::string, SpectrumAccumulator> spectra;

  detail::for_each_frame_ordered<detail::ShotFrame>(
      cfg.n_frames, plan.workers,
      [&](long frame) {
        return plan.run_shot_frame(frame, want_spectra, want_traces);
      },
      [&](long /*frame*/, detail::ShotFrame&& sf) {
        for (int ch = 0; ch < kNumChannels; ++ch) {
          for (double v : sf.qumodes[ch]) shot_sum[ch] += v * v;
          shot_count[ch] += static_cast<long>(sf.qumodes[ch].size());
        }
        corr_full_a.add_series(sf.qumodes[channel_index(Rail::a, Quadrature::x)]);
        corr_full_b.add_series(sf.qumodes[channel_index(Rail::b, Quadrature::x)]);
        corr_pos_a.add_series(sf.qumodes_pos[0]);
        corr_pos_b.add_series(sf.qumodes_pos[1]);
        for (auto& [name, acc] : sf.spectra) spectra[name].merge(acc);
        if (writer != nullptr) writer->frame_traces(sf.artifacts);
      });

  std::array<double, kNumChannels> norm{};
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (shot_count[ch] == 0) throw DataError("pipeline: no shot qumodes extracted");
    result.shot_mean_square[ch] = shot_sum[ch] / static_cast<double>(shot_count[ch]);
    if (!(result.shot_mean_square[ch] > 0.0)) {
      throw DataError("pipeline: degenerate shot-noise normalization");
    }
    norm[ch] = std::sqrt(2.0 * result.shot_mean_square[ch]);
  }
  result.normalization = norm;
  result.autocorr.full_rail_a = corr_full_a.correlations();
  result.autocorr.full_rail_b = corr_full_b.correlations();
  result.autocorr.pos_rail_a = corr_pos_a.correlations();
  result.autocorr.pos_rail_b = corr_pos_b.correlations();

  // Pass 2: signal frames (or normalized vacuum in shot-only mode).
  std::vector<VarianceAccumulator> acc_x(plan.n_nullifiers), acc_p(plan.n_nullifiers);
  detail::for_each_frame_ordered<detail::SignalFrame>(
      cfg.n_frames, plan.workers,
      [&](long frame) -> detail::SignalFrame {
        if (!cfg.shot_noise_only) {
          return plan.run_signal_frame(frame, norm, want_spectra, want_traces,
                                       want_qumodes);
        }
        // Shot-only: rebuild the same vacuum frames and analyze them as if
        // they were the signal.
        detail::ShotFrame sf = plan.run_shot_frame(frame, false, false);
        detail::SignalFrame out;
        QumodeTable table;
        for (int ch = 0; ch < kNumChannels; ++ch) {
          std::vector<double> values = std::move(sf.qumodes[ch]);
          const double inv = 1.0 / norm[ch];
          for (double& v : values) v *= inv;
          if (want_qumodes) out.qumodes_normalized[ch] = values;
          table.set_channel(channel_rail(ch), channel_quad(ch), std::move(values));
        }
        for (long k = 0; k < plan.n_nullifiers; ++k) {
          const NullifierPair pair = exepr_nullifier(static_cast<std::uint32_t>(k));
          out.x_values.push_back(evaluate(pair.x_type, table));
          out.p_values.push_back(evaluate(pair.p_type, table));
        }
        return out;
      },
      [&](long /*frame*/, detail::SignalFrame&& sf) {
        for (long k = 0; k < plan.n_nullifiers; ++k) {
          acc_x[k].add(sf.x_values[k]);
          acc_p[k].add(sf.p_values[k]);
        }
        for (auto& [name, acc] : sf.spectra) spectra[name].merge(acc);
        if (writer != nullptr) {
          writer->frame_traces(sf.artifacts);
          writer->frame_qumodes(sf.qumodes_normalized);
        }
      });

  for (long k = 0; k < plan.n_nullifiers; ++k) {
    result.report.x_stats.push_back(acc_x[k].stat());
    result.report.p_stats.push_back(acc_p[k].stat());
  }
  result.verdict = full_inseparability_test(result.report, plan.n_nullifiers - 1);
  for (const auto& [name, acc] : spectra) {
    result.spectra[name] = acc.estimate();
  }
  if (writer != nullptr) writer->finalize(result);
  return result;
}

}  // namespace dualrail
