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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dualrail/dualrail.hpp"

namespace fs = std::filesystem;

namespace {

using namespace dualrail;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  long seed = -1;
  long frames = -1;
  bool shot_noise_only = false;
  bool no_filter = false;
  bool smoke = false;
};

void add_common_flags(CLI::App* app, CommonFlags* flags) {
  app->add_option("--config", flags->config_path, "configuration file (key = value)");
  app->add_option("--seed", flags->seed, "override master seed");
  app->add_option("--frames", flags->frames, "override frame count");
  app->add_option("--out", flags->out_dir, "output directory");
  app->add_flag("--shot-noise-only", flags->shot_noise_only,
                "replace the signal by vacuum through the identical chain");
  app->add_flag("--no-filter", flags->no_filter, "disable the electric filter chain");
  app->add_flag("--smoke", flags->smoke, "small profile: 10 frames of 1 ms");
}

RunConfig load_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    std::ifstream is(flags.config_path);
    if (!is) throw ConfigError("cannot open config file '" + flags.config_path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    cfg = parse_config_text(ss.str());
  }
  if (flags.smoke) {
    cfg.n_frames = 10;
    cfg.frame_duration_s = 1e-3;
  }
  if (flags.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.frames > 0) cfg.n_frames = flags.frames;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.shot_noise_only) cfg.shot_noise_only = true;
  if (flags.no_filter) cfg.filter_enabled = false;
  cfg.validate();
  return cfg;
}

void print_summary(const RunConfig& cfg, const PipelineResult& result) {
  std::printf("config hash           %s\n", result.config_hash.c_str());
  std::printf("frames                %ld x %.6g ms\n", cfg.n_frames,
              cfg.frame_duration_s * 1e3);
  std::printf("qumodes per rail/frame %ld (nullifier indices: %ld)\n",
              result.qumodes_per_frame, result.nullifier_count);
  std::printf("X squeezing           %.3f dB mean, %.3f dB std, worst %.3f dB (k=%ld)\n",
              result.verdict.aggregate_x.mean_db, result.verdict.aggregate_x.std_db,
              result.verdict.aggregate_x.worst_db, result.verdict.aggregate_x.worst_k);
  std::printf("P squeezing           %.3f dB mean, %.3f dB std, worst %.3f dB (k=%ld)\n",
              result.verdict.aggregate_p.mean_db, result.verdict.aggregate_p.std_db,
              result.verdict.aggregate_p.worst_db, result.verdict.aggregate_p.worst_k);
  std::printf("full inseparability   %s\n",
              result.verdict.overall_pass ? "PASS" : "FAIL");
}

int cmd_run(const CommonFlags& flags, bool simulate_only, bool spectra_only) {
  RunConfig cfg = load_config(flags);
  if (simulate_only) {
    cfg.write_traces = true;
    cfg.write_variance = cfg.write_verdict = cfg.write_autocorr = false;
    cfg.write_spectra = false;
  }
  if (spectra_only) {
    cfg.write_spectra = true;
    cfg.write_variance = cfg.write_verdict = cfg.write_autocorr = false;
    cfg.write_traces = false;
  }
  ArtifactWriter writer(cfg);
  const PipelineResult result = run_pipeline(cfg, &writer);
  print_summary(cfg, result);
  std::printf("artifacts in          %s\n", cfg.out_dir.c_str());
  return 0;
}

// Analysis of previously simulated trace files: frame######.dr (signal) and
// shot_frame######.dr, four channels each in rail-major, x-first order.
int cmd_analyze(const CommonFlags& flags, const std::string& in_dir) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = load_config(flags);
  } else {
    // Recover the configuration from the run manifest.
    std::ifstream is(fs::path(in_dir) / "manifest.txt");
    if (!is) throw ConfigError("analyze: no manifest.txt in '" + in_dir + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    const auto blank = text.find("\n\n");
    if (blank == std::string::npos) throw DataError("analyze: malformed manifest");
    cfg = parse_config_text(text.substr(blank + 2));
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.no_filter) cfg.filter_enabled = false;
    cfg.validate();
  }

  const WeightFunction w = weight_function(cfg.weight);
  const WeightFunction w_pos = positive_part(w);
  const long capacity = qumode_capacity(cfg.frame_duration_s, w);
  const long n_null = capacity - 1;

  // Pass 1 over shot files: normalization and autocorrelation.
  std::array<double, kNumChannels> sum_sq{};
  std::array<long, kNumChannels> count{};
  CorrelationAccumulator corr_a(cfg.autocorr_max_lag), corr_b(cfg.autocorr_max_lag);
  CorrelationAccumulator corr_pa(cfg.autocorr_max_lag), corr_pb(cfg.autocorr_max_lag);
  long n_frames = 0;
  for (;; ++n_frames) {
    char name[40];
    std::snprintf(name, sizeof(name), "shot_frame%06ld.dr", n_frames);
    const fs::path path = fs::path(in_dir) / "traces" / name;
    if (!fs::exists(path)) break;
    const TraceFile file = read_trace_file(path.string());
    for (int ch = 0; ch < kNumChannels && ch < static_cast<int>(file.channels.size());
         ++ch) {
      QuadratureTrace t;
      t.sample_rate_hz = file.sample_rate_hz;
      t.samples = file.channels[ch];
      const auto values = extract_all_qumodes(t, w);
      for (double v : values) sum_sq[ch] += v * v;
      count[ch] += static_cast<long>(values.size());
      if (channel_quad(ch) == Quadrature::x) {
        auto& full = channel_rail(ch) == Rail::a ? corr_a : corr_b;
        auto& pos = channel_rail(ch) == Rail::a ? corr_pa : corr_pb;
        full.add_series(values);
        pos.add_series(extract_all_qumodes(t, w_pos));
      }
    }
  }
  if (n_frames == 0) throw DataError("analyze: no shot trace files in '" + in_dir + "'");

  std::array<double, kNumChannels> norm{};
  for (int ch = 0; ch < kNumChannels; ++ch) {
    norm[ch] = std::sqrt(2.0 * sum_sq[ch] / static_cast<double>(count[ch]));
  }

  // Pass 2 over signal files: nullifier statistics.
  std::vector<VarianceAccumulator> acc_x(n_null), acc_p(n_null);
  for (long frame = 0; frame < n_frames; ++frame) {
    char name[40];
    std::snprintf(name, sizeof(name), "frame%06ld.dr", frame);
    const fs::path path = fs::path(in_dir) / "traces" / name;
    if (!fs::exists(path)) {
      throw DataError("analyze: missing signal trace for frame " +
                      std::to_string(frame));
    }
    const TraceFile file = read_trace_file(path.string());
    QumodeTable table;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      QuadratureTrace t;
      t.sample_rate_hz = file.sample_rate_hz;
      t.samples = file.channels[ch];
      auto values = extract_all_qumodes(t, w);
      for (double& v : values) v /= norm[ch];
      table.set_channel(channel_rail(ch), channel_quad(ch), std::move(values));
    }
    for (long k = 0; k < n_null; ++k) {
      const NullifierPair pair = exepr_nullifier(static_cast<std::uint32_t>(k));
      acc_x[k].add(evaluate(pair.x_type, table));
      acc_p[k].add(evaluate(pair.p_type, table));
    }
  }

  PipelineResult result;
  result.config_hash = config_hash(cfg);
  result.qumodes_per_frame = capacity;
  result.nullifier_count = n_null;
  result.normalization = norm;
  for (long k = 0; k < n_null; ++k) {
    result.report.x_stats.push_back(acc_x[k].stat());
    result.report.p_stats.push_back(acc_p[k].stat());
  }
  result.verdict = full_inseparability_test(result.report, n_null - 1);
  result.autocorr.full_rail_a = corr_a.correlations();
  result.autocorr.full_rail_b = corr_b.correlations();
  result.autocorr.pos_rail_a = corr_pa.correlations();
  result.autocorr.pos_rail_b = corr_pb.correlations();

  const std::string preamble = csv_preamble(result.config_hash, cfg.master_seed);
  fs::create_directories(cfg.out_dir);
  write_variance_csv((fs::path(cfg.out_dir) / "variance_report.csv").string(),
                     result.report, preamble);
  write_autocorr_csv((fs::path(cfg.out_dir) / "autocorrelation.csv").string(),
                     result.autocorr, preamble);
  write_text_file((fs::path(cfg.out_dir) / "verdict.txt").string(),
                  ArtifactWriter::render_verdict(result));
  print_summary(cfg, result);
  return 0;
}

int cmd_nullifiers(long k_max) {
  bool ok = true;
  std::printf("initial squeezed-state nullifiers, per slot k:\n");
  std::printf("  x[A,k]  and  p[B,k]\n\n");
  std::printf("after beamsplitter (entangled pairs):\n");
  {
    const auto nx = bs_transform(NullifierVector::unit(x_of(Rail::a, 0)),
                                 BsDirection::forward);
    const auto np = bs_transform(NullifierVector::unit(p_of(Rail::b, 0)),
                                 BsDirection::forward);
    std::printf("  %s\n  %s\n\n", to_string(nx).c_str(), to_string(np).c_str());
  }
  std::printf("after the T delay on rail B (staggered pairs):\n");
  {
    const auto nx = delay_transform(bs_transform(NullifierVector::unit(x_of(Rail::a, 0)),
                                                 BsDirection::forward));
    const auto np = delay_transform(bs_transform(NullifierVector::unit(p_of(Rail::b, 0)),
                                                 BsDirection::forward));
    std::printf("  %s\n  %s\n\n", to_string(nx).c_str(), to_string(np).c_str());
  }
  std::printf("after the conjugate beamsplitter (extended-EPR nullifiers):\n");
  for (long k = 0; k < k_max; ++k) {
    const NullifierPair derived = derive_exepr_nullifiers(static_cast<std::uint32_t>(k));
    const NullifierPair direct = exepr_nullifier(static_cast<std::uint32_t>(k));
    const bool match_x = derived.x_type.normalized() == direct.x_type;
    const bool match_p = derived.p_type.normalized() == direct.p_type;
    ok = ok && match_x && match_p;
    std::printf("  X_%ld = %s%s\n", k, to_string(derived.x_type.normalized()).c_str(),
                match_x ? "" : "   MISMATCH");
    std::printf("  P_%ld = %s%s\n", k, to_string(derived.p_type.normalized()).c_str(),
                match_p ? "" : "   MISMATCH");
  }
  std::printf("\nweighted-cluster nullifiers (phase-redefined combinations):\n");
  for (long k = 1; k < k_max; ++k) {
    const auto [ha, hb] = derive_cluster_nullifiers(static_cast<std::uint32_t>(k));
    const auto [da, db] = cluster_nullifier(static_cast<std::uint32_t>(k));
    const bool match = (ha == da) && (hb == db);
    ok = ok && match;
    std::printf("  H_[A,%ld] = %s%s\n", k, to_string(ha).c_str(),
                match ? "" : "   MISMATCH");
    std::printf("  H_[B,%ld] = %s\n", k, to_string(hb).c_str());
  }
  std::printf("\ncommutator table ([.,.]/(i hbar)), X_0..X_%ld, P_0..P_%ld:\n", k_max - 1,
              k_max - 1);
  for (long i = 0; i < k_max; ++i) {
    std::printf("  ");
    for (long j = 0; j < k_max; ++j) {
      const auto xi = exepr_nullifier(static_cast<std::uint32_t>(i));
      const auto xj = exepr_nullifier(static_cast<std::uint32_t>(j));
      const SqrtTwoCoeff c = commutator(xi.x_type, xj.p_type);
      ok = ok && c.is_zero();
      std::printf("%s ", to_string(c).c_str());
    }
    std::printf("\n");
  }
  std::printf("\nexact checks: %s\n", ok ? "all passed" : "FAILED");
  return ok ? 0 : 1;
}

int cmd_scan_tc(const CommonFlags& flags, double min_ns, double max_ns, double step_ns,
                long frames, const std::string& csv_path) {
  if (!(step_ns > 0.0) || max_ns < min_ns) {
    throw ConfigError("scan-tc: empty or inverted range");
  }
  RunConfig cfg = load_config(flags);
  if (frames > 0) cfg.n_frames = frames;
  const double half_window_ns = 0.5 * cfg.weight.window_width_s * 1e9;
  if (min_ns < -half_window_ns || max_ns > half_window_ns) {
    throw ConfigError("scan-tc: range must lie within +-window/2");
  }
  FilterChain chain;
  if (cfg.filter_enabled) chain = design_filter_chain(cfg.sample_rate_hz, cfg.filter);
  const long n_total = cfg.settle_samples + cfg.frame_samples();

  std::ostringstream csv;
  csv << csv_preamble(config_hash(cfg), cfg.master_seed) << "tc_ns,max_abs_c\n";
  double best_tc = min_ns, best_c = 1e300, c_at_ends[2] = {0.0, 0.0};
  int idx = 0;
  for (double tc = min_ns; tc <= max_ns + 1e-9; tc += step_ns, ++idx) {
    WeightFunctionParams params = cfg.weight;
    params.balance_offset_s = tc * 1e-9;
    const WeightFunction w = weight_function(params);
    CorrelationAccumulator corr(cfg.autocorr_max_lag);
    for (long frame = 0; frame < cfg.n_frames; ++frame) {
      for (int rail = 0; rail < 2; ++rail) {
        QuadratureTrace vac = generate_vacuum_stream(
            n_total, cfg.sample_rate_hz,
            derive_seed(cfg.master_seed, frame, seed_role::shot_base + 2 * rail));
        if (!chain.empty()) vac = apply_filter(chain, vac);
        vac.samples.erase(vac.samples.begin(), vac.samples.begin() + cfg.settle_samples);
        corr.add_series(extract_all_qumodes(vac, w));
      }
    }
    const auto c = corr.correlations();
    double worst = 0.0;
    for (std::size_t m = 1; m < c.size(); ++m) worst = std::max(worst, std::abs(c[m]));
    csv << format_csv_double(tc) << ',' << format_csv_double(worst) << '\n';
    if (worst < best_c) {
      best_c = worst;
      best_tc = tc;
    }
    if (idx == 0) c_at_ends[0] = worst;
    c_at_ends[1] = worst;
  }
  if (!csv_path.empty()) {
    write_text_file(csv_path, csv.str());
  } else {
    std::fputs(csv.str().c_str(), stdout);
  }
  const bool degenerate = c_at_ends[0] < 0.01 && c_at_ends[1] < 0.01 && best_c < 0.01 &&
                          !cfg.filter_enabled;
  std::printf("minimizer: t_c = %.3f ns, max|C(m!=0)| = %.3g%s\n", best_tc, best_c,
              degenerate ? "  (degenerate: correlations vanish without the filter)"
                         : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-rail time-multiplexed cluster-state simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, sim_flags, spectra_flags, analyze_flags, scan_flags;
  std::string analyze_in;
  long nullifier_kmax = 4;
  double scan_min = 0.0, scan_max = 5.0, scan_step = 0.5;
  long scan_frames = 0;
  std::string scan_csv;

  CLI::App* run = app.add_subcommand("run", "simulate and analyze in one pass");
  add_common_flags(run, &run_flags);

  CLI::App* sim = app.add_subcommand("simulate", "simulate frames and persist traces");
  add_common_flags(sim, &sim_flags);

  CLI::App* spectra = app.add_subcommand("spectra", "emit power-spectrum CSVs only");
  add_common_flags(spectra, &spectra_flags);

  CLI::App* analyze = app.add_subcommand("analyze", "analyze previously written traces");
  add_common_flags(analyze, &analyze_flags);
  analyze->add_option("--in", analyze_in, "directory holding traces/ and manifest.txt")
      ->required();

  CLI::App* nullifiers =
      app.add_subcommand("nullifiers", "print the exact nullifier derivation");
  nullifiers->add_option("--kmax", nullifier_kmax, "temporal indices to print");

  CLI::App* scan = app.add_subcommand("scan-tc", "scan the weight balance offset t_c");
  add_common_flags(scan, &scan_flags);
  scan->add_option("--min", scan_min, "range start, ns");
  scan->add_option("--max", scan_max, "range end, ns");
  scan->add_option("--step", scan_step, "step, ns");
  scan->add_option("--scan-frames", scan_frames, "shot frames per candidate");
  scan->add_option("--csv", scan_csv, "write scan CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags, false, false);
    if (sim->parsed()) return cmd_run(sim_flags, true, false);
    if (spectra->parsed()) return cmd_run(spectra_flags, false, true);
    if (analyze->parsed()) return cmd_analyze(analyze_flags, analyze_in);
    if (nullifiers->parsed()) return cmd_nullifiers(nullifier_kmax);
    if (scan->parsed()) {
      return cmd_scan_tc(scan_flags, scan_min, scan_max, scan_step, scan_frames,
                         scan_csv);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
