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

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dualrail/config.hpp"
#include "dualrail/io.hpp"
#include "dualrail/source.hpp"
#include "gtest/gtest.h"

namespace dualrail {
namespace {

TEST(Config, DefaultsAreValidAndPaperShaped) {
  RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.sample_rate_hz, 100e6);
  EXPECT_EQ(cfg.network.delay_time_s, 160e-9);
  EXPECT_EQ(cfg.network.fiber_loss, 0.11);
  EXPECT_EQ(cfg.network.visibility, 0.97);
  EXPECT_EQ(cfg.network.quantum_efficiency, 0.99);
  EXPECT_EQ(cfg.squeezer_a.cavity_hwhm_hz, 17e6);
  EXPECT_EQ(cfg.squeezer_a.orientation, SqueezeOrientation::squeeze_x);
  EXPECT_EQ(cfg.squeezer_b.orientation, SqueezeOrientation::squeeze_p);
  EXPECT_EQ(cfg.weight.window_width_s, 120e-9);
  EXPECT_EQ(cfg.weight.balance_offset_s, 2e-9);
  EXPECT_EQ(cfg.weight.center_offset_s, 95e-9);
  ASSERT_EQ(cfg.network.probe_tones.size(), 2u);
  EXPECT_EQ(cfg.network.probe_tones[0].frequency_hz, 231e3);
  EXPECT_EQ(cfg.network.probe_tones[1].frequency_hz, 326e3);
  EXPECT_FALSE(cfg.quantizer_enabled);
  EXPECT_FALSE(cfg.dark_noise_enabled);
  // 100 MHz sampling makes the 160 ns slot exactly 16 samples.
  EXPECT_EQ(cfg.frame_samples(), 100000);
}

TEST(Config, CanonicalTextRoundTrips) {
  RunConfig cfg;
  cfg.master_seed = 31337;
  cfg.n_frames = 42;
  cfg.squeezer_a.pump_parameter = 0.123456789012345;
  cfg.network.probe_tones = {{111e3, 1.5, 0.25}};
  cfg.filter.highpass_family = HighpassFamily::butterworth;
  cfg.quantizer_enabled = true;
  cfg.out_dir = "some/dir";
  const std::string text = canonical_config_text(cfg);
  const RunConfig back = parse_config_text(text);
  EXPECT_EQ(canonical_config_text(back), text);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_EQ(back.master_seed, 31337u);
  EXPECT_EQ(back.squeezer_a.pump_parameter, cfg.squeezer_a.pump_parameter);
  ASSERT_EQ(back.network.probe_tones.size(), 1u);
  EXPECT_EQ(back.network.probe_tones[0].phase_rad, 0.25);
  EXPECT_EQ(back.filter.highpass_family, HighpassFamily::butterworth);
}

TEST(Config, HashIsSensitive) {
  RunConfig a, b;
  b.master_seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  RunConfig c;
  c.squeezer_b.pump_parameter += 1e-9;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, ParseErrorsCarryFieldPaths) {
  try {
    parse_config_text("network.fiberloss = 0.5\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("network.fiberloss"), std::string::npos);
    EXPECT_NE(what.find("unknown key"), std::string::npos);
    EXPECT_NE(what.find("line 1"), std::string::npos);
  }
  try {
    parse_config_text("# comment\nn_frames = ten\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("n_frames"), std::string::npos);
    EXPECT_NE(what.find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("just some words\n"), ConfigError);
  EXPECT_THROW(parse_config_text("squeezer_a.orientation = sideways\n"), ConfigError);
  EXPECT_THROW(parse_config_text("network.probe_tones = 100:2\n"), ConfigError);
}

TEST(Config, ValidationCatchesGridMismatches) {
  RunConfig cfg;
  cfg.frame_duration_s = 1.000000007e-3;  // not an integer sample count
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.weight.grid_step_s = 8e-9;  // != 1 / sample_rate
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.settle_samples = 4;  // cannot cover the 16-sample delay
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.spectrum_n_fft = 1000;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(TraceIo, RoundTripsBitExactly) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dualrail_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "roundtrip.dr").string();

  QuadratureTrace a = generate_vacuum_stream(777, 100e6, 5);
  QuadratureTrace b = generate_vacuum_stream(777, 100e6, 6);
  b.quadrature = Quadrature::p;
  write_trace_file(path, {&a, &b});

  const TraceFile file = read_trace_file(path);
  EXPECT_EQ(file.sample_rate_hz, 100e6);
  ASSERT_EQ(file.channels.size(), 2u);
  EXPECT_EQ(file.channels[0], a.samples);
  EXPECT_EQ(file.channels[1], b.samples);

  // Header layout: 16-byte magic, then three little-endian u32 fields.
  std::ifstream is(path, std::ios::binary);
  char head[28];
  is.read(head, sizeof(head));
  EXPECT_EQ(std::string(head, 7), "DRTRACE");
  const auto u32 = [&head](int offset) {
    return static_cast<unsigned>(static_cast<unsigned char>(head[offset])) |
           (static_cast<unsigned>(static_cast<unsigned char>(head[offset + 1])) << 8) |
           (static_cast<unsigned>(static_cast<unsigned char>(head[offset + 2])) << 16) |
           (static_cast<unsigned>(static_cast<unsigned char>(head[offset + 3])) << 24);
  };
  EXPECT_EQ(u32(16), 100000000u);
  EXPECT_EQ(u32(20), 2u);
  EXPECT_EQ(u32(24), 777u);

  // Mismatched channels rejected; bad files rejected.
  QuadratureTrace c = generate_vacuum_stream(100, 100e6, 7);
  EXPECT_THROW(write_trace_file(path + ".bad", {&a, &c}), ShapeError);
  std::ofstream(dir / "garbage.dr", std::ios::binary) << "not a trace";
  EXPECT_THROW(read_trace_file((dir / "garbage.dr").string()), DataError);
  fs::remove_all(dir);
}

TEST(CsvWriters, PreambleAndSchema) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dualrail_csv_test";
  fs::create_directories(dir);

  VarianceReport report;
  report.x_stats.push_back({0.74, 0.01, 0.0, 100, false});
  report.p_stats.push_back({1.25, 0.02, 0.0, 100, false});
  const std::string preamble = csv_preamble("deadbeef01234567", 99);
  const std::string path = (dir / "variance.csv").string();
  write_variance_csv(path, report, preamble);

  std::ifstream is(path);
  std::string line1, line2, line3, line4;
  std::getline(is, line1);
  std::getline(is, line2);
  std::getline(is, line3);
  std::getline(is, line4);
  EXPECT_EQ(line1, "# config=deadbeef01234567 seed=99");
  EXPECT_EQ(line2, "k,type,variance,std_error,db,pass");
  EXPECT_EQ(line3.substr(0, 9), "0,X,0.74,");
  EXPECT_NE(line3.find(",1"), std::string::npos);   // pass flag
  EXPECT_EQ(line4.substr(0, 9), "0,P,1.25,");
  EXPECT_NE(line4.find(",0"), std::string::npos);   // above hbar: fail
  fs::remove_all(dir);
}

}  // namespace
}  // namespace dualrail
