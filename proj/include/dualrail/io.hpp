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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dualrail/common.hpp"
#include "dualrail/detection.hpp"
#include "dualrail/trace.hpp"
#include "dualrail/witness.hpp"

namespace dualrail {

// Binary multi-channel trace container:
//   16-byte magic/version header,
//   u32 little-endian: sample_rate_hz, channel_count, samples_per_channel,
//   then channel-major f64 little-endian samples.
inline constexpr std::array<char, 16> kTraceMagic = {
    'D', 'R', 'T', 'R', 'A', 'C', 'E', '\0', 'v', '1', '\0', 0, 0, 0, 0, 0};

namespace detail {

inline void put_u32_le(std::ofstream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32_le(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64_le(std::ofstream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64_le(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

inline void write_trace_file(const std::string& path,
                             const std::vector<const QuadratureTrace*>& channels) {
  if (channels.empty()) throw SizeError("trace file: no channels");
  const std::size_t n = channels.front()->samples.size();
  const double fs = channels.front()->sample_rate_hz;
  for (const auto* t : channels) {
    if (t->samples.size() != n || t->sample_rate_hz != fs) {
      throw ShapeError("trace file: channels must share length and sample rate");
    }
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("trace file: cannot open '" + path + "' for writing");
  os.write(kTraceMagic.data(), kTraceMagic.size());
  detail::put_u32_le(os, static_cast<std::uint32_t>(fs));
  detail::put_u32_le(os, static_cast<std::uint32_t>(channels.size()));
  detail::put_u32_le(os, static_cast<std::uint32_t>(n));
  for (const auto* t : channels) {
    for (double v : t->samples) detail::put_f64_le(os, v);
  }
  if (!os) throw Error("trace file: write failed for '" + path + "'");
}

struct TraceFile {
  double sample_rate_hz = 0.0;
  std::vector<std::vector<double>> channels;
};

inline TraceFile read_trace_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("trace file: cannot open '" + path + "'");
  std::array<char, 16> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kTraceMagic) {
    throw DataError("trace file: bad magic in '" + path + "'");
  }
  TraceFile f;
  f.sample_rate_hz = static_cast<double>(detail::get_u32_le(is));
  const std::uint32_t n_channels = detail::get_u32_le(is);
  const std::uint32_t n_samples = detail::get_u32_le(is);
  f.channels.resize(n_channels);
  for (auto& ch : f.channels) {
    ch.resize(n_samples);
    for (auto& v : ch) v = detail::get_f64_le(is);
  }
  if (!is) throw DataError("trace file: truncated '" + path + "'");
  return f;
}

// ---- CSV artifacts ----------------------------------------------------------

/// Every CSV starts with a comment carrying the config hash and seed.
inline std::string csv_preamble(const std::string& config_hash_hex,
                                std::uint64_t seed) {
  return "# config=" + config_hash_hex + " seed=" + std::to_string(seed) + "\n";
}

inline std::string format_csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_spectrum_csv(const std::string& path, const SpectrumEstimate& est,
                               double reference, const std::string& preamble) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("csv: cannot open '" + path + "'");
  os << preamble << "frequency_hz,power_db\n";
  const std::vector<double> db = to_db(est, reference);
  for (std::size_t j = 0; j < est.frequency_hz.size(); ++j) {
    os << format_csv_double(est.frequency_hz[j]) << ',' << format_csv_double(db[j])
       << '\n';
  }
}

inline void write_variance_csv(const std::string& path, const VarianceReport& report,
                               const std::string& preamble) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("csv: cannot open '" + path + "'");
  os << preamble << "k,type,variance,std_error,db,pass\n";
  const long n = report.k_count();
  for (long k = 0; k < n; ++k) {
    for (NullifierType type : {NullifierType::X, NullifierType::P}) {
      const VarianceStat& s =
          type == NullifierType::X ? report.x_stats[k] : report.p_stats[k];
      os << k << ',' << to_char(type) << ',' << format_csv_double(s.mean_square)
         << ',' << format_csv_double(s.std_error) << ','
         << format_csv_double(squeezing_db(s.mean_square, 2.0)) << ','
         << (s.mean_square < 1.0 ? 1 : 0) << '\n';
    }
  }
}

inline void write_qumode_csv_header(std::ofstream& os, const std::string& preamble) {
  os << preamble << "rail,k,quadrature,value\n";
}

inline void append_qumode_rows(std::ofstream& os, Rail rail, Quadrature quad,
                               const std::vector<double>& values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    os << to_char(rail) << ',' << k << ',' << to_char(quad) << ','
       << format_csv_double(values[k]) << '\n';
  }
}

struct AutocorrResult {
  std::vector<double> full_rail_a, full_rail_b;  // C(m), m = 0 .. max_lag
  std::vector<double> pos_rail_a, pos_rail_b;    // positive-part weights
};

inline void write_autocorr_csv(const std::string& path, const AutocorrResult& r,
                               const std::string& preamble) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("csv: cannot open '" + path + "'");
  os << preamble << "m,rail,variant,c\n";
  auto rows = [&os](const std::vector<double>& c, char rail, const char* variant) {
    for (std::size_t m = 0; m < c.size(); ++m) {
      os << m << ',' << rail << ',' << variant << ',' << format_csv_double(c[m])
         << '\n';
    }
  };
  rows(r.full_rail_a, 'A', "full");
  rows(r.full_rail_b, 'B', "full");
  rows(r.pos_rail_a, 'A', "positive");
  rows(r.pos_rail_b, 'B', "positive");
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << text;
}

}  // namespace dualrail
