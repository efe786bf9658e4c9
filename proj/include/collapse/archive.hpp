// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLLAPSE_ARCHIVE_HPP_
#define COLLAPSE_ARCHIVE_HPP_

// Trajectory archive, format "CLDN1". All integers and floats little-endian.
//
//   header
//     char[8]  magic            "CLDN1\0\0\0"
//     u32      format_version   1
//     u64      config_hash      FNV-1a 64 of the canonical config text
//     u64      seed
//     u32      model            0 grw, 1 diosi, 2 hybrid
//     u64      n_points
//     f64      x_min, x_max
//     u64      config_length, then config_length bytes of canonical text
//     u64      n_sample_times, then f64 sample times
//     u64      header_checksum  FNV-1a 64 of every header byte above
//   u64        n_records
//   record (repeated, ordered by trajectory index)
//     u64 index, u64 seed, f64 weight, u8 boundary_flag
//     u64 n_flashes, then per flash f64 time, f64 center, f64 pre_collapse_norm2
//     u64 n_snapshots, then per snapshot
//       f64 time, f64 raw_norm2, u64 n_amplitudes, then (f32 re, f32 im) pairs
//
// Amplitudes are stored in single precision, so a record read back holds the
// rounded values; writing it again reproduces the same bytes.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "collapse/config.hpp"
#include "collapse/error.hpp"
#include "collapse/trajectory.hpp"

namespace collapse::io {

static_assert(std::endian::native == std::endian::little,
              "archive I/O assumes a little-endian host");

inline constexpr std::array<char, 8> kArchiveMagic{'C', 'L', 'D', 'N', '1', 0, 0, 0};
inline constexpr std::uint32_t kArchiveVersion = 1;

struct ArchiveHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  Model model = Model::grw;
  std::uint64_t n_points = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  std::string config_text;
  std::vector<double> sample_times;
};

struct TrajectoryArchive {
  ArchiveHeader header;
  RunConfig config;
  std::vector<TrajectoryRecord> records;
};

inline std::uint32_t model_code(Model m) {
  switch (m) {
    case Model::grw: return 0;
    case Model::diosi: return 1;
    case Model::hybrid: return 2;
    default: break;
  }
  throw Error(ErrorCode::invalid_parameter, "model " + to_string(m) + " has no trajectories");
}

inline ArchiveHeader make_header(const RunConfig& c) {
  ArchiveHeader h;
  h.config_text = c.canonical_text();
  h.config_hash = fnv1a64(h.config_text);
  h.seed = c.seed.value_or(0);
  h.model = c.model;
  h.n_points = c.n_points;
  h.x_min = c.x_min;
  h.x_max = c.x_max;
  h.sample_times = c.effective_sample_times();
  return h;
}

namespace detail {

class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}
  template <class T>
  void put(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  void bytes(std::string_view s) { out_.append(s); }

 private:
  std::string& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  template <class T>
  T get() {
    char b[sizeof(T)];
    read(b, sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
  std::string bytes(std::uint64_t n) {
    if (n > (1ull << 30)) throw Error(ErrorCode::archive_corrupt, "implausible field length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  /// Bytes consumed so far, for the header checksum.
  const std::string& consumed() const { return consumed_; }
  void clear_consumed() { consumed_.clear(); }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void read(char* dst, std::size_t n) {
    if (!in_.read(dst, static_cast<std::streamsize>(n)))
      throw Error(ErrorCode::archive_corrupt, "archive truncated");
    consumed_.append(dst, n);
  }
  std::istream& in_;
  std::string consumed_;
};

inline std::uint64_t checked_count(std::uint64_t n, std::uint64_t limit, const char* what) {
  if (n > limit) throw Error(ErrorCode::archive_corrupt, std::string("implausible ") + what);
  return n;
}

}  // namespace detail

inline std::string encode_header(const ArchiveHeader& h) {
  std::string out;
  detail::Writer w(out);
  w.bytes(std::string_view(kArchiveMagic.data(), kArchiveMagic.size()));
  w.put<std::uint32_t>(kArchiveVersion);
  w.put<std::uint64_t>(h.config_hash);
  w.put<std::uint64_t>(h.seed);
  w.put<std::uint32_t>(model_code(h.model));
  w.put<std::uint64_t>(h.n_points);
  w.put<double>(h.x_min);
  w.put<double>(h.x_max);
  w.put<std::uint64_t>(h.config_text.size());
  w.bytes(h.config_text);
  w.put<std::uint64_t>(h.sample_times.size());
  for (double t : h.sample_times) w.put<double>(t);
  w.put<std::uint64_t>(fnv1a64(out));
  return out;
}

inline std::string encode_record(const TrajectoryRecord& r) {
  std::string out;
  detail::Writer w(out);
  w.put<std::uint64_t>(r.index);
  w.put<std::uint64_t>(r.seed);
  w.put<double>(r.weight);
  w.put<std::uint8_t>(r.boundary_flag ? 1 : 0);
  w.put<std::uint64_t>(r.flashes.size());
  for (const auto& f : r.flashes) {
    w.put<double>(f.time);
    w.put<double>(f.center);
    w.put<double>(f.pre_collapse_norm2);
  }
  w.put<std::uint64_t>(r.snapshots.size());
  for (const auto& s : r.snapshots) {
    w.put<double>(s.time);
    w.put<double>(s.raw_norm2);
    w.put<std::uint64_t>(s.state.size());
    for (const auto& a : s.state.amplitudes()) {
      w.put<float>(static_cast<float>(a.real()));
      w.put<float>(static_cast<float>(a.imag()));
    }
  }
  return out;
}

/// Streams an archive: header, record count, then records in the given order.
class ArchiveWriter {
 public:
  ArchiveWriter(std::ostream& out, const RunConfig& config, std::uint64_t n_records)
      : out_(out), remaining_(n_records) {
    write(encode_header(make_header(config)));
    std::string count;
    detail::Writer(count).put<std::uint64_t>(n_records);
    write(count);
  }

  void append(const TrajectoryRecord& r) {
    require(remaining_ > 0, ErrorCode::io_failure, "more records than announced");
    --remaining_;
    write(encode_record(r));
  }

  void finish() {
    require(remaining_ == 0, ErrorCode::io_failure, "fewer records than announced");
    out_.flush();
    require(static_cast<bool>(out_), ErrorCode::io_failure, "archive write failed");
  }

 private:
  void write(const std::string& bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out_), ErrorCode::io_failure, "archive write failed");
  }
  std::ostream& out_;
  std::uint64_t remaining_;
};

inline ModelParams params_for(const RunConfig& c) {
  switch (c.model) {
    case Model::grw: return c.grw_params();
    case Model::diosi: return c.diosi_params();
    case Model::hybrid: return c.hybrid_params();
    default: break;
  }
  throw Error(ErrorCode::archive_corrupt, "archive model has no trajectories");
}

/// Reads and validates an archive. Any header inconsistency (magic, version,
/// checksum, config hash, grid or schedule disagreeing with the stored
/// config) fails with archive-corrupt.
inline TrajectoryArchive read_archive(std::istream& in) {
  detail::Reader r(in);
  TrajectoryArchive a;
  ArchiveHeader& h = a.header;
  const std::string magic = r.bytes(kArchiveMagic.size());
  if (magic != std::string(kArchiveMagic.data(), kArchiveMagic.size()))
    throw Error(ErrorCode::archive_corrupt, "not a CLDN1 archive");
  if (r.get<std::uint32_t>() != kArchiveVersion)
    throw Error(ErrorCode::archive_corrupt, "unsupported archive version");
  h.config_hash = r.get<std::uint64_t>();
  h.seed = r.get<std::uint64_t>();
  const auto code = r.get<std::uint32_t>();
  if (code > 2) throw Error(ErrorCode::archive_corrupt, "unknown model code");
  h.model = static_cast<Model>(code);
  h.n_points = detail::checked_count(r.get<std::uint64_t>(), 1ull << 24, "grid size");
  h.x_min = r.get<double>();
  h.x_max = r.get<double>();
  h.config_text = r.bytes(r.get<std::uint64_t>());
  const auto n_times = detail::checked_count(r.get<std::uint64_t>(), 1ull << 20, "sample count");
  for (std::uint64_t i = 0; i < n_times; ++i) h.sample_times.push_back(r.get<double>());
  const std::uint64_t expected_checksum = fnv1a64(r.consumed());
  if (r.get<std::uint64_t>() != expected_checksum)
    throw Error(ErrorCode::archive_corrupt, "header checksum mismatch");

  try {
    a.config = parse_config(h.config_text);
    a.config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::archive_corrupt, std::string("stored config invalid: ") + e.what());
  }
  const ArchiveHeader expected = make_header(a.config);
  if (fnv1a64(h.config_text) != h.config_hash || expected.config_hash != h.config_hash)
    throw Error(ErrorCode::archive_corrupt, "config hash does not match the stored config");
  if (expected.seed != h.seed || expected.model != h.model || expected.n_points != h.n_points ||
      expected.x_min != h.x_min || expected.x_max != h.x_max ||
      expected.sample_times != h.sample_times)
    throw Error(ErrorCode::archive_corrupt, "header fields disagree with the stored config");

  const Grid grid = a.config.grid();
  const ModelParams params = params_for(a.config);
  const auto n_records = detail::checked_count(r.get<std::uint64_t>(), 1ull << 40, "record count");
  for (std::uint64_t k = 0; k < n_records; ++k) {
    TrajectoryRecord rec;
    rec.params = params;
    rec.index = r.get<std::uint64_t>();
    rec.seed = r.get<std::uint64_t>();
    rec.weight = r.get<double>();
    rec.boundary_flag = r.get<std::uint8_t>() != 0;
    const auto nf = detail::checked_count(r.get<std::uint64_t>(), 1ull << 32, "flash count");
    for (std::uint64_t f = 0; f < nf; ++f) {
      FlashEvent e;
      e.time = r.get<double>();
      e.center = r.get<double>();
      e.pre_collapse_norm2 = r.get<double>();
      rec.flashes.push_back(e);
    }
    const auto ns = detail::checked_count(r.get<std::uint64_t>(), n_times, "snapshot count");
    for (std::uint64_t s = 0; s < ns; ++s) {
      const double time = r.get<double>();
      const double raw = r.get<double>();
      const auto na = r.get<std::uint64_t>();
      if (na != h.n_points) throw Error(ErrorCode::archive_corrupt, "snapshot size mismatch");
      Amplitudes amps(na);
      for (auto& v : amps) {
        const float re = r.get<float>();
        const float im = r.get<float>();
        v = {re, im};
      }
      rec.snapshots.push_back({time, raw, WaveFunction(grid, std::move(amps), StateLabel::raw)});
    }
    r.clear_consumed();
    a.records.push_back(std::move(rec));
  }
  if (!r.at_end()) throw Error(ErrorCode::archive_corrupt, "trailing bytes after last record");
  return a;
}

}  // namespace collapse::io

#endif  // COLLAPSE_ARCHIVE_HPP_
