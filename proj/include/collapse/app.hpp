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

#ifndef COLLAPSE_APP_HPP_
#define COLLAPSE_APP_HPP_

// run(config): every artifact goes to output_dir; anything written by a run
// that then fails is removed again.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "collapse/acceptance.hpp"
#include "collapse/archive.hpp"
#include "collapse/config.hpp"
#include "collapse/run.hpp"

namespace collapse::app {

namespace fs = std::filesystem;

inline constexpr const char* kArchiveFile = "trajectories.cldn";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kDensityFile = "density.csv";
inline constexpr const char* kReportFile = "report.json";

struct RunOutcome {
  std::vector<fs::path> files;
  /// False only when a verify run had a failing criterion.
  bool all_pass = true;
};

namespace detail {

/// Tracks files created by a run and deletes them unless committed.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : files_) fs::remove(p, ec);
  }

  std::ofstream open(const char* name) {
    const fs::path p = dir_ / name;
    files_.push_back(p);
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io_failure, "cannot write " + p.string());
    return out;
  }

  void close(std::ofstream& out) {
    out.close();
    require(!out.fail(), ErrorCode::io_failure, "write failed in " + dir_.string());
  }

  std::vector<fs::path> commit() {
    committed_ = true;
    return files_;
  }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
  bool committed_ = false;
};

}  // namespace detail

/// Runs the verify suite; one line per criterion goes to `log`.
inline Json verify_report(const io::RunConfig& c, std::size_t workers, std::ostream* log,
                          bool& all_pass) {
  acceptance::Options opt;
  opt.scale = c.scale;
  opt.seed = *c.seed;
  opt.workers = workers;
  Json rows = Json::array();
  all_pass = true;
  for (int id : c.criteria) {
    const auto r = acceptance::run_criterion(id, opt);
    all_pass = all_pass && r.pass;
    if (log) {
      *log << "criterion " << id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.title << "  ("
           << r.seconds << " s)\n";
      log->flush();
    }
    rows.push_back({{"criterion", id}, {"title", r.title}, {"pass", r.pass},
                    {"artifact", r.artifact}});
  }
  Json report;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
  report["config_hash"] = hash;
  report["seed"] = *c.seed;
  report["scale"] = c.scale;
  report["all_pass"] = all_pass;
  report["criteria"] = std::move(rows);
  return report;
}

inline RunOutcome run(const io::RunConfig& c, std::size_t workers, std::ostream* log = nullptr) {
  c.validate();
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::io_failure,
          "cannot create output directory " + dir.string());

  detail::OutputSet out(dir);
  RunOutcome outcome;
  switch (c.model) {
    case io::Model::grw:
    case io::Model::diosi:
    case io::Model::hybrid: {
      auto archive = out.open(kArchiveFile);
      auto summary = out.open(kSummaryFile);
      auto density = out.open(kDensityFile);
      io::simulate(c, workers, archive, summary, density);
      out.close(archive);
      out.close(summary);
      out.close(density);
      break;
    }
    case io::Model::master: {
      auto summary = out.open(kSummaryFile);
      auto density = out.open(kDensityFile);
      io::run_master(c, summary, density);
      out.close(summary);
      out.close(density);
      break;
    }
    case io::Model::verify: {
      const Json report = verify_report(c, workers, log, outcome.all_pass);
      auto f = out.open(kReportFile);
      f << report.dump(2) << '\n';
      out.close(f);
      break;
    }
  }
  outcome.files = out.commit();
  return outcome;
}

/// Reads an archive file and writes the density CSV at `time` to `out_path`
/// (removed again if anything fails).
inline void export_density(const fs::path& archive_path, double time, const fs::path& out_path,
                           std::size_t stride = 1) {
  std::ifstream in(archive_path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io_failure, "cannot open " + archive_path.string());
  const auto archive = io::read_archive(in);
  std::ostringstream csv;
  io::export_density_csv(archive, time, csv, stride);
  detail::OutputSet files(out_path.parent_path().empty() ? fs::path(".") : out_path.parent_path());
  auto f = files.open(out_path.filename().string().c_str());
  f << csv.str();
  files.close(f);
  files.commit();
}

}  // namespace collapse::app

#endif  // COLLAPSE_APP_HPP_
